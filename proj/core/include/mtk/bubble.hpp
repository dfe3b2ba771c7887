#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "mtk/mesh.hpp"

namespace mtk::bubble {

/// Standard profile T0(r) = log(1 + r^2), which satisfies the positive-
/// Laplacian equation -Delta T0 = -4 e^{-2 T0} in the classical sign
/// convention Delta = d^2/dr^2 + (1/r) d/dr used throughout this module.
double t0(double r);

/// Auxiliary integral I(r) = int_1^{1+r^2} log(t)/(1-t) dt  (<= 0).
double aux_integral(double r);

/// Second-order correction profile
///   S0 = -T0 + 2 r^2/(1+r^2) - T0^2/2 + ((1-r^2)/(1+r^2)) I(r),
/// the solution of  Delta S0 + 8 e^{-2 T0} S0 + 4 e^{-2 T0} (T0^2 - T0) = 0
/// with S0(0) = S0'(0) = 0. Grows like -log r^2 + B0 as r -> infinity.
double s0(double r);

/// Exact asymptotic constants: total mass A0 = int 4 e^{-2T0} = 4 pi and
/// additive constant B0 = pi^2/6 + 2 in S0 = -log r^2 + B0 + O(log^2 r / r^2).
inline constexpr double a0 = 4.0 * std::numbers::pi;
inline constexpr double b0 = std::numbers::pi * std::numbers::pi / 6.0 + 2.0;

/// Plain (weighted=false) mass int_{R^2} 4 e^{-2T0} or weighted mass
/// int 4 T0 e^{-2T0}; both equal 4 pi. Numerically integrated up to r_trunc
/// with the analytic tail bound added back, so the truncation radius only
/// enters through the tail model.
double bubble_mass(bool weighted, double r_trunc = 1e4);

/// Defect of S0 in its radial ODE at radius r, via five-point finite
/// differences on s0 (step 1e-3, shrunk near the origin). Near machine
/// noise when the sign convention above is honoured.
double correction_ode_residual(double r);

/// Asymptotic constants recovered from the far field of s0 itself:
/// a0 from the log-slope over r in {500, 1000}, b0 (with the leading
/// log^2(r)/r^2 correction coefficient) from a least-squares fit over
/// r in {250, 500, 1000}.
struct AsymptoticFit {
    double a0 = 0.0;
    double b0 = 0.0;
    double correction = 0.0; // fitted coefficient of log^2(r)/r^2
};
AsymptoticFit fit_asymptotic_constants();

/// Log-spaced table of the profiles plus self-checks.
struct BubbleTable {
    std::vector<double> r, t0, s0, aux, ode_residual;
    double a0_exact = 0.0, b0_exact = 0.0;
    AsymptoticFit fit;
    double max_ode_residual = 0.0; // over the probe radii {0.5, 2, 10}
    double mass_plain = 0.0, mass_weighted = 0.0;
};
BubbleTable tabulate(double r_min, double r_max, std::size_t count);

/// Concentration rescalings T0(|z - center| / mu), S0(|z - center| / mu).
double rescale_t(mesh::Point center, double mu, mesh::Point z);
double rescale_s(mesh::Point center, double mu, mesh::Point z);

} // namespace mtk::bubble
