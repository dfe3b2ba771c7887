#pragma once

#include <cstddef>
#include <vector>

namespace mtk::radial {

/// Concentration scale mu defined through Lambda gamma^2 e^{gamma^2} mu^2 = 4,
/// evaluated in log space so large gamma cannot overflow.
double mu_from_scaling(double lambda, double gamma);

/// Inverse of mu_from_scaling: the Lambda that yields a given mu.
double lambda_from_scaling(double mu, double gamma);

/// Window radius r_delta = mu sqrt(e^{delta gamma^2} - 1), delta in (0, 1].
double r_delta(double gamma, double mu, double delta);

/// One accepted integrator step of the shot profile.
struct ShotSample {
    double r = 0.0;
    double b = 0.0;      // B(r)
    double db = 0.0;     // B'(r)
    double energy = 0.0; // Lambda int_{B(0,r)} B^2 e^{B^2}
};

enum class ShotEnd { ReachedRmax, CrossedZero };

/// Radial shot of  B'' + B'/r = -B (a + Lambda e^{B^2}),  B(0) = gamma,
/// B'(0) = 0, integrated from r_start = mu/10 after a series start
/// B = gamma - c2 r^2, c2 = gamma (a + Lambda e^{gamma^2}) / 4.
struct ShotProfile {
    double gamma = 0.0, a = 0.0, lambda = 0.0, mu = 0.0;
    double r_start = 0.0, r_end = 0.0;
    double series_c2 = 0.0;
    ShotEnd terminated = ShotEnd::ReachedRmax;
    std::vector<ShotSample> samples;

    /// Cubic Hermite interpolation between accepted steps; the series
    /// start below r_start. Throws std::out_of_range beyond r_end.
    double value(double r) const;
    double slope(double r) const;
    double energy(double r) const;
};

/// Adaptive Dormand-Prince integration until the first zero of B or r_max,
/// whichever comes first. Requires a <= 0.99 * j01^2 / r_max^2 so the
/// linear term alone cannot force a sign change inside the window.
ShotProfile shoot_bubble(double gamma, double a, double lambda, double r_max,
                         double tol = 1e-11);

/// Largest weighted deviation of B from the two-term and one-term bubble
/// expansions over a log-spaced sample of (0, r_delta]:
///   max |B - (gamma - T0/gamma [+ S0/gamma^3])| * gamma^5 / (1 + T0),
/// with T0, S0 evaluated at r/mu.
struct ExpansionReport {
    double delta = 0.0;
    double r_delta = 0.0;
    double max_scaled_error = 0.0;
    double max_scaled_error_ablated = 0.0;
    std::size_t samples = 0;
};
ExpansionReport compare_expansion(const ShotProfile& profile, double delta);

/// First zero of the Bessel function J0, squared: the first Dirichlet
/// eigenvalue of the unit disk.
inline constexpr double j01 = 2.404825557695773;
inline constexpr double disk_lambda1 = j01 * j01;

} // namespace mtk::radial
