#pragma once

#include <string>
#include <vector>

#include "mtk/functional.hpp"
#include "mtk/greens.hpp"
#include "mtk/mesh.hpp"
#include "mtk/spectral.hpp"

namespace mtk::diagnostics {

/// Multiplier closed form and its expansion in the rescaled variables
/// v = sqrt(beta) u, l2v = int v^2:
///   closed = 2 pi (1 + sqrt(1 + alpha l2v / pi))   (root of b^2 = 4 pi b + 4 pi alpha l2v),
///   series = 4 pi (1 + alpha l2v / 4 pi - (alpha l2v)^2 / 8 pi^2),
/// the two-term expansion carried by the asymptotic theory. Their gap is
///   closed - series = (alpha l2v)^2/(4 pi) + (alpha l2v)^3/(8 pi^2) + O(l2v^4).
struct BetaForms {
    double closed = 0.0;
    double series = 0.0;
    double discrepancy = 0.0; // closed - series
    double quad_resid = 0.0;  // |closed^2 - 4 pi closed - 4 pi alpha l2v| / closed^2
};
BetaForms beta_closed_form(double alpha, double l2v);

/// Relative defect of the energy identity
///   ||grad v||^2 = a int v^2 + Lambda int v^2 e^{v^2},
/// which is exact (to solver precision) at constrained critical points.
double energy_identity_residual(const mesh::DomainGrid& g, const std::vector<double>& v,
                                double a_coeff, double lambda_big, double exp_cap = 700.0);

/// Dirichlet energy split at the truncation v~ = min(v, (1-delta') gamma)
/// inside the ball B(center, r_cut), v~ = v outside:
///   inner = ||grad (v - v~)||^2, outer = ||grad v~||^2,
///   cross = (grad v~, grad (v - v~)),   defect = |cross|.
struct EnergySplit {
    double inner = 0.0;
    double outer = 0.0;
    double cross = 0.0;
    double defect = 0.0;
    double threshold = 0.0;
    double r_cut = 0.0;
};
EnergySplit energy_split(const mesh::DomainGrid& g, const std::vector<double>& v, double gamma,
                         mesh::Point center, double r_cut, double delta_prime);

/// Everything the concentration analysis reports for one candidate: the
/// Euler-Lagrange data, the rescaled variables, the multiplier forms and
/// their measured gap, the blow-up scales, the energy split and the
/// pointwise-law fit. Field order here is the CSV column order.
struct LedgerRow {
    double alpha = 0.0, lambda1 = 0.0, alpha_frac = 0.0;
    double value = 0.0, l2u = 0.0;
    double beta = 0.0, a_coeff = 0.0, multiplier = 0.0, lambda_big = 0.0;
    double gamma_u = 0.0, gamma_v = 0.0;
    double x_alpha_x = 0.0, x_alpha_y = 0.0;
    double l2v = 0.0, lp_v = 0.0;
    double mass = 0.0, mass_gap = 0.0;
    double beta_closed = 0.0, beta_series = 0.0, beta_discrepancy = 0.0, beta_quad_resid = 0.0;
    double discrepancy_coeff = 0.0, discrepancy_pred = 0.0;
    double a_series = 0.0;
    double energy_resid = 0.0;
    double mu = 0.0, delta = 0.0, r_delta = 0.0, r_cut = 0.0;
    double clamped = 0.0, delta_prime = 0.0;
    double split_inner = 0.0, split_outer = 0.0, split_cross = 0.0, split_defect = 0.0;
    double l2_ratio = 0.0;
    double law_slope = 0.0, law_intercept = 0.0, law_rms = 0.0, law_n = 0.0;
    double lambda_gamma2 = 0.0, gamma2_l2v = 0.0;
    double min_u = 0.0, el_resid = 0.0, grad_norm = 0.0;
    double iterations = 0.0, converged = 0.0;
};

/// Assemble the ledger for a candidate against the first eigenpair of its
/// grid. delta sets the concentration window, delta_prime the truncation
/// level; the window is clamped to stay inside the domain when needed.
LedgerRow expansion_ledger(const functional::ExtremalCandidate& cand,
                           const spectral::EigenPair& eig, double delta, double delta_prime);

std::string ledger_csv_header();
std::string ledger_csv_row(const LedgerRow& row);
std::string ledger_text(const LedgerRow& row);

} // namespace mtk::diagnostics
