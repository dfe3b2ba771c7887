#include "mtk/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mtk/errors.hpp"
#include "mtk/radial.hpp"

namespace mtk::diagnostics {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

BetaForms beta_closed_form(double alpha, double l2v) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("beta_closed_form: alpha must be >= 0");
    if (!(l2v >= 0.0)) throw std::invalid_argument("beta_closed_form: l2v must be >= 0");
    BetaForms f;
    const double x = alpha * l2v;
    f.closed = 2.0 * kPi * (1.0 + std::sqrt(1.0 + x / kPi));
    f.series = 4.0 * kPi * (1.0 + x / (4.0 * kPi) - x * x / (8.0 * kPi * kPi));
    f.discrepancy = f.closed - f.series;
    f.quad_resid = std::abs(f.closed * f.closed - 4.0 * kPi * f.closed - 4.0 * kPi * x) /
                   (f.closed * f.closed);
    return f;
}

double energy_identity_residual(const mesh::DomainGrid& g, const std::vector<double>& v,
                                double a_coeff, double lambda_big, double exp_cap) {
    if (v.size() != g.size())
        throw std::invalid_argument("energy_identity_residual: field/grid mismatch");
    const double energy = mesh::dirichlet_energy(g, v);
    if (!(energy > 0.0))
        throw std::invalid_argument("energy_identity_residual: zero-energy field");
    double i1 = 0.0, i2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double vv = v[i] * v[i];
        if (vv > exp_cap) throw NumericError("diagnostics", "exponent overflow (cap hit)");
        i1 += g.w[i] * vv;
        i2 += g.w[i] * vv * std::exp(vv);
    }
    return std::abs(energy - a_coeff * i1 - lambda_big * i2) / energy;
}

EnergySplit energy_split(const mesh::DomainGrid& g, const std::vector<double>& v, double gamma,
                         mesh::Point center, double r_cut, double delta_prime) {
    if (v.size() != g.size()) throw std::invalid_argument("energy_split: field/grid mismatch");
    if (!(gamma > 0.0)) throw std::invalid_argument("energy_split: gamma must be positive");
    if (!(r_cut > 0.0)) throw std::invalid_argument("energy_split: r_cut must be positive");
    if (!(delta_prime > 0.0 && delta_prime < 1.0))
        throw std::invalid_argument("energy_split: delta_prime must lie in (0, 1)");
    if (g.domain.signed_distance(center) > -r_cut * (1.0 - 1e-12))
        throw std::invalid_argument("energy_split: cut ball exits the domain");

    EnergySplit out;
    out.threshold = (1.0 - delta_prime) * gamma;
    out.r_cut = r_cut;
    const std::size_t n = g.size();
    std::vector<double> trunc(n), spike(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::hypot(g.px[i] - center.x, g.py[i] - center.y);
        const double t = (d <= r_cut) ? std::min(v[i], out.threshold) : v[i];
        trunc[i] = t;
        spike[i] = v[i] - t;
    }
    out.inner = mesh::dirichlet_energy(g, spike);
    out.outer = mesh::dirichlet_energy(g, trunc);
    out.cross = mesh::h1_inner(g, trunc, spike);
    out.defect = std::abs(out.cross);
    return out;
}

LedgerRow expansion_ledger(const functional::ExtremalCandidate& cand,
                           const spectral::EigenPair& eig, double delta, double delta_prime) {
    if (!cand.grid) throw std::invalid_argument("expansion_ledger: empty candidate");
    if (eig.grid != cand.grid)
        throw std::invalid_argument("expansion_ledger: candidate and eigenpair grids differ");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("expansion_ledger: delta must lie in (0, 1]");
    const mesh::DomainGrid& g = *cand.grid;

    LedgerRow row;
    row.alpha = cand.alpha;
    row.lambda1 = eig.lambda;
    row.alpha_frac = cand.alpha / eig.lambda;
    row.value = cand.value;
    row.l2u = cand.l2sq;
    row.beta = cand.beta;
    row.a_coeff = cand.a_coeff;
    row.multiplier = cand.multiplier;
    row.lambda_big = cand.lambda_big;
    row.gamma_u = cand.peak;
    row.x_alpha_x = cand.peak_location.x;
    row.x_alpha_y = cand.peak_location.y;

    // Rescaled variables v = sqrt(beta) u.
    const double sb = std::sqrt(cand.beta);
    std::vector<double> v(cand.u.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sb * cand.u[i];
    row.gamma_v = sb * cand.peak;
    row.l2v = cand.beta * cand.l2sq;
    row.lp_v = mesh::lp_norm(g, v, eig.p);

    double mass = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double vv = v[i] * v[i];
        if (vv > 700.0) throw NumericError("diagnostics", "exponent overflow (cap hit)");
        mass += g.w[i] * vv * std::exp(vv);
    }
    row.mass = cand.lambda_big * mass;
    row.mass_gap = row.mass - 4.0 * kPi;

    const BetaForms forms = beta_closed_form(cand.alpha, row.l2v);
    row.beta_closed = forms.closed;
    row.beta_series = forms.series;
    row.beta_discrepancy = forms.discrepancy;
    row.beta_quad_resid = forms.quad_resid;
    row.discrepancy_pred = cand.alpha * cand.alpha / (16.0 * kPi * kPi);
    row.discrepancy_coeff =
        (row.l2v > 0.0) ? forms.discrepancy / (4.0 * kPi * row.l2v * row.l2v) : 0.0;
    row.a_series = cand.alpha - cand.alpha * cand.alpha * row.l2v / (2.0 * kPi);

    row.energy_resid = energy_identity_residual(g, v, cand.a_coeff, cand.lambda_big);

    row.mu = radial::mu_from_scaling(cand.lambda_big, row.gamma_v);
    row.delta = delta;
    row.r_delta = radial::r_delta(row.gamma_v, row.mu, delta);
    const double to_bnd = -g.domain.signed_distance(cand.peak_location);
    row.r_cut = std::min(row.r_delta, 0.9 * to_bnd);
    row.clamped = (row.r_cut < row.r_delta) ? 1.0 : 0.0;
    row.delta_prime = delta_prime;

    const EnergySplit split =
        energy_split(g, v, row.gamma_v, cand.peak_location, row.r_cut, delta_prime);
    row.split_inner = split.inner;
    row.split_outer = split.outer;
    row.split_cross = split.cross;
    row.split_defect = split.defect;

    const double eig_l2 = mesh::l2_norm_sq(g, eig.v);
    row.l2_ratio = row.l2v / (row.lp_v * row.lp_v * eig_l2);

    const double r_excl = std::max(row.r_cut, 3.0 * g.h);
    const greens::LawFit fit =
        greens::pointwise_law_fit(g, v, eig.v, eig.p, row.gamma_v, cand.peak_location, r_excl);
    row.law_slope = fit.slope;
    row.law_intercept = fit.intercept;
    row.law_rms = fit.rms;
    row.law_n = static_cast<double>(fit.n);

    row.lambda_gamma2 = cand.lambda_big * row.gamma_v * row.gamma_v;
    row.gamma2_l2v = row.gamma_v * row.gamma_v * row.l2v;
    row.min_u = cand.min_u;
    row.el_resid = cand.el_resid;
    row.grad_norm = cand.grad_norm;
    row.iterations = static_cast<double>(cand.iterations);
    row.converged = cand.converged ? 1.0 : 0.0;
    return row;
}

namespace {

// One authoritative list keeps the header and the row in lockstep.
struct FieldRef {
    const char* name;
    double LedgerRow::* member;
};

const FieldRef kFields[] = {
    {"alpha", &LedgerRow::alpha},
    {"lambda1", &LedgerRow::lambda1},
    {"alpha_frac", &LedgerRow::alpha_frac},
    {"value", &LedgerRow::value},
    {"l2u", &LedgerRow::l2u},
    {"beta", &LedgerRow::beta},
    {"a_coeff", &LedgerRow::a_coeff},
    {"multiplier", &LedgerRow::multiplier},
    {"lambda_big", &LedgerRow::lambda_big},
    {"gamma_u", &LedgerRow::gamma_u},
    {"gamma_v", &LedgerRow::gamma_v},
    {"x_alpha_x", &LedgerRow::x_alpha_x},
    {"x_alpha_y", &LedgerRow::x_alpha_y},
    {"l2v", &LedgerRow::l2v},
    {"lp_v", &LedgerRow::lp_v},
    {"mass", &LedgerRow::mass},
    {"mass_gap", &LedgerRow::mass_gap},
    {"beta_closed", &LedgerRow::beta_closed},
    {"beta_series", &LedgerRow::beta_series},
    {"beta_discrepancy", &LedgerRow::beta_discrepancy},
    {"beta_quad_resid", &LedgerRow::beta_quad_resid},
    {"discrepancy_coeff", &LedgerRow::discrepancy_coeff},
    {"discrepancy_pred", &LedgerRow::discrepancy_pred},
    {"a_series", &LedgerRow::a_series},
    {"energy_resid", &LedgerRow::energy_resid},
    {"mu", &LedgerRow::mu},
    {"delta", &LedgerRow::delta},
    {"r_delta", &LedgerRow::r_delta},
    {"r_cut", &LedgerRow::r_cut},
    {"clamped", &LedgerRow::clamped},
    {"delta_prime", &LedgerRow::delta_prime},
    {"split_inner", &LedgerRow::split_inner},
    {"split_outer", &LedgerRow::split_outer},
    {"split_cross", &LedgerRow::split_cross},
    {"split_defect", &LedgerRow::split_defect},
    {"l2_ratio", &LedgerRow::l2_ratio},
    {"law_slope", &LedgerRow::law_slope},
    {"law_intercept", &LedgerRow::law_intercept},
    {"law_rms", &LedgerRow::law_rms},
    {"law_n", &LedgerRow::law_n},
    {"lambda_gamma2", &LedgerRow::lambda_gamma2},
    {"gamma2_l2v", &LedgerRow::gamma2_l2v},
    {"min_u", &LedgerRow::min_u},
    {"el_resid", &LedgerRow::el_resid},
    {"grad_norm", &LedgerRow::grad_norm},
    {"iterations", &LedgerRow::iterations},
    {"converged", &LedgerRow::converged},
};

} // namespace

std::string ledger_csv_header() {
    std::string out;
    bool first = true;
    for (const FieldRef& f : kFields) {
        if (!first) out += ',';
        out += f.name;
        first = false;
    }
    out += '\n';
    return out;
}

std::string ledger_csv_row(const LedgerRow& row) {
    std::string out;
    bool first = true;
    for (const FieldRef& f : kFields) {
        if (!first) out += ',';
        out += fmt(row.*(f.member));
        first = false;
    }
    out += '\n';
    return out;
}

std::string ledger_text(const LedgerRow& row) {
    std::ostringstream os;
    os << "candidate at alpha = " << fmt(row.alpha) << " (alpha/lambda1 = " << fmt(row.alpha_frac)
       << ", lambda1 = " << fmt(row.lambda1) << ")\n";
    os << "  value " << fmt(row.value) << ", peak " << fmt(row.gamma_u) << " at ("
       << fmt(row.x_alpha_x) << ", " << fmt(row.x_alpha_y) << "), iterations "
       << static_cast<long>(row.iterations) << (row.converged != 0.0 ? "" : " (not converged)")
       << "\n";
    os << "  multipliers: beta " << fmt(row.beta) << ", A " << fmt(row.a_coeff) << ", lambda "
       << fmt(row.multiplier) << ", Lambda " << fmt(row.lambda_big) << "\n";
    os << "  rescaled: gamma_v " << fmt(row.gamma_v) << ", int v^2 " << fmt(row.l2v)
       << ", mass " << fmt(row.mass) << " (gap " << fmt(row.mass_gap) << ")\n";
    os << "  multiplier forms: closed " << fmt(row.beta_closed) << ", series "
       << fmt(row.beta_series) << ", gap " << fmt(row.beta_discrepancy)
       << ", gap/(4 pi l2v^2) " << fmt(row.discrepancy_coeff) << " vs alpha^2/16pi^2 "
       << fmt(row.discrepancy_pred) << "\n";
    os << "  quadratic residual " << fmt(row.beta_quad_resid) << ", energy identity residual "
       << fmt(row.energy_resid) << ", EL residual " << fmt(row.el_resid) << "\n";
    os << "  scales: mu " << fmt(row.mu) << ", r_delta " << fmt(row.r_delta) << " (delta "
       << fmt(row.delta) << "), r_cut " << fmt(row.r_cut)
       << (row.clamped != 0.0 ? " [clamped]" : "") << "\n";
    os << "  energy split at (1 - " << fmt(row.delta_prime) << ") gamma_v: inner "
       << fmt(row.split_inner) << ", outer " << fmt(row.split_outer) << ", defect "
       << fmt(row.split_defect) << "\n";
    os << "  pointwise law: slope " << fmt(row.law_slope) << ", intercept "
       << fmt(row.law_intercept) << ", rms " << fmt(row.law_rms) << " over "
       << static_cast<long>(row.law_n) << " nodes\n";
    os << "  concentration: Lambda gamma_v^2 " << fmt(row.lambda_gamma2) << ", gamma_v^2 l2v "
       << fmt(row.gamma2_l2v) << ", min u " << fmt(row.min_u) << "\n";
    return os.str();
}

} // namespace mtk::diagnostics
