#include "mtk/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mtk/errors.hpp"

namespace mtk::functional {

namespace {

constexpr double kPi = std::numbers::pi;

void check_admissible(const mesh::DomainGrid& g, const std::vector<double>& u, double alpha) {
    if (u.size() != g.size()) throw std::invalid_argument("field size does not match the grid");
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g.bnd.empty() && g.bnd[i] && u[i] != 0.0)
            throw std::invalid_argument("field must vanish on boundary nodes");
}

} // namespace

double evaluate(const mesh::DomainGrid& g, const std::vector<double>& u, double alpha,
                double exp_cap) {
    check_admissible(g, u, alpha);
    const double l2 = mesh::l2_norm_sq(g, u);
    const double beta = 4.0 * kPi * (1.0 + alpha * l2);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double ex = beta * u[i] * u[i];
        if (ex > exp_cap) throw NumericError("functional", "exponent overflow (cap hit)");
        total += g.w[i] * std::exp(ex);
    }
    return total;
}

std::vector<double> h1_gradient(const mesh::DomainGrid& g, const std::vector<double>& u,
                                double alpha, double solver_tol, double exp_cap) {
    check_admissible(g, u, alpha);
    const std::size_t n = g.size();
    const double l2 = mesh::l2_norm_sq(g, u);
    const double beta = 4.0 * kPi * (1.0 + alpha * l2);
    std::vector<double> e(n, 0.0);
    double c = 0.0; // int u^2 e^{beta u^2}
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = beta * u[i] * u[i];
        if (ex > exp_cap) throw NumericError("functional", "exponent overflow (cap hit)");
        e[i] = std::exp(ex);
        c += g.w[i] * u[i] * u[i] * e[i];
    }
    std::vector<double> df(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        df[i] = 8.0 * kPi * u[i] * (1.0 + alpha * l2) * e[i] + 8.0 * kPi * alpha * c * u[i];
    return mesh::solve_poisson(g, df, solver_tol);
}

ExtremalCandidate maximize(mesh::GridPtr grid, double alpha, const std::vector<double>& start,
                           const AscentOptions& opt) {
    if (!grid) throw std::invalid_argument("maximize: null grid");
    const mesh::DomainGrid& g = *grid;
    check_admissible(g, start, alpha);
    if (!(opt.tol > 0.0)) throw std::invalid_argument("maximize: tol must be positive");
    if (opt.max_iters < 1) throw std::invalid_argument("maximize: max_iters must be >= 1");
    const std::size_t n = g.size();

    std::vector<double> u = start;
    {
        const double en = mesh::dirichlet_energy(g, u);
        if (!(en > 0.0)) throw std::invalid_argument("maximize: start field has no energy");
        const double s = 1.0 / std::sqrt(en);
        for (double& x : u) x *= s;
    }
    double val = evaluate(g, u, alpha, opt.exp_cap);

    double step = opt.step0;
    double pn = 0.0;
    int it = 0;
    bool converged = false;
    std::vector<double> trial(n);
    for (; it < opt.max_iters; ++it) {
        std::vector<double> grad = h1_gradient(g, u, alpha, opt.solver_tol, opt.exp_cap);
        // Project onto the tangent space of the constraint sphere.
        const double ug = mesh::h1_inner(g, u, grad);
        for (std::size_t i = 0; i < n; ++i) grad[i] -= ug * u[i];
        pn = std::sqrt(std::max(mesh::dirichlet_energy(g, grad), 0.0));
        if (pn < opt.tol) {
            converged = true;
            break;
        }
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * grad[i];
            const double en = mesh::dirichlet_energy(g, trial);
            const double s = 1.0 / std::sqrt(en);
            for (double& x : trial) x *= s;
            double tval;
            try {
                tval = evaluate(g, trial, alpha, opt.exp_cap);
            } catch (const NumericError&) {
                step *= 0.5; // overflowing trial counts as a rejected step
                continue;
            }
            if (tval >= val) {
                u.swap(trial);
                val = tval;
                step *= 1.8;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // stalled at numerical stationarity
    }

    ExtremalCandidate c;
    c.grid = grid;
    c.alpha = alpha;
    c.value = val;
    c.iterations = it;
    c.converged = converged;
    c.grad_norm = pn;
    c.l2sq = mesh::l2_norm_sq(g, u);
    c.beta = 4.0 * kPi * (1.0 + alpha * c.l2sq);
    c.a_coeff = alpha / (1.0 + 2.0 * alpha * c.l2sq);
    double weighted = 0.0; // int u^2 e^{beta u^2}
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = c.beta * u[i] * u[i];
        if (ex > opt.exp_cap) throw NumericError("functional", "exponent overflow (cap hit)");
        weighted += g.w[i] * u[i] * u[i] * std::exp(ex);
    }
    c.multiplier = (1.0 - c.a_coeff * c.l2sq) / (2.0 * c.beta * weighted);
    c.lambda_big = 2.0 * c.beta * c.multiplier;
    std::size_t arg = 0;
    double mx = u.empty() ? 0.0 : u[0], mn = mx;
    for (std::size_t i = 0; i < n; ++i) {
        if (u[i] > mx) {
            mx = u[i];
            arg = i;
        }
        mn = std::min(mn, u[i]);
    }
    c.peak = mx;
    c.min_u = mn;
    c.peak_location = {g.px[arg], g.py[arg]};
    c.u = std::move(u);
    c.el_resid = el_residual(c);
    return c;
}

double el_residual(const ExtremalCandidate& c) {
    if (!c.grid) throw std::invalid_argument("el_residual: empty candidate");
    const mesh::DomainGrid& g = *c.grid;
    if (c.u.size() != g.size()) throw std::invalid_argument("el_residual: field/grid mismatch");
    bool all_zero = true;
    for (double x : c.u)
        if (x != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) return 0.0;
    const std::vector<double> lu = mesh::laplacian_apply(g, c.u);
    double num = 0.0, den = 0.0;
    for (std::int32_t idx : g.interior) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const double ex = c.beta * c.u[i] * c.u[i];
        if (ex > 700.0) throw NumericError("functional", "exponent overflow (cap hit)");
        const double rhs = c.a_coeff * c.u[i] + c.lambda_big * c.u[i] * std::exp(ex);
        const double r = lu[i] - rhs;
        num += g.w[i] * r * r;
        den += g.w[i] * lu[i] * lu[i];
    }
    return std::sqrt(num / den);
}

} // namespace mtk::functional
