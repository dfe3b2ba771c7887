#include "mtk/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mtk/errors.hpp"

namespace mtk::spectral {

namespace {

// ||L v - lambda v||_M / ||v||_M restricted to interior nodes.
double eigen_residual(const mesh::DomainGrid& g, const std::vector<double>& v, double lambda) {
    std::vector<double> lv = mesh::laplacian_apply(g, v);
    double num = 0.0, den = 0.0;
    for (std::int32_t idx : g.interior) {
        const double r = lv[static_cast<std::size_t>(idx)] - lambda * v[static_cast<std::size_t>(idx)];
        const double w = g.w[static_cast<std::size_t>(idx)];
        num += w * r * r;
        den += w * v[static_cast<std::size_t>(idx)] * v[static_cast<std::size_t>(idx)];
    }
    return std::sqrt(num / den);
}

} // namespace

EigenPair first_eigenpair(mesh::GridPtr grid, double tol, double p, int max_iters) {
    if (!grid) throw std::invalid_argument("first_eigenpair: null grid");
    if (!(tol > 0.0)) throw std::invalid_argument("first_eigenpair: tol must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("first_eigenpair: p must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("first_eigenpair: max_iters must be >= 1");
    const mesh::DomainGrid& g = *grid;
    const std::size_t n = g.size();
    if (g.interior.empty()) throw std::invalid_argument("first_eigenpair: grid has no interior nodes");

    // Start from the interior indicator: nonzero overlap with the ground state.
    std::vector<double> v(n, 0.0);
    for (std::int32_t idx : g.interior) v[static_cast<std::size_t>(idx)] = 1.0;

    const double inner_tol = tol * 0.1;
    double lambda = 0.0, lambda_prev = -1.0;
    int it = 0;
    for (; it < max_iters; ++it) {
        // y solves K y = M v, i.e. y = L^{-1} v.
        std::vector<double> mv(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) mv[i] = g.w[i] * v[i];
        std::vector<double> y = mesh::solve_stiffness(g, mv, inner_tol);

        // Rayleigh quotient at y without an extra stiffness apply:
        // (y^T K y) / (y^T M y) = (y^T M v) / (y^T M y).
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += g.w[i] * y[i] * v[i];
            den += g.w[i] * y[i] * y[i];
        }
        if (!(den > 0.0)) throw NumericError("spectral", "inverse iteration collapsed to zero");
        lambda = num / den;

        const double nrm = std::sqrt(den);
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / nrm;

        if (lambda_prev > 0.0 && std::abs(lambda - lambda_prev) <= tol * std::abs(lambda)) {
            ++it;
            break;
        }
        lambda_prev = lambda;
    }
    if (it >= max_iters && std::abs(lambda - lambda_prev) > tol * std::abs(lambda))
        throw NumericError("spectral",
                           "inverse iteration did not converge in " + std::to_string(max_iters) +
                               " iterations (last lambda " + std::to_string(lambda) + ")");

    EigenPair e;
    e.grid = grid;
    e.lambda = lambda;
    e.v = std::move(v);
    e.iterations = it;
    eigen_normalize(e, p);
    e.residual = eigen_residual(g, e.v, e.lambda);
    return e;
}

void eigen_normalize(EigenPair& e, double p) {
    if (!e.grid) throw std::invalid_argument("eigen_normalize: empty eigenpair");
    if (!(p >= 1.0)) throw std::invalid_argument("eigen_normalize: p must be >= 1");
    const mesh::DomainGrid& g = *e.grid;
    // The ground state has one sign; fix it positive via the mean.
    double mean = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) mean += g.w[i] * e.v[i];
    const double s = (mean < 0.0) ? -1.0 : 1.0;
    const double nrm = mesh::lp_norm(g, e.v, p);
    if (!(nrm > 0.0)) throw NumericError("spectral", "cannot normalize the zero field");
    for (double& x : e.v) x = s * x / nrm;
    e.p = p;
}

} // namespace mtk::spectral
