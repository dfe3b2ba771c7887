#pragma once

#include <vector>

#include "mtk/mesh.hpp"

namespace mtk::functional {

/// F_alpha(u) = int_Omega exp(4 pi u^2 (1 + alpha ||u||_2^2)) evaluated in
/// the grid quadrature. Requires alpha >= 0, u = 0 on boundary nodes, and
/// every exponent below exp_cap (NumericError otherwise).
double evaluate(const mesh::DomainGrid& g, const std::vector<double>& u, double alpha,
                double exp_cap = 700.0);

/// H^1 (Riesz) gradient of F_alpha: solves K G = M dF with
///   dF_i = 8 pi u_i (1 + alpha ||u||^2) e_i + 8 pi alpha (sum_j w_j u_j^2 e_j) u_i,
/// where e_i = exp(4 pi u_i^2 (1 + alpha ||u||^2)).
std::vector<double> h1_gradient(const mesh::DomainGrid& g, const std::vector<double>& u,
                                double alpha, double solver_tol = 1e-12,
                                double exp_cap = 700.0);

struct AscentOptions {
    double tol = 1e-9;        // projected-gradient energy norm at convergence
    int max_iters = 5000;
    double step0 = 0.1;
    double exp_cap = 700.0;
    double solver_tol = 1e-12;
};

/// A constrained critical point found by projected ascent, with the
/// Euler-Lagrange data extracted at it:
///   L u = A u + 2 beta lambda u e^{beta u^2},
///   beta = 4 pi (1 + alpha ||u||^2),  A = alpha / (1 + 2 alpha ||u||^2),
///   lambda = (1 - A ||u||^2) / (2 beta int u^2 e^{beta u^2}),  Lambda = 2 beta lambda.
struct ExtremalCandidate {
    mesh::GridPtr grid;
    std::vector<double> u;
    double alpha = 0.0;
    double value = 0.0;
    double l2sq = 0.0;     // ||u||_2^2
    double beta = 0.0;
    double a_coeff = 0.0;  // A above
    double multiplier = 0.0;
    double lambda_big = 0.0; // Lambda = 2 beta multiplier
    double peak = 0.0;       // max of u
    mesh::Point peak_location;
    double min_u = 0.0;
    double el_resid = 0.0;
    double grad_norm = 0.0; // projected gradient norm at exit
    int iterations = 0;
    bool converged = false;
};

/// Projected gradient ascent on the unit sphere of the Dirichlet energy,
/// started from `start` (renormalized internally; must not vanish).
/// Monotone: the functional value never decreases along accepted steps.
ExtremalCandidate maximize(mesh::GridPtr grid, double alpha, const std::vector<double>& start,
                           const AscentOptions& opt = {});

/// Relative Euler-Lagrange defect ||L u - A u - Lambda u e^{beta u^2}||_M
/// over ||L u||_M, on interior nodes.
double el_residual(const ExtremalCandidate& c);

} // namespace mtk::functional
