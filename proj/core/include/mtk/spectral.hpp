#pragma once

#include <vector>

#include "mtk/mesh.hpp"

namespace mtk::spectral {

/// First Dirichlet eigenpair of the positive Laplacian: L v = lambda v,
/// v > 0 inside, normalized so the quadrature p-norm of v is 1.
struct EigenPair {
    mesh::GridPtr grid;
    double lambda = 0.0;
    std::vector<double> v;
    double p = 2.0;       // normalization exponent in force
    double residual = 0.0; // ||L v - lambda v||_2 / ||v||_2 at return
    int iterations = 0;
};

/// Inverse power iteration with inner solves at tol/10. Stops when the
/// Rayleigh quotient is stationary to a relative tol. Throws NumericError
/// if the iteration cap is hit.
EigenPair first_eigenpair(mesh::GridPtr grid, double tol = 1e-10, double p = 2.0,
                          int max_iters = 400);

/// Rescale (and sign-fix) so that the quadrature p-norm is 1.
void eigen_normalize(EigenPair& e, double p);

} // namespace mtk::spectral
