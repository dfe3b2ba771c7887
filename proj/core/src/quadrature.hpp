#pragma once

#include <cmath>
#include <cstddef>

#include "mtk/errors.hpp"

namespace mtk::detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (symmetric half stored).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename F>
void gk15_panel(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kGK15Nodes[i]);
        fv[14 - i] = f(c + h * kGK15Nodes[i]);
    }
    fv[7] = f(c);
    double k = 0.0;
    for (int i = 0; i < 7; ++i) k += kGK15Weights[i] * (fv[i] + fv[14 - i]);
    k += kGK15Weights[7] * fv[7];
    // Gauss-7 uses the odd Kronrod nodes (indices 1,3,5) plus the centre.
    double g = kG7Weights[3] * fv[7];
    g += kG7Weights[0] * (fv[1] + fv[13]);
    g += kG7Weights[1] * (fv[3] + fv[11]);
    g += kG7Weights[2] * (fv[5] + fv[9]);
    kronrod = k * h;
    err = std::abs((k - g) * h);
}

/// Adaptive bisection driven by the Kronrod-Gauss error estimate. The
/// tolerance is split between halves, so the sum of accepted panel errors
/// stays below max(abs_tol, rel_tol * |integral|) to first order.
template <typename F>
double gk_adaptive(const F& f, double a, double b, double abs_tol, double rel_tol,
                   int max_depth = 52) {
    struct Frame {
        double a, b, tol;
        int depth;
    };
    // Explicit stack: worst-case depth bounded, so fixed storage suffices.
    Frame stack[64];
    int top = 0;
    double coarse, coarse_err;
    gk15_panel(f, a, b, coarse, coarse_err);
    const double tol0 = std::max(abs_tol, rel_tol * std::abs(coarse));
    stack[top++] = {a, b, tol0, 0};
    double total = 0.0;
    while (top > 0) {
        const Frame fr = stack[--top];
        double val, err;
        gk15_panel(f, fr.a, fr.b, val, err);
        const double floor_tol = std::abs(val) * 1e-16 + 1e-300;
        if (err <= std::max(fr.tol, floor_tol) || fr.depth >= max_depth) {
            total += val;
            continue;
        }
        if (top + 2 > 64) throw NumericError("quadrature", "adaptive stack overflow");
        const double m = 0.5 * (fr.a + fr.b);
        stack[top++] = {fr.a, m, 0.5 * fr.tol, fr.depth + 1};
        stack[top++] = {m, fr.b, 0.5 * fr.tol, fr.depth + 1};
    }
    return total;
}

} // namespace mtk::detail
