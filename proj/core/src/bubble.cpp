#include "mtk/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "quadrature.hpp"

namespace mtk::bubble {

namespace {

constexpr double kPi = std::numbers::pi;

// Integrand of aux_integral: removable singularity at t = 1.
double aux_integrand(double t) {
    const double d = t - 1.0;
    if (std::abs(d) < 1e-6) {
        // log(1+d)/(-d) expanded; keeps full precision through the node t = 1.
        return -(1.0 - d / 2.0 + d * d / 3.0 - d * d * d / 4.0);
    }
    return std::log(t) / (1.0 - t);
}

// Numeric part of the mass integrals on [0, r_trunc], split into panels so
// the adaptive rule never straddles widely different scales.
double mass_numeric(bool weighted, double r_trunc) {
    auto integrand = [weighted](double r) {
        const double e = std::exp(-2.0 * t0(r));
        const double f = weighted ? t0(r) : 1.0;
        return 2.0 * kPi * r * 4.0 * e * f;
    };
    const double cuts[] = {0.0, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < sizeof(cuts) / sizeof(cuts[0]); ++i) {
        const double a = std::min(cuts[i], r_trunc);
        const double b = std::min(cuts[i + 1], r_trunc);
        if (b <= a) break;
        total += detail::gk_adaptive(integrand, a, b, 1e-15, 1e-13);
    }
    if (r_trunc > 1e6)
        total += detail::gk_adaptive(integrand, 1e6, r_trunc, 1e-15, 1e-13);
    return total;
}

} // namespace

double t0(double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("t0: radius must be >= 0");
    return std::log1p(r * r);
}

double aux_integral(double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("aux_integral: radius must be >= 0");
    if (r == 0.0) return 0.0;
    const double upper = 1.0 + r * r;
    // Split at powers of ten: the integrand decays like -log(t)/t.
    double total = 0.0;
    double a = 1.0;
    while (a < upper) {
        const double b = std::min(a * 10.0, upper);
        total += detail::gk_adaptive(aux_integrand, a, b, 1e-15, 5e-14);
        a = b;
    }
    return total;
}

double s0(double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("s0: radius must be >= 0");
    if (r == 0.0) return 0.0;
    const double r2 = r * r;
    const double t = std::log1p(r2);
    return -t + 2.0 * r2 / (1.0 + r2) - 0.5 * t * t +
           ((1.0 - r2) / (1.0 + r2)) * aux_integral(r);
}

double bubble_mass(bool weighted, double r_trunc) {
    if (!(r_trunc > 1.0)) throw std::invalid_argument("bubble_mass: r_trunc must exceed 1");
    const double R2 = 1.0 + r_trunc * r_trunc;
    // Analytic tails of 8 pi r e^{-2T0} (T0) beyond r_trunc.
    const double tail = weighted ? 4.0 * kPi * (std::log(R2) + 1.0) / R2
                                 : 4.0 * kPi / R2;
    return mass_numeric(weighted, r_trunc) + tail;
}

double correction_ode_residual(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("correction_ode_residual: radius must be positive");
    const double h = std::min(1e-3, 0.2 * r);
    const double fm2 = s0(r - 2.0 * h), fm1 = s0(r - h), f0 = s0(r);
    const double fp1 = s0(r + h), fp2 = s0(r + 2.0 * h);
    const double d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    const double d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    const double lap = d2 + d1 / r;
    const double e = std::exp(-2.0 * t0(r));
    const double t = t0(r);
    return lap + 8.0 * e * f0 + 4.0 * e * (t * t - t);
}

AsymptoticFit fit_asymptotic_constants() {
    AsymptoticFit fit;
    // a0 from the log-slope of s0 between r = 500 and r = 1000:
    // s0 ~ -(a0 / 2 pi) log r + const.
    const double s500 = s0(500.0), s1000 = s0(1000.0);
    fit.a0 = -2.0 * kPi * (s1000 - s500) / (std::log(1000.0) - std::log(500.0));

    // b0 via least squares on y = s0 + log r^2 against g = log^2(r) / r^2,
    // the leading correction to the constant.
    const double radii[] = {250.0, 500.0, 1000.0};
    double sg = 0.0, sgg = 0.0, sy = 0.0, sgy = 0.0;
    for (double r : radii) {
        const double y = s0(r) + 2.0 * std::log(r);
        const double lg = std::log(r);
        const double g = lg * lg / (r * r);
        sg += g;
        sgg += g * g;
        sy += y;
        sgy += g * y;
    }
    const double n = 3.0;
    const double det = n * sgg - sg * sg;
    fit.correction = (n * sgy - sg * sy) / det;
    fit.b0 = (sy - fit.correction * sg) / n;
    return fit;
}

BubbleTable tabulate(double r_min, double r_max, std::size_t count) {
    if (!(r_min > 0.0) || !(r_max > r_min))
        throw std::invalid_argument("tabulate: need 0 < r_min < r_max");
    if (count < 2) throw std::invalid_argument("tabulate: need at least two rows");
    BubbleTable tab;
    tab.r.resize(count);
    tab.t0.resize(count);
    tab.s0.resize(count);
    tab.aux.resize(count);
    tab.ode_residual.resize(count);
    const double lr0 = std::log(r_min), lr1 = std::log(r_max);
    for (std::size_t i = 0; i < count; ++i) {
        const double r = std::exp(lr0 + (lr1 - lr0) * static_cast<double>(i) /
                                            static_cast<double>(count - 1));
        tab.r[i] = r;
        tab.t0[i] = t0(r);
        tab.s0[i] = s0(r);
        tab.aux[i] = aux_integral(r);
        tab.ode_residual[i] = correction_ode_residual(r);
    }
    tab.a0_exact = a0;
    tab.b0_exact = b0;
    tab.fit = fit_asymptotic_constants();
    tab.max_ode_residual = 0.0;
    for (double r : {0.5, 2.0, 10.0})
        tab.max_ode_residual = std::max(tab.max_ode_residual, std::abs(correction_ode_residual(r)));
    tab.mass_plain = bubble_mass(false);
    tab.mass_weighted = bubble_mass(true);
    return tab;
}

double rescale_t(mesh::Point center, double mu, mesh::Point z) {
    if (!(mu > 0.0)) throw std::invalid_argument("rescale_t: mu must be positive");
    return t0(std::hypot(z.x - center.x, z.y - center.y) / mu);
}

double rescale_s(mesh::Point center, double mu, mesh::Point z) {
    if (!(mu > 0.0)) throw std::invalid_argument("rescale_s: mu must be positive");
    return s0(std::hypot(z.x - center.x, z.y - center.y) / mu);
}

} // namespace mtk::bubble
