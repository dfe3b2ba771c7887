#include "mtk/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mtk/bubble.hpp"
#include "mtk/errors.hpp"

namespace mtk::radial {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExpCap = 700.0;

using State = std::array<double, 3>; // (B, B', energy)

struct Rhs {
    double a, lambda;
    State operator()(double r, const State& y) const {
        const double b2 = y[0] * y[0];
        if (b2 > kExpCap)
            throw NumericError("radial", "exponent overflow in e^{B^2} (cap 700)");
        const double e = std::exp(b2);
        State f;
        f[0] = y[1];
        f[1] = -y[1] / r - y[0] * (a + lambda * e);
        f[2] = 2.0 * kPi * r * lambda * b2 * e;
        return f;
    }
};

// Cubic Hermite on [r0, r1] from endpoint values and derivatives.
double hermite(double r0, double v0, double d0, double r1, double v1, double d1, double r) {
    const double h = r1 - r0;
    const double t = (r - r0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * h * d0 +
           (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * h * d1;
}

double hermite_slope(double r0, double v0, double d0, double r1, double v1, double d1, double r) {
    const double h = r1 - r0;
    const double t = (r - r0) / h;
    const double t2 = t * t;
    return ((6.0 * t2 - 6.0 * t) * v0 + (3.0 * t2 - 4.0 * t + 1.0) * h * d0 +
            (-6.0 * t2 + 6.0 * t) * v1 + (3.0 * t2 - 2.0 * t) * h * d1) /
           h;
}

// Locate the sample interval containing r (samples sorted by r).
std::size_t segment_of(const std::vector<ShotSample>& s, double r) {
    auto it = std::upper_bound(s.begin(), s.end(), r,
                               [](double x, const ShotSample& a) { return x < a.r; });
    std::size_t j = static_cast<std::size_t>(it - s.begin());
    if (j == 0) j = 1;
    if (j >= s.size()) j = s.size() - 1;
    return j;
}

} // namespace

double mu_from_scaling(double lambda, double gamma) {
    if (!(lambda > 0.0)) throw std::invalid_argument("mu_from_scaling: lambda must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("mu_from_scaling: gamma must be positive");
    const double lg = -0.5 * (std::log(lambda) + 2.0 * std::log(gamma) + gamma * gamma - std::log(4.0));
    if (std::abs(lg) > kExpCap) throw NumericError("radial", "mu_from_scaling overflows");
    return std::exp(lg);
}

double lambda_from_scaling(double mu, double gamma) {
    if (!(mu > 0.0)) throw std::invalid_argument("lambda_from_scaling: mu must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("lambda_from_scaling: gamma must be positive");
    const double lg = std::log(4.0) - 2.0 * std::log(mu) - 2.0 * std::log(gamma) - gamma * gamma;
    if (std::abs(lg) > kExpCap) throw NumericError("radial", "lambda_from_scaling overflows");
    return std::exp(lg);
}

double r_delta(double gamma, double mu, double delta) {
    if (!(gamma > 0.0)) throw std::invalid_argument("r_delta: gamma must be positive");
    if (!(mu > 0.0)) throw std::invalid_argument("r_delta: mu must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("r_delta: delta must lie in (0, 1]");
    const double x = delta * gamma * gamma;
    if (x <= 30.0) return mu * std::sqrt(std::expm1(x));
    // e^x dominates; stay in log space so mu e^{x/2} cannot overflow early.
    const double lg = 0.5 * x + std::log(mu);
    if (lg > kExpCap) throw NumericError("radial", "r_delta overflows");
    return std::exp(lg);
}

ShotProfile shoot_bubble(double gamma, double a, double lambda, double r_max, double tol) {
    if (!(gamma > 0.0)) throw std::invalid_argument("shoot_bubble: gamma must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("shoot_bubble: lambda must be positive");
    if (!(a >= 0.0)) throw std::invalid_argument("shoot_bubble: a must be >= 0");
    if (!(tol >= 1e-14 && tol <= 1e-3))
        throw std::invalid_argument("shoot_bubble: tol out of range [1e-14, 1e-3]");
    if (gamma * gamma > kExpCap)
        throw NumericError("radial", "exponent overflow in e^{gamma^2} (cap 700)");
    if (a > 0.0 && a > 0.99 * disk_lambda1 / (r_max * r_max))
        throw std::invalid_argument(
            "shoot_bubble: a too close to the first disk eigenvalue for this r_max");

    ShotProfile p;
    p.gamma = gamma;
    p.a = a;
    p.lambda = lambda;
    p.mu = mu_from_scaling(lambda, gamma);
    p.series_c2 = gamma * (a + lambda * std::exp(gamma * gamma)) / 4.0;
    p.r_start = 0.1 * p.mu;
    if (!(r_max > p.r_start))
        throw std::invalid_argument("shoot_bubble: r_max must exceed the series radius mu/10");

    const Rhs rhs{a, lambda};

    // Energy over the series region by 4-point Gauss-Legendre (exact enough:
    // the integrand is smooth and the region is a tenth of the core scale).
    const double gl_x[4] = {0.069431844202974, 0.330009478207572, 0.669990521792428,
                            0.930568155797026};
    const double gl_w[4] = {0.173927422568727, 0.326072577431273, 0.326072577431273,
                            0.173927422568727};
    double e0 = 0.0;
    for (int q = 0; q < 4; ++q) {
        const double r = p.r_start * gl_x[q];
        const double b = gamma - p.series_c2 * r * r;
        e0 += gl_w[q] * 2.0 * kPi * r * lambda * b * b * std::exp(b * b);
    }
    e0 *= p.r_start;

    State y{gamma - p.series_c2 * p.r_start * p.r_start, -2.0 * p.series_c2 * p.r_start, e0};
    double r = p.r_start;
    p.samples.push_back({r, y[0], y[1], y[2]});

    // Dormand-Prince 5(4) tableau.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double h = p.r_start / 16.0;
    State k1 = rhs(r, y);
    long steps = 0;
    bool crossed = false;
    while (r < r_max) {
        if (++steps > 2000000) throw NumericError("radial", "step limit exceeded in shoot_bubble");
        if (r + h > r_max) h = r_max - r;
        if (h <= r_max * 1e-16) {
            r = r_max;
            break;
        }

        auto stage = [&](double frac, const State& incr) {
            State s;
            for (int i = 0; i < 3; ++i) s[i] = y[i] + h * incr[i];
            return rhs(r + frac * h, s);
        };
        State t;
        for (int i = 0; i < 3; ++i) t[i] = a21 * k1[i];
        const State k2 = stage(c2, t);
        for (int i = 0; i < 3; ++i) t[i] = a31 * k1[i] + a32 * k2[i];
        const State k3 = stage(c3, t);
        for (int i = 0; i < 3; ++i) t[i] = a41 * k1[i] + a42 * k2[i] + a43 * k3[i];
        const State k4 = stage(c4, t);
        for (int i = 0; i < 3; ++i)
            t[i] = a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
        const State k5 = stage(c5, t);
        for (int i = 0; i < 3; ++i)
            t[i] = a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
        const State k6 = stage(1.0, t);
        State y_new;
        for (int i = 0; i < 3; ++i)
            y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const State k7 = rhs(r + h, y_new);

        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / 3.0);

        if (err <= 1.0) {
            const double r_prev = r;
            const State y_prev = y;
            const State k_prev = k1;
            r += h;
            y = y_new;
            k1 = k7; // first-same-as-last
            p.samples.push_back({r, y[0], y[1], y[2]});
            if (y[0] <= 0.0) {
                // Bracket the zero of the Hermite interpolant on the last step.
                double lo = r_prev, hi = r;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double bm = hermite(r_prev, y_prev[0], k_prev[0], r, y[0], k1[0], mid);
                    (bm > 0.0 ? lo : hi) = mid;
                    if (hi - lo < 1e-15 * (1.0 + hi)) break;
                }
                const double rz = 0.5 * (lo + hi);
                ShotSample end;
                end.r = rz;
                end.b = hermite(r_prev, y_prev[0], k_prev[0], r, y[0], k1[0], rz);
                end.db = hermite(r_prev, y_prev[1], k_prev[1], r, y[1], k1[1], rz);
                end.energy = hermite(r_prev, y_prev[2], k_prev[2], r, y[2], k1[2], rz);
                p.samples.back() = end;
                r = rz;
                crossed = true;
                break;
            }
        }
        const double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::clamp(grow, 0.2, 5.0);
    }
    p.r_end = r;
    p.terminated = crossed ? ShotEnd::CrossedZero : ShotEnd::ReachedRmax;
    return p;
}

namespace {

const ShotSample& at(const std::vector<ShotSample>& s, std::size_t i) { return s[i]; }

double profile_eval(const ShotProfile& p, double r, int what) {
    if (!(r >= 0.0)) throw std::invalid_argument("profile: radius must be >= 0");
    if (r > p.r_end * (1.0 + 1e-12))
        throw std::out_of_range("profile: radius beyond the computed range");
    r = std::min(r, p.r_end);
    if (r < p.r_start) {
        const double b = p.gamma - p.series_c2 * r * r;
        if (what == 0) return b;
        if (what == 1) return -2.0 * p.series_c2 * r;
        // Energy below r_start: rescale the stored series value (quartic in r
        // to leading order would over-engineer; integrate the series directly).
        const double gl_x[4] = {0.069431844202974, 0.330009478207572, 0.669990521792428,
                                0.930568155797026};
        const double gl_w[4] = {0.173927422568727, 0.326072577431273, 0.326072577431273,
                                0.173927422568727};
        double e = 0.0;
        for (int q = 0; q < 4; ++q) {
            const double rr = r * gl_x[q];
            const double bb = p.gamma - p.series_c2 * rr * rr;
            e += gl_w[q] * 2.0 * kPi * rr * p.lambda * bb * bb * std::exp(bb * bb);
        }
        return e * r;
    }
    const std::size_t j = segment_of(p.samples, r);
    const ShotSample& s0 = at(p.samples, j - 1);
    const ShotSample& s1 = at(p.samples, j);
    const Rhs rhs{p.a, p.lambda};
    const State f0 = rhs(s0.r, {s0.b, s0.db, s0.energy});
    const State f1 = rhs(s1.r, {s1.b, s1.db, s1.energy});
    switch (what) {
        case 0: return hermite(s0.r, s0.b, s0.db, s1.r, s1.b, s1.db, r);
        case 1: return hermite_slope(s0.r, s0.b, s0.db, s1.r, s1.b, s1.db, r);
        default: return hermite(s0.r, s0.energy, f0[2], s1.r, s1.energy, f1[2], r);
    }
}

} // namespace

double ShotProfile::value(double r) const { return profile_eval(*this, r, 0); }
double ShotProfile::slope(double r) const { return profile_eval(*this, r, 1); }
double ShotProfile::energy(double r) const { return profile_eval(*this, r, 2); }

ExpansionReport compare_expansion(const ShotProfile& profile, double delta) {
    ExpansionReport rep;
    rep.delta = delta;
    rep.r_delta = r_delta(profile.gamma, profile.mu, delta);
    if (rep.r_delta > profile.r_end * (1.0 + 1e-12))
        throw std::invalid_argument("compare_expansion: window exceeds the computed profile");
    const std::size_t n = 2000;
    rep.samples = n;
    const double g = profile.gamma;
    const double lr0 = std::log(0.02 * profile.mu), lr1 = std::log(rep.r_delta);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::exp(lr0 + (lr1 - lr0) * static_cast<double>(i) /
                                            static_cast<double>(n - 1));
        const double b = profile.value(r);
        const double t = bubble::t0(r / profile.mu);
        const double s = bubble::s0(r / profile.mu);
        const double scale = std::pow(g, 5) / (1.0 + t);
        const double e_full = std::abs(b - (g - t / g + s / (g * g * g))) * scale;
        const double e_abl = std::abs(b - (g - t / g)) * scale;
        rep.max_scaled_error = std::max(rep.max_scaled_error, e_full);
        rep.max_scaled_error_ablated = std::max(rep.max_scaled_error_ablated, e_abl);
    }
    return rep;
}

} // namespace mtk::radial
