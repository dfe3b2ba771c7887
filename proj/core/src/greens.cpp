#include "mtk/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "mtk/errors.hpp"

namespace mtk::greens {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dist(mesh::Point a, mesh::Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Deterministic uniform double in [0, 1) from a raw 64-bit draw.
double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

double disk_green(mesh::Point x, mesh::Point y, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk_green: radius must be positive");
    const double ax = std::hypot(x.x, x.y);
    if (!(ax < radius)) throw std::invalid_argument("disk_green: pole must lie inside the disk");
    const double ay = std::hypot(y.x, y.y);
    if (ay > radius * (1.0 + 1e-12))
        throw std::invalid_argument("disk_green: evaluation point outside the closed disk");
    const double d = dist(x, y);
    if (!(d > 0.0)) throw std::invalid_argument("disk_green: coincident pole and point");
    const mesh::Point xs{x.x / radius, x.y / radius};
    const mesh::Point ys{y.x / radius, y.y / radius};
    const double a = ax / radius;
    if (a < 1e-150) return std::log(radius / ay) / kTwoPi;
    // |x'| |y' - x'/|x'|^2| arranged as | |x'| y' - x'/|x'| |: smooth in a -> 0.
    const double nx = a * ys.x - xs.x / a;
    const double ny = a * ys.y - xs.y / a;
    return std::log(std::hypot(nx, ny) * radius / d) / kTwoPi;
}

double disk_robin(mesh::Point x, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk_robin: radius must be positive");
    const double ax = std::hypot(x.x, x.y);
    if (!(ax < radius)) throw std::invalid_argument("disk_robin: point must lie inside the disk");
    return std::log((radius * radius - ax * ax) / radius) / kTwoPi;
}

GreenOracle GreenOracle::disk(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("GreenOracle::disk: radius must be positive");
    GreenOracle o;
    o.mode_ = Mode::ClosedForm;
    o.radius_ = radius;
    return o;
}

GreenOracle GreenOracle::grid(mesh::GridPtr g) {
    if (!g) throw std::invalid_argument("GreenOracle::grid: null grid");
    GreenOracle o;
    o.mode_ = Mode::Grid;
    o.grid_ = std::move(g);
    return o;
}

const std::vector<double>& GreenOracle::pole_solution(std::size_t node) const {
    if (mode_ != Mode::Grid) throw std::logic_error("pole_solution: closed-form oracle");
    const mesh::DomainGrid& g = *grid_;
    if (node >= g.size()) throw std::invalid_argument("pole_solution: node out of range");
    std::lock_guard<std::mutex> hold(cache_->lock);
    auto it = cache_->cols.find(node);
    if (it != cache_->cols.end()) return it->second;
    std::vector<double> rhs(g.size(), 0.0);
    rhs[node] = 1.0; // K c = e_node, i.e. L c = delta_node / w_node
    std::vector<double> col = mesh::solve_stiffness(g, rhs, 1e-12);
    return cache_->cols.emplace(node, std::move(col)).first->second;
}

double GreenOracle::eval(mesh::Point x, mesh::Point y) const {
    if (mode_ == Mode::ClosedForm) return disk_green(x, y, radius_);
    const std::size_t node = mesh::nearest_node(*grid_, x);
    const std::vector<double>& col = pole_solution(node);
    return mesh::value_at(*grid_, col, y);
}

namespace {

// Analytic integral of the log part over the excluded ball of radius rho:
// int_{B(rho)} (1/2pi) log(1/|s|) ds = rho^2 (2 log(1/rho) + 1) / 4.
double log_patch(double rho) { return rho * rho * (2.0 * std::log(1.0 / rho) + 1.0) / 4.0; }

void represent_masked(const GreenOracle& oracle, const mesh::DomainGrid& tg,
                      const std::vector<double>& f, std::vector<double>& out, std::size_t lo,
                      std::size_t hi) {
    const double rho = 3.0 * tg.h;
    const double patch_log = log_patch(rho);
    for (std::size_t t = lo; t < hi; ++t) {
        const std::int32_t idx = tg.interior[t];
        const std::size_t j = static_cast<std::size_t>(idx);
        const mesh::Point z{tg.px[j], tg.py[j]};
        double acc = 0.0;
        for (std::size_t i = 0; i < tg.size(); ++i) {
            if (tg.w[i] == 0.0 || f[i] == 0.0) continue;
            const mesh::Point y{tg.px[i], tg.py[i]};
            if (dist(z, y) <= rho) continue;
            acc += tg.w[i] * oracle.eval(z, y) * f[i];
        }
        acc += f[j] * (patch_log + kPi * rho * rho * disk_robin(z, oracle.radius()));
        out[j] = acc;
    }
}

void represent_radial(const GreenOracle& oracle, const mesh::DomainGrid& tg,
                      const std::vector<double>& f, std::vector<double>& out) {
    const double rho = 3.0 * tg.h;
    const double patch_log = log_patch(rho);
    const std::int32_t n = tg.nr;
    for (std::int32_t jj = 0; jj + 1 < n; ++jj) {
        const std::size_t j = static_cast<std::size_t>(jj);
        const mesh::Point z{tg.px[j], 0.0};
        double acc = 0.0;
        for (std::int32_t ii = 0; ii < n; ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            if (tg.w[i] == 0.0 || f[i] == 0.0) continue;
            const double ri = tg.px[i];
            if (ri == 0.0) {
                const mesh::Point y{0.0, 0.0};
                if (dist(z, y) > rho) acc += tg.w[i] * oracle.eval(z, y) * f[i];
                continue;
            }
            const long m = std::max<long>(16, static_cast<long>(std::ceil(kTwoPi * ri / tg.h)));
            const double wk = tg.w[i] / static_cast<double>(m);
            double ring = 0.0;
            for (long k = 0; k < m; ++k) {
                const double th = kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
                const mesh::Point y{ri * std::cos(th), ri * std::sin(th)};
                if (dist(z, y) <= rho) continue;
                ring += wk * oracle.eval(z, y);
            }
            acc += ring * f[i];
        }
        acc += f[j] * (patch_log + kPi * rho * rho * disk_robin(z, oracle.radius()));
        out[j] = acc;
    }
}

} // namespace

mesh::ScalarField represent(const GreenOracle& oracle, const mesh::ScalarField& f, int threads) {
    if (!f.grid) throw std::invalid_argument("represent: field has no grid");
    const mesh::DomainGrid& tg = *f.grid;
    if (f.v.size() != tg.size()) throw std::invalid_argument("represent: field/grid mismatch");

    mesh::ScalarField u;
    u.grid = f.grid;
    u.v.assign(tg.size(), 0.0);

    if (oracle.mode() == GreenOracle::Mode::Grid) {
        // The discrete kernel sum telescopes to the direct solve; use it.
        if (oracle.grid() != f.grid)
            throw std::invalid_argument("represent: grid-mode oracle must share the field's grid");
        u.v = mesh::solve_poisson(tg, f.v, 1e-12);
        return u;
    }

    // Closed-form oracle: every node must lie in its disk.
    const double R = oracle.radius();
    for (std::size_t i = 0; i < tg.size(); ++i)
        if (std::hypot(tg.px[i], tg.py[i]) > R * (1.0 + 1e-12))
            throw std::invalid_argument("represent: grid extends beyond the oracle's disk");

    if (tg.kind == mesh::GridKind::RadialDisk) {
        represent_radial(oracle, tg, f.v, u.v);
        return u;
    }

    const std::size_t m = tg.interior.size();
    int nt = threads;
    if (nt < 1) nt = 1;
    nt = std::min<int>(nt, 64);
    if (nt == 1 || m < 64) {
        represent_masked(oracle, tg, f.v, u.v, 0, m);
        return u;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (m + static_cast<std::size_t>(nt) - 1) / static_cast<std::size_t>(nt);
    for (int k = 0; k < nt; ++k) {
        const std::size_t lo = static_cast<std::size_t>(k) * chunk;
        const std::size_t hi = std::min(m, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { represent_masked(oracle, tg, f.v, u.v, lo, hi); });
    }
    for (std::thread& th : pool) th.join();
    return u;
}

BoundReport green_bound_check(const GreenOracle& oracle, long n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("green_bound_check: need at least one sample");
    std::mt19937_64 rng(seed);
    BoundReport rep;
    rep.samples = n_samples;
    rep.min_g = std::numeric_limits<double>::infinity();

    const bool closed = oracle.mode() == GreenOracle::Mode::ClosedForm;
    const double R = closed ? oracle.radius() : 0.0;
    const mesh::DomainGrid* g = closed ? nullptr : oracle.grid().get();

    // Grid mode samples node pairs from a bounded pole pool so the number of
    // linear solves stays small; closed form samples the continuum.
    std::vector<std::size_t> poles;
    if (!closed) {
        const std::size_t npool = std::min<std::size_t>(64, g->interior.size());
        for (std::size_t k = 0; k < npool; ++k) {
            const std::size_t pick = static_cast<std::size_t>(
                unit_uniform(rng()) * static_cast<double>(g->interior.size()));
            poles.push_back(static_cast<std::size_t>(
                g->interior[std::min(pick, g->interior.size() - 1)]));
        }
    }

    auto draw_disk = [&](double frac) {
        // Rejection sampling in the square; deterministic given the stream.
        for (;;) {
            const double px = (2.0 * unit_uniform(rng()) - 1.0) * R * frac;
            const double py = (2.0 * unit_uniform(rng()) - 1.0) * R * frac;
            if (std::hypot(px, py) < R * frac) return mesh::Point{px, py};
        }
    };

    for (long s = 0; s < n_samples; ++s) {
        mesh::Point x, y;
        if (closed) {
            x = draw_disk(0.999);
            do {
                y = draw_disk(0.999);
            } while (dist(x, y) < 1e-9 * R);
        } else {
            const std::size_t pole_node =
                poles[static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(poles.size())) %
                      poles.size()];
            x = {g->px[pole_node], g->py[pole_node]};
            int guard = 0;
            do {
                const std::size_t yi = static_cast<std::size_t>(
                    g->interior[static_cast<std::size_t>(unit_uniform(rng()) *
                                                         static_cast<double>(g->interior.size())) %
                                g->interior.size()]);
                y = {g->px[yi], g->py[yi]};
            } while (dist(x, y) < 0.5 * g->h && ++guard < 100);
            if (dist(x, y) < 0.5 * g->h) continue; // degenerate grid; skip the pair
        }
        const double gv = oracle.eval(x, y);
        if (gv <= 0.0) ++rep.violations;
        rep.min_g = std::min(rep.min_g, gv);
        const double d = dist(x, y);
        rep.c_log = std::max(rep.c_log, d * std::exp(kTwoPi * gv));
        if (rep.rows.size() < 1000) rep.rows.push_back({x, y, d, gv});

        // Central-difference gradient in y, kept inside the domain.
        const double border = closed ? (R - std::hypot(y.x, y.y)) : g->h;
        double hfd = std::max(1e-7 * std::max(d, 1e-3), 1e-9);
        hfd = std::min(hfd, 0.25 * std::max(border, 0.0));
        if (hfd > 0.0) {
            const double gxp = oracle.eval(x, {y.x + hfd, y.y});
            const double gxm = oracle.eval(x, {y.x - hfd, y.y});
            const double gyp = oracle.eval(x, {y.x, y.y + hfd});
            const double gym = oracle.eval(x, {y.x, y.y - hfd});
            const double grad = std::hypot((gxp - gxm) / (2.0 * hfd), (gyp - gym) / (2.0 * hfd));
            rep.c_grad = std::max(rep.c_grad, grad * d);
        }
    }
    return rep;
}

LawFit pointwise_law_fit(const mesh::DomainGrid& g, const std::vector<double>& v,
                         const std::vector<double>& v1, double p, double gamma,
                         mesh::Point center, double r_exclude) {
    if (v.size() != g.size() || v1.size() != g.size())
        throw std::invalid_argument("pointwise_law_fit: field/grid mismatch");
    if (!(gamma > 0.0)) throw std::invalid_argument("pointwise_law_fit: gamma must be positive");
    if (!(r_exclude > 0.0))
        throw std::invalid_argument("pointwise_law_fit: r_exclude must be positive");
    const double vp = mesh::lp_norm(g, v, p);
    double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::int32_t idx : g.interior) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const double d = std::hypot(g.px[i] - center.x, g.py[i] - center.y);
        if (d < r_exclude) continue;
        const double xg = -2.0 * std::log(d) / gamma;
        const double yg = v[i] - vp * v1[i];
        sx += xg;
        sxx += xg * xg;
        sy += yg;
        sxy += xg * yg;
        ++n;
    }
    LawFit fit;
    fit.n = n;
    if (n < 2) return fit;
    const double nn = static_cast<double>(n);
    const double det = nn * sxx - sx * sx;
    if (det == 0.0) return fit;
    fit.slope = (nn * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / nn;
    double rss = 0.0;
    for (std::int32_t idx : g.interior) {
        const std::size_t i = static_cast<std::size_t>(idx);
        const double d = std::hypot(g.px[i] - center.x, g.py[i] - center.y);
        if (d < r_exclude) continue;
        const double xg = -2.0 * std::log(d) / gamma;
        const double yg = v[i] - vp * v1[i];
        const double res = yg - (fit.slope * xg + fit.intercept);
        rss += res * res;
    }
    fit.rms = std::sqrt(rss / nn);
    return fit;
}

} // namespace mtk::greens
