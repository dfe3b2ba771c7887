#include "mtk/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mtk/errors.hpp"

namespace mtk::mesh {

namespace {

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double point_segment_distance(Point p, Point a, Point b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return dist(p, a);
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

int orientation(Point a, Point b, Point c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

bool on_segment(Point a, Point b, Point p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_cross(Point a, Point b, Point c, Point d) {
    const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

} // namespace

DomainSpec DomainSpec::disk(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("disk radius must be positive");
    DomainSpec s;
    s.kind_ = DomainKind::Disk;
    s.radius_ = radius;
    return s;
}

DomainSpec DomainSpec::rectangle(double width, double height) {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
        throw std::invalid_argument("rectangle sides must be positive");
    DomainSpec s;
    s.kind_ = DomainKind::Rectangle;
    s.width_ = width;
    s.height_ = height;
    return s;
}

DomainSpec DomainSpec::polygon(std::vector<Point> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip edges sharing an endpoint
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_cross(vertices[i], vertices[(i + 1) % n],
                               vertices[j], vertices[(j + 1) % n]))
                throw std::invalid_argument("polygon is self-intersecting");
        }
    }
    DomainSpec s;
    s.kind_ = DomainKind::Polygon;
    s.vertices_ = std::move(vertices);
    if (!(s.area() > 0.0)) throw std::invalid_argument("polygon has zero area");
    return s;
}

double DomainSpec::area() const {
    switch (kind_) {
    case DomainKind::Disk:
        return M_PI * radius_ * radius_;
    case DomainKind::Rectangle:
        return width_ * height_;
    case DomainKind::Polygon: {
        double a = 0.0;
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& p = vertices_[i];
            const Point& q = vertices_[(i + 1) % n];
            a += p.x * q.y - q.x * p.y;
        }
        return std::abs(a) / 2.0;
    }
    }
    return 0.0;
}

bool DomainSpec::contains(Point p) const {
    switch (kind_) {
    case DomainKind::Disk:
        return std::hypot(p.x, p.y) <= radius_;
    case DomainKind::Rectangle:
        return p.x >= 0.0 && p.x <= width_ && p.y >= 0.0 && p.y <= height_;
    case DomainKind::Polygon: {
        // even-odd crossing rule
        bool in = false;
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point& a = vertices_[i];
            const Point& b = vertices_[j];
            if ((a.y > p.y) != (b.y > p.y)) {
                const double xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if (p.x < xc) in = !in;
            }
        }
        return in;
    }
    }
    return false;
}

double DomainSpec::signed_distance(Point p) const {
    switch (kind_) {
    case DomainKind::Disk:
        return std::hypot(p.x, p.y) - radius_;
    case DomainKind::Rectangle: {
        const double dx = std::max({-p.x, p.x - width_, 0.0});
        const double dy = std::max({-p.y, p.y - height_, 0.0});
        if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
        return -std::min({p.x, width_ - p.x, p.y, height_ - p.y});
    }
    case DomainKind::Polygon: {
        double d = std::numeric_limits<double>::infinity();
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i)
            d = std::min(d, point_segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
        return contains(p) ? -d : d;
    }
    }
    return 0.0;
}

void DomainSpec::bounding_box(double& xmin, double& ymin, double& xmax, double& ymax) const {
    switch (kind_) {
    case DomainKind::Disk:
        xmin = ymin = -radius_;
        xmax = ymax = radius_;
        return;
    case DomainKind::Rectangle:
        xmin = ymin = 0.0;
        xmax = width_;
        ymax = height_;
        return;
    case DomainKind::Polygon:
        xmin = ymin = std::numeric_limits<double>::infinity();
        xmax = ymax = -xmin;
        for (const Point& v : vertices_) {
            xmin = std::min(xmin, v.x);
            xmax = std::max(xmax, v.x);
            ymin = std::min(ymin, v.y);
            ymax = std::max(ymax, v.y);
        }
        return;
    }
}

GridPtr build_radial_grid(double radius, std::size_t n) {
    if (n < 3) throw std::invalid_argument("radial grid needs at least 3 nodes");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    auto g = std::make_shared<DomainGrid>();
    g->kind = GridKind::RadialDisk;
    g->domain = DomainSpec::disk(radius);
    const double dr = radius / static_cast<double>(n - 1);
    g->h = dr;
    g->nr = static_cast<std::int32_t>(n);
    g->px.resize(n);
    g->py.assign(n, 0.0);
    g->w.resize(n);
    g->bnd.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = static_cast<double>(i) * dr;
        g->px[i] = r;
        if (i == 0)
            g->w[i] = M_PI * dr * dr / 3.0;
        else if (i + 1 == n)
            g->w[i] = M_PI * dr * (radius - dr / 3.0);
        else
            g->w[i] = 2.0 * M_PI * r * dr;
    }
    g->bnd[n - 1] = 1;
    g->interior.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) g->interior[i] = static_cast<std::int32_t>(i);
    return g;
}

GridPtr build_masked_grid(const DomainSpec& domain, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("mesh size must be positive");
    double xmin, ymin, xmax, ymax;
    domain.bounding_box(xmin, ymin, xmax, ymax);
    if (h > std::max(xmax - xmin, ymax - ymin))
        throw std::invalid_argument("mesh size exceeds the domain extent");

    auto g = std::make_shared<DomainGrid>();
    g->kind = GridKind::MaskedCartesian;
    g->domain = domain;
    g->h = h;
    const double x0 = xmin - h, y0 = ymin - h;
    const auto ncx = static_cast<std::int32_t>(std::ceil((xmax - xmin + 2.0 * h) / h - 1e-9));
    const auto ncy = static_cast<std::int32_t>(std::ceil((ymax - ymin + 2.0 * h) / h - 1e-9));
    const std::int32_t nx = ncx + 1, ny = ncy + 1;
    g->x0 = x0;
    g->y0 = y0;
    g->nx = nx;
    g->ny = ny;

    auto slot = [nx](std::int32_t i, std::int32_t j) { return static_cast<std::size_t>(j) * nx + i; };
    const std::size_t nslots = static_cast<std::size_t>(nx) * ny;

    std::vector<double> sd(nslots);
    std::vector<std::uint8_t> inside(nslots, 0);
    for (std::int32_t j = 0; j < ny; ++j)
        for (std::int32_t i = 0; i < nx; ++i) {
            const Point p{x0 + i * h, y0 + j * h};
            const double d = domain.signed_distance(p);
            sd[slot(i, j)] = d;
            inside[slot(i, j)] = d < -0.5 * h ? 1 : 0;
        }

    // cut-cell weights: each cell spreads its covered area equally to its corners
    std::vector<double> wt(nslots, 0.0);
    const int k = std::max(16, static_cast<int>(std::ceil(1.0 / (8.0 * h))));
    const double full = 0.7072 * h; // half diagonal, with margin
    for (std::int32_t j = 0; j + 1 < ny; ++j)
        for (std::int32_t i = 0; i + 1 < nx; ++i) {
            const double d00 = sd[slot(i, j)], d10 = sd[slot(i + 1, j)];
            const double d01 = sd[slot(i, j + 1)], d11 = sd[slot(i + 1, j + 1)];
            double frac;
            if (d00 <= -full && d10 <= -full && d01 <= -full && d11 <= -full) {
                frac = 1.0;
            } else if (d00 >= full && d10 >= full && d01 >= full && d11 >= full) {
                frac = 0.0;
            } else {
                int cnt = 0;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b) {
                        const Point q{x0 + (i + (a + 0.5) / k) * h, y0 + (j + (b + 0.5) / k) * h};
                        if (domain.signed_distance(q) <= 0.0) ++cnt;
                    }
                frac = static_cast<double>(cnt) / (k * k);
            }
            if (frac > 0.0) {
                const double wq = frac * h * h / 4.0;
                wt[slot(i, j)] += wq;
                wt[slot(i + 1, j)] += wq;
                wt[slot(i, j + 1)] += wq;
                wt[slot(i + 1, j + 1)] += wq;
            }
        }

    // keep interior nodes, weighted ring nodes, and stencil ghosts
    g->node_at.assign(nslots, -1);
    for (std::int32_t j = 0; j < ny; ++j)
        for (std::int32_t i = 0; i < nx; ++i) {
            const std::size_t s = slot(i, j);
            bool keep = inside[s] || wt[s] > 0.0;
            if (!keep) {
                if (i > 0 && inside[slot(i - 1, j)]) keep = true;
                if (i + 1 < nx && inside[slot(i + 1, j)]) keep = true;
                if (j > 0 && inside[slot(i, j - 1)]) keep = true;
                if (j + 1 < ny && inside[slot(i, j + 1)]) keep = true;
            }
            if (!keep) continue;
            const auto id = static_cast<std::int32_t>(g->px.size());
            g->node_at[s] = id;
            g->px.push_back(x0 + i * h);
            g->py.push_back(y0 + j * h);
            g->w.push_back(wt[s]);
            g->bnd.push_back(inside[s] ? 0 : 1);
            if (inside[s]) g->interior.push_back(id);
        }

    if (g->interior.empty()) throw std::invalid_argument("mesh size too coarse: no interior nodes");

    g->nbr.assign(g->size(), {-1, -1, -1, -1});
    for (std::int32_t j = 0; j < ny; ++j)
        for (std::int32_t i = 0; i < nx; ++i) {
            const std::int32_t id = g->node_at[slot(i, j)];
            if (id < 0 || g->bnd[id]) continue;
            auto nb = [&](std::int32_t ii, std::int32_t jj) -> std::int32_t {
                if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) return -1;
                const std::int32_t q = g->node_at[slot(ii, jj)];
                return (q >= 0 && !g->bnd[q]) ? q : -1;
            };
            g->nbr[id] = {nb(i - 1, j), nb(i + 1, j), nb(i, j - 1), nb(i, j + 1)};
        }
    return g;
}

double integrate(const DomainGrid& g, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.w[i] * f[i];
    return s;
}

double inner(const DomainGrid& g, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.w[i] * a[i] * b[i];
    return s;
}

double l2_norm_sq(const DomainGrid& g, std::span<const double> f) { return inner(g, f, f); }

double lp_norm(const DomainGrid& g, std::span<const double> f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.w[i] * std::pow(std::abs(f[i]), p);
    return std::pow(s, 1.0 / p);
}

void stiffness_apply(const DomainGrid& g, std::span<const double> f, std::span<double> out) {
    const std::size_t n = g.size();
    if (g.kind == GridKind::RadialDisk) {
        const double dr = g.h;
        std::fill(out.begin(), out.end(), 0.0);
        for (std::int32_t i = 0; i + 1 < g.nr; ++i) {
            // flux through the face at r_{i+1/2}
            const double kf = 2.0 * M_PI * (g.px[i] + 0.5 * dr) / dr;
            const double fr = (i + 1 < g.nr - 1) ? f[i + 1] : 0.0;
            const double d = f[i] - fr;
            out[i] += kf * d;
            if (i + 1 < g.nr - 1) out[i + 1] -= kf * d;
        }
        out[n - 1] = 0.0;
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (g.bnd[i]) {
            out[i] = 0.0;
            continue;
        }
        double s = 4.0 * f[i];
        for (const std::int32_t q : g.nbr[i])
            if (q >= 0) s -= f[q];
        out[i] = s;
    }
}

double dirichlet_energy(const DomainGrid& g, std::span<const double> f) {
    return h1_inner(g, f, f);
}

double h1_inner(const DomainGrid& g, std::span<const double> a, std::span<const double> b) {
    std::vector<double> kb(g.size());
    stiffness_apply(g, b, kb);
    double s = 0.0;
    for (const std::int32_t i : g.interior) s += a[i] * kb[i];
    return s;
}

void laplacian_apply(const DomainGrid& g, std::span<const double> f, std::span<double> out) {
    stiffness_apply(g, f, out);
    for (const std::int32_t i : g.interior) out[i] /= g.w[i];
}

std::vector<double> laplacian_apply(const DomainGrid& g, std::span<const double> f) {
    std::vector<double> out(g.size());
    laplacian_apply(g, f, out);
    return out;
}

namespace {

std::vector<double> solve_tridiag_radial(const DomainGrid& g, std::span<const double> rhs) {
    // K restricted to interior nodes 0..nr-2 is SPD tridiagonal
    const std::int32_t m = g.nr - 1;
    const double dr = g.h;
    std::vector<double> diag(m, 0.0), off(m - 1, 0.0);
    for (std::int32_t i = 0; i + 1 < g.nr; ++i) {
        const double kf = 2.0 * M_PI * (g.px[i] + 0.5 * dr) / dr;
        diag[i] += kf;
        if (i + 1 < m) {
            diag[i + 1] += kf;
            off[i] = -kf;
        }
    }
    std::vector<double> c(m - 1), d(m), x(g.size(), 0.0);
    double piv = diag[0];
    d[0] = rhs[0] / piv;
    for (std::int32_t i = 1; i < m; ++i) {
        c[i - 1] = off[i - 1] / piv;
        piv = diag[i] - off[i - 1] * c[i - 1];
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / piv;
    }
    x[m - 1] = d[m - 1];
    for (std::int32_t i = m - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

std::vector<double> solve_cg_masked(const DomainGrid& g, std::span<const double> rhs, double tol) {
    const std::size_t n = g.size();
    std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), p(n), kp(n);
    for (std::size_t i = 0; i < n; ++i)
        if (g.bnd[i]) r[i] = 0.0;
    p.assign(r.begin(), r.end());
    double rr = 0.0;
    for (const std::int32_t i : g.interior) rr += r[i] * r[i];
    const double stop2 = rr * tol * tol;
    if (rr == 0.0) return x;
    const std::size_t max_it = 20 * n + 100;
    for (std::size_t it = 0; it < max_it; ++it) {
        stiffness_apply(g, p, kp);
        double pkp = 0.0;
        for (const std::int32_t i : g.interior) pkp += p[i] * kp[i];
        const double alpha = rr / pkp;
        double rr2 = 0.0;
        for (const std::int32_t i : g.interior) {
            x[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
            rr2 += r[i] * r[i];
        }
        if (rr2 <= stop2) return x;
        const double beta = rr2 / rr;
        rr = rr2;
        for (const std::int32_t i : g.interior) p[i] = r[i] + beta * p[i];
    }
    throw NumericError("mesh", "conjugate gradient failed to converge");
}

} // namespace

std::vector<double> solve_stiffness(const DomainGrid& g, std::span<const double> rhs, double tol) {
    if (g.kind == GridKind::RadialDisk) return solve_tridiag_radial(g, rhs);
    return solve_cg_masked(g, rhs, tol);
}

std::vector<double> solve_poisson(const DomainGrid& g, std::span<const double> f, double tol) {
    std::vector<double> rhs(g.size(), 0.0);
    for (const std::int32_t i : g.interior) rhs[i] = g.w[i] * f[i];
    return solve_stiffness(g, rhs, tol);
}

double value_at(const DomainGrid& g, std::span<const double> f, Point p) {
    if (g.kind == GridKind::RadialDisk) {
        const double r = std::hypot(p.x, p.y);
        const double R = g.domain.radius();
        if (r >= R) return 0.0;
        const double t = r / g.h;
        const auto i = static_cast<std::size_t>(t);
        if (i + 1 >= g.size()) return f[g.size() - 1];
        const double a = t - static_cast<double>(i);
        return (1.0 - a) * f[i] + a * f[i + 1];
    }
    const double tx = (p.x - g.x0) / g.h, ty = (p.y - g.y0) / g.h;
    const auto i = static_cast<std::int32_t>(std::floor(tx));
    const auto j = static_cast<std::int32_t>(std::floor(ty));
    if (i < 0 || j < 0 || i + 1 >= g.nx || j + 1 >= g.ny) return 0.0;
    auto val = [&](std::int32_t ii, std::int32_t jj) {
        const std::int32_t id = g.node_at[static_cast<std::size_t>(jj) * g.nx + ii];
        return id >= 0 ? f[id] : 0.0;
    };
    const double a = tx - i, b = ty - j;
    return (1 - a) * (1 - b) * val(i, j) + a * (1 - b) * val(i + 1, j) +
           (1 - a) * b * val(i, j + 1) + a * b * val(i + 1, j + 1);
}

std::size_t nearest_node(const DomainGrid& g, Point p) {
    if (g.size() == 0) throw std::invalid_argument("empty grid");
    if (g.kind == GridKind::RadialDisk) {
        const double r = std::hypot(p.x, p.y);
        const auto i = static_cast<std::size_t>(std::clamp(
            std::llround(r / g.h), 0LL, static_cast<long long>(g.size() - 1)));
        return i;
    }
    const auto ic = static_cast<std::int32_t>(std::llround((p.x - g.x0) / g.h));
    const auto jc = static_cast<std::int32_t>(std::llround((p.y - g.y0) / g.h));
    for (std::int32_t ring = 0; ring < 3; ++ring) {
        std::size_t best = g.size();
        double bd = std::numeric_limits<double>::infinity();
        for (std::int32_t dj = -ring; dj <= ring; ++dj)
            for (std::int32_t di = -ring; di <= ring; ++di) {
                const std::int32_t i = ic + di, j = jc + dj;
                if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) continue;
                const std::int32_t id = g.node_at[static_cast<std::size_t>(j) * g.nx + i];
                if (id < 0) continue;
                const double d = std::hypot(g.px[id] - p.x, g.py[id] - p.y);
                if (d < bd) {
                    bd = d;
                    best = static_cast<std::size_t>(id);
                }
            }
        if (best < g.size()) return best;
    }
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = std::hypot(g.px[i] - p.x, g.py[i] - p.y);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

double spherical_average(const ScalarField& f, Point center, double r) {
    if (!f.grid) throw std::invalid_argument("field has no grid");
    const DomainGrid& g = *f.grid;
    if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
    const auto m = static_cast<std::size_t>(
        std::max<double>(16.0, std::ceil(2.0 * M_PI * r / g.h)));
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(m);
        const Point q{center.x + r * std::cos(th), center.y + r * std::sin(th)};
        if (g.domain.signed_distance(q) > 1e-12)
            throw std::invalid_argument("circle exits the domain");
        s += value_at(g, f.v, q);
    }
    return s / static_cast<double>(m);
}

void write_field_csv(std::ostream& os, const DomainGrid& g, std::span<const double> f) {
    os << "index,x,y,weight,value\n";
    char buf[160];
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, g.px[i], g.py[i],
                      g.w[i], f[i]);
        os << buf;
    }
}

} // namespace mtk::mesh
