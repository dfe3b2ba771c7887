#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace mtk::mesh {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class DomainKind { Disk, Rectangle, Polygon };

/// Planar domain: disk of radius R centered at the origin, axis-aligned
/// rectangle [0,w] x [0,h], or a simple polygon.
class DomainSpec {
public:
    /// Default-constructs the unit disk; use the named factories below.
    DomainSpec() = default;

    static DomainSpec disk(double radius);
    static DomainSpec rectangle(double width, double height);
    /// Simple polygon, at least 3 vertices, no self-intersection.
    static DomainSpec polygon(std::vector<Point> vertices);

    DomainKind kind() const noexcept { return kind_; }
    double radius() const noexcept { return radius_; }
    double width() const noexcept { return width_; }
    double height() const noexcept { return height_; }
    const std::vector<Point>& vertices() const noexcept { return vertices_; }

    double area() const;
    bool contains(Point p) const;
    /// Negative inside, positive outside, ~0 on the boundary.
    double signed_distance(Point p) const;
    void bounding_box(double& xmin, double& ymin, double& xmax, double& ymax) const;

private:
    DomainKind kind_ = DomainKind::Disk;
    double radius_ = 1.0;
    double width_ = 1.0, height_ = 1.0;
    std::vector<Point> vertices_;
};

enum class GridKind { RadialDisk, MaskedCartesian };

/// Discretization of a domain: nodes, positive quadrature weights, boundary
/// flags, and the stiffness/mass pair behind the Laplacian. Immutable once
/// built; fields reference it via shared_ptr.
///
/// The Laplacian convention is the positive operator L = -(d2/dx2 + d2/dy2),
/// applied as L = M^{-1} K with K the flux-form stiffness matrix and
/// M = diag(quadrature weights), so L is exactly self-adjoint in the
/// quadrature inner product.
struct DomainGrid {
    GridKind kind;
    DomainSpec domain;
    double h = 0.0; // mesh size (radial: node spacing in r)

    std::vector<double> px, py;      // node coordinates
    std::vector<double> w;           // quadrature weights (positive)
    std::vector<std::uint8_t> bnd;   // 1 for boundary nodes (Dirichlet, value 0)
    std::vector<std::int32_t> interior; // interior node indices, ascending

    // RadialDisk: nodes ordered by increasing r = i*h, i = 0..nr-1.
    std::int32_t nr = 0;

    // MaskedCartesian lattice (row-major node ordering, y outer, x inner).
    std::int32_t nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;
    std::vector<std::int32_t> node_at;            // lattice slot -> node id or -1
    std::vector<std::array<std::int32_t, 4>> nbr; // per node: -x,+x,-y,+y or -1

    std::size_t size() const noexcept { return px.size(); }

    DomainSpec spec() const { return domain; }
};

using GridPtr = std::shared_ptr<const DomainGrid>;

/// Nodal values on a DomainGrid. Boundary nodes carry zeros for members of
/// the Dirichlet class.
struct ScalarField {
    GridPtr grid;
    std::vector<double> v;
};

/// Uniform radial grid on the disk of the given radius, n >= 3 nodes,
/// spacing radius/(n-1). Quadrature: hat-function weights against 2*pi*r dr
/// (weights sum to the disk area exactly).
GridPtr build_radial_grid(double radius, std::size_t n);

/// Masked Cartesian lattice of spacing h. A node is interior iff its signed
/// distance is below -h/2 (plain zero extension at the stencil level);
/// quadrature weights are cut-cell corrected so they sum to the domain area
/// to O(h^2).
GridPtr build_masked_grid(const DomainSpec& domain, double h);

double integrate(const DomainGrid& g, std::span<const double> f);
double inner(const DomainGrid& g, std::span<const double> a, std::span<const double> b);
double l2_norm_sq(const DomainGrid& g, std::span<const double> f);
double lp_norm(const DomainGrid& g, std::span<const double> f, double p);

/// K f (flux-form stiffness). Boundary rows are zero.
void stiffness_apply(const DomainGrid& g, std::span<const double> f, std::span<double> out);
/// f^T K f = discrete Dirichlet energy ||grad f||_2^2.
double dirichlet_energy(const DomainGrid& g, std::span<const double> f);
double h1_inner(const DomainGrid& g, std::span<const double> a, std::span<const double> b);

/// L f with L = M^{-1} K, the positive Laplacian. Boundary rows are zero.
void laplacian_apply(const DomainGrid& g, std::span<const double> f, std::span<double> out);
std::vector<double> laplacian_apply(const DomainGrid& g, std::span<const double> f);

/// Solve K u = rhs on interior nodes (u = 0 on the boundary).
/// Radial grids use a direct tridiagonal solve; masked grids use CG with
/// relative residual <= tol.
std::vector<double> solve_stiffness(const DomainGrid& g, std::span<const double> rhs,
                                    double tol = 1e-12);
/// Solve the Poisson problem L u = f, i.e. K u = M f.
std::vector<double> solve_poisson(const DomainGrid& g, std::span<const double> f,
                                  double tol = 1e-12);

/// Value of a nodal field at an arbitrary point: linear interpolation in r on
/// radial grids, bilinear on masked lattices; zero outside the node set.
double value_at(const DomainGrid& g, std::span<const double> f, Point p);

/// Nearest node to p (ties broken toward lower index). Throws if the grid is
/// empty.
std::size_t nearest_node(const DomainGrid& g, Point p);

/// Mean of f over the circle |y - center| = r, sampled at
/// max(16, ceil(2*pi*r/h)) points with grid interpolation.
/// Throws std::invalid_argument if the circle exits the domain.
double spherical_average(const ScalarField& f, Point center, double r);

/// CSV writer: header "index,x,y,weight,value", one row per node in grid
/// order (radial: increasing r; masked: row-major).
void write_field_csv(std::ostream& os, const DomainGrid& g, std::span<const double> f);

} // namespace mtk::mesh
