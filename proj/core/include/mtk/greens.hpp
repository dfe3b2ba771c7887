#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mtk/mesh.hpp"

namespace mtk::greens {

/// Closed-form Dirichlet Green's function of the disk of the given radius
/// for the positive Laplacian, pole x, evaluated at y:
///   G_x(y) = (1/2pi) log(|x'| |y' - x'*| / |x' - y'|),  x' = x/R, y' = y/R,
/// with x'* the inversion of x' in the unit circle; the |x| -> 0 limit
/// (1/2pi) log(R/|y|) is taken explicitly. Stable for poles near the centre.
double disk_green(mesh::Point x, mesh::Point y, double radius = 1.0);

/// Regular (Robin) value H_x(x) = (1/2pi) log((R^2 - |x|^2)/R) of the disk
/// Green's function at its own pole.
double disk_robin(mesh::Point x, double radius = 1.0);

/// A Green's function the rest of the toolkit can sample: either the exact
/// disk kernel or the discrete inverse of the grid Laplacian (pole snapped
/// to the nearest node, one linear solve per distinct pole, cached).
class GreenOracle {
  public:
    enum class Mode { ClosedForm, Grid };

    static GreenOracle disk(double radius);
    static GreenOracle grid(mesh::GridPtr g);

    Mode mode() const { return mode_; }
    double radius() const { return radius_; }
    mesh::GridPtr grid() const { return grid_; }

    double eval(mesh::Point x, mesh::Point y) const;

    /// Grid mode only: the discrete Green column for a pole node.
    const std::vector<double>& pole_solution(std::size_t node) const;

  private:
    GreenOracle() = default;
    // Copies share one pole cache; the mutex guards concurrent solves.
    struct Cache {
        std::mutex lock;
        std::map<std::size_t, std::vector<double>> cols;
    };
    Mode mode_ = Mode::ClosedForm;
    double radius_ = 1.0;
    mesh::GridPtr grid_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Green representation u(z) = int G_z(y) f(y) dy in the grid quadrature of
/// f, with the 3h-ball around the evaluation point handled analytically
/// (log-part integral plus the harmonic mean-value of the regular part).
/// With a grid-mode oracle on the same grid this reduces to the discrete
/// solve, making represent(laplacian(u)) exact. Radial target grids are
/// integrated ring by ring with azimuthal sampling of the kernel.
mesh::ScalarField represent(const GreenOracle& oracle, const mesh::ScalarField& f,
                            int threads = 1);

/// Monte Carlo scan of the classical bounds over seeded point pairs:
///   c_log  = max |x-y| e^{2 pi G(x,y)}   (so G <= (1/2pi) log(c_log/|x-y|)),
///   c_grad = max |grad_y G| |x-y|,
/// plus the count of positivity violations (G <= 0 strictly inside).
/// The first rows (up to 1000) are kept for inspection and CSV output.
struct BoundReport {
    double c_log = 0.0;
    double c_grad = 0.0;
    long violations = 0;
    long samples = 0;
    double min_g = 0.0;
    struct Row {
        mesh::Point x, y;
        double dist = 0.0;
        double g = 0.0;
    };
    std::vector<Row> rows;
};
BoundReport green_bound_check(const GreenOracle& oracle, long n_samples, std::uint64_t seed);

/// Least-squares fit of v - ||v||_p v1 against (1/gamma) log(1/|center-z|^2)
/// over interior nodes at least r_exclude from the concentration point:
/// the pointwise law diagnostic. rms is the residual of the fit.
struct LawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
    std::size_t n = 0;
};
LawFit pointwise_law_fit(const mesh::DomainGrid& g, const std::vector<double>& v,
                         const std::vector<double>& v1, double p, double gamma,
                         mesh::Point center, double r_exclude);

} // namespace mtk::greens
