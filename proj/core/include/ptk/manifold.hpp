#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

#include "ptk/numerics.hpp"
#include "ptk/symplectic.hpp"
#include "ptk/types.hpp"

namespace ptk {

inline constexpr double default_lagrangian_tol = 1e-8;
inline constexpr double default_caustic_tol = 1e-8;
inline constexpr double two_pi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Manifold representations
// ---------------------------------------------------------------------------

// Exact graph manifold p = grad Phi(x) over a position-space box.
class ExactManifold {
public:
    using Scalar = std::function<double(const Eigen::VectorXd&)>;
    using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    // grad may be empty; 4th-order central differences are used then.
    ExactManifold(int n, Scalar phi, Gradient grad = {}, Box domain = {});

    int dim() const { return n_; }
    double phi(const Eigen::VectorXd& x) const;
    Eigen::VectorXd grad_phi(const Eigen::VectorXd& x) const;
    PhasePoint point(const Eigen::VectorXd& x) const { return {x, grad_phi(x)}; }
    const Box& domain() const { return domain_; }

private:
    int n_;
    Scalar phi_;
    Gradient grad_;
    Box domain_;
};

// Parametrized Lagrangian immersion psi : Theta -> R^{2n}.  Axes flagged
// periodic have period 2*pi; paths and homotopy data live in the universal
// cover (plain R^n coordinates, unwrapped on periodic axes).
struct ParamManifold {
    int n = 0;
    std::function<PhasePoint(const Eigen::VectorXd&)> psi;
    // Optional analytic Jacobian, 2n x n with rows [dx/dtheta; dp/dtheta].
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> dpsi;
    std::vector<bool> periodic;
    Eigen::VectorXd base_point;
    Box domain;  // constrains non-periodic axes only

    PhasePoint at(const Eigen::VectorXd& theta) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const;
    // Top block dx/dtheta (n x n).
    Eigen::MatrixXd position_jacobian(const Eigen::VectorXd& theta) const;
    bool any_periodic() const;
    bool theta_in_domain(const Eigen::VectorXd& theta, double slack = 1e-9) const;
};

// Built-in families.
ParamManifold make_circle(double radius, double base_angle = 0.0);
ParamManifold make_torus(const Eigen::VectorXd& radii);
ParamManifold make_linear_plane(const Eigen::MatrixXd& m);  // p = M x, M symmetric
ExactManifold make_exact_quadratic(const Eigen::MatrixXd& m);
ParamManifold exact_to_param(const ExactManifold& m);

// Image manifolds.  Lagrangian property is preserved by both.
ParamManifold translate_manifold(const ParamManifold& m, const PhasePoint& z_a);
ParamManifold apply_linear(const ParamManifold& m, const SymplecticMap& s);

// ---------------------------------------------------------------------------
// Homotopy bookkeeping (product topologies: winding vectors classify pi_1)
// ---------------------------------------------------------------------------

struct LoopClass {
    Eigen::VectorXi windings;  // one entry per axis; nonzero only on periodic axes
    bool contractible() const { return windings.size() == 0 || windings.isZero(); }
};

// Point of the universal cover: endpoint + winding vector + a representative
// path from the base point, stored in cover coordinates.
struct HomotopyPoint {
    Eigen::VectorXi windings;               // per axis, 0 on non-periodic axes
    Eigen::VectorXd endpoint;               // parameter value of the projected point
    std::vector<Eigen::VectorXd> path;      // polyline base -> endpoint + 2*pi*windings

    // Endpoint in cover coordinates.
    Eigen::VectorXd cover_endpoint() const;
};

// Representative built from per-axis winding sweeps followed by a straight
// segment to the endpoint.
HomotopyPoint make_homotopy_point(const ParamManifold& m, const Eigen::VectorXd& endpoint,
                                  const Eigen::VectorXi& windings);
HomotopyPoint make_homotopy_point(const ParamManifold& m, const Eigen::VectorXd& endpoint);

// Path/winding consistency; throws std::invalid_argument on violation.
void validate_homotopy_point(const ParamManifold& m, const HomotopyPoint& hp);

// Net signed 2*pi crossings per axis of a cover polyline (diagnostic).
Eigen::VectorXi windings_of_path(const ParamManifold& m, const std::vector<Eigen::VectorXd>& path);

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

// Action integral over a raw phase-space polyline (exact for the polyline).
double path_action_integral(const std::vector<PhasePoint>& polyline);

// Action integral along the image of a parameter polyline, segmentwise
// refined Simpson quadrature.
double path_action_integral(const ParamManifold& m, const std::vector<Eigen::VectorXd>& path,
                            const QuadratureOptions& opt = {});

// Phase of the cover point: integral of p dx along the representative path,
// anchored by phase(base) = 0.
double phase(const ParamManifold& m, const HomotopyPoint& hp, const QuadratureOptions& opt = {});
// On exact manifolds the phase is Phi(x) - Phi(x_base).
double phase(const ExactManifold& m, const Eigen::VectorXd& x, const Eigen::VectorXd& x_base);

// Loop period C(gamma) = closed integral of p dx for the winding class.
double loop_period(const ParamManifold& m, const LoopClass& loop,
                   const QuadratureOptions& opt = {});

// ---------------------------------------------------------------------------
// Caustics and local charts
// ---------------------------------------------------------------------------

struct GridSpec {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    Eigen::VectorXi nodes;  // per axis, >= 2

    static GridSpec uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int nodes);
};

// Full period scan box for a manifold (periodic axes [base, base + 2*pi]).
GridSpec default_scan_grid(const ParamManifold& m, int nodes_per_axis = 256);

struct CausticCell {
    Eigen::VectorXd lo;           // cell corner
    Eigen::VectorXd hi;
    bool sign_change = false;     // det(dx/dtheta) flips inside the cell
    std::optional<double> root;   // 1-D only: bisection-refined parameter of the zero
};

struct CausticOptions {
    double tol = default_caustic_tol;  // on |det| normalized by Jacobian row norms
    double root_tol = 1e-12;           // 1-D bisection width
};

// Grid cells where the position Jacobian determinant changes sign or falls
// below tolerance.  Exact graphs produce an empty set.
std::vector<CausticCell> caustic_points(const ParamManifold& m, const GridSpec& grid,
                                        const CausticOptions& opt = {});

// Local generating function around a chart point: Phi(x) with grad Phi = p(x)
// on the caustic-free branch through hp.  Throws CausticAtPoint when the
// projection is singular at hp.
std::function<double(const Eigen::VectorXd&)> local_generating_function(
    const ParamManifold& m, const HomotopyPoint& hp, const QuadratureOptions& opt = {},
    double caustic_tol = default_caustic_tol);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ManifoldCheck {
    bool lagrangian = false;
    bool full_rank = false;
    double max_sigma_defect = 0.0;
    double min_jacobian_sv = 0.0;
};

// Pullback of sigma onto parameter space at sampled points plus an immersion
// rank check.  Deterministic for a fixed seed.
ManifoldCheck check_manifold(const ParamManifold& m, int samples = 100,
                             double tol = default_lagrangian_tol, unsigned seed = 7u);

}  // namespace ptk
