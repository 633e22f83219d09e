#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "ptk/numerics.hpp"
#include "ptk/types.hpp"

namespace ptk {

// Smooth Hamiltonian H(z, t).  grad returns the stacked gradient
// [dH/dx; dH/dp]; a 4th-order finite-difference fallback is installed when it
// is empty.  The quadratic_homogeneous flag is verified against the Euler
// identity z . grad H = 2 H at deterministic probe points on construction.
struct Hamiltonian {
    int n = 0;
    std::function<double(const PhasePoint&, double)> value;
    std::function<Eigen::VectorXd(const PhasePoint&, double)> grad;
    bool time_independent = false;
    bool quadratic_homogeneous = false;
    bool separable = false;  // H = T(p) + V(x, t); enables Stormer-Verlet

    Hamiltonian() = default;
    Hamiltonian(int dim, std::function<double(const PhasePoint&, double)> h,
                std::function<Eigen::VectorXd(const PhasePoint&, double)> g = {},
                bool time_indep = false, bool quad_homog = false, bool separ = false);

    Eigen::VectorXd gradient(const PhasePoint& z, double t) const;
    // Hamiltonian vector field (dx/dt, dp/dt) = (dH/dp, -dH/dx).
    PhasePoint vector_field(const PhasePoint& z, double t) const;
};

Hamiltonian hamiltonian_free(int n);                                  // |p|^2 / 2
Hamiltonian hamiltonian_harmonic(int n);                              // (|p|^2 + |x|^2) / 2
Hamiltonian hamiltonian_quadratic(const Eigen::MatrixXd& q);          // z . Q z / 2
Hamiltonian hamiltonian_translation(const PhasePoint& z_a);           // sigma(z, z_a)

struct TrajectorySample {
    double t = 0.0;
    PhasePoint z;
    double action = 0.0;  // accumulated integral of p dx - H dt from t0
};

// Time-stamped flow samples with the running action integral; the action is
// zero at the initial time and t is strictly monotone.
struct PhasedTrajectory {
    std::vector<TrajectorySample> samples;

    const TrajectorySample& front() const { return samples.front(); }
    const TrajectorySample& back() const { return samples.back(); }
    std::vector<PhasePoint> points() const;
};

struct FlowOptions {
    int steps = 1024;
    double newton_tol = 1e-12;
    int newton_max_iters = 50;
    bool force_midpoint = false;  // ignore the separable flag
};

// Integrates Hamilton's equations from z0 over [t0, t1] with a symplectic
// one-step method: implicit midpoint by default, Stormer-Verlet when the
// Hamiltonian is declared separable.  The action integral is co-integrated
// with the same quadrature points.  Throws StepFailure when the implicit
// solve does not converge.
PhasedTrajectory flow(const Hamiltonian& h, const PhasePoint& z0, double t0, double t1,
                      const FlowOptions& opt = {});

// Final accumulated integral of p dx - H dt.
double action_increment(const PhasedTrajectory& traj);

struct InvarianceOptions {
    FlowOptions flow;
    int threads = 0;
};

// Circulation of p dx - H dt around the closed boundary swept by a curve
// under the flow up to time t: curve at t=0, endpoint trajectory, transported
// curve reversed, start trajectory reversed.  Vanishes for the exact flow.
double invariance_defect(const Hamiltonian& h, const std::vector<PhasePoint>& curve, double t,
                         const InvarianceOptions& opt = {});

}  // namespace ptk
