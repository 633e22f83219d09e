#include "ptk/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ptk/errors.hpp"

namespace ptk {

namespace {

Eigen::VectorXd fd_grad_z(const std::function<double(const PhasePoint&, double)>& h,
                          const PhasePoint& z, double t) {
    return fd_gradient(
        [&](const Eigen::VectorXd& v) { return h(PhasePoint::from_stacked(v), t); },
        z.stacked());
}

// Finite-difference Hessian of H in z, built on the gradient.
Eigen::MatrixXd fd_hessian(const Hamiltonian& h, const PhasePoint& z, double t) {
    const Eigen::VectorXd z0 = z.stacked();
    const int dim = static_cast<int>(z0.size());
    const double step = std::sqrt(std::numeric_limits<double>::epsilon()) *
                        (1.0 + z0.cwiseAbs().maxCoeff());
    Eigen::MatrixXd hess(dim, dim);
    Eigen::VectorXd probe = z0;
    for (int k = 0; k < dim; ++k) {
        probe[k] = z0[k] + step;
        const Eigen::VectorXd gp = h.gradient(PhasePoint::from_stacked(probe), t);
        probe[k] = z0[k] - step;
        const Eigen::VectorXd gm = h.gradient(PhasePoint::from_stacked(probe), t);
        probe[k] = z0[k];
        hess.col(k) = (gp - gm) / (2.0 * step);
    }
    return hess;
}

}  // namespace

Hamiltonian::Hamiltonian(int dim, std::function<double(const PhasePoint&, double)> h,
                         std::function<Eigen::VectorXd(const PhasePoint&, double)> g,
                         bool time_indep, bool quad_homog, bool separ)
    : n(dim),
      value(std::move(h)),
      grad(std::move(g)),
      time_independent(time_indep),
      quadratic_homogeneous(quad_homog),
      separable(separ) {
    if (n < 1) throw std::invalid_argument("Hamiltonian: dimension must be >= 1");
    if (!value) throw std::invalid_argument("Hamiltonian: value callable required");
    if (quadratic_homogeneous) {
        // Euler identity z . grad H = 2 H at deterministic probe points.
        std::mt19937_64 rng(12345);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 8; ++trial) {
            Eigen::VectorXd v(2 * n);
            for (int i = 0; i < 2 * n; ++i) v[i] = u(rng);
            const PhasePoint z = PhasePoint::from_stacked(v);
            const double lhs = v.dot(gradient(z, 0.0));
            const double rhs = 2.0 * value(z, 0.0);
            if (std::abs(lhs - rhs) > 1e-8 * (1.0 + std::abs(rhs))) {
                throw std::invalid_argument(
                    "Hamiltonian: quadratic_homogeneous flag fails the Euler identity");
            }
        }
    }
}

Eigen::VectorXd Hamiltonian::gradient(const PhasePoint& z, double t) const {
    if (grad) return grad(z, t);
    return fd_grad_z(value, z, t);
}

PhasePoint Hamiltonian::vector_field(const PhasePoint& z, double t) const {
    const Eigen::VectorXd g = gradient(z, t);
    return {g.tail(n), -g.head(n)};
}

Hamiltonian hamiltonian_free(int n) {
    return Hamiltonian(
        n, [](const PhasePoint& z, double) { return 0.5 * z.p.squaredNorm(); },
        [n](const PhasePoint& z, double) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
            g.tail(n) = z.p;
            return g;
        },
        /*time_indep=*/true, /*quad_homog=*/true, /*separ=*/true);
}

Hamiltonian hamiltonian_harmonic(int n) {
    return Hamiltonian(
        n,
        [](const PhasePoint& z, double) {
            return 0.5 * (z.p.squaredNorm() + z.x.squaredNorm());
        },
        [n](const PhasePoint& z, double) {
            Eigen::VectorXd g(2 * n);
            g.head(n) = z.x;
            g.tail(n) = z.p;
            return g;
        },
        true, true, true);
}

Hamiltonian hamiltonian_quadratic(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols() || q.rows() % 2 != 0 || q.rows() == 0) {
        throw std::invalid_argument("hamiltonian_quadratic: Q must be square of even dimension");
    }
    const int n = static_cast<int>(q.rows()) / 2;
    const Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
    return Hamiltonian(
        n,
        [sym](const PhasePoint& z, double) {
            const Eigen::VectorXd v = z.stacked();
            return 0.5 * v.dot(sym * v);
        },
        [sym](const PhasePoint& z, double) { return Eigen::VectorXd(sym * z.stacked()); },
        true, true, false);
}

Hamiltonian hamiltonian_translation(const PhasePoint& z_a) {
    const int n = z_a.dim();
    return Hamiltonian(
        n,
        [z_a](const PhasePoint& z, double) {
            return z.p.dot(z_a.x) - z_a.p.dot(z.x);
        },
        [z_a, n](const PhasePoint&, double) {
            Eigen::VectorXd g(2 * n);
            g.head(n) = -z_a.p;
            g.tail(n) = z_a.x;
            return g;
        },
        true, false, false);
}

std::vector<PhasePoint> PhasedTrajectory::points() const {
    std::vector<PhasePoint> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.z);
    return out;
}

namespace {

// One implicit midpoint step from (t, z) with step h.  Returns the new point
// and adds the action increment p_mid . dx - h H(z_mid, t_mid).
PhasePoint midpoint_step(const Hamiltonian& ham, const PhasePoint& z, double t, double h,
                         const FlowOptions& opt, double& action) {
    const int dim = 2 * ham.n;
    const Eigen::VectorXd z0 = z.stacked();
    const double t_mid = t + 0.5 * h;

    // Predictor: explicit Euler.
    Eigen::VectorXd z1 = z0 + h * ham.vector_field(z, t).stacked();
    bool converged = false;
    for (int it = 0; it < opt.newton_max_iters; ++it) {
        const PhasePoint z_mid = PhasePoint::from_stacked(0.5 * (z0 + z1));
        const Eigen::VectorXd field = ham.vector_field(z_mid, t_mid).stacked();
        const Eigen::VectorXd residual = z1 - z0 - h * field;
        if (residual.cwiseAbs().maxCoeff() <=
            opt.newton_tol * (1.0 + z1.cwiseAbs().maxCoeff())) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd hess = fd_hessian(ham, z_mid, t_mid);
        Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(dim, dim);
        Eigen::MatrixXd jh(dim, dim);
        jh.topRows(ham.n) = hess.bottomRows(ham.n);
        jh.bottomRows(ham.n) = -hess.topRows(ham.n);
        jac -= 0.5 * h * jh;
        z1 -= jac.partialPivLu().solve(residual);
    }
    if (!converged) {
        throw StepFailure(t, "flow: implicit midpoint solve did not converge at t = " +
                                 format_g17(t));
    }
    const PhasePoint z_mid = PhasePoint::from_stacked(0.5 * (z0 + z1));
    const PhasePoint z_new = PhasePoint::from_stacked(z1);
    action += z_mid.p.dot(z_new.x - z.x) - h * ham.value(z_mid, t_mid);
    return z_new;
}

// One Stormer-Verlet step for separable H = T(p) + V(x, t).
PhasePoint verlet_step(const Hamiltonian& ham, const PhasePoint& z, double t, double h,
                       double& action) {
    const int n = ham.n;
    const Eigen::VectorXd gx0 = ham.gradient(z, t).head(n);
    const Eigen::VectorXd p_half = z.p - 0.5 * h * gx0;
    const PhasePoint half(z.x, p_half);
    const Eigen::VectorXd drift = ham.gradient(half, t + 0.5 * h).tail(n);
    const Eigen::VectorXd x1 = z.x + h * drift;
    const PhasePoint at_x1(x1, p_half);
    const Eigen::VectorXd gx1 = ham.gradient(at_x1, t + h).head(n);
    const Eigen::VectorXd p1 = p_half - 0.5 * h * gx1;

    const PhasePoint mid(0.5 * (z.x + x1), p_half);
    action += p_half.dot(x1 - z.x) - h * ham.value(mid, t + 0.5 * h);
    return {x1, p1};
}

}  // namespace

PhasedTrajectory flow(const Hamiltonian& ham, const PhasePoint& z0, double t0, double t1,
                      const FlowOptions& opt) {
    if (z0.dim() != ham.n) throw std::invalid_argument("flow: dimension mismatch");
    if (opt.steps < 1) throw std::invalid_argument("flow: steps must be >= 1");

    PhasedTrajectory traj;
    traj.samples.reserve(opt.steps + 1);
    traj.samples.push_back({t0, z0, 0.0});
    if (t1 == t0) return traj;

    const double h = (t1 - t0) / opt.steps;
    const bool use_verlet = ham.separable && !opt.force_midpoint;
    PhasePoint z = z0;
    double action = 0.0;
    for (int k = 0; k < opt.steps; ++k) {
        const double t = t0 + k * h;
        z = use_verlet ? verlet_step(ham, z, t, h, action)
                       : midpoint_step(ham, z, t, h, opt, action);
        traj.samples.push_back({t0 + (k + 1) * h, z, action});
    }
    return traj;
}

double action_increment(const PhasedTrajectory& traj) {
    if (traj.samples.empty()) throw std::invalid_argument("action_increment: empty trajectory");
    return traj.samples.back().action;
}

double invariance_defect(const Hamiltonian& ham, const std::vector<PhasePoint>& curve, double t,
                         const InvarianceOptions& opt) {
    if (curve.size() < 2) throw std::invalid_argument("invariance_defect: need >= 2 curve samples");
    if (t == 0.0) return 0.0;

    std::vector<PhasePoint> transported(curve.size());
    std::vector<double> actions(curve.size());
    parallel_for(
        curve.size(),
        [&](std::size_t i) {
            const PhasedTrajectory traj = flow(ham, curve[i], 0.0, t, opt.flow);
            transported[i] = traj.back().z;
            actions[i] = traj.back().action;
        },
        opt.threads);

    const double along_curve_0 = polyline_action(curve);
    const double along_curve_t = polyline_action(transported);
    return along_curve_0 + actions.back() - along_curve_t - actions.front();
}

}  // namespace ptk
