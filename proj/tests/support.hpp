#pragma once

// Shared helpers for the test suites: deterministic random inputs and
// finite-difference probes kept independent of the library internals.

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "ptk/dynamics.hpp"
#include "ptk/symplectic.hpp"
#include "ptk/types.hpp"

namespace ptk_test {

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            m(i, j) = scale * u(rng);
            m(j, i) = m(i, j);
        }
    }
    return m;
}

inline ptk::PhasePoint random_point(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd x(n), p(n);
    for (int i = 0; i < n; ++i) {
        x[i] = u(rng);
        p[i] = u(rng);
    }
    return {x, p};
}

// Independent brute-force evaluation of sigma as the explicit double sum.
inline double sigma_brute_force(const ptk::PhasePoint& z, const ptk::PhasePoint& z2) {
    double acc = 0.0;
    for (int j = 0; j < z.dim(); ++j) {
        acc += z.p[j] * z2.x[j] - z2.p[j] * z.x[j];
    }
    return acc;
}

// Finite-difference Jacobian of the time-t flow map.
inline Eigen::MatrixXd flow_jacobian_fd(const ptk::Hamiltonian& ham, const ptk::PhasePoint& z0,
                                        double t, const ptk::FlowOptions& opt, double h = 1e-5) {
    const int dim = 2 * ham.n;
    Eigen::MatrixXd jac(dim, dim);
    const Eigen::VectorXd base = z0.stacked();
    for (int k = 0; k < dim; ++k) {
        Eigen::VectorXd zp = base, zm = base;
        zp[k] += h;
        zm[k] -= h;
        const Eigen::VectorXd fp =
            ptk::flow(ham, ptk::PhasePoint::from_stacked(zp), 0.0, t, opt).back().z.stacked();
        const Eigen::VectorXd fm =
            ptk::flow(ham, ptk::PhasePoint::from_stacked(zm), 0.0, t, opt).back().z.stacked();
        jac.col(k) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

inline ptk::Hamiltonian quartic_oscillator() {
    return ptk::Hamiltonian(
        1,
        [](const ptk::PhasePoint& z, double) {
            return 0.5 * z.p.squaredNorm() + 0.25 * std::pow(z.x[0], 4);
        },
        [](const ptk::PhasePoint& z, double) {
            Eigen::VectorXd g(2);
            g << std::pow(z.x[0], 3), z.p[0];
            return g;
        },
        /*time_indep=*/true, /*quad_homog=*/false, /*separ=*/true);
}

}  // namespace ptk_test
