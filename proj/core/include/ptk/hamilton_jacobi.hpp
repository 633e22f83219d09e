#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ptk/dynamics.hpp"

namespace ptk {

// Uniform 1-D position grid.
struct HJGrid {
    double lo = -1.0;
    double hi = 1.0;
    int nodes = 101;

    double spacing() const { return (hi - lo) / (nodes - 1); }
    Eigen::VectorXd points() const;
};

// Initial datum Phi' and its derivative (finite differences when absent).
struct HJInitialData {
    std::function<double(double)> phi0;
    std::function<double(double)> dphi0;

    double value(double x) const;
    double slope(double x) const;
};

struct HJOptions {
    FlowOptions flow;
    double caustic_tol = 1e-8;
    int threads = 0;
};

// Characteristics-based solution of the Cauchy problem.  Grid values past a
// node's validity time are NaN; valid_until records, per seeding node, the
// arrival time of the first caustic along its characteristic (+inf if none
// within the horizon).
struct HJSolution {
    HJGrid grid;
    std::vector<double> times;
    Eigen::MatrixXd phi;       // times x nodes; NaN where invalid
    Eigen::MatrixXd momentum;  // grad_x Phi resampled the same way
    std::vector<std::vector<bool>> valid;
    std::vector<double> valid_until;

    double breakdown() const;  // infimum of valid_until

    // CSV rows (t, x, phi, valid) and a JSON string with the grid and
    // breakdown summary.
    void write_csv(std::ostream& os) const;
    std::string metadata_json() const;
};

// Seeds one characteristic per grid node at (x', dPhi0(x')), propagates with
// the symplectic flow co-integrating the action, and resamples Phi(x, t) on
// the fixed grid by monotone inverse cubic interpolation of the foot-point
// map.  Requires a 1-D Hamiltonian.
HJSolution hj_solve(const Hamiltonian& h, const HJInitialData& data, const HJGrid& grid,
                    double t_max, int steps, const HJOptions& opt = {});

// Infimum over the grid of the per-characteristic breakdown time.
double breakdown_time(const Hamiltonian& h, const HJInitialData& data, const HJGrid& grid,
                      double t_max, int steps, const HJOptions& opt = {});

}  // namespace ptk
