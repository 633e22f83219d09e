#include "ptk/hamilton_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ptk/errors.hpp"
#include "ptk/numerics.hpp"

namespace ptk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Cubic Lagrange interpolation through up to four samples.
double lagrange_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const std::size_t m = xs.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double w = ys[i];
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            w *= (x - xs[j]) / (xs[i] - xs[j]);
        }
        acc += w;
    }
    return acc;
}

}  // namespace

Eigen::VectorXd HJGrid::points() const {
    if (nodes < 4) throw std::invalid_argument("HJGrid: need at least 4 nodes");
    if (!(hi > lo)) throw std::invalid_argument("HJGrid: hi must exceed lo");
    return Eigen::VectorXd::LinSpaced(nodes, lo, hi);
}

double HJInitialData::value(double x) const {
    if (!phi0) throw std::invalid_argument("HJInitialData: phi0 callable required");
    return phi0(x);
}

double HJInitialData::slope(double x) const {
    if (dphi0) return dphi0(x);
    return fd_derivative(phi0, x);
}

double HJSolution::breakdown() const {
    double t = kInf;
    for (double v : valid_until) t = std::min(t, v);
    return t;
}

void HJSolution::write_csv(std::ostream& os) const {
    const Eigen::VectorXd xs = grid.points();
    os << "t,x,phi,valid\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (int j = 0; j < grid.nodes; ++j) {
            const bool ok = valid[k][static_cast<std::size_t>(j)];
            os << format_g17(times[k]) << ',' << format_g17(xs[j]) << ','
               << (ok ? format_g17(phi(static_cast<Eigen::Index>(k), j)) : std::string("nan"))
               << ',' << (ok ? 1 : 0) << '\n';
        }
    }
}

std::string HJSolution::metadata_json() const {
    std::ostringstream os;
    const double bd = breakdown();
    int broken = 0;
    for (double v : valid_until) {
        if (std::isfinite(v)) ++broken;
    }
    os << "{\"grid\":{\"lo\":" << format_g17(grid.lo) << ",\"hi\":" << format_g17(grid.hi)
       << ",\"nodes\":" << grid.nodes << "},\"times\":" << times.size()
       << ",\"breakdown_time\":" << (std::isfinite(bd) ? format_g17(bd) : std::string("null"))
       << ",\"nodes_with_breakdown\":" << broken << "}";
    return os.str();
}

HJSolution hj_solve(const Hamiltonian& ham, const HJInitialData& data, const HJGrid& grid,
                    double t_max, int steps, const HJOptions& opt) {
    if (ham.n != 1) {
        throw std::invalid_argument("hj_solve: only 1-D position grids are supported");
    }
    if (!(t_max > 0.0) || steps < 1) {
        throw std::invalid_argument("hj_solve: need t_max > 0 and steps >= 1");
    }
    const Eigen::VectorXd seeds = grid.points();
    const int nn = grid.nodes;
    const int nt = steps + 1;

    // Propagate one characteristic per node, sharing the time discretization.
    FlowOptions fopt = opt.flow;
    fopt.steps = steps;
    Eigen::MatrixXd xs(nt, nn), ps(nt, nn), phis(nt, nn);
    parallel_for(
        static_cast<std::size_t>(nn),
        [&](std::size_t j) {
            const double x0 = seeds[static_cast<Eigen::Index>(j)];
            const double phi_seed = data.value(x0);
            const PhasePoint z0 = PhasePoint::scalar(x0, data.slope(x0));
            const PhasedTrajectory traj = flow(ham, z0, 0.0, t_max, fopt);
            for (int k = 0; k < nt; ++k) {
                xs(k, static_cast<Eigen::Index>(j)) = traj.samples[k].z.x[0];
                ps(k, static_cast<Eigen::Index>(j)) = traj.samples[k].z.p[0];
                phis(k, static_cast<Eigen::Index>(j)) = phi_seed + traj.samples[k].action;
            }
        },
        opt.threads);

    HJSolution out;
    out.grid = grid;
    out.times.resize(nt);
    const double dt = t_max / steps;
    for (int k = 0; k < nt; ++k) out.times[k] = k * dt;

    // Breakdown per characteristic: sign change (or collapse below tolerance)
    // of the foot-point map derivative dx_t/dx', estimated from neighboring
    // characteristics.
    out.valid_until.assign(nn, kInf);
    Eigen::MatrixXd dets(nt, nn);
    for (int k = 0; k < nt; ++k) {
        for (int j = 0; j < nn; ++j) {
            const int jl = std::max(0, j - 1);
            const int jr = std::min(nn - 1, j + 1);
            dets(k, j) = (xs(k, jr) - xs(k, jl)) / (seeds[jr] - seeds[jl]);
        }
    }
    const double det_scale = std::abs(dets.row(0).cwiseAbs().maxCoeff());
    const double det_tol = opt.caustic_tol * std::max(1.0, det_scale);
    for (int j = 0; j < nn; ++j) {
        for (int k = 1; k < nt; ++k) {
            const double prev = dets(k - 1, j);
            const double cur = dets(k, j);
            if (cur * dets(0, j) <= 0.0 || std::abs(cur) < det_tol) {
                // Linear interpolation of the sign change instant.
                double tb = out.times[k];
                if (prev * cur < 0.0) {
                    tb = out.times[k - 1] + dt * prev / (prev - cur);
                }
                out.valid_until[static_cast<std::size_t>(j)] = tb;
                break;
            }
        }
    }

    // Resample Phi onto the fixed grid while the foot-point map is single
    // valued over the bracketing characteristics.
    out.phi = Eigen::MatrixXd::Constant(nt, nn, kNan);
    out.momentum = Eigen::MatrixXd::Constant(nt, nn, kNan);
    out.valid.assign(nt, std::vector<bool>(nn, false));
    const int orient = dets(0, nn / 2) >= 0.0 ? 1 : -1;
    for (int k = 0; k < nt; ++k) {
        const double t = out.times[k];
        for (int j = 0; j < nn; ++j) {
            const double xq = seeds[j];
            // Bracket xq among this slice's characteristic positions.  A
            // query may coincide with a characteristic (always at t = 0), in
            // which case the hit is the unique foot candidate.
            const double hit_tol = 1e-12 * (1.0 + std::abs(xq));
            int bracket = -1;
            int bracket_count = 0;
            for (int i = 0; i < nn; ++i) {
                if (std::abs(xs(k, i) - xq) <= hit_tol) {
                    bracket = std::min(std::max(i, 0), nn - 2);
                    bracket_count = 1;
                    break;
                }
            }
            if (bracket < 0) {
                for (int i = 0; i + 1 < nn; ++i) {
                    const double a = xs(k, i), b = xs(k, i + 1);
                    if ((xq - a) * (xq - b) < 0.0) {
                        ++bracket_count;
                        if (bracket < 0) bracket = i;
                    }
                }
            }
            if (bracket < 0 || bracket_count > 1) continue;

            // Both bracketing characteristics must be pre-breakdown and the
            // local map monotone in the seeding orientation.
            const double det_here = 0.5 * (dets(k, bracket) + dets(k, bracket + 1));
            if (t >= out.valid_until[static_cast<std::size_t>(bracket)] ||
                t >= out.valid_until[static_cast<std::size_t>(bracket + 1)] ||
                orient * det_here <= 0.0) {
                continue;
            }

            const int lo = std::max(0, std::min(bracket - 1, nn - 4));
            std::vector<double> sx, sxt, sphi, sp;
            for (int i = lo; i < lo + 4; ++i) {
                sx.push_back(seeds[i]);
                sxt.push_back(xs(k, i));
                sphi.push_back(phis(k, i));
                sp.push_back(ps(k, i));
            }
            // Invert the cubic x_t(x') by Newton from the linear estimate.
            const double a = xs(k, bracket), b = xs(k, bracket + 1);
            double foot = seeds[bracket] +
                          (seeds[bracket + 1] - seeds[bracket]) * (xq - a) / (b - a);
            for (int it = 0; it < 30; ++it) {
                const double f = lagrange_eval(sx, sxt, foot) - xq;
                if (std::abs(f) <= 1e-13 * (1.0 + std::abs(xq))) break;
                const double h = 1e-6 * (1.0 + std::abs(foot));
                const double df =
                    (lagrange_eval(sx, sxt, foot + h) - lagrange_eval(sx, sxt, foot - h)) /
                    (2.0 * h);
                if (df == 0.0) break;
                foot -= f / df;
            }
            out.phi(k, j) = lagrange_eval(sx, sphi, foot);
            out.momentum(k, j) = lagrange_eval(sx, sp, foot);
            out.valid[k][static_cast<std::size_t>(j)] = true;
        }
    }
    return out;
}

double breakdown_time(const Hamiltonian& ham, const HJInitialData& data, const HJGrid& grid,
                      double t_max, int steps, const HJOptions& opt) {
    return hj_solve(ham, data, grid, t_max, steps, opt).breakdown();
}

}  // namespace ptk
