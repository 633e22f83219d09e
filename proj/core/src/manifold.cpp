#include "ptk/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ptk/errors.hpp"

namespace ptk {

namespace {

// Normalized determinant of the position Jacobian: det(dx/dtheta) scaled by
// the per-coordinate norms of the full immersion Jacobian, so that the
// caustic tolerance is insensitive to the manifold's overall scale.
double normalized_position_det(const ParamManifold& m, const Eigen::VectorXd& theta) {
    const Eigen::MatrixXd j = m.jacobian(theta);
    const int n = m.n;
    const Eigen::MatrixXd jx = j.topRows(n);
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd pair(2 * n);
        pair.head(n) = jx.row(i).transpose();
        pair.tail(n) = j.row(n + i).transpose();
        scale *= std::max(pair.norm(), 1e-300);
    }
    double det = n == 1 ? jx(0, 0) : jx.determinant();
    return det / scale;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExactManifold
// ---------------------------------------------------------------------------

ExactManifold::ExactManifold(int n, Scalar phi, Gradient grad, Box domain)
    : n_(n), phi_(std::move(phi)), grad_(std::move(grad)), domain_(std::move(domain)) {
    if (n_ < 1) throw std::invalid_argument("ExactManifold: dimension must be >= 1");
    if (!phi_) throw std::invalid_argument("ExactManifold: Phi callable required");
    if (domain_.dim() == 0) domain_ = Box::unbounded(n_);
    if (domain_.dim() != n_) throw std::invalid_argument("ExactManifold: domain dimension mismatch");
}

double ExactManifold::phi(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw std::invalid_argument("ExactManifold::phi: dimension mismatch");
    return phi_(x);
}

Eigen::VectorXd ExactManifold::grad_phi(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw std::invalid_argument("ExactManifold::grad_phi: dimension mismatch");
    if (grad_) return grad_(x);
    return fd_gradient(phi_, x);
}

// ---------------------------------------------------------------------------
// ParamManifold
// ---------------------------------------------------------------------------

PhasePoint ParamManifold::at(const Eigen::VectorXd& theta) const {
    if (theta.size() != n) throw std::invalid_argument("ParamManifold::at: dimension mismatch");
    return psi(theta);
}

Eigen::MatrixXd ParamManifold::jacobian(const Eigen::VectorXd& theta) const {
    if (dpsi) return dpsi(theta);
    // 4th-order central differences, columnwise.
    const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.2) *
                     (1.0 + theta.cwiseAbs().maxCoeff());
    Eigen::MatrixXd j(2 * n, n);
    Eigen::VectorXd probe = theta;
    for (int k = 0; k < n; ++k) {
        const double tk = theta[k];
        probe[k] = tk + 2 * h;
        const Eigen::VectorXd fpp = psi(probe).stacked();
        probe[k] = tk + h;
        const Eigen::VectorXd fp = psi(probe).stacked();
        probe[k] = tk - h;
        const Eigen::VectorXd fm = psi(probe).stacked();
        probe[k] = tk - 2 * h;
        const Eigen::VectorXd fmm = psi(probe).stacked();
        probe[k] = tk;
        j.col(k) = (-fpp + 8.0 * fp - 8.0 * fm + fmm) / (12.0 * h);
    }
    return j;
}

Eigen::MatrixXd ParamManifold::position_jacobian(const Eigen::VectorXd& theta) const {
    return jacobian(theta).topRows(n);
}

bool ParamManifold::any_periodic() const {
    return std::any_of(periodic.begin(), periodic.end(), [](bool b) { return b; });
}

bool ParamManifold::theta_in_domain(const Eigen::VectorXd& theta, double slack) const {
    if (domain.dim() != n) return true;  // unbounded
    for (int i = 0; i < n; ++i) {
        if (periodic[i]) continue;
        if (theta[i] < domain.lo[i] - slack || theta[i] > domain.hi[i] + slack) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

ParamManifold make_circle(double radius, double base_angle) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_circle: radius must be positive");
    ParamManifold m;
    m.n = 1;
    m.psi = [radius](const Eigen::VectorXd& th) {
        return PhasePoint::scalar(radius * std::cos(th[0]), radius * std::sin(th[0]));
    };
    m.dpsi = [radius](const Eigen::VectorXd& th) {
        Eigen::MatrixXd j(2, 1);
        j << -radius * std::sin(th[0]), radius * std::cos(th[0]);
        return j;
    };
    m.periodic = {true};
    m.base_point = Eigen::VectorXd::Constant(1, base_angle);
    return m;
}

ParamManifold make_torus(const Eigen::VectorXd& radii) {
    const int n = static_cast<int>(radii.size());
    if (n < 1 || (radii.array() <= 0.0).any()) {
        throw std::invalid_argument("make_torus: radii must be positive");
    }
    ParamManifold m;
    m.n = n;
    Eigen::VectorXd r = radii;
    m.psi = [r, n](const Eigen::VectorXd& th) {
        Eigen::VectorXd x(n), p(n);
        for (int i = 0; i < n; ++i) {
            x[i] = r[i] * std::cos(th[i]);
            p[i] = r[i] * std::sin(th[i]);
        }
        return PhasePoint(x, p);
    };
    m.dpsi = [r, n](const Eigen::VectorXd& th) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, n);
        for (int i = 0; i < n; ++i) {
            j(i, i) = -r[i] * std::sin(th[i]);
            j(n + i, i) = r[i] * std::cos(th[i]);
        }
        return j;
    };
    m.periodic.assign(n, true);
    m.base_point = Eigen::VectorXd::Zero(n);
    return m;
}

ParamManifold make_linear_plane(const Eigen::MatrixXd& mat) {
    const int n = static_cast<int>(mat.rows());
    if (mat.cols() != n) throw std::invalid_argument("make_linear_plane: M must be square");
    if ((mat - mat.transpose()).cwiseAbs().maxCoeff() >
        default_symplectic_tol * (1.0 + mat.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("make_linear_plane: M must be symmetric");
    }
    ParamManifold m;
    m.n = n;
    Eigen::MatrixXd mcopy = mat;
    m.psi = [mcopy](const Eigen::VectorXd& th) { return PhasePoint(th, mcopy * th); };
    m.dpsi = [mcopy, n](const Eigen::VectorXd&) {
        Eigen::MatrixXd j(2 * n, n);
        j.topRows(n) = Eigen::MatrixXd::Identity(n, n);
        j.bottomRows(n) = mcopy;
        return j;
    };
    m.periodic.assign(n, false);
    m.base_point = Eigen::VectorXd::Zero(n);
    return m;
}

ExactManifold make_exact_quadratic(const Eigen::MatrixXd& mat) {
    const int n = static_cast<int>(mat.rows());
    if (mat.cols() != n) throw std::invalid_argument("make_exact_quadratic: M must be square");
    Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
    return ExactManifold(
        n, [sym](const Eigen::VectorXd& x) { return 0.5 * x.dot(sym * x); },
        [sym](const Eigen::VectorXd& x) { return Eigen::VectorXd(sym * x); });
}

ParamManifold exact_to_param(const ExactManifold& em) {
    const int n = em.dim();
    ParamManifold m;
    m.n = n;
    m.psi = [em](const Eigen::VectorXd& th) { return em.point(th); };
    m.periodic.assign(n, false);
    m.base_point = Eigen::VectorXd::Zero(n);
    m.domain = em.domain();
    if (!m.domain.contains(m.base_point)) {
        m.base_point = 0.5 * (m.domain.lo + m.domain.hi);
    }
    return m;
}

ParamManifold translate_manifold(const ParamManifold& m, const PhasePoint& z_a) {
    if (z_a.dim() != m.n) throw std::invalid_argument("translate_manifold: dimension mismatch");
    ParamManifold out = m;
    auto base_psi = m.psi;
    out.psi = [base_psi, z_a](const Eigen::VectorXd& th) { return base_psi(th) + z_a; };
    // Jacobian unchanged by translation.
    return out;
}

ParamManifold apply_linear(const ParamManifold& m, const SymplecticMap& s) {
    if (s.dim() != m.n) throw std::invalid_argument("apply_linear: dimension mismatch");
    ParamManifold out = m;
    auto base_psi = m.psi;
    auto base_dpsi = m.dpsi;
    const Eigen::MatrixXd mat = s.matrix();
    out.psi = [base_psi, mat](const Eigen::VectorXd& th) {
        return PhasePoint::from_stacked(mat * base_psi(th).stacked());
    };
    if (base_dpsi) {
        out.dpsi = [base_dpsi, mat](const Eigen::VectorXd& th) {
            return Eigen::MatrixXd(mat * base_dpsi(th));
        };
    } else {
        out.dpsi = nullptr;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Homotopy points
// ---------------------------------------------------------------------------

Eigen::VectorXd HomotopyPoint::cover_endpoint() const {
    Eigen::VectorXd v = endpoint;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += two_pi * windings[i];
    return v;
}

HomotopyPoint make_homotopy_point(const ParamManifold& m, const Eigen::VectorXd& endpoint,
                                  const Eigen::VectorXi& windings) {
    if (endpoint.size() != m.n || windings.size() != m.n) {
        throw std::invalid_argument("make_homotopy_point: dimension mismatch");
    }
    for (int i = 0; i < m.n; ++i) {
        if (!m.periodic[i] && windings[i] != 0) {
            throw std::invalid_argument("make_homotopy_point: winding on non-periodic axis");
        }
    }
    HomotopyPoint hp;
    hp.windings = windings;
    hp.endpoint = endpoint;
    hp.path.push_back(m.base_point);
    Eigen::VectorXd cur = m.base_point;
    for (int i = 0; i < m.n; ++i) {
        if (windings[i] != 0) {
            cur[i] += two_pi * windings[i];
            hp.path.push_back(cur);
        }
    }
    Eigen::VectorXd target = hp.cover_endpoint();
    if ((target - cur).cwiseAbs().maxCoeff() > 0.0) hp.path.push_back(target);
    return hp;
}

HomotopyPoint make_homotopy_point(const ParamManifold& m, const Eigen::VectorXd& endpoint) {
    if (endpoint.size() != m.n) {
        throw std::invalid_argument("make_homotopy_point: dimension mismatch");
    }
    HomotopyPoint hp;
    hp.path = {m.base_point, endpoint};
    hp.windings = windings_of_path(m, hp.path);
    hp.endpoint = endpoint;
    for (int i = 0; i < m.n; ++i) hp.endpoint[i] -= two_pi * hp.windings[i];
    return hp;
}

Eigen::VectorXi windings_of_path(const ParamManifold& m,
                                 const std::vector<Eigen::VectorXd>& path) {
    if (path.size() < 1) throw std::invalid_argument("windings_of_path: empty path");
    Eigen::VectorXi w = Eigen::VectorXi::Zero(m.n);
    for (int i = 0; i < m.n; ++i) {
        if (!m.periodic[i]) continue;
        // Net signed crossings of the chart seam at base + pi (mod 2*pi);
        // telescopes along the polyline.
        const double seam = m.base_point[i] + 3.1415926535897932384626433832795;
        const auto cell = [&](double v) { return std::floor((v - seam) / two_pi); };
        w[i] = static_cast<int>(cell(path.back()[i]) - cell(path.front()[i]));
    }
    return w;
}

void validate_homotopy_point(const ParamManifold& m, const HomotopyPoint& hp) {
    if (hp.path.size() < 1 || hp.endpoint.size() != m.n || hp.windings.size() != m.n) {
        throw std::invalid_argument("HomotopyPoint: inconsistent sizes");
    }
    const double tol = 1e-9 * (1.0 + m.base_point.cwiseAbs().maxCoeff());
    if ((hp.path.front() - m.base_point).cwiseAbs().maxCoeff() > tol) {
        throw std::invalid_argument("HomotopyPoint: path must start at the base point");
    }
    if ((hp.path.back() - hp.cover_endpoint()).cwiseAbs().maxCoeff() >
        1e-9 * (1.0 + hp.cover_endpoint().cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("HomotopyPoint: path must end at endpoint + 2*pi*windings");
    }
    for (int i = 0; i < m.n; ++i) {
        if (!m.periodic[i] && hp.windings[i] != 0) {
            throw std::invalid_argument("HomotopyPoint: winding on non-periodic axis");
        }
    }
}

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

double path_action_integral(const std::vector<PhasePoint>& polyline) {
    return polyline_action(polyline);
}

double path_action_integral(const ParamManifold& m, const std::vector<Eigen::VectorXd>& path,
                            const QuadratureOptions& opt) {
    if (path.empty()) {
        throw std::invalid_argument("path_action_integral: empty path");
    }
    if (path.size() == 1) return 0.0;  // constant path
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const Eigen::VectorXd a = path[k];
        const Eigen::VectorXd dir = path[k + 1] - path[k];
        if (dir.cwiseAbs().maxCoeff() == 0.0) continue;
        auto integrand = [&](double s) {
            const Eigen::VectorXd th = a + s * dir;
            const PhasePoint z = m.at(th);
            const Eigen::MatrixXd jx = m.position_jacobian(th);
            return z.p.dot(jx * dir);
        };
        total += integrate_refined(integrand, 0.0, 1.0, opt);
    }
    return total;
}

double phase(const ParamManifold& m, const HomotopyPoint& hp, const QuadratureOptions& opt) {
    validate_homotopy_point(m, hp);
    for (const auto& th : hp.path) {
        if (!m.theta_in_domain(th)) {
            throw std::domain_error("phase: representative path leaves the parameter domain");
        }
    }
    return path_action_integral(m, hp.path, opt);
}

double phase(const ExactManifold& m, const Eigen::VectorXd& x, const Eigen::VectorXd& x_base) {
    if (!m.domain().contains(x) || !m.domain().contains(x_base)) {
        throw std::domain_error("phase: point outside the manifold domain");
    }
    return m.phi(x) - m.phi(x_base);
}

double loop_period(const ParamManifold& m, const LoopClass& loop, const QuadratureOptions& opt) {
    if (loop.windings.size() != m.n) {
        throw std::invalid_argument("loop_period: winding vector dimension mismatch");
    }
    for (int i = 0; i < m.n; ++i) {
        if (!m.periodic[i] && loop.windings[i] != 0) {
            throw std::invalid_argument("loop_period: nonzero winding on non-periodic axis");
        }
    }
    if (loop.contractible()) return 0.0;
    std::vector<Eigen::VectorXd> path;
    path.push_back(m.base_point);
    Eigen::VectorXd cur = m.base_point;
    for (int i = 0; i < m.n; ++i) {
        if (loop.windings[i] != 0) {
            cur[i] += two_pi * loop.windings[i];
            path.push_back(cur);
        }
    }
    return path_action_integral(m, path, opt);
}

// ---------------------------------------------------------------------------
// Caustics
// ---------------------------------------------------------------------------

GridSpec GridSpec::uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int nodes) {
    GridSpec g;
    g.lo = lo;
    g.hi = hi;
    g.nodes = Eigen::VectorXi::Constant(lo.size(), nodes);
    return g;
}

GridSpec default_scan_grid(const ParamManifold& m, int nodes_per_axis) {
    Eigen::VectorXd lo(m.n), hi(m.n);
    for (int i = 0; i < m.n; ++i) {
        if (m.periodic[i]) {
            lo[i] = m.base_point[i];
            hi[i] = m.base_point[i] + two_pi;
        } else if (m.domain.dim() == m.n && std::isfinite(m.domain.lo[i]) &&
                   std::isfinite(m.domain.hi[i])) {
            lo[i] = m.domain.lo[i];
            hi[i] = m.domain.hi[i];
        } else {
            lo[i] = m.base_point[i] - 1.0;
            hi[i] = m.base_point[i] + 1.0;
        }
    }
    return GridSpec::uniform(lo, hi, nodes_per_axis);
}

std::vector<CausticCell> caustic_points(const ParamManifold& m, const GridSpec& grid,
                                        const CausticOptions& opt) {
    if (grid.lo.size() != m.n || grid.hi.size() != m.n || grid.nodes.size() != m.n) {
        throw std::invalid_argument("caustic_points: grid dimension mismatch");
    }
    long total = 1;
    for (int i = 0; i < m.n; ++i) {
        if (grid.nodes[i] < 2) throw std::invalid_argument("caustic_points: need >= 2 nodes per axis");
        total *= grid.nodes[i];
        if (total > 4'000'000) throw std::invalid_argument("caustic_points: grid too large");
    }

    // Evaluate the normalized determinant at every node.
    std::vector<double> det(static_cast<std::size_t>(total));
    Eigen::VectorXd step(m.n);
    for (int i = 0; i < m.n; ++i) step[i] = (grid.hi[i] - grid.lo[i]) / (grid.nodes[i] - 1);
    const auto node_theta = [&](long flat) {
        Eigen::VectorXd th(m.n);
        for (int i = 0; i < m.n; ++i) {
            th[i] = grid.lo[i] + step[i] * static_cast<double>(flat % grid.nodes[i]);
            flat /= grid.nodes[i];
        }
        return th;
    };
    for (long f = 0; f < total; ++f) det[static_cast<std::size_t>(f)] = normalized_position_det(m, node_theta(f));

    // A cell is flagged if any corner determinant is below tolerance or two
    // corners differ in sign.
    std::vector<CausticCell> cells;
    long cell_total = 1;
    for (int i = 0; i < m.n; ++i) cell_total *= grid.nodes[i] - 1;
    for (long c = 0; c < cell_total; ++c) {
        long rem = c;
        Eigen::VectorXi idx(m.n);
        for (int i = 0; i < m.n; ++i) {
            idx[i] = static_cast<int>(rem % (grid.nodes[i] - 1));
            rem /= grid.nodes[i] - 1;
        }
        bool low = false, flip = false;
        double first = 0.0;
        const int corners = 1 << m.n;
        for (int mask = 0; mask < corners; ++mask) {
            long flat = 0, stride = 1;
            for (int i = 0; i < m.n; ++i) {
                flat += (idx[i] + ((mask >> i) & 1)) * stride;
                stride *= grid.nodes[i];
            }
            const double d = det[static_cast<std::size_t>(flat)];
            if (std::abs(d) < opt.tol) low = true;
            if (mask == 0) first = d;
            else if (d * first < 0.0) flip = true;
        }
        if (!low && !flip) continue;

        CausticCell cell;
        cell.lo.resize(m.n);
        cell.hi.resize(m.n);
        for (int i = 0; i < m.n; ++i) {
            cell.lo[i] = grid.lo[i] + step[i] * idx[i];
            cell.hi[i] = cell.lo[i] + step[i];
        }
        cell.sign_change = flip;
        if (m.n == 1 && flip) {
            double a = cell.lo[0], b = cell.hi[0];
            double fa = normalized_position_det(m, Eigen::VectorXd::Constant(1, a));
            while (b - a > opt.root_tol) {
                const double mid = 0.5 * (a + b);
                const double fm = normalized_position_det(m, Eigen::VectorXd::Constant(1, mid));
                if (fa * fm <= 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            cell.root = 0.5 * (a + b);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::function<double(const Eigen::VectorXd&)> local_generating_function(
    const ParamManifold& m, const HomotopyPoint& hp, const QuadratureOptions& opt,
    double caustic_tol) {
    validate_homotopy_point(m, hp);
    const Eigen::VectorXd theta0 = hp.cover_endpoint();
    if (std::abs(normalized_position_det(m, theta0)) < caustic_tol) {
        throw CausticAtPoint("local_generating_function: projection singular at chart point");
    }
    const double phi0 = phase(m, hp, opt);
    const ParamManifold mf = m;
    const QuadratureOptions qopt = opt;
    return [mf, theta0, phi0, qopt](const Eigen::VectorXd& x) {
        if (x.size() != mf.n) {
            throw std::invalid_argument("local generating function: dimension mismatch");
        }
        Eigen::VectorXd th = theta0;
        const double tol = 1e-12 * (1.0 + x.cwiseAbs().maxCoeff());
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            const Eigen::VectorXd fx = mf.at(th).x - x;
            if (fx.cwiseAbs().maxCoeff() <= tol) {
                converged = true;
                break;
            }
            const Eigen::MatrixXd jx = mf.position_jacobian(th);
            th -= jx.fullPivLu().solve(fx);
        }
        if (!converged) {
            throw Error("local generating function: chart inversion did not converge");
        }
        return phi0 + path_action_integral(mf, {theta0, th}, qopt);
    };
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ManifoldCheck check_manifold(const ParamManifold& m, int samples, double tol, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ManifoldCheck out;
    out.lagrangian = true;
    out.full_rank = true;
    out.min_jacobian_sv = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd th(m.n);
        for (int i = 0; i < m.n; ++i) {
            if (m.periodic[i]) {
                th[i] = m.base_point[i] + two_pi * u01(rng);
            } else {
                double lo = m.base_point[i] - 1.0, hi = m.base_point[i] + 1.0;
                if (m.domain.dim() == m.n && std::isfinite(m.domain.lo[i]) &&
                    std::isfinite(m.domain.hi[i])) {
                    lo = m.domain.lo[i];
                    hi = m.domain.hi[i];
                }
                th[i] = lo + (hi - lo) * u01(rng);
            }
        }
        const Eigen::MatrixXd j = m.jacobian(th);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
        const double smax = svd.singularValues()[0];
        const double smin = svd.singularValues()[m.n - 1];
        out.min_jacobian_sv = std::min(out.min_jacobian_sv, smin);
        if (smin <= 1e-10 * std::max(1.0, smax)) out.full_rank = false;
        for (int a = 0; a < m.n; ++a) {
            const auto ta = PhasePoint::from_stacked(j.col(a));
            for (int b = a + 1; b < m.n; ++b) {
                const auto tb = PhasePoint::from_stacked(j.col(b));
                const double defect = std::abs(symplectic_form(ta, tb)) /
                                      (1.0 + j.col(a).norm() * j.col(b).norm());
                out.max_sigma_defect = std::max(out.max_sigma_defect, defect);
            }
        }
    }
    if (out.max_sigma_defect > tol) out.lagrangian = false;
    return out;
}

}  // namespace ptk
