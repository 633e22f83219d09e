#include "ptk/symplectic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "ptk/errors.hpp"
#include "ptk/numerics.hpp"

namespace ptk {

Eigen::MatrixXd symplectic_unit(int n) {
    if (n < 1) throw std::invalid_argument("symplectic_unit: n must be >= 1");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    j.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return j;
}

double symplectic_form(const PhasePoint& z, const PhasePoint& z2) {
    if (z.dim() != z2.dim()) {
        throw std::invalid_argument("symplectic_form: dimension mismatch");
    }
    return z.p.dot(z2.x) - z2.p.dot(z.x);
}

bool is_symplectic(const Eigen::MatrixXd& s, double tol) {
    if (s.rows() != s.cols()) {
        throw std::invalid_argument("is_symplectic: matrix must be square");
    }
    if (s.rows() % 2 != 0 || s.rows() == 0) {
        throw std::invalid_argument("is_symplectic: matrix must have even positive dimension");
    }
    const int n = static_cast<int>(s.rows()) / 2;
    const Eigen::MatrixXd j = symplectic_unit(n);
    const double norm = s.cwiseAbs().maxCoeff();
    const double defect = (s.transpose() * j * s - j).cwiseAbs().maxCoeff();
    return defect <= tol * (1.0 + norm) * (1.0 + norm);
}

SymplecticMap::SymplecticMap(Eigen::MatrixXd s, double tol) : s_(std::move(s)) {
    if (!is_symplectic(s_, tol)) {
        throw std::invalid_argument("SymplecticMap: matrix fails S^T J S = J at tolerance");
    }
    n_ = static_cast<int>(s_.rows()) / 2;
}

SymplecticMap SymplecticMap::identity(int n) {
    return SymplecticMap(Eigen::MatrixXd::Identity(2 * n, 2 * n));
}

SymplecticMap SymplecticMap::from_blocks(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         const Eigen::MatrixXd& c, const Eigen::MatrixXd& d,
                                         double tol) {
    const auto n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n || c.rows() != n || c.cols() != n ||
        d.rows() != n || d.cols() != n) {
        throw std::invalid_argument("SymplecticMap: blocks must be square of equal size");
    }
    Eigen::MatrixXd s(2 * n, 2 * n);
    s.topLeftCorner(n, n) = a;
    s.topRightCorner(n, n) = b;
    s.bottomLeftCorner(n, n) = c;
    s.bottomRightCorner(n, n) = d;
    return SymplecticMap(std::move(s), tol);
}

SymplecticMap SymplecticMap::rotation_j(int n) {
    return SymplecticMap(symplectic_unit(n));
}

PhasePoint SymplecticMap::apply(const PhasePoint& z) const {
    if (z.dim() != n_) throw std::invalid_argument("SymplecticMap::apply: dimension mismatch");
    return PhasePoint::from_stacked(s_ * z.stacked());
}

SymplecticMap SymplecticMap::inverse() const {
    // S^-1 = J^T S^T J for symplectic S.
    const Eigen::MatrixXd j = symplectic_unit(n_);
    return SymplecticMap(j.transpose() * s_.transpose() * j);
}

LagrangianPlane LagrangianPlane::graph(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("LagrangianPlane::graph: M must be square");
    }
    LagrangianPlane plane;
    plane.a = m;
    plane.b = -Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return plane;
}

bool is_lagrangian_plane(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
    const auto n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n) {
        throw std::invalid_argument("is_lagrangian_plane: A and B must be square of equal size");
    }
    Eigen::MatrixXd k(n, 2 * n);
    k << a, b;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > tol * smax) ++rank;
    }
    if (rank != n) return false;

    // sigma must vanish on the kernel of [A B]; its basis are the trailing
    // right singular vectors.
    const Eigen::MatrixXd kernel = svd.matrixV().rightCols(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto zi = PhasePoint::from_stacked(kernel.col(i));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto zj = PhasePoint::from_stacked(kernel.col(j));
            if (std::abs(symplectic_form(zi, zj)) > tol) return false;
        }
    }
    return true;
}

bool is_lagrangian_plane(const LagrangianPlane& plane, double tol) {
    return is_lagrangian_plane(plane.a, plane.b, tol);
}

double free_generating_function(const SymplecticMap& s, const Eigen::VectorXd& xs,
                                const Eigen::VectorXd& x, double det_tol) {
    const int n = s.dim();
    if (xs.size() != n || x.size() != n) {
        throw std::invalid_argument("free_generating_function: argument size mismatch");
    }
    const Eigen::MatrixXd b = s.block_b();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    lu.setThreshold(det_tol);
    if (!lu.isInvertible()) {
        throw FreeConditionViolated("free_generating_function: block B is singular");
    }
    const Eigen::VectorXd binv_xs = lu.solve(xs);
    const Eigen::VectorXd binv_ax = lu.solve(s.block_a() * x);
    return 0.5 * xs.dot(s.block_d() * binv_xs) - binv_xs.dot(x) + 0.5 * x.dot(binv_ax);
}

double frame_phase_shift(const SymplecticMap& s, const PhasePoint& z) {
    const PhasePoint zs = s.apply(z);
    return 0.5 * (zs.p.dot(zs.x) - z.p.dot(z.x));
}

SymplecticMap random_symplectic(int n, std::mt19937_64& rng, double spread) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd sym(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        for (int j = i; j < 2 * n; ++j) {
            sym(i, j) = u(rng);
            sym(j, i) = sym(i, j);
        }
    }
    // J Sym lies in the symplectic Lie algebra, so the exponential is
    // symplectic by construction.
    const Eigen::MatrixXd gen = symplectic_unit(n) * sym * (spread / (2.0 * n));
    return SymplecticMap(matrix_exponential(gen));
}

}  // namespace ptk
