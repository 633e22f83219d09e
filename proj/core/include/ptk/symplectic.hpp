#pragma once

#include <Eigen/Core>

#include <random>

#include "ptk/types.hpp"

namespace ptk {

inline constexpr double default_symplectic_tol = 1e-9;
inline constexpr double default_det_tol = 1e-12;

// Standard symplectic unit J = (0 I; -I 0) of size 2n x 2n.
Eigen::MatrixXd symplectic_unit(int n);

// sigma(z, z') = p . x' - p' . x.  Antisymmetric, bilinear.
double symplectic_form(const PhasePoint& z, const PhasePoint& z2);

// True iff |S^T J S - J|_max <= tol * (1 + |S|_max)^2.  S must be square with
// even dimension.
bool is_symplectic(const Eigen::MatrixXd& s, double tol = default_symplectic_tol);

// Linear map preserving sigma, in block form S = (A B; C D).
class SymplecticMap {
public:
    explicit SymplecticMap(Eigen::MatrixXd s, double tol = default_symplectic_tol);

    static SymplecticMap identity(int n);
    static SymplecticMap from_blocks(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::MatrixXd& c, const Eigen::MatrixXd& d,
                                     double tol = default_symplectic_tol);
    // The map z = (x, p) -> (p, -x), i.e. the matrix J itself.
    static SymplecticMap rotation_j(int n);

    int dim() const { return n_; }
    const Eigen::MatrixXd& matrix() const { return s_; }

    Eigen::MatrixXd block_a() const { return s_.topLeftCorner(n_, n_); }
    Eigen::MatrixXd block_b() const { return s_.topRightCorner(n_, n_); }
    Eigen::MatrixXd block_c() const { return s_.bottomLeftCorner(n_, n_); }
    Eigen::MatrixXd block_d() const { return s_.bottomRightCorner(n_, n_); }

    PhasePoint apply(const PhasePoint& z) const;
    SymplecticMap inverse() const;

private:
    Eigen::MatrixXd s_;
    int n_ = 0;
};

// Linear Lagrangian plane { z : A x + B p = 0 } with rank [A B] = n.
struct LagrangianPlane {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;

    // Graph plane p = M x, written as M x - p = 0.
    static LagrangianPlane graph(const Eigen::MatrixXd& m);
};

// True iff rank [A B] = n (numeric rank, threshold tol * sigma_max) and the
// form sigma vanishes on every pair of kernel basis vectors to tol.
bool is_lagrangian_plane(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         double tol = default_symplectic_tol);
bool is_lagrangian_plane(const LagrangianPlane& plane, double tol = default_symplectic_tol);

// Quadratic generating function of a free map (det B != 0):
//   W(xs, x) = 1/2 (D B^-1) xs.xs - (B^-1 xs).x + 1/2 (B^-1 A) x.x
// with ps = grad_1 W(xs, x) and p = -grad_2 W(xs, x) whenever (xs, ps) = S (x, p).
// Throws FreeConditionViolated when B is singular.
double free_generating_function(const SymplecticMap& s, const Eigen::VectorXd& xs,
                                const Eigen::VectorXd& x, double det_tol = default_det_tol);

// Phase increment 1/2 (ps . xs - p . x) of a linear frame change at z.
// Equals W(xs, x) whenever S is free.
double frame_phase_shift(const SymplecticMap& s, const PhasePoint& z);

// Random symplectic matrix exp(tau J Sym), symplectic by construction.
SymplecticMap random_symplectic(int n, std::mt19937_64& rng, double spread = 1.0);

}  // namespace ptk
