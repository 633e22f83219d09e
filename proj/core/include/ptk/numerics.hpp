#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "ptk/types.hpp"

namespace ptk {

// Refinement-controlled quadrature.  tol is applied as tol * (1 + |value|)
// between successive interval doublings.
struct QuadratureOptions {
    double tol = 1e-9;
    int min_intervals = 8;
    int max_doublings = 22;
};

// Composite Simpson over [a, b] with interval doubling until two successive
// refinements agree to tol * (1 + |value|).  Throws ptk::Error on
// non-convergence within max_doublings.
double integrate_refined(const std::function<double(double)>& f, double a, double b,
                         const QuadratureOptions& opt = {});

// Central finite differences.
double fd_derivative(const std::function<double(double)>& f, double s, double scale = 1.0);

// 4th-order gradient of a scalar field, step h = cbrt(eps) * (1 + |x|_inf).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x);

// Action integral of a polyline: sum over segments of (p_k + p_{k+1})/2 . (x_{k+1} - x_k).
// Exact for the piecewise-linear interpolant of the samples.
double polyline_action(const std::vector<PhasePoint>& polyline);

// Matrix exponential (scaling-and-squaring).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

// Thread cap resolved from the request and the PTK_THREADS environment
// variable; 0 requests the default.
int effective_threads(int requested = 0);

// Deterministic indexed parallel loop.  fn(i) must only touch state owned by
// index i; exceptions are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

// Shortest-format decimal with 17 significant digits (round-trip safe).
std::string format_g17(double v);

}  // namespace ptk
