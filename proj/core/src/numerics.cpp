#include "ptk/numerics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ptk/errors.hpp"

namespace ptk {

namespace {

double composite_simpson(const std::function<double(double)>& f, double a, double b, int n) {
    // n intervals (even).
    const double h = (b - a) / n;
    double odd = 0.0, even = 0.0;
    for (int k = 1; k < n; k += 2) odd += f(a + k * h);
    for (int k = 2; k < n; k += 2) even += f(a + k * h);
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

}  // namespace

double integrate_refined(const std::function<double(double)>& f, double a, double b,
                         const QuadratureOptions& opt) {
    if (a == b) return 0.0;
    int n = opt.min_intervals < 2 ? 2 : opt.min_intervals + (opt.min_intervals % 2);
    double prev = composite_simpson(f, a, b, n);
    for (int level = 0; level < opt.max_doublings; ++level) {
        n *= 2;
        const double cur = composite_simpson(f, a, b, n);
        if (std::abs(cur - prev) <= opt.tol * (1.0 + std::abs(cur))) {
            return cur;
        }
        prev = cur;
    }
    throw Error("integrate_refined: quadrature did not converge");
}

double fd_derivative(const std::function<double(double)>& f, double s, double scale) {
    // 4th-order stencil; step tuned for it.
    const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.2) *
                     (1.0 + std::abs(s)) * std::abs(scale);
    return (-f(s + 2 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2 * h)) / (12.0 * h);
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                     (1.0 + x.cwiseAbs().maxCoeff());
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        probe[i] = xi + 2 * h;
        const double fpp = f(probe);
        probe[i] = xi + h;
        const double fp = f(probe);
        probe[i] = xi - h;
        const double fm = f(probe);
        probe[i] = xi - 2 * h;
        const double fmm = f(probe);
        probe[i] = xi;
        g[i] = (-fpp + 8.0 * fp - 8.0 * fm + fmm) / (12.0 * h);
    }
    return g;
}

double polyline_action(const std::vector<PhasePoint>& polyline) {
    if (polyline.size() < 2) {
        throw std::invalid_argument("polyline_action: need at least 2 samples");
    }
    const int n = polyline.front().dim();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < polyline.size(); ++k) {
        if (polyline[k + 1].dim() != n) {
            throw std::invalid_argument("polyline_action: inconsistent dimensions");
        }
        acc += 0.5 * (polyline[k].p + polyline[k + 1].p).dot(polyline[k + 1].x - polyline[k].x);
    }
    return acc;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("matrix_exponential: matrix must be square");
    }
    return m.exp();
}

int effective_threads(int requested) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int cap = hw;
    if (const char* env = std::getenv("PTK_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) cap = static_cast<int>(v < hw ? v : hw);
    }
    if (requested >= 1 && requested < cap) cap = requested;
    return cap;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads) {
    const int nthreads = effective_threads(threads);
    if (count == 0) return;
    if (nthreads <= 1 || count < 4) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = nthreads < static_cast<int>(count) ? nthreads : static_cast<int>(count);
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace ptk
