#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptk {

// Point z = (x, p) of 2n-dimensional phase space.
struct PhasePoint {
    Eigen::VectorXd x;
    Eigen::VectorXd p;

    PhasePoint() = default;

    PhasePoint(Eigen::VectorXd x_in, Eigen::VectorXd p_in)
        : x(std::move(x_in)), p(std::move(p_in)) {
        if (x.size() != p.size() || x.size() < 1) {
            throw std::invalid_argument("PhasePoint: x and p must have equal length >= 1");
        }
        if (!x.allFinite() || !p.allFinite()) {
            throw std::invalid_argument("PhasePoint: entries must be finite");
        }
    }

    static PhasePoint scalar(double x_val, double p_val) {
        Eigen::VectorXd xv(1), pv(1);
        xv << x_val;
        pv << p_val;
        return {xv, pv};
    }

    int dim() const { return static_cast<int>(x.size()); }

    // Stacked coordinates [x; p].
    Eigen::VectorXd stacked() const {
        Eigen::VectorXd z(2 * x.size());
        z.head(x.size()) = x;
        z.tail(p.size()) = p;
        return z;
    }

    static PhasePoint from_stacked(const Eigen::VectorXd& z) {
        if (z.size() % 2 != 0 || z.size() == 0) {
            throw std::invalid_argument("PhasePoint: stacked vector must have even positive length");
        }
        const auto n = z.size() / 2;
        return {z.head(n), z.tail(n)};
    }
};

inline PhasePoint operator+(const PhasePoint& a, const PhasePoint& b) {
    return {a.x + b.x, a.p + b.p};
}

inline PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) {
    return {a.x - b.x, a.p - b.p};
}

inline PhasePoint operator*(double s, const PhasePoint& z) {
    return {s * z.x, s * z.p};
}

// Axis-aligned box, used as a parameter or position domain.
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    static Box unbounded(int n) {
        const double inf = std::numeric_limits<double>::infinity();
        Box b;
        b.lo = Eigen::VectorXd::Constant(n, -inf);
        b.hi = Eigen::VectorXd::Constant(n, inf);
        return b;
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Eigen::VectorXd& v, double slack = 1e-12) const {
        if (v.size() != lo.size()) return false;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (v[i] < lo[i] - slack || v[i] > hi[i] + slack) return false;
        }
        return true;
    }
};

}  // namespace ptk
