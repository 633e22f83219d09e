#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>

#include "ptk/errors.hpp"

namespace ptk {

// Parse error with a character position.
struct ExpressionError : ValidationError {
    std::size_t position;
    ExpressionError(std::size_t pos, const std::string& message)
        : ValidationError(message), position(pos) {}
};

// Small arithmetic expressions over phase-space variables:
//   operators + - * / ^, functions sin cos exp, variables x_1.., p_1.., t.
// '^' is right-associative and binds tighter than unary minus.
class Expression {
public:
    static Expression parse(const std::string& text);

    double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& p, double t) const;
    // Convenience for position-only formulas (p absent).
    double eval_x(const Eigen::VectorXd& x) const;

    int max_x_index() const { return max_x_; }  // 1-based, 0 when unused
    int max_p_index() const { return max_p_; }
    bool uses_time() const { return uses_t_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    int max_x_ = 0;
    int max_p_ = 0;
    bool uses_t_ = false;
};

}  // namespace ptk
