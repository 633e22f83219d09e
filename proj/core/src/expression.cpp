#include "ptk/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace ptk {

struct Expression::Node {
    enum class Kind { Number, VarX, VarP, VarT, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };
    Kind kind;
    double number = 0.0;
    int index = 0;  // 0-based variable index
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make_node(Kind k, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr run() {
        NodePtr expr = parse_sum();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return expr;
    }

    int max_x = 0;
    int max_p = 0;
    bool uses_t = false;

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ExpressionError(pos_, "expression: " + message + " at position " +
                                        std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (consume('+')) {
                lhs = make_node(Kind::Add, lhs, parse_product());
            } else if (consume('-')) {
                lhs = make_node(Kind::Sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*')) {
                lhs = make_node(Kind::Mul, lhs, parse_unary());
            } else if (consume('/')) {
                lhs = make_node(Kind::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_node(Kind::Neg, parse_unary());
        if (consume('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (consume('^')) {
            // Right-associative; the exponent may carry its own unary sign.
            return make_node(Kind::Pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            if (!consume(')')) fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::Number;
        n->number = v;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "sin" || name == "cos" || name == "exp") {
            if (!consume('(')) fail("function '" + name + "' requires parentheses");
            NodePtr arg = parse_sum();
            if (!consume(')')) fail("missing ')'");
            const Kind k = name == "sin" ? Kind::Sin : name == "cos" ? Kind::Cos : Kind::Exp;
            return make_node(k, arg);
        }
        if (name == "t") {
            uses_t = true;
            return make_node(Kind::VarT);
        }
        if (name.size() > 2 && (name[0] == 'x' || name[0] == 'p') && name[1] == '_') {
            const int idx = std::atoi(name.c_str() + 2);
            if (idx < 1) fail("variable index must be >= 1 in '" + name + "'");
            auto n = std::make_shared<Expression::Node>();
            n->index = idx - 1;
            if (name[0] == 'x') {
                n->kind = Kind::VarX;
                max_x = std::max(max_x, idx);
            } else {
                n->kind = Kind::VarP;
                max_p = std::max(max_p, idx);
            }
            return n;
        }
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                 double t) {
    switch (n.kind) {
        case Kind::Number: return n.number;
        case Kind::VarX:
            if (n.index >= x.size()) throw ValidationError("expression: x index out of range");
            return x[n.index];
        case Kind::VarP:
            if (n.index >= p.size()) throw ValidationError("expression: p index out of range");
            return p[n.index];
        case Kind::VarT: return t;
        case Kind::Neg: return -eval_node(*n.lhs, x, p, t);
        case Kind::Add: return eval_node(*n.lhs, x, p, t) + eval_node(*n.rhs, x, p, t);
        case Kind::Sub: return eval_node(*n.lhs, x, p, t) - eval_node(*n.rhs, x, p, t);
        case Kind::Mul: return eval_node(*n.lhs, x, p, t) * eval_node(*n.rhs, x, p, t);
        case Kind::Div: return eval_node(*n.lhs, x, p, t) / eval_node(*n.rhs, x, p, t);
        case Kind::Pow: return std::pow(eval_node(*n.lhs, x, p, t), eval_node(*n.rhs, x, p, t));
        case Kind::Sin: return std::sin(eval_node(*n.lhs, x, p, t));
        case Kind::Cos: return std::cos(eval_node(*n.lhs, x, p, t));
        case Kind::Exp: return std::exp(eval_node(*n.lhs, x, p, t));
    }
    throw Error("expression: corrupt node");
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Parser parser(text);
    Expression e;
    e.root_ = parser.run();
    e.text_ = text;
    e.max_x_ = parser.max_x;
    e.max_p_ = parser.max_p;
    e.uses_t_ = parser.uses_t;
    return e;
}

double Expression::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& p, double t) const {
    if (!root_) throw Error("expression: empty");
    return eval_node(*root_, x, p, t);
}

double Expression::eval_x(const Eigen::VectorXd& x) const {
    return eval(x, Eigen::VectorXd::Zero(x.size()), 0.0);
}

}  // namespace ptk
