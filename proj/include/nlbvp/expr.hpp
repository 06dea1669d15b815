#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "nlbvp/errors.hpp"

namespace nlbvp::expr {

// Variables an expression may reference. `r` is the polar radius and is
// derived from bound x, y when not bound itself.
enum class Var { X, Y, R, Lambda };

enum class BinOp { Add, Sub, Mul, Div, Pow };

// Unary functions take one argument; Min/Max take two.
enum class Fn { Exp, Sin, Cos, Ln, Sqrt, Abs, Arcsin, Min, Max };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Const, Variable, Neg, Binary, Call };

    Kind kind;
    double value = 0.0;      // Const
    Var var = Var::X;        // Variable
    BinOp op = BinOp::Add;   // Binary
    Fn fn = Fn::Exp;         // Call
    NodePtr a;               // Neg child, Binary lhs, Call arg 1
    NodePtr b;               // Binary rhs, Call arg 2 (Min/Max)
};

// Values available during evaluation. Enforces single assignment per
// variable; r must agree with sqrt(x^2+y^2) when all three are bound.
class Bindings {
public:
    Bindings& bind(Var v, double value);
    Bindings& x(double v) { return bind(Var::X, v); }
    Bindings& y(double v) { return bind(Var::Y, v); }
    Bindings& r(double v) { return bind(Var::R, v); }
    Bindings& lambda(double v) { return bind(Var::Lambda, v); }

    // Bound value, or the derived radius for R; nullopt when unbound.
    std::optional<double> lookup(Var v) const;

private:
    std::optional<double> vals_[4];
};

// Immutable after parse; safe to evaluate concurrently.
class Expr {
public:
    Expr() = default;
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    bool empty() const { return root_ == nullptr; }
    const NodePtr& root() const { return root_; }

    double eval(const Bindings& env) const;
    std::string print() const;

    // Structural equality (same tree shape, same payloads).
    friend bool structurally_equal(const Expr& lhs, const Expr& rhs);

private:
    NodePtr root_;
};

// Parses `text` with standard precedence: ^ binds tighter than unary
// minus, which binds tighter than * /, which bind tighter than + -.
// All binary operators are left-associative except ^ (right).
// Throws SyntaxError with a byte offset on malformed input.
Expr parse(std::string_view text);

const char* var_name(Var v);

}  // namespace nlbvp::expr
