#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hamosc/errors.hpp"

namespace hamosc {

enum class ExprKind { Number, Time, Constant, Negate, Binary, Call };

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Min, Max };

const char* func_name(Func f);

struct ExprNode {
    ExprKind kind = ExprKind::Number;
    double number = 0.0;       // Number
    char op = 0;               // Binary: one of + - * / ^
    Func func = Func::Sin;     // Call
    std::string constant;      // Constant: "pi" or "e"
    std::size_t offset = 0;    // byte offset into the source, for diagnostics
    std::vector<std::shared_ptr<const ExprNode>> args;
};

/// A parsed scalar expression in the time variable `t`. Immutable after
/// construction; evaluation is a pure function of (tree, t), so shared use
/// from multiple threads is fine.
class Expr {
public:
    Expr() = default;

    /// Recursive-descent parse of the closed grammar. Precedence is
    /// ^  >  unary minus  >  * /  >  + -, with ^ right associative and the
    /// rest left associative. Throws SyntaxError on malformed input.
    static Expr parse(std::string_view source);

    // Programmatic builders (used by tests and by the system loader for
    // constant matrices).
    static Expr number(double value);
    static Expr time();
    static Expr constant(std::string_view name);  // "pi" | "e"
    static Expr negate(Expr arg);
    static Expr binary(char op, Expr lhs, Expr rhs);
    static Expr call(std::string_view name, std::vector<Expr> args);

    /// IEEE double evaluation. Throws EvalError on domain violations
    /// (division by zero, log of a non-positive value, sqrt of a negative
    /// value, zero or negative base raised to an incompatible power).
    double eval(double t) const;

    /// Canonical fully parenthesized form; parsing it reproduces the tree.
    std::string serialize() const;

    /// Structural equality; source offsets are ignored.
    bool operator==(const Expr& other) const;

    bool empty() const { return !root_; }
    const ExprNode& root() const;

private:
    explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}
    std::shared_ptr<const ExprNode> root_;
};

}  // namespace hamosc
