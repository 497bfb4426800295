#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace allee {

/// Immutable expression tree in one variable `x`.
///
/// Grammar accepted by `Expr::parse`:
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?          (right associative)
///     primary := number | 'x' | 'pi'
///              | func '(' expr ')' | 'pow' '(' expr ',' expr ')'
///              | '(' expr ')'
///     func    := 'exp' | 'sin' | 'arcsin' | 'asin' | 'abs'
///
/// Numbers use '.' as decimal separator and may carry an exponent (`1e-3`).
/// Nodes are shared, so copies are cheap and safe across threads.
class Expr {
public:
    enum class Op { constant, variable, add, sub, mul, div, pow, neg, exp, sin, asin, abs };

    static Expr constant(double value);
    static Expr variable();
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);

    static Expr parse(std::string_view text);

    double operator()(double x) const;

    Op op() const;
    std::string to_string() const;

    struct Node;  // opaque

private:
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> root_;
};

}  // namespace allee
