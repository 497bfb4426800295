#include "allee/expr.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "allee/error.hpp"

namespace allee {

struct Expr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

}  // namespace

Expr::Expr(std::shared_ptr<const Node> node) : root_(std::move(node)) {}

Expr Expr::constant(double value) {
    return Expr(std::make_shared<const Node>(Node{Op::constant, value, nullptr, nullptr}));
}

Expr Expr::variable() {
    return Expr(std::make_shared<const Node>(Node{Op::variable, 0.0, nullptr, nullptr}));
}

Expr Expr::unary(Op op, Expr arg) {
    return Expr(std::make_shared<const Node>(Node{op, 0.0, std::move(arg.root_), nullptr}));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    return Expr(
        std::make_shared<const Node>(Node{op, 0.0, std::move(lhs.root_), std::move(rhs.root_)}));
}

Expr::Op Expr::op() const { return root_->op; }

namespace {

double eval_node(const Expr::Node& n, double x);

double eval_node(const Expr::Node& n, double x) {
    using Op = Expr::Op;
    switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable: return x;
        case Op::add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case Op::sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case Op::mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case Op::div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
        case Op::pow: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
        case Op::neg: return -eval_node(*n.lhs, x);
        case Op::exp: return std::exp(eval_node(*n.lhs, x));
        case Op::sin: return std::sin(eval_node(*n.lhs, x));
        case Op::asin: return std::asin(eval_node(*n.lhs, x));
        case Op::abs: return std::abs(eval_node(*n.lhs, x));
    }
    return std::nan("");
}

std::string node_to_string(const Expr::Node& n) {
    using Op = Expr::Op;
    auto bin = [&](const char* sym) {
        return fmt::format("({} {} {})", node_to_string(*n.lhs), sym, node_to_string(*n.rhs));
    };
    auto fn = [&](const char* name) { return fmt::format("{}({})", name, node_to_string(*n.lhs)); };
    switch (n.op) {
        case Op::constant: return fmt::format("{}", n.value);
        case Op::variable: return "x";
        case Op::add: return bin("+");
        case Op::sub: return bin("-");
        case Op::mul: return bin("*");
        case Op::div: return bin("/");
        case Op::pow: return bin("^");
        case Op::neg: return fmt::format("(-{})", node_to_string(*n.lhs));
        case Op::exp: return fn("exp");
        case Op::sin: return fn("sin");
        case Op::asin: return fn("arcsin");
        case Op::abs: return fn("abs");
    }
    return "?";
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse_all() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::string_view what) const {
        throw ParseError(fmt::format("expression '{}': {} at column {}", text_, what, pos_ + 1));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(fmt::format("expected '{}'", c));
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = Expr::binary(Expr::Op::add, lhs, parse_term());
            else if (accept('-')) lhs = Expr::binary(Expr::Op::sub, lhs, parse_term());
            else return lhs;
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = Expr::binary(Expr::Op::mul, lhs, parse_unary());
            else if (accept('/')) lhs = Expr::binary(Expr::Op::div, lhs, parse_unary());
            else return lhs;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return Expr::unary(Expr::Op::neg, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) return Expr::binary(Expr::Op::pow, base, parse_unary());
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail(fmt::format("unexpected character '{}'", c));
    }

    Expr parse_number() {
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return Expr::constant(value);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view id = text_.substr(start, pos_ - start);
        if (id == "x") return Expr::variable();
        if (id == "pi") return Expr::constant(std::numbers::pi);
        if (id == "pow") {
            expect('(');
            Expr base = parse_expr();
            expect(',');
            Expr exponent = parse_expr();
            expect(')');
            return Expr::binary(Expr::Op::pow, base, exponent);
        }
        Expr::Op op;
        if (id == "exp") op = Expr::Op::exp;
        else if (id == "sin") op = Expr::Op::sin;
        else if (id == "arcsin" || id == "asin") op = Expr::Op::asin;
        else if (id == "abs") op = Expr::Op::abs;
        else {
            pos_ = start;
            fail(fmt::format("unknown identifier '{}'", id));
        }
        expect('(');
        Expr arg = parse_expr();
        expect(')');
        return Expr::unary(op, arg);
    }
};

}  // namespace

double Expr::operator()(double x) const { return eval_node(*root_, x); }

std::string Expr::to_string() const { return node_to_string(*root_); }

Expr Expr::parse(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace allee
