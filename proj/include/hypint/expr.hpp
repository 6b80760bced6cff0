#pragma once

// Scalar expression trees over named real variables: parse, evaluate,
// differentiate, substitute, and lightly simplify. Every coefficient and
// arbitrary function in the library (wave speeds, right-hand sides, reduction
// functions g, linear coefficients) is an Expr.
//
// Grammar (infix, see docs/expressions.md for the EBNF):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := primary ['^' unary]          -- exponent must fold to a constant
//   primary:= number | name | func '(' expr ')' | '(' expr ')'
//   func   := sqrt | exp | ln | sin | cos | tan | arctan
//
// Variable names must come from the core alphabet {x, t, u, ux, ut, sigma,
// xi, p, q} plus caller-declared parameter names; anything else is rejected
// at parse time.

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace hypint {

class ExprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error; `offset` is the byte position in the input text.
class ParseError : public ExprError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : ExprError(msg + " (at offset " + std::to_string(offset) + ")"),
          offset(offset) {}
    std::size_t offset;
};

/// Evaluation fault: unbound variable or a domain error (sqrt/ln of a
/// negative number, division by zero); the message names the offending node.
class EvalError : public ExprError {
public:
    using ExprError::ExprError;
};

/// Finite map variable-name -> value. Lookup of an unbound name is an error.
using Env = std::map<std::string, double>;

enum class UnaryOp { Neg, Sqrt, Exp, Ln, Sin, Cos, Tan, Arctan };
enum class BinaryOp { Add, Sub, Mul, Div };

const std::set<std::string>& core_alphabet();

class Expr {
    enum class Kind { Constant, Variable, Unary, Binary, Power };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Kind kind;
        double value = 0.0;   // Constant payload, or Power exponent
        std::string name;     // Variable payload
        UnaryOp uop = UnaryOp::Neg;
        BinaryOp bop = BinaryOp::Add;
        NodePtr a, b;
    };

    NodePtr node_;

    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

public:
    /// Default-constructed Expr is the constant 0.
    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v) {
        Node n; n.kind = Kind::Constant; n.value = v;
        return Expr(make(std::move(n)));
    }
    static Expr variable(std::string name) {
        if (name.empty()) throw ExprError("variable name must be nonempty");
        Node n; n.kind = Kind::Variable; n.name = std::move(name);
        return Expr(make(std::move(n)));
    }
    static Expr unary(UnaryOp op, Expr e) {
        Node n; n.kind = Kind::Unary; n.uop = op; n.a = e.node_;
        return Expr(make(std::move(n)));
    }
    static Expr binary(BinaryOp op, Expr l, Expr r) {
        Node n; n.kind = Kind::Binary; n.bop = op; n.a = l.node_; n.b = r.node_;
        return Expr(make(std::move(n)));
    }
    /// Power with a constant real exponent (the only power form supported).
    static Expr pow(Expr base, double exponent) {
        Node n; n.kind = Kind::Power; n.value = exponent; n.a = base.node_;
        return Expr(make(std::move(n)));
    }

    friend Expr operator+(Expr l, Expr r) { return binary(BinaryOp::Add, std::move(l), std::move(r)); }
    friend Expr operator-(Expr l, Expr r) { return binary(BinaryOp::Sub, std::move(l), std::move(r)); }
    friend Expr operator*(Expr l, Expr r) { return binary(BinaryOp::Mul, std::move(l), std::move(r)); }
    friend Expr operator/(Expr l, Expr r) { return binary(BinaryOp::Div, std::move(l), std::move(r)); }
    friend Expr operator-(Expr e) { return unary(UnaryOp::Neg, std::move(e)); }
    friend Expr operator+(Expr l, double r) { return std::move(l) + constant(r); }
    friend Expr operator+(double l, Expr r) { return constant(l) + std::move(r); }
    friend Expr operator-(Expr l, double r) { return std::move(l) - constant(r); }
    friend Expr operator-(double l, Expr r) { return constant(l) - std::move(r); }
    friend Expr operator*(Expr l, double r) { return std::move(l) * constant(r); }
    friend Expr operator*(double l, Expr r) { return constant(l) * std::move(r); }
    friend Expr operator/(Expr l, double r) { return std::move(l) / constant(r); }
    friend Expr operator/(double l, Expr r) { return constant(l) / std::move(r); }

    bool is_constant() const { return node_->kind == Kind::Constant; }
    bool is_constant(double v) const { return is_constant() && node_->value == v; }
    std::optional<double> constant_value() const {
        if (is_constant()) return node_->value;
        return std::nullopt;
    }

    double eval(const Env& env) const { return eval_node(*node_, env); }

    /// Exact symbolic partial derivative with respect to `var`.
    Expr diff(const std::string& var) const { return Expr(diff_node(*node_, var)); }

    /// Replace every occurrence of variable `var` by `replacement`.
    Expr substitute(const std::string& var, const Expr& replacement) const {
        return Expr(subst_node(node_, var, replacement.node_));
    }

    /// Constant folding plus identity elimination (x+0, x*1, x*0, 0/x, ...).
    /// Evaluation-equivalent to the input wherever both are defined.
    Expr simplified() const { return Expr(simplify_node(node_)); }

    /// Set of variable names occurring in the tree.
    std::set<std::string> variables() const {
        std::set<std::string> out;
        collect_vars(*node_, out);
        return out;
    }
    bool depends_on(const std::string& var) const {
        return variables().count(var) > 0;
    }

    /// Print in the input grammar; parse(str()) evaluates identically.
    std::string str() const { return print_node(*node_, 0); }

private:
    [[noreturn]] static void fault(const std::string& what, const Node& n) {
        throw EvalError(what + " in '" + print_node(n, 0) + "'");
    }

    static double eval_node(const Node& n, const Env& env) {
        switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::Variable: {
            auto it = env.find(n.name);
            if (it == env.end()) throw EvalError("unbound variable '" + n.name + "'");
            return it->second;
        }
        case Kind::Unary: {
            double a = eval_node(*n.a, env);
            switch (n.uop) {
            case UnaryOp::Neg: return -a;
            case UnaryOp::Sqrt:
                if (a < 0.0) fault("sqrt of negative value", n);
                return std::sqrt(a);
            case UnaryOp::Exp: return std::exp(a);
            case UnaryOp::Ln:
                if (a <= 0.0) fault("ln of non-positive value", n);
                return std::log(a);
            case UnaryOp::Sin: return std::sin(a);
            case UnaryOp::Cos: return std::cos(a);
            case UnaryOp::Tan: return std::tan(a);
            case UnaryOp::Arctan: return std::atan(a);
            }
            break;
        }
        case Kind::Binary: {
            double a = eval_node(*n.a, env);
            double b = eval_node(*n.b, env);
            switch (n.bop) {
            case BinaryOp::Add: return a + b;
            case BinaryOp::Sub: return a - b;
            case BinaryOp::Mul: return a * b;
            case BinaryOp::Div:
                if (b == 0.0) fault("division by zero", n);
                return a / b;
            }
            break;
        }
        case Kind::Power: {
            double a = eval_node(*n.a, env);
            double p = n.value;
            if (a == 0.0 && p < 0.0) fault("zero raised to a negative power", n);
            if (a < 0.0 && p != std::floor(p)) fault("negative base with non-integer exponent", n);
            return std::pow(a, p);
        }
        }
        throw EvalError("corrupt expression node");
    }

    // Smart constructors used by diff: fold the trivial cases so derivative
    // trees stay readable without a full simplify pass.
    static Expr s(NodePtr n) { return Expr(std::move(n)); }
    static Expr s_add(Expr a, Expr b) {
        if (a.is_constant(0.0)) return b;
        if (b.is_constant(0.0)) return a;
        return a + b;
    }
    static Expr s_sub(Expr a, Expr b) {
        if (b.is_constant(0.0)) return a;
        if (a.is_constant(0.0)) return -b;
        return a - b;
    }
    static Expr s_mul(Expr a, Expr b) {
        if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
        if (a.is_constant(1.0)) return b;
        if (b.is_constant(1.0)) return a;
        return a * b;
    }
    static Expr s_div(Expr a, Expr b) {
        if (a.is_constant(0.0)) return constant(0.0);
        if (b.is_constant(1.0)) return a;
        return a / b;
    }

    static NodePtr diff_node(const Node& n, const std::string& var) {
        switch (n.kind) {
        case Kind::Constant: return constant(0.0).node_;
        case Kind::Variable: return constant(n.name == var ? 1.0 : 0.0).node_;
        case Kind::Unary: {
            Expr a = s(n.a);
            Expr da = s(diff_node(*n.a, var));
            switch (n.uop) {
            case UnaryOp::Neg: return (-da).node_;
            case UnaryOp::Sqrt: return s_div(da, s_mul(constant(2.0), unary(UnaryOp::Sqrt, a))).node_;
            case UnaryOp::Exp: return s_mul(unary(UnaryOp::Exp, a), da).node_;
            case UnaryOp::Ln: return s_div(da, a).node_;
            case UnaryOp::Sin: return s_mul(unary(UnaryOp::Cos, a), da).node_;
            case UnaryOp::Cos: return s_mul(-unary(UnaryOp::Sin, a), da).node_;
            case UnaryOp::Tan:
                return s_mul(s_add(constant(1.0), pow(unary(UnaryOp::Tan, a), 2.0)), da).node_;
            case UnaryOp::Arctan:
                return s_div(da, s_add(constant(1.0), pow(a, 2.0))).node_;
            }
            break;
        }
        case Kind::Binary: {
            Expr a = s(n.a), b = s(n.b);
            Expr da = s(diff_node(*n.a, var)), db = s(diff_node(*n.b, var));
            switch (n.bop) {
            case BinaryOp::Add: return s_add(da, db).node_;
            case BinaryOp::Sub: return s_sub(da, db).node_;
            case BinaryOp::Mul: return s_add(s_mul(da, b), s_mul(a, db)).node_;
            case BinaryOp::Div:
                return s_div(s_sub(s_mul(da, b), s_mul(a, db)), pow(b, 2.0)).node_;
            }
            break;
        }
        case Kind::Power: {
            Expr a = s(n.a);
            Expr da = s(diff_node(*n.a, var));
            if (n.value == 0.0) return constant(0.0).node_;
            return s_mul(s_mul(constant(n.value), pow(a, n.value - 1.0)), da).node_;
        }
        }
        throw ExprError("corrupt expression node");
    }

    static NodePtr subst_node(const NodePtr& n, const std::string& var, const NodePtr& repl) {
        switch (n->kind) {
        case Kind::Constant: return n;
        case Kind::Variable: return n->name == var ? repl : n;
        case Kind::Unary: {
            NodePtr a = subst_node(n->a, var, repl);
            if (a == n->a) return n;
            Node m = *n; m.a = a;
            return make(std::move(m));
        }
        case Kind::Binary: {
            NodePtr a = subst_node(n->a, var, repl);
            NodePtr b = subst_node(n->b, var, repl);
            if (a == n->a && b == n->b) return n;
            Node m = *n; m.a = a; m.b = b;
            return make(std::move(m));
        }
        case Kind::Power: {
            NodePtr a = subst_node(n->a, var, repl);
            if (a == n->a) return n;
            Node m = *n; m.a = a;
            return make(std::move(m));
        }
        }
        throw ExprError("corrupt expression node");
    }

    static NodePtr simplify_node(const NodePtr& n) {
        switch (n->kind) {
        case Kind::Constant:
        case Kind::Variable:
            return n;
        case Kind::Unary: {
            NodePtr a = simplify_node(n->a);
            if (a->kind == Kind::Constant) {
                Node tmp = *n; tmp.a = a;
                // Constant-fold only where evaluation cannot fault.
                bool safe = true;
                double v = tmp.a->value;
                if (n->uop == UnaryOp::Sqrt && v < 0.0) safe = false;
                if (n->uop == UnaryOp::Ln && v <= 0.0) safe = false;
                if (safe) return constant(eval_node(tmp, {})).node_;
            }
            if (n->uop == UnaryOp::Neg && a->kind == Kind::Unary && a->uop == UnaryOp::Neg)
                return a->a;  // --e -> e
            Node m = *n; m.a = a;
            return make(std::move(m));
        }
        case Kind::Binary: {
            NodePtr a = simplify_node(n->a);
            NodePtr b = simplify_node(n->b);
            auto cv = [](const NodePtr& p) { return p->kind == Kind::Constant; };
            if (cv(a) && cv(b) && !(n->bop == BinaryOp::Div && b->value == 0.0)) {
                Node tmp = *n; tmp.a = a; tmp.b = b;
                return constant(eval_node(tmp, {})).node_;
            }
            switch (n->bop) {
            case BinaryOp::Add:
                if (cv(a) && a->value == 0.0) return b;
                if (cv(b) && b->value == 0.0) return a;
                break;
            case BinaryOp::Sub:
                if (cv(b) && b->value == 0.0) return a;
                break;
            case BinaryOp::Mul:
                if ((cv(a) && a->value == 0.0) || (cv(b) && b->value == 0.0))
                    return constant(0.0).node_;
                if (cv(a) && a->value == 1.0) return b;
                if (cv(b) && b->value == 1.0) return a;
                break;
            case BinaryOp::Div:
                if (cv(a) && a->value == 0.0) return constant(0.0).node_;
                if (cv(b) && b->value == 1.0) return a;
                break;
            }
            Node m = *n; m.a = a; m.b = b;
            return make(std::move(m));
        }
        case Kind::Power: {
            NodePtr a = simplify_node(n->a);
            if (n->value == 0.0) return constant(1.0).node_;
            if (n->value == 1.0) return a;
            if (a->kind == Kind::Constant) {
                double v = a->value;
                bool safe = !(v == 0.0 && n->value < 0.0) &&
                            !(v < 0.0 && n->value != std::floor(n->value));
                if (safe) return constant(std::pow(v, n->value)).node_;
            }
            Node m = *n; m.a = a;
            return make(std::move(m));
        }
        }
        throw ExprError("corrupt expression node");
    }

    static void collect_vars(const Node& n, std::set<std::string>& out) {
        switch (n.kind) {
        case Kind::Constant: return;
        case Kind::Variable: out.insert(n.name); return;
        case Kind::Unary:
        case Kind::Power: collect_vars(*n.a, out); return;
        case Kind::Binary: collect_vars(*n.a, out); collect_vars(*n.b, out); return;
        }
    }

    static std::string fmt_number(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    // Precedence levels: add/sub 1, mul/div 2, unary minus 3, power 4, atom 5.
    static int precedence(const Node& n) {
        switch (n.kind) {
        case Kind::Constant: return n.value < 0.0 ? 3 : 5;
        case Kind::Variable: return 5;
        case Kind::Unary: return n.uop == UnaryOp::Neg ? 3 : 5;
        case Kind::Binary:
            return (n.bop == BinaryOp::Add || n.bop == BinaryOp::Sub) ? 1 : 2;
        case Kind::Power: return 4;
        }
        return 5;
    }

    static std::string child(const Node& c, int min_prec) {
        std::string s = print_node(c, 0);
        if (precedence(c) < min_prec) return "(" + s + ")";
        return s;
    }

    static std::string print_node(const Node& n, int) {
        switch (n.kind) {
        case Kind::Constant: return fmt_number(n.value);
        case Kind::Variable: return n.name;
        case Kind::Unary: {
            static const char* names[] = {"-", "sqrt", "exp", "ln", "sin", "cos", "tan", "arctan"};
            if (n.uop == UnaryOp::Neg) return "-" + child(*n.a, 3);
            return std::string(names[static_cast<int>(n.uop)]) + "(" + print_node(*n.a, 0) + ")";
        }
        case Kind::Binary: {
            // Right operands at equal precedence keep their parentheses so the
            // reparsed tree evaluates bit-identically (FP + and * do not
            // reassociate).
            int p = precedence(n);
            switch (n.bop) {
            case BinaryOp::Add: return child(*n.a, p) + " + " + child(*n.b, p + 1);
            case BinaryOp::Sub: return child(*n.a, p) + " - " + child(*n.b, p + 1);
            case BinaryOp::Mul: return child(*n.a, p) + "*" + child(*n.b, p + 1);
            case BinaryOp::Div: return child(*n.a, p) + "/" + child(*n.b, p + 1);
            }
            break;
        }
        case Kind::Power:
            return child(*n.a, 5) + "^" + fmt_number(n.value);
        }
        throw ExprError("corrupt expression node");
    }
};

inline const std::set<std::string>& core_alphabet() {
    static const std::set<std::string> names = {"x", "t", "u", "ux", "ut", "sigma", "xi", "p", "q"};
    return names;
}

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const std::set<std::string>& extra)
        : text_(text), extra_(extra) {}

    Expr run() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty input", 0);
        Expr e = expr();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    const std::set<std::string>& extra_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (eat('+')) e = e + term();
            else if (eat('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (eat('*')) e = e * unary();
            else if (eat('/')) e = e / unary();
            else return e;
        }
    }

    Expr unary() {
        if (eat('-')) return -unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (eat('^')) {
            std::size_t at = pos_;
            Expr ex = unary();  // right-associative
            double v;
            try {
                v = ex.eval({});
            } catch (const EvalError&) {
                throw ParseError("exponent must be a constant expression", at);
            }
            return Expr::pow(base, v);
        }
        return base;
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (ident_start(c)) return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // 'e' was not an exponent
            }
        }
        std::string tok(text_.substr(start, pos_ - start));
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return Expr::constant(v);
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    Expr identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        std::string name(text_.substr(start, pos_ - start));

        static const std::map<std::string, UnaryOp, std::less<>> funcs = {
            {"sqrt", UnaryOp::Sqrt}, {"exp", UnaryOp::Exp}, {"ln", UnaryOp::Ln},
            {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos}, {"tan", UnaryOp::Tan},
            {"arctan", UnaryOp::Arctan}, {"atan", UnaryOp::Arctan},
        };

        if (peek() == '(') {
            auto it = funcs.find(name);
            if (it == funcs.end())
                throw ParseError("unknown function '" + name + "'", start);
            ++pos_;  // consume '('
            Expr arg = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return Expr::unary(it->second, arg);
        }
        if (funcs.count(name))
            throw ParseError("function '" + name + "' requires an argument list", start);
        if (core_alphabet().count(name) || extra_.count(name))
            return Expr::variable(name);
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

}  // namespace detail

/// Parse `text` in the documented grammar. Identifiers must belong to the
/// core alphabet or to `extra_names`.
inline Expr parse_expr(std::string_view text, const std::set<std::string>& extra_names = {}) {
    return detail::Parser(text, extra_names).run();
}

}  // namespace hypint
