#ifndef HYREACH_EXPR_HPP
#define HYREACH_EXPR_HPP

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <utility>

#include "common.hpp"

namespace hyreach {

// Scalar expressions over state components x1..xn plus named symbolic
// constants. Immutable after parse; evaluation is pure.
class Expr {
    enum class Op { Num, Var, Sym, Neg, Add, Sub, Mul, Div, Pow, Call };

    struct Node {
        Op op = Op::Num;
        double value = 0.0;       // Num
        int var = 0;              // Var, 0-based
        std::string name;         // Sym / Call
        std::vector<std::shared_ptr<const Node>> kids;
    };
    using NodePtr = std::shared_ptr<const Node>;

  public:
    Expr() : Expr(constant(0.0, 0)) {}

    static Expr constant(double v, int dim = 0) {
        auto n = std::make_shared<Node>();
        n->op = Op::Num;
        n->value = v;
        return Expr(std::move(n), dim, {});
    }

    static Expr var(int index0, int dim) {
        auto n = std::make_shared<Node>();
        n->op = Op::Var;
        n->var = index0;
        return Expr(std::move(n), dim, {});
    }

    static Expr symbol(const std::string& name, int dim) {
        auto n = std::make_shared<Node>();
        n->op = Op::Sym;
        n->name = name;
        return Expr(std::move(n), dim, {});
    }

    static Expr pow_of(const Expr& a, const Expr& b) { return combine(Op::Pow, a, b); }

    int dim() const { return dim_; }

    // dim 0 marks a dimension-agnostic expression (no state references).
    double eval(const Vec& x) const {
        if (dim_ > 0) require_dim(x.size(), static_cast<std::size_t>(dim_), "Expr::eval");
        return eval_node(*root_, x);
    }

    // Central finite differences, step h_rel*max(1,|x_i|) per component.
    Vec grad(const Vec& x, double h_rel = 1e-6) const {
        if (dim_ > 0) require_dim(x.size(), static_cast<std::size_t>(dim_), "Expr::grad");
        Vec g(x.size());
        Vec y = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double h = h_rel * std::max(1.0, std::fabs(x[i]));
            y[i] = x[i] + h;
            const double fp = eval(y);
            y[i] = x[i] - h;
            const double fm = eval(y);
            y[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g;
    }

    Expr bind(const std::string& name, double value) const {
        Expr e = *this;
        e.bindings_[name] = value;
        return e;
    }

    // Names referenced by the AST that have no binding yet.
    std::set<std::string> unbound() const {
        std::set<std::string> out;
        collect_syms(*root_, out);
        for (const auto& [k, v] : bindings_) out.erase(k);
        return out;
    }

    std::string str() const { return print_node(*root_); }

    // a.x + b when the expression is affine in the state (symbols count as
    // constants once bound); nullopt otherwise.
    std::optional<std::pair<Vec, double>> as_affine() const {
        return affine_node(*root_);
    }

    std::optional<double> as_constant() const {
        auto a = as_affine();
        if (!a) return std::nullopt;
        for (double c : a->first)
            if (c != 0.0) return std::nullopt;
        return a->second;
    }

    friend Expr operator+(const Expr& a, const Expr& b) { return combine(Op::Add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return combine(Op::Sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return combine(Op::Mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return combine(Op::Div, a, b); }
    friend Expr operator-(const Expr& a) {
        auto n = std::make_shared<Node>();
        n->op = Op::Neg;
        n->kids = {a.root_};
        return Expr(std::move(n), a.dim_, a.bindings_);
    }

    static Expr call(const std::string& fn, std::vector<Expr> args) {
        auto n = std::make_shared<Node>();
        n->op = Op::Call;
        n->name = fn;
        int dim = 0;
        std::map<std::string, double> binds;
        for (auto& a : args) {
            dim = std::max(dim, a.dim_);
            binds.insert(a.bindings_.begin(), a.bindings_.end());
            n->kids.push_back(a.root_);
        }
        return Expr(std::move(n), dim, std::move(binds));
    }

    friend Expr parse_expr(const std::string& text, int dim,
                           const std::map<std::string, double>& symbols,
                           const std::set<std::string>& deferred);

  private:
    Expr(NodePtr root, int dim, std::map<std::string, double> binds)
        : root_(std::move(root)), dim_(dim), bindings_(std::move(binds)) {}

    static Expr combine(Op op, const Expr& a, const Expr& b) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->kids = {a.root_, b.root_};
        std::map<std::string, double> binds = a.bindings_;
        binds.insert(b.bindings_.begin(), b.bindings_.end());
        return Expr(std::move(n), std::max(a.dim_, b.dim_), std::move(binds));
    }

    static double check_finite(double v, const char* what) {
        if (!std::isfinite(v))
            throw EvalDomainError(std::string("expression domain error in ") + what);
        return v;
    }

    double eval_node(const Node& n, const Vec& x) const {
        switch (n.op) {
            case Op::Num: return n.value;
            case Op::Var: return x[static_cast<std::size_t>(n.var)];
            case Op::Sym: {
                auto it = bindings_.find(n.name);
                if (it == bindings_.end())
                    throw EvalDomainError("unbound symbol '" + n.name + "'");
                return it->second;
            }
            case Op::Neg: return -eval_node(*n.kids[0], x);
            case Op::Add: return check_finite(eval_node(*n.kids[0], x) + eval_node(*n.kids[1], x), "+");
            case Op::Sub: return check_finite(eval_node(*n.kids[0], x) - eval_node(*n.kids[1], x), "-");
            case Op::Mul: return check_finite(eval_node(*n.kids[0], x) * eval_node(*n.kids[1], x), "*");
            case Op::Div: {
                const double b = eval_node(*n.kids[1], x);
                if (b == 0.0) throw EvalDomainError("division by zero");
                return check_finite(eval_node(*n.kids[0], x) / b, "/");
            }
            case Op::Pow:
                return check_finite(std::pow(eval_node(*n.kids[0], x), eval_node(*n.kids[1], x)), "^");
            case Op::Call: {
                if (n.name == "sin") return check_finite(std::sin(eval_node(*n.kids[0], x)), "sin");
                if (n.name == "cos") return check_finite(std::cos(eval_node(*n.kids[0], x)), "cos");
                if (n.name == "exp") return check_finite(std::exp(eval_node(*n.kids[0], x)), "exp");
                if (n.name == "abs") return std::fabs(eval_node(*n.kids[0], x));
                if (n.name == "sqrt") {
                    const double a = eval_node(*n.kids[0], x);
                    if (a < 0.0) throw EvalDomainError("sqrt of negative value");
                    return std::sqrt(a);
                }
                if (n.name == "min")
                    return std::min(eval_node(*n.kids[0], x), eval_node(*n.kids[1], x));
                if (n.name == "max")
                    return std::max(eval_node(*n.kids[0], x), eval_node(*n.kids[1], x));
                throw EvalDomainError("unknown function '" + n.name + "'");
            }
        }
        throw EvalDomainError("corrupt expression node");
    }

    static void collect_syms(const Node& n, std::set<std::string>& out) {
        if (n.op == Op::Sym) out.insert(n.name);
        for (const auto& k : n.kids) collect_syms(*k, out);
    }

    static std::string fmt_num(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    std::string print_node(const Node& n) const {
        switch (n.op) {
            case Op::Num: return fmt_num(n.value);
            case Op::Var: return "x" + std::to_string(n.var + 1);
            case Op::Sym: return n.name;
            case Op::Neg: return "(-" + print_node(*n.kids[0]) + ")";
            case Op::Add: return "(" + print_node(*n.kids[0]) + " + " + print_node(*n.kids[1]) + ")";
            case Op::Sub: return "(" + print_node(*n.kids[0]) + " - " + print_node(*n.kids[1]) + ")";
            case Op::Mul: return "(" + print_node(*n.kids[0]) + " * " + print_node(*n.kids[1]) + ")";
            case Op::Div: return "(" + print_node(*n.kids[0]) + " / " + print_node(*n.kids[1]) + ")";
            case Op::Pow: return "(" + print_node(*n.kids[0]) + " ^ " + print_node(*n.kids[1]) + ")";
            case Op::Call: {
                std::string s = n.name + "(";
                for (std::size_t i = 0; i < n.kids.size(); ++i) {
                    if (i) s += ", ";
                    s += print_node(*n.kids[i]);
                }
                return s + ")";
            }
        }
        return "?";
    }

    std::optional<std::pair<Vec, double>> affine_node(const Node& n) const {
        const auto zero = [&] { return Vec(static_cast<std::size_t>(dim_), 0.0); };
        switch (n.op) {
            case Op::Num: return std::make_pair(zero(), n.value);
            case Op::Var: {
                Vec a = zero();
                a[static_cast<std::size_t>(n.var)] = 1.0;
                return std::make_pair(std::move(a), 0.0);
            }
            case Op::Sym: {
                auto it = bindings_.find(n.name);
                if (it == bindings_.end()) return std::nullopt;
                return std::make_pair(zero(), it->second);
            }
            case Op::Neg: {
                auto a = affine_node(*n.kids[0]);
                if (!a) return std::nullopt;
                return std::make_pair(scaled(std::move(a->first), -1.0), -a->second);
            }
            case Op::Add:
            case Op::Sub: {
                auto a = affine_node(*n.kids[0]);
                auto b = affine_node(*n.kids[1]);
                if (!a || !b) return std::nullopt;
                const double s = n.op == Op::Add ? 1.0 : -1.0;
                return std::make_pair(axpy(std::move(a->first), s, b->first),
                                      a->second + s * b->second);
            }
            case Op::Mul: {
                auto a = affine_node(*n.kids[0]);
                auto b = affine_node(*n.kids[1]);
                if (!a || !b) return std::nullopt;
                const bool a_const = is_zero(a->first), b_const = is_zero(b->first);
                if (a_const)
                    return std::make_pair(scaled(std::move(b->first), a->second),
                                          a->second * b->second);
                if (b_const)
                    return std::make_pair(scaled(std::move(a->first), b->second),
                                          a->second * b->second);
                return std::nullopt;
            }
            case Op::Div: {
                auto a = affine_node(*n.kids[0]);
                auto b = affine_node(*n.kids[1]);
                if (!a || !b || !is_zero(b->first) || b->second == 0.0) return std::nullopt;
                return std::make_pair(scaled(std::move(a->first), 1.0 / b->second),
                                      a->second / b->second);
            }
            case Op::Pow: {
                auto a = affine_node(*n.kids[0]);
                auto b = affine_node(*n.kids[1]);
                if (!a || !b || !is_zero(b->first)) return std::nullopt;
                if (b->second == 1.0) return a;
                if (b->second == 0.0) return std::make_pair(zero(), 1.0);
                if (is_zero(a->first))
                    return std::make_pair(zero(), std::pow(a->second, b->second));
                return std::nullopt;
            }
            case Op::Call: {
                // constant folding only
                for (const auto& k : n.kids) {
                    auto a = affine_node(*k);
                    if (!a || !is_zero(a->first)) return std::nullopt;
                }
                try {
                    Vec probe(static_cast<std::size_t>(dim_), 0.0);
                    return std::make_pair(zero(), eval_node(n, probe));
                } catch (const EvalDomainError&) {
                    return std::nullopt;
                }
            }
        }
        return std::nullopt;
    }

    static bool is_zero(const Vec& v) {
        for (double c : v)
            if (c != 0.0) return false;
        return true;
    }

    NodePtr root_;
    int dim_;
    std::map<std::string, double> bindings_;
};

namespace detail {

inline bool is_function_name(const std::string& s) {
    return s == "sin" || s == "cos" || s == "exp" || s == "sqrt" || s == "abs" ||
           s == "min" || s == "max";
}

inline std::size_t function_arity(const std::string& s) {
    return (s == "min" || s == "max") ? 2 : 1;
}

}  // namespace detail

// Recursive-descent parser for the usual infix grammar:
//   expr: term (('+'|'-') term)* ; term: unary (('*'|'/') unary)* ;
//   unary: '-' unary | power ; power: atom ('^' unary)? ;
//   atom: number | x<k> | symbol | fn '(' expr {',' expr} ')' | '(' expr ')'
inline Expr parse_expr(const std::string& text, int dim,
                       const std::map<std::string, double>& symbols = {},
                       const std::set<std::string>& deferred = {}) {
    struct Parser {
        const std::string& s;
        std::size_t pos = 0;
        int dim;
        const std::map<std::string, double>& symbols;
        const std::set<std::string>& deferred;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        char peek() {
            skip_ws();
            return pos < s.size() ? s[pos] : '\0';
        }

        Expr expr() {
            Expr lhs = term();
            for (;;) {
                if (eat('+'))
                    lhs = lhs + term();
                else if (eat('-'))
                    lhs = lhs - term();
                else
                    return lhs;
            }
        }

        Expr term() {
            Expr lhs = unary();
            for (;;) {
                if (eat('*'))
                    lhs = lhs * unary();
                else if (eat('/'))
                    lhs = lhs / unary();
                else
                    return lhs;
            }
        }

        Expr unary() {
            if (eat('-')) return -unary();
            return power();
        }

        Expr power() {
            Expr base = atom();
            if (eat('^')) return Expr::pow_of(base, unary());
            return base;
        }

        Expr atom() {
            skip_ws();
            if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
            if (c == '(') {
                ++pos;
                Expr e = expr();
                if (!eat(')')) throw ParseError("expected ')'", pos);
                return e;
            }
            throw ParseError(std::string("unexpected character '") + c + "'", pos);
        }

        Expr number() {
            const char* begin = s.c_str() + pos;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError("malformed number", pos);
            pos += static_cast<std::size_t>(end - begin);
            return Expr::constant(v, dim);
        }

        Expr ident() {
            const std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            const std::string name = s.substr(start, pos - start);

            if (peek() == '(') {
                if (!detail::is_function_name(name))
                    throw ParseError("unknown function '" + name + "'", start);
                ++pos;  // '('
                std::vector<Expr> args;
                if (peek() != ')') {
                    args.push_back(expr());
                    while (eat(',')) args.push_back(expr());
                }
                if (!eat(')')) throw ParseError("expected ')'", pos);
                if (args.size() != detail::function_arity(name))
                    throw ParseError("function '" + name + "' expects " +
                                         std::to_string(detail::function_arity(name)) +
                                         " argument(s), got " + std::to_string(args.size()),
                                     start);
                return Expr::call(name, std::move(args));
            }

            // state component x1..xn
            if (name.size() >= 2 && name[0] == 'x' &&
                name.find_first_not_of("0123456789", 1) == std::string::npos) {
                const long idx = std::strtol(name.c_str() + 1, nullptr, 10);
                if (idx < 1 || idx > dim)
                    throw ParseError("state component '" + name + "' out of range for dimension " +
                                         std::to_string(dim),
                                     start);
                return Expr::var(static_cast<int>(idx - 1), dim);
            }

            if (auto it = symbols.find(name); it != symbols.end())
                return Expr::symbol(name, dim).bind(name, it->second);
            if (deferred.count(name)) return Expr::symbol(name, dim);
            throw ParseError("unknown identifier '" + name + "'", start);
        }
    };

    Parser p{text, 0, dim, symbols, deferred};
    Expr e = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing input", p.pos);
    return e;
}

}  // namespace hyreach

#endif
