#include "tieq/expr.hpp"

#include "tieq/common.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace tieq {

enum class Op : std::uint8_t {
    Const,
    VarTau,
    VarT,
    VarX,
    VarU,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Exp,
    Ln,
    Sqrt,
    Min,
    Max,
};

struct Expr::Node {
    Op op;
    double value = 0.0;  // Const
    int a = -1;          // child indices
    int b = -1;
};

namespace {

struct Token {
    enum Kind { Num, Ident, Sym, End } kind;
    std::string text;
    double num = 0.0;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    Token next() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ >= s_.size()) return {Token::End, "", 0.0};
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ConfigError("bad number in expression: " + s_);
            pos_ += static_cast<std::size_t>(end - begin);
            return {Token::Num, "", v};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            return {Token::Ident, s_.substr(start, pos_ - start), 0.0};
        }
        ++pos_;
        return {Token::Sym, std::string(1, c), 0.0};
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

class ExprParser {
public:
    explicit ExprParser(const std::string& text) : text_(text), lexer_(text) { advance(); }

    Expr parse() {
        const int root = expression();
        if (tok_.kind != Token::End)
            throw ConfigError("trailing input in expression: '" + text_ + "'");
        if (root != static_cast<int>(nodes_.size()) - 1) nodes_.push_back(nodes_[root]);
        Expr e;
        e.nodes_ = std::make_shared<const std::vector<Expr::Node>>(std::move(nodes_));
        e.text_ = text_;
        return e;
    }

private:
    void advance() { tok_ = lexer_.next(); }

    bool accept_sym(const char* s) {
        if (tok_.kind == Token::Sym && tok_.text == s) {
            advance();
            return true;
        }
        return false;
    }

    void expect_sym(const char* s) {
        if (!accept_sym(s))
            throw ConfigError(std::string("expected '") + s + "' in expression: '" + text_ + "'");
    }

    int push(Expr::Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int expression() {
        int lhs = term();
        for (;;) {
            if (accept_sym("+"))
                lhs = push({Op::Add, 0.0, lhs, term()});
            else if (accept_sym("-"))
                lhs = push({Op::Sub, 0.0, lhs, term()});
            else
                return lhs;
        }
    }

    int term() {
        int lhs = unary();
        for (;;) {
            if (accept_sym("*"))
                lhs = push({Op::Mul, 0.0, lhs, unary()});
            else if (accept_sym("/"))
                lhs = push({Op::Div, 0.0, lhs, unary()});
            else
                return lhs;
        }
    }

    int unary() {
        if (accept_sym("-")) return push({Op::Neg, 0.0, unary(), -1});
        if (accept_sym("+")) return unary();
        return power();
    }

    int power() {
        const int base = primary();
        if (accept_sym("^")) {
            // right-associative
            return push({Op::Pow, 0.0, base, unary()});
        }
        return base;
    }

    int primary() {
        if (tok_.kind == Token::Num) {
            const double v = tok_.num;
            advance();
            return push({Op::Const, v, -1, -1});
        }
        if (tok_.kind == Token::Ident) {
            const std::string name = tok_.text;
            advance();
            if (accept_sym("(")) {
                const int a = expression();
                if (name == "min" || name == "max") {
                    expect_sym(",");
                    const int b = expression();
                    expect_sym(")");
                    return push({name == "min" ? Op::Min : Op::Max, 0.0, a, b});
                }
                expect_sym(")");
                if (name == "exp") return push({Op::Exp, 0.0, a, -1});
                if (name == "ln") return push({Op::Ln, 0.0, a, -1});
                if (name == "sqrt") return push({Op::Sqrt, 0.0, a, -1});
                throw ConfigError("unknown function '" + name + "' in expression: '" + text_ + "'");
            }
            if (name == "tau") return push({Op::VarTau, 0.0, -1, -1});
            if (name == "t") return push({Op::VarT, 0.0, -1, -1});
            if (name == "x") return push({Op::VarX, 0.0, -1, -1});
            if (name == "u") return push({Op::VarU, 0.0, -1, -1});
            throw ConfigError("unknown variable '" + name + "' in expression: '" + text_ + "'");
        }
        if (accept_sym("(")) {
            const int e = expression();
            expect_sym(")");
            return e;
        }
        throw ConfigError("malformed expression: '" + text_ + "'");
    }

    std::string text_;
    Lexer lexer_;
    Token tok_;
    std::vector<Expr::Node> nodes_;
};

Expr Expr::parse(const std::string& text) { return ExprParser(text).parse(); }

double Expr::eval(const ExprVars& vars) const {
    const auto& nodes = *nodes_;
    // nodes are in topological order (children precede parents)
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        const double a = n.a >= 0 ? vals[static_cast<std::size_t>(n.a)] : 0.0;
        const double b = n.b >= 0 ? vals[static_cast<std::size_t>(n.b)] : 0.0;
        switch (n.op) {
            case Op::Const: vals[i] = n.value; break;
            case Op::VarTau: vals[i] = vars.tau; break;
            case Op::VarT: vals[i] = vars.t; break;
            case Op::VarX: vals[i] = vars.x; break;
            case Op::VarU: vals[i] = vars.u; break;
            case Op::Add: vals[i] = a + b; break;
            case Op::Sub: vals[i] = a - b; break;
            case Op::Mul: vals[i] = a * b; break;
            case Op::Div: vals[i] = a / b; break;
            case Op::Pow: vals[i] = std::pow(a, b); break;
            case Op::Neg: vals[i] = -a; break;
            case Op::Exp: vals[i] = std::exp(a); break;
            case Op::Ln: vals[i] = std::log(a); break;
            case Op::Sqrt: vals[i] = std::sqrt(a); break;
            case Op::Min: vals[i] = std::min(a, b); break;
            case Op::Max: vals[i] = std::max(a, b); break;
        }
    }
    return vals.back();
}

}  // namespace tieq
