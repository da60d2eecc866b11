#pragma once

#include <memory>
#include <string>
#include <vector>

namespace tieq {

// Variables available to config-supplied expressions.
struct ExprVars {
    double tau = 0.0;
    double t = 0.0;
    double x = 0.0;
    double u = 0.0;
};

// Tiny arithmetic-expression interpreter for declarative model specs.
// Grammar: + - * / ^, unary minus, parentheses, functions exp/ln/sqrt/min/max,
// variables tau, t, x, u. Parsed once, evaluated many times.
class Expr {
public:
    static Expr parse(const std::string& text);

    double eval(const ExprVars& vars) const;
    const std::string& text() const { return text_; }

private:
    struct Node;
    std::shared_ptr<const std::vector<Node>> nodes_;
    std::string text_;

    friend class ExprParser;
};

}  // namespace tieq
