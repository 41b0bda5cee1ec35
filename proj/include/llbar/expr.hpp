#pragma once

#include <memory>
#include <string>

namespace llbar {

// Minimal arithmetic expressions over x and y: literals, pi, + - * / ^,
// sin, cos, unary minus. Enough to express the built-in initial data and
// user-supplied fields, with exact symbolic x/y derivatives for the Ritz
// projection right-hand sides.
class Expression {
public:
    // Throws config_error on syntax errors, naming the offending token.
    static Expression parse(const std::string& text);

    Expression() = default;
    Expression(const Expression&);
    Expression& operator=(const Expression&);
    Expression(Expression&&) noexcept = default;
    Expression& operator=(Expression&&) noexcept = default;
    ~Expression();

    double eval(double x, double y) const;
    Expression derivative(char var) const;  // var is 'x' or 'y'

    const std::string& text() const { return text_; }
    bool empty() const { return root_ == nullptr; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace llbar
