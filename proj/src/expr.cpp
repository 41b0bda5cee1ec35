#include "llbar/expr.hpp"

#include "llbar/errors.hpp"

#include <cctype>
#include <cmath>
#include <utility>

namespace llbar {

struct Expression::Node {
    enum class Kind { constant, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos };

    Kind kind;
    double value = 0.0;  // for constant and the pow exponent
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
}

NodePtr make_node(Node::Kind kind, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->kind == Node::Kind::constant && n->value == v;
}

// Light algebraic cleanup so derivative trees stay small.
NodePtr simplify(Node::Kind kind, NodePtr a, NodePtr b) {
    switch (kind) {
    case Node::Kind::add:
        if (is_const(a, 0.0))
            return b;
        if (is_const(b, 0.0))
            return a;
        break;
    case Node::Kind::sub:
        if (is_const(b, 0.0))
            return a;
        break;
    case Node::Kind::mul:
        if (is_const(a, 0.0) || is_const(b, 0.0))
            return make_const(0.0);
        if (is_const(a, 1.0))
            return b;
        if (is_const(b, 1.0))
            return a;
        break;
    default:
        break;
    }
    return make_node(kind, std::move(a), std::move(b));
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr run() {
        NodePtr e = parse_expr();
        skip_space();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw config_error("expression '" + text_ + "': " + message + " at position " +
                           std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
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

    NodePtr parse_expr() {
        NodePtr e = parse_term();
        while (true) {
            if (consume('+'))
                e = make_node(Node::Kind::add, e, parse_term());
            else if (consume('-'))
                e = make_node(Node::Kind::sub, e, parse_term());
            else
                return e;
        }
    }

    NodePtr parse_term() {
        NodePtr e = parse_unary();
        while (true) {
            if (consume('*'))
                e = make_node(Node::Kind::mul, e, parse_unary());
            else if (consume('/'))
                e = make_node(Node::Kind::div, e, parse_unary());
            else
                return e;
        }
    }

    NodePtr parse_unary() {
        if (consume('-'))
            return make_node(Node::Kind::neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (!consume('^'))
            return base;
        // Exponents are numeric literals (optionally negated) so the symbolic
        // derivative stays elementary.
        skip_space();
        bool negated = consume('-');
        const double expo = parse_number();
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::pow;
        n->a = base;
        n->value = negated ? -expo : expo;
        return n;
    }

    double parse_number() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == 'e' || text_[pos_] == 'E' ||
                ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
                 (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
            ++pos_;
        if (pos_ == start)
            fail("expected a number");
        try {
            return std::stod(text_.substr(start, pos_ - start));
        } catch (const std::exception&) {
            fail("malformed number '" + text_.substr(start, pos_ - start) + "'");
        }
    }

    NodePtr parse_atom() {
        skip_space();
        if (pos_ >= text_.size())
            fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return make_const(parse_number());
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!consume(')'))
                fail("missing ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end])))
                ++end;
            const std::string name = text_.substr(pos_, end - pos_);
            pos_ = end;
            if (name == "x")
                return make_node(Node::Kind::var_x, nullptr);
            if (name == "y")
                return make_node(Node::Kind::var_y, nullptr);
            if (name == "pi")
                return make_const(3.14159265358979323846);
            if (name == "sin" || name == "cos") {
                if (!consume('('))
                    fail("expected '(' after " + name);
                NodePtr arg = parse_expr();
                if (!consume(')'))
                    fail("missing ')'");
                return make_node(name == "sin" ? Node::Kind::sin : Node::Kind::cos, arg);
            }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

double eval_node(const Node* n, double x, double y) {
    switch (n->kind) {
    case Node::Kind::constant: return n->value;
    case Node::Kind::var_x: return x;
    case Node::Kind::var_y: return y;
    case Node::Kind::add: return eval_node(n->a.get(), x, y) + eval_node(n->b.get(), x, y);
    case Node::Kind::sub: return eval_node(n->a.get(), x, y) - eval_node(n->b.get(), x, y);
    case Node::Kind::mul: return eval_node(n->a.get(), x, y) * eval_node(n->b.get(), x, y);
    case Node::Kind::div: return eval_node(n->a.get(), x, y) / eval_node(n->b.get(), x, y);
    case Node::Kind::pow: return std::pow(eval_node(n->a.get(), x, y), n->value);
    case Node::Kind::neg: return -eval_node(n->a.get(), x, y);
    case Node::Kind::sin: return std::sin(eval_node(n->a.get(), x, y));
    case Node::Kind::cos: return std::cos(eval_node(n->a.get(), x, y));
    }
    return 0.0;
}

NodePtr diff_node(const NodePtr& n, char var) {
    switch (n->kind) {
    case Node::Kind::constant:
        return make_const(0.0);
    case Node::Kind::var_x:
        return make_const(var == 'x' ? 1.0 : 0.0);
    case Node::Kind::var_y:
        return make_const(var == 'y' ? 1.0 : 0.0);
    case Node::Kind::add:
        return simplify(Node::Kind::add, diff_node(n->a, var), diff_node(n->b, var));
    case Node::Kind::sub:
        return simplify(Node::Kind::sub, diff_node(n->a, var), diff_node(n->b, var));
    case Node::Kind::mul:
        return simplify(Node::Kind::add, simplify(Node::Kind::mul, diff_node(n->a, var), n->b),
                        simplify(Node::Kind::mul, n->a, diff_node(n->b, var)));
    case Node::Kind::div: {
        // (a' b - a b') / b^2
        NodePtr num = simplify(Node::Kind::sub,
                               simplify(Node::Kind::mul, diff_node(n->a, var), n->b),
                               simplify(Node::Kind::mul, n->a, diff_node(n->b, var)));
        NodePtr den = simplify(Node::Kind::mul, n->b, n->b);
        return simplify(Node::Kind::div, std::move(num), std::move(den));
    }
    case Node::Kind::pow: {
        // d(a^c) = c a^(c-1) a'
        auto reduced = std::make_shared<Node>();
        reduced->kind = Node::Kind::pow;
        reduced->a = n->a;
        reduced->value = n->value - 1.0;
        NodePtr factor = simplify(Node::Kind::mul, make_const(n->value), reduced);
        return simplify(Node::Kind::mul, std::move(factor), diff_node(n->a, var));
    }
    case Node::Kind::neg:
        return simplify(Node::Kind::neg, diff_node(n->a, var), nullptr);
    case Node::Kind::sin:
        return simplify(Node::Kind::mul, make_node(Node::Kind::cos, n->a), diff_node(n->a, var));
    case Node::Kind::cos:
        return simplify(Node::Kind::neg,
                        simplify(Node::Kind::mul, make_node(Node::Kind::sin, n->a),
                                 diff_node(n->a, var)),
                        nullptr);
    }
    return make_const(0.0);
}

} // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;
Expression::~Expression() = default;

double Expression::eval(double x, double y) const {
    if (!root_)
        throw config_error("Expression: evaluating an empty expression");
    return eval_node(root_.get(), x, y);
}

Expression Expression::derivative(char var) const {
    if (!root_)
        throw config_error("Expression: differentiating an empty expression");
    Expression d;
    d.root_ = diff_node(root_, var);
    d.text_ = "d/d" + std::string(1, var) + "(" + text_ + ")";
    return d;
}

} // namespace llbar
