#include "rps/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace rps::expr {

namespace {

NodePtr constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->value = v;
  return n;
}

NodePtr unary(Node::Kind k, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  return n;
}

NodePtr binary(Node::Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->kind == Node::Kind::Constant && n->value == v;
}

// folding keeps derivative output readable and cheap to evaluate
NodePtr fold_add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == Node::Kind::Constant && b->kind == Node::Kind::Constant)
    return constant(a->value + b->value);
  return binary(Node::Kind::Add, std::move(a), std::move(b));
}

NodePtr fold_sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->kind == Node::Kind::Constant && b->kind == Node::Kind::Constant)
    return constant(a->value - b->value);
  if (is_const(a, 0.0)) return unary(Node::Kind::Neg, std::move(b));
  return binary(Node::Kind::Sub, std::move(a), std::move(b));
}

NodePtr fold_mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == Node::Kind::Constant && b->kind == Node::Kind::Constant)
    return constant(a->value * b->value);
  return binary(Node::Kind::Mul, std::move(a), std::move(b));
}

class Parser {
 public:
  Parser(const std::string& text, int dimension) : s_(text), dim_(dimension) {}

  NodePtr run() {
    auto e = expression();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;
  int dim_;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression error at position " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(uint8_t(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_space();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expression() {
    bool negate = false;
    skip_space();
    while (consume('-')) negate = !negate;  // leading unary minus chain
    auto e = term();
    if (negate) e = unary(Node::Kind::Neg, std::move(e));
    for (;;) {
      if (consume('+'))
        e = binary(Node::Kind::Add, std::move(e), term());
      else if (consume('-'))
        e = binary(Node::Kind::Sub, std::move(e), term());
      else
        return e;
    }
  }

  NodePtr term() {
    auto e = factor();
    while (consume('*')) e = binary(Node::Kind::Mul, std::move(e), factor());
    return e;
  }

  NodePtr factor() {
    auto base = primary();
    if (!consume('^')) return base;
    // exponents are constants by grammar: a literal or pi, optionally signed
    double sign = 1.0;
    while (true) {
      if (consume('-'))
        sign = -sign;
      else if (consume('+'))
        ;
      else
        break;
    }
    skip_space();
    double expo;
    if (starts_with_identifier("pi")) {
      pos_ += 2;
      expo = std::numbers::pi;
    } else {
      expo = number();
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Pow;
    n->a = std::move(base);
    n->exponent = sign * expo;
    return n;
  }

  bool starts_with_identifier(const std::string& word) {
    skip_space();
    if (s_.compare(pos_, word.size(), word) != 0) return false;
    const size_t end = pos_ + word.size();
    if (end < s_.size() && (std::isalnum(uint8_t(s_[end])) || s_[end] == '_')) return false;
    return true;
  }

  double number() {
    skip_space();
    double v = 0.0;
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr == begin) fail("expected a number");
    pos_ = size_t(ptr - s_.data());
    return v;
  }

  NodePtr primary() {
    skip_space();
    if (consume('(')) {
      auto e = expression();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (consume('-')) return unary(Node::Kind::Neg, primary());
    const char c = peek();
    if (std::isdigit(uint8_t(c)) || c == '.') return constant(number());
    if (starts_with_identifier("pi")) {
      pos_ += 2;
      return constant(std::numbers::pi);
    }
    if (starts_with_identifier("sin")) {
      pos_ += 3;
      if (!consume('(')) fail("sin expects '('");
      auto e = expression();
      if (!consume(')')) fail("missing ')' after sin argument");
      return unary(Node::Kind::Sin, std::move(e));
    }
    if (starts_with_identifier("cos")) {
      pos_ += 3;
      if (!consume('(')) fail("cos expects '('");
      auto e = expression();
      if (!consume(')')) fail("missing ')' after cos argument");
      return unary(Node::Kind::Cos, std::move(e));
    }
    if (starts_with_identifier("t")) {
      ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Time;
      return n;
    }
    if (c == 'x') {
      ++pos_;
      int index = 0;
      if (pos_ < s_.size() && s_[pos_] == '_') {
        ++pos_;
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(uint8_t(s_[pos_]))) ++pos_;
        if (pos_ == start) fail("x_ expects a component number");
        index = std::stoi(s_.substr(start, pos_ - start)) - 1;
      }
      if (index < 0 || index >= dim_)
        fail("state variable index out of range for dimension " + std::to_string(dim_));
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::State;
      n->index = index;
      return n;
    }
    fail("expected a value");
  }
};

}  // namespace

NodePtr parse(const std::string& text, int dimension) {
  if (dimension < 1) throw ParseError("dimension must be positive");
  return Parser(text, dimension).run();
}

double eval(const Node& e, double t, const std::vector<double>& x) {
  switch (e.kind) {
    case Node::Kind::Constant: return e.value;
    case Node::Kind::Time: return t;
    case Node::Kind::State: return x[size_t(e.index)];
    case Node::Kind::Add: return eval(*e.a, t, x) + eval(*e.b, t, x);
    case Node::Kind::Sub: return eval(*e.a, t, x) - eval(*e.b, t, x);
    case Node::Kind::Mul: return eval(*e.a, t, x) * eval(*e.b, t, x);
    case Node::Kind::Neg: return -eval(*e.a, t, x);
    case Node::Kind::Pow: return std::pow(eval(*e.a, t, x), e.exponent);
    case Node::Kind::Sin: return std::sin(eval(*e.a, t, x));
    case Node::Kind::Cos: return std::cos(eval(*e.a, t, x));
  }
  return 0.0;
}

NodePtr derivative(const NodePtr& e, int state_index) {
  switch (e->kind) {
    case Node::Kind::Constant:
    case Node::Kind::Time: return constant(0.0);
    case Node::Kind::State: return constant(e->index == state_index ? 1.0 : 0.0);
    case Node::Kind::Add: return fold_add(derivative(e->a, state_index), derivative(e->b, state_index));
    case Node::Kind::Sub: return fold_sub(derivative(e->a, state_index), derivative(e->b, state_index));
    case Node::Kind::Mul:
      return fold_add(fold_mul(derivative(e->a, state_index), e->b),
                      fold_mul(e->a, derivative(e->b, state_index)));
    case Node::Kind::Neg: {
      auto da = derivative(e->a, state_index);
      if (is_const(da, 0.0)) return da;
      return unary(Node::Kind::Neg, std::move(da));
    }
    case Node::Kind::Pow: {
      auto da = derivative(e->a, state_index);
      if (is_const(da, 0.0)) return da;
      auto inner = std::make_shared<Node>();
      inner->kind = Node::Kind::Pow;
      inner->a = e->a;
      inner->exponent = e->exponent - 1.0;
      return fold_mul(constant(e->exponent), fold_mul(NodePtr(inner), std::move(da)));
    }
    case Node::Kind::Sin: {
      auto da = derivative(e->a, state_index);
      if (is_const(da, 0.0)) return da;
      return fold_mul(unary(Node::Kind::Cos, e->a), std::move(da));
    }
    case Node::Kind::Cos: {
      auto da = derivative(e->a, state_index);
      if (is_const(da, 0.0)) return da;
      return unary(Node::Kind::Neg, fold_mul(unary(Node::Kind::Sin, e->a), std::move(da)));
    }
  }
  return constant(0.0);
}

namespace {

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string to_string(const Node& e) {
  switch (e.kind) {
    case Node::Kind::Constant:
      return e.value < 0 ? "(" + format_number(e.value) + ")" : format_number(e.value);
    case Node::Kind::Time: return "t";
    case Node::Kind::State: return "x_" + std::to_string(e.index + 1);
    case Node::Kind::Add: return "(" + to_string(*e.a) + " + " + to_string(*e.b) + ")";
    case Node::Kind::Sub: return "(" + to_string(*e.a) + " - " + to_string(*e.b) + ")";
    case Node::Kind::Mul: return "(" + to_string(*e.a) + " * " + to_string(*e.b) + ")";
    case Node::Kind::Neg: return "(-" + to_string(*e.a) + ")";
    case Node::Kind::Pow:
      return "(" + to_string(*e.a) + ")^" + format_number(e.exponent);
    case Node::Kind::Sin: return "sin(" + to_string(*e.a) + ")";
    case Node::Kind::Cos: return "cos(" + to_string(*e.a) + ")";
  }
  return "";
}

}  // namespace rps::expr
