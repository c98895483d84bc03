#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace rps::expr {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed drift grammar: +, -, * , ^ with a constant exponent, sin, cos,
// parentheses, numeric literals, pi, the time variable t, and state
// variables x (alias of x_1) and x_1 .. x_d.
struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Constant, Time, State, Add, Sub, Mul, Neg, Pow, Sin, Cos };
  Kind kind;
  double value = 0.0;     // Constant
  int index = 0;          // State: zero-based component
  double exponent = 1.0;  // Pow
  NodePtr a, b;
};

NodePtr parse(const std::string& text, int dimension);
double eval(const Node& e, double t, const std::vector<double>& x);

// Symbolic partial derivative with respect to x_{state_index}, with light
// constant folding.
NodePtr derivative(const NodePtr& e, int state_index);

// Round-trips through parse(). Constants print in shortest form.
std::string to_string(const Node& e);

}  // namespace rps::expr
