#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvspin {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t column)
      : std::runtime_error(what + " (column " + std::to_string(column) + ")"),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Minimal arithmetic expression: + - * / ^, unary minus, parentheses,
/// sin cos exp sqrt, the constant pi and named variables.
///
/// Parsed once into an immutable tree; evaluate() is reentrant.
class Expression {
 public:
  /// `variables` lists the names that evaluate() will receive positionally.
  Expression(const std::string& text, std::vector<std::string> variables);

  double evaluate(const std::vector<double>& values) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

}  // namespace curvspin
