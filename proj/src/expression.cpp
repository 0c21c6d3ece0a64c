#include "curvspin/expression.hpp"

#include <cctype>
#include <cmath>

namespace curvspin {

struct Expression::Node {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };
  Kind kind = Kind::Number;
  double value = 0.0;
  std::size_t slot = 0;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_ + 1); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = make(Node::Kind::Add, n, term());
      else if (accept('-')) n = make(Node::Kind::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = make(Node::Kind::Mul, n, unary());
      else if (accept('/')) n = make(Node::Kind::Div, n, unary());
      else return n;
    }
  }

  // Unary minus binds looser than ^ so that -x^2 == -(x^2).
  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Node::Kind::Pow, base, unary());  // right associative
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Number;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    static const std::map<std::string, Node::Kind> functions = {
        {"sin", Node::Kind::Sin}, {"cos", Node::Kind::Cos},
        {"exp", Node::Kind::Exp}, {"sqrt", Node::Kind::Sqrt}};
    if (auto it = functions.find(name); it != functions.end()) {
      if (!accept('(')) fail("expected '(' after " + name);
      auto arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(it->second, arg);
    }
    auto n = std::make_shared<Node>();
    if (name == "pi") {
      n->kind = Node::Kind::Number;
      n->value = 3.14159265358979323846;
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        n->kind = Node::Kind::Variable;
        n->slot = i;
        return n;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const std::vector<double>& v) {
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::Variable: return v[n.slot];
    case Node::Kind::Neg: return -eval(*n.lhs, v);
    case Node::Kind::Add: return eval(*n.lhs, v) + eval(*n.rhs, v);
    case Node::Kind::Sub: return eval(*n.lhs, v) - eval(*n.rhs, v);
    case Node::Kind::Mul: return eval(*n.lhs, v) * eval(*n.rhs, v);
    case Node::Kind::Div: return eval(*n.lhs, v) / eval(*n.rhs, v);
    case Node::Kind::Pow: return std::pow(eval(*n.lhs, v), eval(*n.rhs, v));
    case Node::Kind::Sin: return std::sin(eval(*n.lhs, v));
    case Node::Kind::Cos: return std::cos(eval(*n.lhs, v));
    case Node::Kind::Exp: return std::exp(eval(*n.lhs, v));
    case Node::Kind::Sqrt: return std::sqrt(eval(*n.lhs, v));
  }
  return 0.0;
}

}  // namespace

Expression::Expression(const std::string& text, std::vector<std::string> variables)
    : text_(text), variables_(std::move(variables)) {
  root_ = Parser(text_, variables_).parse();
}

double Expression::evaluate(const std::vector<double>& values) const {
  if (values.size() != variables_.size())
    throw std::invalid_argument("Expression::evaluate: expected " +
                                std::to_string(variables_.size()) + " values");
  return eval(*root_, values);
}

}  // namespace curvspin
