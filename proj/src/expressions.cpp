#include "mfg/expressions.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <vector>

namespace mfg {

namespace {

struct Node {
  enum class Kind { Number, Trig, Add, Sub, Mul, Neg };
  Kind kind;
  double number = 0.0;
  bool is_cos = false;
  std::vector<int> wave;  // integer wavenumber per axis (Trig)
  std::unique_ptr<Node> lhs, rhs;
};

using NodePtr = std::unique_ptr<Node>;

class Parser {
 public:
  Parser(const std::string& text, const PeriodicGrid& grid) : text_(text), grid_(grid) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExprError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  bool peek_ident(const char* word) {
    skip_ws();
    const std::size_t len = std::string(word).size();
    if (text_.compare(pos_, len, word) != 0) return false;
    const std::size_t end = pos_ + len;
    if (end < text_.size() &&
        (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
      return false;
    return true;
  }

  bool eat_ident(const char* word) {
    if (!peek_ident(word)) return false;
    pos_ += std::string(word).size();
    return true;
  }

  double number() {
    skip_ws();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  bool at_number() {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  NodePtr make_number(double v) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Number;
    n->number = v;
    return n;
  }

  NodePtr expr() {
    NodePtr left = eat('-') ? negate(term()) : term();
    for (;;) {
      if (eat('+')) {
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Add;
        n->lhs = std::move(left);
        n->rhs = term();
        left = std::move(n);
      } else if (eat('-')) {
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Sub;
        n->lhs = std::move(left);
        n->rhs = term();
        left = std::move(n);
      } else {
        return left;
      }
    }
  }

  NodePtr negate(NodePtr inner) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Neg;
    n->lhs = std::move(inner);
    return n;
  }

  NodePtr term() {
    NodePtr left = factor();
    while (eat('*')) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Mul;
      n->lhs = std::move(left);
      n->rhs = factor();
      left = std::move(n);
    }
    return left;
  }

  NodePtr factor() {
    skip_ws();
    if (eat('(')) {
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (peek_ident("cos") || peek_ident("sin")) return trig();
    if (at_number()) return make_number(number());
    fail("expected a number, cos(...), sin(...) or a parenthesized expression");
  }

  NodePtr trig() {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Trig;
    if (eat_ident("cos"))
      n->is_cos = true;
    else if (eat_ident("sin"))
      n->is_cos = false;
    expect('(');
    // Literal 2*pi* prefix, then an integer combination of axis variables.
    skip_ws();
    const double two = number();
    if (two != 2.0) fail("trig argument must start with 2*pi*");
    expect('*');
    if (!eat_ident("pi")) fail("trig argument must start with 2*pi*");
    expect('*');
    n->wave.assign(static_cast<std::size_t>(grid_.dim), 0);
    phase(n->wave);
    expect(')');
    return n;
  }

  // phase := phase_term { ('+'|'-') phase_term }, optionally parenthesized
  void phase(std::vector<int>& wave) {
    if (eat('(')) {
      phase_sum(wave);
      expect(')');
    } else {
      phase_term(wave, +1);
    }
  }

  void phase_sum(std::vector<int>& wave) {
    phase_term(wave, eat('-') ? -1 : +1);
    for (;;) {
      if (eat('+'))
        phase_term(wave, +1);
      else if (eat('-'))
        phase_term(wave, -1);
      else
        return;
    }
  }

  // phase_term := [number '*'] axis
  void phase_term(std::vector<int>& wave, int sign) {
    int k = 1;
    if (at_number()) {
      const double v = number();
      k = static_cast<int>(v);
      if (static_cast<double>(k) != v) fail("wavenumber must be an integer");
      expect('*');
    }
    wave[axis_index()] += sign * k;
  }

  int axis_index() {
    for (int a = 0; a < grid_.dim; ++a) {
      const std::string name = "x" + std::to_string(a + 1);
      if (eat_ident(name.c_str())) return a;
    }
    if (grid_.dim == 1 && eat_ident("x")) return 0;
    if (eat_ident("x")) return 0;  // shorthand for x1 in higher dimensions
    fail("expected an axis variable (x" +
         std::string(grid_.dim > 1 ? "1.." + std::to_string(grid_.dim) : "") + ")");
  }

  const std::string& text_;
  const PeriodicGrid& grid_;
  std::size_t pos_ = 0;
};

double evaluate(const Node& node, const PeriodicGrid& grid, std::int64_t index) {
  switch (node.kind) {
    case Node::Kind::Number:
      return node.number;
    case Node::Kind::Add:
      return evaluate(*node.lhs, grid, index) + evaluate(*node.rhs, grid, index);
    case Node::Kind::Sub:
      return evaluate(*node.lhs, grid, index) - evaluate(*node.rhs, grid, index);
    case Node::Kind::Mul:
      return evaluate(*node.lhs, grid, index) * evaluate(*node.rhs, grid, index);
    case Node::Kind::Neg:
      return -evaluate(*node.lhs, grid, index);
    case Node::Kind::Trig: {
      double arg = 0.0;
      for (int a = 0; a < grid.dim; ++a) arg += node.wave[a] * grid.position(index, a);
      arg *= 2.0 * std::numbers::pi;
      return node.is_cos ? std::cos(arg) : std::sin(arg);
    }
  }
  return 0.0;
}

}  // namespace

GridField evaluate_expression(const std::string& text, const PeriodicGrid& grid) {
  Parser parser(text, grid);
  NodePtr root = parser.parse();
  GridField out(grid);
  for (std::int64_t p = 0; p < out.size(); ++p) out[p] = evaluate(*root, grid, p);
  return out;
}

}  // namespace mfg
