#include "oblab/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace oblab {

struct Expression::Node {
  enum class Op {
    constant, coord, add, sub, mul, div, pow, neg,
    abs, min, max, log, exp, sqrt, dist
  };
  Op op;
  double value = 0.0;            // constant
  int coord = 0;                 // coordinate index
  std::vector<double> anchor;    // dist target
  std::shared_ptr<const Node> a, b;

  double eval(const Vec& x) const {
    switch (op) {
      case Op::constant: return value;
      case Op::coord: return x[coord];
      case Op::add: return a->eval(x) + b->eval(x);
      case Op::sub: return a->eval(x) - b->eval(x);
      case Op::mul: return a->eval(x) * b->eval(x);
      case Op::div: return a->eval(x) / b->eval(x);
      case Op::pow: return std::pow(a->eval(x), b->eval(x));
      case Op::neg: return -a->eval(x);
      case Op::abs: return std::abs(a->eval(x));
      case Op::min: return std::min(a->eval(x), b->eval(x));
      case Op::max: return std::max(a->eval(x), b->eval(x));
      case Op::log: return std::log(a->eval(x));
      case Op::exp: return std::exp(a->eval(x));
      case Op::sqrt: return std::sqrt(a->eval(x));
      case Op::dist: {
        double acc = 0.0;
        for (std::size_t d = 0; d < anchor.size(); ++d) {
          double diff = x[d] - anchor[d];
          acc += diff * diff;
        }
        return std::sqrt(acc);
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

// True when the subtree never reads the evaluation point, i.e. it folds to a
// constant (signed numbers like -1 parse as neg(constant)).
bool position_free(const Node* n) {
  if (!n) return true;
  if (n->op == Node::Op::coord || n->op == Node::Op::dist) return false;
  return position_free(n->a.get()) && position_free(n->b.get());
}

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int dim;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "expression error at column " << pos + 1 << ": " << msg << " in '" << text << "'";
    throw ValidationError(os.str());
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make(Node::Op::add, lhs, term());
      else if (eat('-'))
        lhs = make(Node::Op::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = make(Node::Op::mul, lhs, unary());
      else if (eat('/'))
        lhs = make(Node::Op::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Node::Op::neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Node::Op::pow, base, unary());  // right associative
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos;
      NodePtr inner = expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
      ++pos;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    std::string word = text.substr(start, pos - start);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(word, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    if (used != word.size()) fail("malformed number");
    auto n = std::make_shared<Node>();
    n->op = Node::Op::constant;
    n->value = value;
    return n;
  }

  NodePtr identifier() {
    std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                 text[pos] == '_'))
      ++pos;
    std::string name = text.substr(start, pos - start);

    auto coord_node = [&](int d) {
      if (d >= dim) fail("coordinate '" + name + "' not available in " + std::to_string(dim) + "D");
      auto n = std::make_shared<Node>();
      n->op = Node::Op::coord;
      n->coord = d;
      return n;
    };
    if (name == "x") return coord_node(0);
    if (name == "y") return coord_node(1);
    if (name == "z") return coord_node(2);
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::constant;
      n->value = M_PI;
      return n;
    }

    if (!eat('(')) fail("unknown identifier '" + name + "'");
    std::vector<NodePtr> args;
    if (!eat(')')) {
      args.push_back(expr());
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("expected ')' after arguments of " + name);
    }
    auto need = [&](std::size_t n) {
      if (args.size() != n)
        fail(name + " expects " + std::to_string(n) + " argument(s), got " +
             std::to_string(args.size()));
    };
    if (name == "abs") { need(1); return make(Node::Op::abs, args[0]); }
    if (name == "log") { need(1); return make(Node::Op::log, args[0]); }
    if (name == "exp") { need(1); return make(Node::Op::exp, args[0]); }
    if (name == "sqrt") { need(1); return make(Node::Op::sqrt, args[0]); }
    if (name == "min") { need(2); return make(Node::Op::min, args[0], args[1]); }
    if (name == "max") { need(2); return make(Node::Op::max, args[0], args[1]); }
    if (name == "dist") {
      if (static_cast<int>(args.size()) != dim)
        fail("dist expects " + std::to_string(dim) + " coordinates");
      auto n = std::make_shared<Node>();
      n->op = Node::Op::dist;
      for (const auto& a : args) {
        if (!position_free(a.get())) fail("dist arguments must be constants");
        n->anchor.push_back(a->eval(Vec::Zero(dim)));
      }
      return n;
    }
    fail("unknown function '" + name + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text, int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("expression: dim must be 2 or 3");
  Parser p{text, 0, dim};
  p.skip_ws();
  if (p.pos >= text.size()) throw ValidationError("expression: empty expression");
  NodePtr root = p.expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  Expression e;
  e.root_ = std::move(root);
  e.text_ = text;
  e.dim_ = dim;
  return e;
}

double Expression::eval(const Vec& x) const {
  if (!root_) throw ValidationError("expression: evaluating an empty expression");
  return root_->eval(x);
}

Expression::Expression() = default;
Expression::Expression(const Expression&) = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(const Expression&) = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

}  // namespace oblab
