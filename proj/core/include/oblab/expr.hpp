#pragma once

#include <memory>
#include <string>

#include "oblab/util.hpp"

namespace oblab {

/// Small arithmetic expression over point coordinates, used for obstacle,
/// forcing and boundary data in run configurations.
///
/// Grammar: +, -, *, /, ^ (right associative), parentheses, numbers,
/// coordinates x, y (z in 3D), functions abs, min, max, log, exp, sqrt, and
/// dist(cx, cy, ...) for the distance to a fixed point. Parse errors carry
/// the column and are wrapped with the config line by the caller.
class Expression {
 public:
  struct Node;  // defined in expr.cpp; opaque to users

  static Expression parse(const std::string& text, int dim);

  double eval(const Vec& x) const;
  const std::string& text() const { return text_; }

  Expression();
  Expression(const Expression&);
  Expression(Expression&&) noexcept;
  Expression& operator=(const Expression&);
  Expression& operator=(Expression&&) noexcept;
  ~Expression();

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  int dim_ = 2;
};

}  // namespace oblab
