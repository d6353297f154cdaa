#pragma once

#include <memory>
#include <string>

namespace formcalc {

/// Real function of x from a string over the grammar
///   expr := term (('+' | '-') term)*     term := unary (('*' | '/') unary)*
///   unary := '-' unary | power          power := primary ('^' unary)?
///   primary := number | x | pi | e | (exp | sin | cos) '(' expr ')' | '(' expr ')'
/// Parse errors throw Error(InvalidArgument) with the offending position.
class Expression {
 public:
  Expression();  // the constant 0
  static Expression parse(const std::string& text);
  static Expression constant(double c);

  double operator()(double x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace formcalc
