#include "formcalc/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "formcalc/errors.hpp"

namespace formcalc {

struct Expression::Node {
  enum class Op { Number, X, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos } op = Op::Number;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x) const {
    switch (op) {
      case Op::Number: return value;
      case Op::X: return x;
      case Op::Add: return lhs->eval(x) + rhs->eval(x);
      case Op::Sub: return lhs->eval(x) - rhs->eval(x);
      case Op::Mul: return lhs->eval(x) * rhs->eval(x);
      case Op::Div: return lhs->eval(x) / rhs->eval(x);
      case Op::Pow: return std::pow(lhs->eval(x), rhs->eval(x));
      case Op::Neg: return -lhs->eval(x);
      case Op::Exp: return std::exp(lhs->eval(x));
      case Op::Sin: return std::sin(lhs->eval(x));
      case Op::Cos: return std::cos(lhs->eval(x));
    }
    return NAN;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->value = value;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression '" << s_ << "' at position " << pos_ << ": " << what;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }

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
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(Op::Add, n, term());
      else if (accept('-')) n = make(Op::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Op::Mul, n, unary());
      else if (accept('/')) n = make(Op::Div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return make(Op::Number, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "x") return make(Op::X);
      if (id == "pi") return make(Op::Number, nullptr, nullptr, std::numbers::pi);
      if (id == "e") return make(Op::Number, nullptr, nullptr, std::numbers::e);
      Op f;
      if (id == "exp") f = Op::Exp;
      else if (id == "sin") f = Op::Sin;
      else if (id == "cos") f = Op::Cos;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      if (!accept('(')) fail("expected '(' after " + id);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(f, arg);
    }
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : text_("0"), root_(make(Op::Number)) {}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

Expression Expression::constant(double c) {
  Expression e;
  std::ostringstream os;
  os.precision(17);
  os << c;
  e.text_ = os.str();
  e.root_ = make(Op::Number, nullptr, nullptr, c);
  return e;
}

double Expression::operator()(double x) const { return root_->eval(x); }

}  // namespace formcalc
