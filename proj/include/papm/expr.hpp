#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "papm/tensor.hpp"

namespace papm::dsl {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { sin, cos, exp, log, sqrt };

struct Literal {
  double value = 0.0;
};
/// Coordinate x_k, 1-based.
struct Variable {
  int index = 1;
};
struct Negate {
  ExprPtr operand;
};
struct Binary {
  BinaryOp op = BinaryOp::add;
  ExprPtr lhs, rhs;
};
struct Call {
  Function fn = Function::sin;
  ExprPtr arg;
};

struct Expr {
  std::variant<Literal, Variable, Negate, Binary, Call> node;
};

ExprPtr literal(double v);
ExprPtr variable(int index);
ExprPtr negate(ExprPtr e);
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr call(Function fn, ExprPtr arg);

std::string_view symbol(BinaryOp op);
std::string_view name(Function fn);

class ParseError : public Error {
 public:
  enum class Kind { syntax, unknown_identifier, arity };

  ParseError(Kind kind, int line, int column, std::vector<std::string> expected, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  Kind kind_;
  int line_, column_;
  std::vector<std::string> expected_;
};

std::string to_string(ParseError::Kind k);

/// Raised by eval for log of a non-positive number, sqrt of a negative
/// number, division by zero and any other non-finite intermediate.
class DomainError : public Error {
 public:
  DomainError(std::string subexpression, const std::string& what);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Grammar, loosest binding first:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          right-associative
///   primary := number | xK | fn '(' expr ')' | '(' expr ')'
/// Numbers are decimal with an optional exponent: 12, 0.5, 3e-2, 1.5E+3.
ExprPtr parse(std::string_view src);

/// Fully parenthesized canonical form; parse(print(e)) reproduces e for
/// every parsed e.
std::string print(const Expr& e);
inline std::string print(const ExprPtr& e) { return print(*e); }

/// Largest variable index used, 0 if none.
int max_variable(const Expr& e);

bool equal(const Expr& a, const Expr& b);

double eval(const Expr& e, std::span<const double> u);
double eval(const Expr& e, const Eigen::VectorXd& u);

}  // namespace papm::dsl
