#include "papm/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace papm::dsl {

ExprPtr literal(double v) { return std::make_shared<const Expr>(Expr{Literal{v}}); }
ExprPtr variable(int index) { return std::make_shared<const Expr>(Expr{Variable{index}}); }
ExprPtr negate(ExprPtr e) { return std::make_shared<const Expr>(Expr{Negate{std::move(e)}}); }
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr call(Function fn, ExprPtr arg) { return std::make_shared<const Expr>(Expr{Call{fn, std::move(arg)}}); }

std::string_view symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::pow: return "^";
  }
  return "?";
}

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 5> kFunctions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"exp", Function::exp},
    {"log", Function::log},
    {"sqrt", Function::sqrt},
}};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string format_location(int line, int column, const std::string& detail, const std::vector<std::string>& expected) {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << detail;
  if (!expected.empty()) os << " (expected " << join(expected) << ")";
  return os.str();
}

}  // namespace

std::string_view name(Function fn) {
  for (const auto& [n, f] : kFunctions)
    if (f == fn) return n;
  return "?";
}

ParseError::ParseError(Kind kind, int line, int column, std::vector<std::string> expected,
                       const std::string& detail)
    : Error(format_location(line, column, detail, expected)),
      kind_(kind),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

std::string to_string(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::syntax: return "syntax";
    case ParseError::Kind::unknown_identifier: return "unknown_identifier";
    case ParseError::Kind::arity: return "arity";
  }
  return "";
}

DomainError::DomainError(std::string subexpression, const std::string& what)
    : Error(what + " in " + subexpression), subexpression_(std::move(subexpression)) {}

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end, invalid };

struct Token {
  Tok kind = Tok::end;
  std::string_view text;
  double value = 0.0;
  int line = 1, column = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::number: return "number '" + std::string(t.text) + "'";
    case Tok::ident: return "identifier '" + std::string(t.text) + "'";
    default: return "'" + std::string(t.text) + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::end;
      return t;
    }
    const char c = src_[pos_];
    const size_t start = pos_;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number(t);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.kind = Tok::ident;
    } else {
      advance();
      switch (c) {
        case '+': t.kind = Tok::plus; break;
        case '-': t.kind = Tok::minus; break;
        case '*': t.kind = Tok::star; break;
        case '/': t.kind = Tok::slash; break;
        case '^': t.kind = Tok::caret; break;
        case '(': t.kind = Tok::lparen; break;
        case ')': t.kind = Tok::rparen; break;
        case ',': t.kind = Tok::comma; break;
        default: t.kind = Tok::invalid; break;
      }
    }
    t.text = src_.substr(start, pos_ - start);
    return t;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool digit_at(size_t p) const {
    return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  void lex_number(Token& t) {
    const size_t start = pos_;
    const int line = line_, col = column_;
    while (digit_at(pos_)) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      if (!digit_at(pos_)) throw ParseError(ParseError::Kind::syntax, line_, column_, {"digit"}, "malformed number");
      while (digit_at(pos_)) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (!digit_at(pos_))
        throw ParseError(ParseError::Kind::syntax, line_, column_, {"digit"}, "malformed exponent");
      while (digit_at(pos_)) advance();
    }
    const std::string_view text = src_.substr(start, pos_ - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
      throw ParseError(ParseError::Kind::syntax, line, col, {}, "number out of range '" + std::string(text) + "'");
    t.kind = Tok::number;
    t.value = v;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, column_ = 1;
};

const std::vector<std::string> kOperandStart{"number", "variable", "function", "'('", "'-'"};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { cur_ = lex_.next(); }

  ExprPtr parse_all() {
    ExprPtr e = expr();
    if (cur_.kind != Tok::end) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    if (cur_.kind == Tok::invalid)
      throw ParseError(ParseError::Kind::syntax, cur_.line, cur_.column, std::move(expected),
                       "unexpected character '" + std::string(cur_.text) + "'");
    throw ParseError(ParseError::Kind::syntax, cur_.line, cur_.column, std::move(expected),
                     "unexpected " + describe(cur_));
  }

  void bump() { cur_ = lex_.next(); }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth)
        throw ParseError(ParseError::Kind::syntax, p.cur_.line, p.cur_.column, {},
                         "expression nested deeper than " + std::to_string(kMaxDepth));
    }
    ~DepthGuard() { --p.depth_; }
  };
  static constexpr int kMaxDepth = 200;

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
      const BinaryOp op = cur_.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
      bump();
      lhs = binary(op, lhs, term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
      const BinaryOp op = cur_.kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
      bump();
      lhs = binary(op, lhs, unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    const DepthGuard guard(*this);
    if (cur_.kind == Tok::minus) {
      bump();
      return negate(unary());
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (cur_.kind == Tok::caret) {
      bump();
      return binary(BinaryOp::pow, base, unary());
    }
    return base;
  }

  ExprPtr primary() {
    switch (cur_.kind) {
      case Tok::number: {
        const double v = cur_.value;
        bump();
        return literal(v);
      }
      case Tok::lparen: {
        bump();
        ExprPtr e = expr();
        if (cur_.kind != Tok::rparen) fail({"')'", "operator"});
        bump();
        return e;
      }
      case Tok::ident: return identifier();
      default: fail(kOperandStart);
    }
  }

  ExprPtr identifier() {
    const Token id = cur_;
    const std::string_view text = id.text;
    if (text.size() >= 2 && text[0] == 'x') {
      int index = 0;
      const auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), index);
      if (ec == std::errc() && ptr == text.data() + text.size() && text[1] != '0' && index >= 1) {
        bump();
        return variable(index);
      }
    }
    for (const auto& [fname, fn] : kFunctions) {
      if (text != fname) continue;
      bump();
      if (cur_.kind != Tok::lparen) fail({"'('"});
      bump();
      std::vector<ExprPtr> args;
      if (cur_.kind != Tok::rparen) {
        args.push_back(expr());
        while (cur_.kind == Tok::comma) {
          bump();
          args.push_back(expr());
        }
      }
      if (cur_.kind != Tok::rparen) fail({"')'", "','", "operator"});
      bump();
      if (args.size() != 1)
        throw ParseError(ParseError::Kind::arity, id.line, id.column, {},
                         std::string(fname) + " takes 1 argument, got " + std::to_string(args.size()));
      return call(fn, args.front());
    }
    throw ParseError(ParseError::Kind::unknown_identifier, id.line, id.column, {"variable x1, x2, ...", "function"},
                     "unknown identifier '" + std::string(text) + "'");
  }

  Lexer lex_;
  Token cur_;
  int depth_ = 0;
};

void print_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v));
  (void)ec;
  std::string text(buf.data(), ptr);
  if (std::signbit(v)) {
    out += "(-" + text + ")";
  } else {
    out += text;
  }
}

void print_into(std::string& out, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          print_number(out, n.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += "x" + std::to_string(n.index);
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += "(-";
          print_into(out, *n.operand);
          out += ")";
        } else if constexpr (std::is_same_v<T, Binary>) {
          out += "(";
          print_into(out, *n.lhs);
          out += " ";
          out += symbol(n.op);
          out += " ";
          print_into(out, *n.rhs);
          out += ")";
        } else {
          out += name(n.fn);
          out += "(";
          print_into(out, *n.arg);
          out += ")";
        }
      },
      e.node);
}

double checked(double v, const Expr& e, const char* what) {
  if (!std::isfinite(v)) throw DomainError(print(e), what);
  return v;
}

}  // namespace

ExprPtr parse(std::string_view src) { return Parser(src).parse_all(); }

std::string print(const Expr& e) {
  std::string out;
  print_into(out, e);
  return out;
}

int max_variable(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) return 0;
        else if constexpr (std::is_same_v<T, Variable>) return n.index;
        else if constexpr (std::is_same_v<T, Negate>) return max_variable(*n.operand);
        else if constexpr (std::is_same_v<T, Binary>) return std::max(max_variable(*n.lhs), max_variable(*n.rhs));
        else return max_variable(*n.arg);
      },
      e.node);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Literal>) return x.value == y.value && std::signbit(x.value) == std::signbit(y.value);
        else if constexpr (std::is_same_v<T, Variable>) return x.index == y.index;
        else if constexpr (std::is_same_v<T, Negate>) return equal(*x.operand, *y.operand);
        else if constexpr (std::is_same_v<T, Binary>) return x.op == y.op && equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
        else return x.fn == y.fn && equal(*x.arg, *y.arg);
      },
      a.node);
}

double eval(const Expr& e, std::span<const double> u) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (n.index < 1 || static_cast<size_t>(n.index) > u.size())
            throw Error("variable x" + std::to_string(n.index) + " is not bound (" + std::to_string(u.size()) +
                        " coordinates)");
          return u[n.index - 1];
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(*n.operand, u);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = eval(*n.lhs, u);
          const double b = eval(*n.rhs, u);
          switch (n.op) {
            case BinaryOp::add: return checked(a + b, e, "non-finite sum");
            case BinaryOp::sub: return checked(a - b, e, "non-finite difference");
            case BinaryOp::mul: return checked(a * b, e, "non-finite product");
            case BinaryOp::div:
              if (b == 0.0) throw DomainError(print(e), "division by zero");
              return checked(a / b, e, "non-finite quotient");
            case BinaryOp::pow:
              if (a == 0.0 && b < 0.0) throw DomainError(print(e), "zero raised to a negative power");
              if (a < 0.0 && b != std::trunc(b))
                throw DomainError(print(e), "negative base with non-integer exponent");
              return checked(std::pow(a, b), e, "non-finite power");
          }
          return 0.0;
        } else {
          const double a = eval(*n.arg, u);
          switch (n.fn) {
            case Function::sin: return std::sin(a);
            case Function::cos: return std::cos(a);
            case Function::exp: return checked(std::exp(a), e, "exp overflow");
            case Function::log:
              if (a <= 0.0) throw DomainError(print(e), "log of a non-positive number");
              return std::log(a);
            case Function::sqrt:
              if (a < 0.0) throw DomainError(print(e), "sqrt of a negative number");
              return std::sqrt(a);
          }
          return 0.0;
        }
      },
      e.node);
}

double eval(const Expr& e, const Eigen::VectorXd& u) {
  return eval(e, std::span<const double>(u.data(), static_cast<size_t>(u.size())));
}

}  // namespace papm::dsl
