#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "papm/field_spec.hpp"
#include "support/generators.hpp"

using namespace papm;
using namespace papm::dsl;
using papm::testing::Gen;

namespace {

template <class T>
const T& as(const ExprPtr& e) {
  return std::get<T>(e->node);
}

ParseError parse_error(std::string_view src) {
  try {
    parse(src);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no parse error for " << src;
  return ParseError(ParseError::Kind::syntax, 0, 0, {}, "");
}

ExprPtr random_ast(Gen& gen, int depth) {
  if (depth == 0 || gen.integer(0, 4) == 0) {
    if (gen.coin()) return variable(gen.integer(1, 6));
    // magnitudes across many decades, including negative literals
    return literal(std::ldexp(gen.uniform(-1, 1), gen.integer(-30, 30)));
  }
  switch (gen.integer(0, 2)) {
    case 0: return negate(random_ast(gen, depth - 1));
    case 1: return call(static_cast<Function>(gen.integer(0, 4)), random_ast(gen, depth - 1));
    default:
      return binary(static_cast<BinaryOp>(gen.integer(0, 4)), random_ast(gen, depth - 1), random_ast(gen, depth - 1));
  }
}

}  // namespace

TEST(Parse, ProductOfVariables) {
  const ExprPtr e = parse("x1*x3");
  const Binary& b = as<Binary>(e);
  EXPECT_EQ(b.op, BinaryOp::mul);
  EXPECT_EQ(as<Variable>(b.lhs).index, 1);
  EXPECT_EQ(as<Variable>(b.rhs).index, 3);
}

TEST(Parse, PowerBindsTighterThanSum) {
  const Binary& sum = as<Binary>(parse("sin(x1)+x3^2"));
  EXPECT_EQ(sum.op, BinaryOp::add);
  EXPECT_EQ(as<Call>(sum.lhs).fn, Function::sin);
  EXPECT_EQ(as<Binary>(sum.rhs).op, BinaryOp::pow);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(print(parse("-x1^2")), "(-(x1 ^ 2))");
  EXPECT_EQ(print(parse("2^3^2")), "(2 ^ (3 ^ 2))");
  EXPECT_EQ(print(parse("x1 - x2 - x3")), "((x1 - x2) - x3)");
  EXPECT_EQ(print(parse("x1 / x2 * x3")), "((x1 / x2) * x3)");
  EXPECT_EQ(print(parse("2^-x1")), "(2 ^ (-x1))");
  EXPECT_EQ(print(parse("  x1\n +\tcos( x2 )")), "(x1 + cos(x2))");
}

TEST(Parse, SyntaxErrorLocation) {
  const ParseError e = parse_error("x1+*x2");
  EXPECT_EQ(e.kind(), ParseError::Kind::syntax);
  EXPECT_EQ(e.line(), 1);
  EXPECT_EQ(e.column(), 4);
  EXPECT_FALSE(e.expected().empty());
  EXPECT_NE(std::string(e.what()).find("column 4"), std::string::npos);
}

TEST(Parse, StructuredErrors) {
  EXPECT_EQ(parse_error("x1 + y2").kind(), ParseError::Kind::unknown_identifier);
  EXPECT_EQ(parse_error("x0").kind(), ParseError::Kind::unknown_identifier);
  EXPECT_EQ(parse_error("sin(x1, x2)").kind(), ParseError::Kind::arity);
  EXPECT_EQ(parse_error("exp()").kind(), ParseError::Kind::arity);
  EXPECT_EQ(parse_error("2x1").kind(), ParseError::Kind::syntax);
  EXPECT_EQ(parse_error("(x1").kind(), ParseError::Kind::syntax);
  EXPECT_EQ(parse_error("").kind(), ParseError::Kind::syntax);
  EXPECT_EQ(parse_error("1e").kind(), ParseError::Kind::syntax);
  const ParseError multi = parse_error("x1 +\n  )");
  EXPECT_EQ(multi.line(), 2);
  EXPECT_EQ(multi.column(), 3);
}

TEST(Parse, DeepNestingIsAnErrorNotACrash) {
  std::string deep(5000, '(');
  deep += "x1";
  deep += std::string(5000, ')');
  EXPECT_THROW(parse(deep), ParseError);
}

TEST(Eval, HandTable) {
  struct Row {
    const char* src;
    std::vector<double> u;
    double expected;
  };
  const double pi = std::numbers::pi;
  const std::vector<Row> table{
      {"x1*x3", {2, 0, 5, 0}, 10.0},
      {"exp(0)", {}, 1.0},
      {"1 + 2*3", {}, 7.0},
      {"(1 + 2)*3", {}, 9.0},
      {"2^3^2", {}, 512.0},
      {"-2^2", {}, -4.0},
      {"(-2)^2", {}, 4.0},
      {"8/4/2", {}, 1.0},
      {"x1 - x2 - x3", {5, 2, 1}, 2.0},
      {"sin(x1)", {pi / 6}, 0.5},
      {"cos(x2)", {0, pi}, -1.0},
      {"log(exp(x1))", {1.5}, 1.5},
      {"sqrt(x1^2 + x2^2)", {3, 4}, 5.0},
      {"x1 + x3^2", {0.5, 9, -0.5}, 0.75},
      {"2^-1", {}, 0.5},
      {"1.5e2 + 2.5E-1", {}, 150.25},
      {"-x1*-x2", {3, 4}, 12.0},
      {"exp(2*x1)", {std::log(3.0)}, 9.0},
      {"(-8)^3", {}, -512.0},
      {"x4/x2 + x1*x2*x3", {1, 2, 3, 8}, 10.0},
  };
  ASSERT_EQ(table.size(), 20u);
  for (const Row& r : table) EXPECT_NEAR(eval(*parse(r.src), r.u), r.expected, 1e-12) << r.src;
}

TEST(Eval, DomainErrors) {
  try {
    eval(*parse("1/ (x1-x1)"), std::vector<double>{0.3});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.subexpression(), "(1 / (x1 - x1))");
    EXPECT_NE(std::string(e.what()).find("division by zero"), std::string::npos);
  }
  EXPECT_THROW(eval(*parse("log(x1)"), std::vector<double>{0.0}), DomainError);
  EXPECT_THROW(eval(*parse("log(-1)"), std::vector<double>{}), DomainError);
  EXPECT_THROW(eval(*parse("sqrt(-x1)"), std::vector<double>{1.0}), DomainError);
  EXPECT_THROW(eval(*parse("0^-1"), std::vector<double>{}), DomainError);
  EXPECT_THROW(eval(*parse("(-8)^(1/3)"), std::vector<double>{}), DomainError);
  EXPECT_THROW(eval(*parse("exp(1000)"), std::vector<double>{}), DomainError);
}

TEST(Eval, UnboundVariable) { EXPECT_THROW(eval(*parse("x3"), std::vector<double>{1, 2}), Error); }

TEST(Print, CanonicalIdempotenceOnRandomAsts) {
  Gen gen(61);
  for (int k = 0; k < 200; ++k) {
    const ExprPtr e = random_ast(gen, 5);
    const std::string s = print(e);
    const ExprPtr once = parse(s);
    const ExprPtr twice = parse(print(once));
    EXPECT_TRUE(equal(*once, *twice)) << s;
    EXPECT_EQ(print(once), s);
    EXPECT_EQ(max_variable(*once), max_variable(*e));
  }
}

TEST(Print, ParsedAstsRoundTripExactly) {
  for (const char* src : {"x1*x3", "sin(x1)+x3^2", "-log(1 + (x1^2 + x2^2)/4)", "0.1 + 1e-30*x2", "2^3^-x4"}) {
    const ExprPtr e = parse(src);
    EXPECT_TRUE(equal(*e, *parse(print(e)))) << src;
  }
}

TEST(Eval, FiniteDifferenceGradientOfPolynomials) {
  struct Poly {
    const char* src;
    std::function<Eigen::Vector3d(const Eigen::Vector3d&)> grad;
  };
  const std::vector<Poly> polys{
      {"x1*x3", [](const Eigen::Vector3d& u) { return Eigen::Vector3d(u(2), 0, u(0)); }},
      {"x1^3 - 2*x1*x2 + 5", [](const Eigen::Vector3d& u) {
         return Eigen::Vector3d(3 * u(0) * u(0) - 2 * u(1), -2 * u(0), 0);
       }},
      {"x1^2*x2^2*x3 + x3^4/4", [](const Eigen::Vector3d& u) {
         return Eigen::Vector3d(2 * u(0) * u(1) * u(1) * u(2), 2 * u(0) * u(0) * u(1) * u(2),
                                u(0) * u(0) * u(1) * u(1) + u(2) * u(2) * u(2));
       }},
      {"(x1 + x2 + x3)^2", [](const Eigen::Vector3d& u) { return Eigen::Vector3d::Constant(2 * u.sum()); }},
  };
  Gen gen(62);
  const double h = 1e-5;
  for (const Poly& p : polys) {
    const ExprPtr e = parse(p.src);
    for (int k = 0; k < 10; ++k) {
      const Eigen::Vector3d u = gen.vector(3);
      for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd up = u, um = u;
        up(i) += h;
        um(i) -= h;
        EXPECT_NEAR((eval(*e, up) - eval(*e, um)) / (2 * h), p.grad(u)(i), 1e-6) << p.src;
      }
    }
  }
}

TEST(FieldSpec, ConformalProductFixture) {
  const FieldSpec fs = conformal_spec(2, "x1*x3");
  const ChartManifold M = build_manifold(fs);
  const Coordinates u = Eigen::Vector4d(0.2, -0.1, 0.3, 0.4);
  EXPECT_LT(max_abs(M.metric_field(u) - std::exp(2 * 0.06) * Eigen::MatrixXd::Identity(4, 4)), 1e-14);
  EXPECT_EQ(M.P_field(u), Eigen::Vector4d(1, 1, -1, -1).asDiagonal().toDenseMatrix());
  EXPECT_LT(point_of(M, u).w1_residual, 1e-6);
}

TEST(FieldSpec, FlatExponent) {
  const ChartManifold M = build_manifold(conformal_spec(2, "0"));
  for (const auto& u : sample_points(2, kDefaultSeed)) {
    const StructuredPoint pt = point_of(M, u).point;
    EXPECT_EQ(max_abs(pt.theta), 0.0);
    EXPECT_TRUE(class_flags(pt).is_W0);
  }
}

TEST(FieldSpec, ExplicitNonSymmetricIsAnError) {
  Endomorphism P(2, 2);
  P << 0, 1, 1, 0;
  try {
    check_field_spec(explicit_spec(1, {{"1", "x1"}, {"0", "1"}}, P));
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.check(), "symmetric");
  }
  EXPECT_NO_THROW(check_field_spec(explicit_spec(1, {{"1", "x1*x2"}, {"x1 * x2", "1"}}, P)));
}

TEST(FieldSpec, ExplicitFieldsAndValidation) {
  Endomorphism P(2, 2);
  P << 0, 1, 1, 0;
  const ChartManifold M = build_manifold(explicit_spec(1, {{"exp(2*x1)", "0"}, {"0", "exp(2*x1)"}}, P));
  EXPECT_NEAR(M.metric_field(Eigen::Vector2d(0.5, 0))(1, 1), std::exp(1.0), 1e-14);
  EXPECT_THROW(build_manifold(explicit_spec(1, {{"1", "0"}, {"0", "1"}}, Eigen::Matrix2d::Identity())),
               GeometryError);
}

TEST(FieldSpec, UnboundVariableIsAnError) {
  try {
    check_field_spec(conformal_spec(1, "x1*x3"));
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.check(), "variables");
  }
}

TEST(FieldSpec, SamplePointsAreDeterministic) {
  const auto a = sample_points(3, 99), b = sample_points(3, 99), c = sample_points(3, 100);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k], b[k]);
    EXPECT_EQ(a[k].size(), 6);
    EXPECT_LE(a[k].cwiseAbs().maxCoeff(), 0.5);
  }
  EXPECT_NE(a[0], c[0]);
}
