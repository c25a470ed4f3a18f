#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bvpa/fieldlang.hpp"

using namespace bvpa;

namespace {

double fd_dx(const Expr& e, Point p, double h = 1e-5) {
  return (e.value({p.x + h, p.y}) - e.value({p.x - h, p.y})) / (2 * h);
}
double fd_dy(const Expr& e, Point p, double h = 1e-5) {
  return (e.value({p.x, p.y + h}) - e.value({p.x, p.y - h})) / (2 * h);
}

}  // namespace

TEST(FieldLang, Precedence) {
  EXPECT_DOUBLE_EQ(parse("1 + 2*3").value({0, 0}), 7.0);
  EXPECT_DOUBLE_EQ(parse("(1 + 2)*3").value({0, 0}), 9.0);
  EXPECT_DOUBLE_EQ(parse("-x^2").value({3, 0}), -9.0);
  EXPECT_DOUBLE_EQ(parse("2^3^2").value({0, 0}), 64.0);  // left to right with integer exponents
  EXPECT_DOUBLE_EQ(parse("8/2/2").value({0, 0}), 2.0);
  EXPECT_DOUBLE_EQ(parse("x - y - 1").value({5, 2}), 2.0);
  EXPECT_DOUBLE_EQ(parse("x^-2").value({2, 0}), 0.25);
  EXPECT_NEAR(parse("pi").value({0, 0}), std::numbers::pi, 0.0);
  EXPECT_DOUBLE_EQ(parse("1.5e1").value({0, 0}), 15.0);
}

TEST(FieldLang, Functions) {
  const Point p{0.3, -0.7};
  EXPECT_DOUBLE_EQ(parse("sin(x)*cos(y)").value(p), std::sin(0.3) * std::cos(-0.7));
  EXPECT_DOUBLE_EQ(parse("exp(x+y)").value(p), std::exp(0.3 - 0.7));
  EXPECT_DOUBLE_EQ(parse("sqrt(x^2 + y^2)").value(p), std::sqrt(0.09 + 0.49));
  EXPECT_DOUBLE_EQ(parse("abs(y)").value(p), 0.7);
}

TEST(FieldLang, Errors) {
  EXPECT_THROW(parse("z + 1"), UnknownIdentifierError);
  try {
    parse("x + foo(y)");
    FAIL();
  } catch (const UnknownIdentifierError& e) {
    EXPECT_EQ(e.name(), "foo");
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(parse("x +"), ParseError);
  EXPECT_THROW(parse("(x"), ParseError);
  EXPECT_THROW(parse("x^1.5"), ParseError);
  EXPECT_THROW(parse("x y"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("sqrt(x)").value({-1, 0}), MathDomainError);
  EXPECT_THROW(parse("1/x").value({0, 0}), MathDomainError);
}

TEST(FieldLang, JetsMatchFiniteDifferences) {
  const char* exprs[] = {"sin(pi*x)*sin(pi*y)", "exp(x)*cos(2*y)", "x^3 - 2*x*y^2 + y",
                         "sqrt((x-0.3)^2 + (y-0.6)^2)", "x/(1 + y^2)", "abs(x - 0.5)*y"};
  const Point pts[] = {{0.21, 0.37}, {0.8, 0.1}, {0.65, 0.9}};
  for (const char* s : exprs) {
    const Expr e = parse(s);
    for (Point p : pts) {
      const Jet2 j = e.jet(p);
      EXPECT_NEAR(j.value, e.value(p), 1e-14) << s;
      EXPECT_NEAR(j.grad.x, fd_dx(e, p), 1e-7) << s;
      EXPECT_NEAR(j.grad.y, fd_dy(e, p), 1e-7) << s;
      const double h = 1e-4;
      const double hxx = (fd_dx(e, {p.x + h, p.y}) - fd_dx(e, {p.x - h, p.y})) / (2 * h);
      const double hxy = (fd_dy(e, {p.x + h, p.y}) - fd_dy(e, {p.x - h, p.y})) / (2 * h);
      const double hyy = (fd_dy(e, {p.x, p.y + h}) - fd_dy(e, {p.x, p.y - h})) / (2 * h);
      EXPECT_NEAR(j.hxx, hxx, 1e-4) << s;
      EXPECT_NEAR(j.hxy, hxy, 1e-4) << s;
      EXPECT_NEAR(j.hyy, hyy, 1e-4) << s;
    }
  }
}

TEST(FieldLang, PrintRoundTrips) {
  for (const char* s : {"sin(pi*x)*sin(pi*y)", "-x^2 + 3*y", "(x - 0.5)/(1 + exp(-y))", "x^-3 - abs(y)"}) {
    const Expr a = parse(s);
    const Expr b = parse(a.to_string());
    for (Point p : {Point{0.2, 0.3}, Point{0.7, 0.9}}) EXPECT_DOUBLE_EQ(a.value(p), b.value(p)) << a.to_string();
  }
}

TEST(FieldLang, HessianNorm) {
  const Jet2 j = parse("x^2 + 3*x*y").jet({0.1, 0.2});
  EXPECT_DOUBLE_EQ(j.hess_frobenius_sq(), 4.0 + 2 * 9.0);
}
