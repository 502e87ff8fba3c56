#include <gtest/gtest.h>

#include "qcsym/qcsym.hpp"

using namespace qcsym;

namespace {

Expr P(const std::string& s) { return parse(s); }

}  // namespace

TEST(Expr, SumCombinesLikeTermsAndDropsZero) {
  const Expr y = variable("y");
  EXPECT_EQ(y + y, integer(2) * y);
  EXPECT_EQ(y - y, integer(0));
  EXPECT_EQ(y + integer(0), y);
}

TEST(Expr, ProductFoldsNumbersAndMergesPowers) {
  const Expr y = variable("y");
  EXPECT_EQ(y * y, power(y, 2));
  EXPECT_EQ(integer(2) * y * integer(3), integer(6) * y);
  EXPECT_EQ(y * power(y, -1), integer(1));
  EXPECT_EQ(integer(0) * y, integer(0));
}

TEST(Expr, PowerFolding) {
  const Expr y = variable("y"), z = variable("z");
  EXPECT_EQ(power(power(y, 2), 3), power(y, 6));
  EXPECT_EQ(power(y * z, 2), power(y, 2) * power(z, 2));
  EXPECT_EQ(power(number(Rational(2, 3)), -2), number(Rational(9, 4)));
  EXPECT_EQ(power(qcsym::exp(y), 2), qcsym::exp(integer(2) * y));
  EXPECT_THROW(power(integer(0), -1), DivisionByZero);
}

TEST(Expr, ExpLogIdentities) {
  const Expr y = variable("y");
  EXPECT_EQ(qcsym::exp(integer(0)), integer(1));
  EXPECT_EQ(qcsym::log(integer(1)), integer(0));
  EXPECT_EQ(qcsym::exp(qcsym::log(y)), y);
  EXPECT_EQ(qcsym::log(qcsym::exp(y)), y);
}

TEST(Expr, OrderingIsTotalAndConsistentWithEquality) {
  const std::vector<Expr> xs{P("y"), P("z"), P("y^2"), P("exp(u)"), P("K_y"), P("3"), P("y+z")};
  for (const auto& a : xs) {
    EXPECT_EQ(compare(a, a), 0);
    for (const auto& b : xs) {
      EXPECT_EQ(compare(a, b), -compare(b, a));
      EXPECT_EQ(compare(a, b) == 0, a == b);
    }
  }
}

TEST(Expr, FreeVariablesIncludeImplicitDependencies) {
  const auto vs = free_variables(P("K_y + w"));
  EXPECT_EQ(vs, (std::vector<std::string>{"u", "w", "y", "z"}));
  EXPECT_TRUE(depends_on(P("T"), "y"));
  EXPECT_FALSE(depends_on(P("T"), "u"));
}

TEST(Printer, Basics) {
  EXPECT_EQ(to_string(P("y - z")), "y - z");
  EXPECT_EQ(to_string(P("1/(y+z)")), "1/(y + z)");
  EXPECT_EQ(to_string(P("T_y/T_z")), "T_y/T_z");
  EXPECT_EQ(to_string(P("-u^3/4")), "-u^3/4");
  EXPECT_EQ(to_string(P("exp(-u)")), "exp(-u)");
  EXPECT_EQ(to_string(P("u_yz")), "u_yz");
  EXPECT_EQ(to_string(P("phi_ww(y/z)")), "phi_ww(y/z)");
}

TEST(Parser, PrecedenceAndUnaryMinus) {
  EXPECT_EQ(P("-y^2"), integer(-1) * power(variable("y"), 2));
  EXPECT_EQ(P("2*y^2"), P("2*(y^2)"));
  EXPECT_EQ(P("y - -z"), P("y + z"));
  EXPECT_EQ(P("y^-1"), power(variable("y"), -1));
  EXPECT_EQ(P("y^(-2)"), power(variable("y"), -2));
}

TEST(Parser, DecimalsAreExactRationals) {
  EXPECT_EQ(P("0.25"), number(Rational(1, 4)));
  EXPECT_EQ(P("1e-3"), number(Rational(1, 1000)));
  EXPECT_EQ(P("2.5e2"), integer(250));
}

TEST(Parser, JetVariablesAreCanonical) {
  EXPECT_EQ(P("u_zy"), variable("u_yz"));
  EXPECT_EQ(P("u_zzy"), variable("u_yzz"));
  EXPECT_EQ(jet_name(2, 1), "u_yyz");
  EXPECT_EQ(jet_orders("u_yzz"), (std::optional<std::pair<int, int>>{{1, 2}}));
  EXPECT_FALSE(jet_orders("uy"));
}

TEST(Parser, FunctionSuffixesAreDerivativeIndices) {
  const Expr e = P("K_yuu");
  ASSERT_EQ(e.kind(), Kind::Function);
  EXPECT_EQ(e->index, (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(P("K_uy"), P("K_yu"));
}

TEST(Parser, OmegaAlias) { EXPECT_EQ(P("1/\xCF\x89"), P("1/w")); }

TEST(Parser, Errors) {
  auto offset_of = [](const std::string& s) -> std::optional<std::size_t> {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return e.offset();
    }
    return std::nullopt;
  };
  EXPECT_EQ(offset_of("1/(y+"), 5u);
  EXPECT_EQ(offset_of("y + * z"), 4u);
  EXPECT_TRUE(offset_of("g(y)"));        // undeclared
  EXPECT_TRUE(offset_of("K(y,z)"));      // arity
  EXPECT_TRUE(offset_of("T_u"));         // not a dependency
  EXPECT_TRUE(offset_of("exp(y,z)"));
  EXPECT_TRUE(offset_of("y^z"));
  EXPECT_TRUE(offset_of("1/0"));
  EXPECT_TRUE(offset_of("u_yx"));
  EXPECT_FALSE(offset_of("  y  "));
}

TEST(Parser, ErrorMessagesNameTheProblem) {
  try {
    parse("K(y,z)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("arity mismatch"), std::string::npos);
  }
  try {
    parse("g(y)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("declare it first"), std::string::npos);
  }
}

TEST(Context, Declarations) {
  Context c = Context::standard();
  c.declare("declare g(y,z)");
  EXPECT_NO_THROW(parse("g_yz + g(1, 2)", c));
  EXPECT_THROW(c.declare("declare exp(y)"), std::invalid_argument);
  EXPECT_THROW(c.declare("declare h(yy)"), std::invalid_argument);
  EXPECT_THROW(parse("g_u", c), ParseError);
}

TEST(Parser, ExplicitArgumentsEqualToDependenciesCollapse) {
  EXPECT_EQ(P("K(y,z,u)"), P("K"));
  EXPECT_NE(P("K(z,y,u)"), P("K"));
}
