#include <gtest/gtest.h>

#include "qcsym/qcsym.hpp"

using namespace qcsym;

namespace {

Expr P(const std::string& s) { return parse(s); }

bool same(const Expr& a, const std::string& b) { return is_zero_node(simplify(a - P(b))); }

}  // namespace

TEST(DeterminingSystem, MatchesTranscriptionForAllForms) {
  for (auto [form, kz] : {std::pair{OperatorForm::ANonZero, false}, std::pair{OperatorForm::ANonZero, true},
                          std::pair{OperatorForm::AZero, false}}) {
    const auto sys = generate_determining_system(form, kz);
    const auto r = compare_with_transcription(sys);
    EXPECT_TRUE(r.count_match) << to_string(form) << kz;
    for (std::size_t i = 0; i < r.members.size(); ++i)
      EXPECT_TRUE(r.members[i].match) << to_string(form) << " ku_zero=" << kz << " member " << i + 1
                                      << ": " << to_string(r.members[i].difference);
  }
}

TEST(DeterminingSystem, GenerationIsDeterministic) {
  const auto a = generate_determining_system(OperatorForm::ANonZero);
  const auto b = generate_determining_system(OperatorForm::ANonZero);
  ASSERT_EQ(a.members.size(), b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    EXPECT_EQ(a.members[i].residual, b.members[i].residual);
    EXPECT_EQ(a.members[i].origin, b.members[i].origin);
  }
}

TEST(DeterminingSystem, MembersAreFreeOfJets) {
  for (const auto& m : cached_system(OperatorForm::ANonZero).members) {
    EXPECT_TRUE(jet_variables(m.residual).empty()) << m.origin;
    EXPECT_FALSE(depends_on(m.residual, "u_z")) << m.origin;
  }
}

// Lie point symmetries written in canonical form are conditional symmetries.
TEST(Verify, ClassicalSymmetriesPass) {
  // translation d_y + d_z for any autonomous f
  EXPECT_TRUE(verify_conditional_operator(P("exp(u)"), P("1"), P("0"), OperatorForm::ANonZero).pass());
  // y d_y + z d_z - 2 d_u for u_yz = exp(u), divided by y
  EXPECT_TRUE(verify_conditional_operator(P("exp(u)"), P("z/y"), P("-2/y"), OperatorForm::ANonZero).pass());
  // the a = 0 form is stated as u_y = L; L = 0 is d_y, admitted by f free of y
  EXPECT_TRUE(verify_conditional_operator(P("z*u^2"), P("0"), P("0"), OperatorForm::AZero).pass());
}

TEST(Verify, WorkedInstancePasses) {
  const auto r = verify_conditional_operator(P("1/(y+z)"), P("z/y"), P("u/y"), OperatorForm::ANonZero);
  EXPECT_TRUE(r.pass());
  for (const auto& e : r.entries) EXPECT_EQ(e.verdict, ZeroVerdict::Zero) << e.origin;
}

TEST(Verify, BrokenInstancesFail) {
  // d_y + d_z + u d_u maps u_yz = u^2 to u_yz = 2 u^2 on solutions: residual -u^2
  const auto r = verify_conditional_operator(P("u^2"), P("1"), P("u"), OperatorForm::ANonZero);
  EXPECT_FALSE(r.pass());
  bool found = false;
  for (const auto& e : r.entries) {
    if (e.verdict == ZeroVerdict::NonZero) found = found || same(e.residual, "-u^2") || same(e.residual, "u^2");
  }
  EXPECT_TRUE(found);
  EXPECT_FALSE(verify_conditional_operator(P("y"), P("0"), P("0"), OperatorForm::AZero).pass());
}

TEST(Verify, OpaqueFYieldsConditions) {
  const auto r = verify_conditional_operator(apply(symbol_f()), P("1"), P("0"), OperatorForm::ANonZero);
  bool cond = false;
  for (const auto& e : r.entries) cond = cond || e.note == "condition on f";
  EXPECT_TRUE(cond);
}

TEST(Verify, ZeroKIsRejectedInTheANonZeroForm) {
  EXPECT_THROW(verify_conditional_operator(P("u"), P("0"), P("u"), OperatorForm::ANonZero), DivisionByZero);
}

TEST(Verify, BatchAgreesWithSerial) {
  std::vector<Candidate> cs{{P("1/(y+z)"), P("z/y"), P("u/y"), OperatorForm::ANonZero},
                            {P("u^2"), P("1"), P("u"), OperatorForm::ANonZero},
                            {P("exp(u)"), P("1"), P("0"), OperatorForm::ANonZero},
                            {P("y"), P("0"), P("0"), OperatorForm::AZero}};
  const auto out = verify_batch(cs, 3);
  ASSERT_EQ(out.size(), cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto s = verify_conditional_operator(cs[i].f, cs[i].K, cs[i].L, cs[i].form);
    EXPECT_EQ(out[i].pass(), s.pass());
    ASSERT_EQ(out[i].entries.size(), s.entries.size());
    for (std::size_t k = 0; k < s.entries.size(); ++k) EXPECT_EQ(out[i].entries[k].residual, s.entries[k].residual);
  }
}

TEST(Classify, CaseSplit) {
  EXPECT_EQ(classify_case(P("0")).tag, CaseTag::Case2);
  EXPECT_EQ(classify_case(P("z/y")).tag, CaseTag::Case1);
  const auto e = classify_case(P("exp(u)"));
  EXPECT_EQ(e.tag, CaseTag::Case3);
  EXPECT_TRUE(e.exponential_structure);
  const auto p = classify_case(P("u"));
  EXPECT_EQ(p.tag, CaseTag::Case3);
  EXPECT_FALSE(p.exponential_structure);
  EXPECT_EQ(classify_case(P("y*exp(2*u)")).exponential_structure, true);
  EXPECT_EQ(classify_case(P("K")).tag, CaseTag::Case3);
}

TEST(Case1, OperatorFromT) {
  const auto op = case1_from_T(P("y*z"));
  EXPECT_TRUE(same(op.K, "z/y"));
  EXPECT_TRUE(same(op.s, "1/y"));
  EXPECT_TRUE(same(op.L, "u/y"));
  EXPECT_TRUE(op.structural.pass());
  EXPECT_EQ(op.structural.find("1"), nullptr);
  EXPECT_THROW(case1_from_T(P("y^2")), std::invalid_argument);
}

TEST(Case1, FConditionIsEulerHomogeneity) {
  // K = z/y, L = u/y: f must be homogeneous of degree -1 in (y, z, u)
  const Expr c = case1_f_condition(P("z/y"), P("u/y"));
  const Context ctx = Context::standard();
  for (const char* f : {"1/(y+z)", "u/(y*z)", "u^2/y^3", "exp(u/y)/(z+u)"}) {
    Bindings b;
    b.fn(*ctx.find("f"), P(f));
    EXPECT_TRUE(is_zero_node(simplify(replace(c, b)))) << f;
  }
  for (const char* f : {"1", "u", "1/(y+z)^2"}) {
    Bindings b;
    b.fn(*ctx.find("f"), P(f));
    EXPECT_FALSE(is_zero_node(simplify(replace(c, b)))) << f;
  }
  EXPECT_THROW(case1_f_condition(P("u"), P("0")), std::invalid_argument);
}

TEST(Case1, CatalogOperatorsAreStructurallyValid) {
  for (const auto& e : invariant_catalog()) {
    const auto op = case1_from_T(P(e.T));
    EXPECT_TRUE(op.structural.pass()) << e.T;
  }
}

TEST(Case2, FirstOrderSystem) {
  const auto s = case2_first_order_system(P("u"), P("u"));
  EXPECT_TRUE(same(s.u_z, "u"));
  EXPECT_NE(s.compatibility_verdict, ZeroVerdict::NonZero);
  // u_y = y u forces u_z = z u / y, and D_z u_y != D_y u_z
  const auto t = case2_first_order_system(P("y*u"), P("z*u"));
  EXPECT_EQ(t.compatibility_verdict, ZeroVerdict::NonZero);
  EXPECT_THROW(case2_first_order_system(P("y"), P("0")), std::invalid_argument);
}

TEST(Case3, KnownPairs) {
  EXPECT_TRUE(case3_construct(P("1"), P("1")).pass());
  EXPECT_TRUE(case3_construct(P("0"), P("y")).pass());
  EXPECT_TRUE(case3_construct(P("2/3"), P("-5/7")).pass());
  const auto bad = case3_construct(P("y"), P("0"));
  EXPECT_FALSE(bad.constraints.pass());
  const auto* c1 = bad.constraints.find("constraint 1");
  ASSERT_NE(c1, nullptr);
  EXPECT_TRUE(same(c1->residual, "2*y"));
  EXPECT_EQ(bad.constraints.find("constraint 2")->verdict, ZeroVerdict::Zero);
}

TEST(Case3, SolvedFIsThirdOfDivergence) {
  const Expr f = case3_solve_f(P("s"), P("d"));
  EXPECT_TRUE(same(f, "(s_y + d_z)/3"));
}

TEST(Lie, TranslationsAndScalings) {
  Context ctx = Context::standard();
  ctx.declare("declare g(u)");
  const Expr g = parse("g", ctx);
  EXPECT_TRUE(lie_invariance_check(ConditionalOperator::general(P("1"), P("0"), P("0")), g).pass());
  EXPECT_TRUE(lie_invariance_check(ConditionalOperator::general(P("0"), P("1"), P("0")), g).pass());
  EXPECT_TRUE(lie_invariance_check(ConditionalOperator::general(P("y"), P("-z"), P("0")), g).pass());
  EXPECT_TRUE(lie_invariance_check(ConditionalOperator::general(P("y"), P("z"), P("-u")), P("u^3")).pass());
  EXPECT_FALSE(lie_invariance_check(ConditionalOperator::general(P("y"), P("z"), P("-u")), P("u^2")).pass());
  EXPECT_FALSE(lie_invariance_check(ConditionalOperator::general(P("1"), P("0"), P("0")), P("y*u")).pass());
}

TEST(Lightcone, ForwardInverseRoundTrip) {
  EXPECT_TRUE(same(lightcone_transform(P("4*t"), Direction::Forward), "(y+z)/2"));
  EXPECT_TRUE(same(lightcone_transform(P("y*z"), Direction::Inverse), "4*(t^2 - x^2)"));
  const Expr F = P("t*x*u + exp(t)");
  const Expr back = lightcone_transform(lightcone_transform(F, Direction::Forward), Direction::Inverse);
  EXPECT_TRUE(is_zero_node(simplify(back - F)));
}
