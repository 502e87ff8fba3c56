// Acceptance runner: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "qcsym/qcsym.hpp"
#include "support/properties.hpp"

using namespace qcsym;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Expr P(const std::string& s) { return parse(s); }

bool same(const Expr& a, const Expr& b) { return is_zero_node(simplify(a - b)); }

Outcome regression() {
  std::ostringstream d;
  bool ok = true;
  struct Want {
    OperatorForm form;
    bool ku_zero;
    std::size_t count;
  };
  for (const Want w : {Want{OperatorForm::ANonZero, false, 4}, Want{OperatorForm::AZero, false, 2},
                       Want{OperatorForm::ANonZero, true, 3}}) {
    const auto sys = generate_determining_system(w.form, w.ku_zero);
    const auto r = compare_with_transcription(sys);
    int matched = 0;
    for (const auto& m : r.members) matched += m.match;
    const bool good = r.pass() && sys.members.size() == w.count;
    ok = ok && good;
    d << to_string(w.form) << (w.ku_zero ? "/ku=0" : "") << " " << matched << "/" << w.count << "; ";
  }
  return {ok, d.str()};
}

Outcome case1_catalog() {
  std::mt19937_64 rng(kDefaultSeed);
  std::uniform_real_distribution<double> U(1, 2);
  double worst = 0;
  bool ok = true;
  int n = 0;
  for (const auto& e : invariant_catalog()) {
    const auto op = case1_from_T(P(e.T));
    ok = ok && op.structural.pass();
    for (const auto& v : op.structural.entries) ok = ok && v.verdict == ZeroVerdict::Zero;
    Bindings b;
    b.fn(symbol_K(), op.K).fn(symbol_L(), op.L);
    for (const auto& m : cached_system(OperatorForm::ANonZero).members) {
      if (m.origin == "1") continue;
      const Expr r = replace(m.residual, b);  // unsimplified
      for (int k = 0; k < 100; ++k) {
        const Point p{{"y", U(rng)}, {"z", U(rng)}, {"u", U(rng)}};
        worst = std::max(worst, std::abs(eval_at(r, p)));
        ++n;
      }
    }
  }
  ok = ok && worst < 1e-9;
  char buf[96];
  std::snprintf(buf, sizeof buf, "6 operators, %d point evaluations, max |residual| %.3g", n, worst);
  return {ok, buf};
}

Outcome worked_instance() {
  const auto r = verify_conditional_operator(P("1/(y+z)"), P("z/y"), P("u/y"), OperatorForm::ANonZero);
  int zero = 0;
  for (const auto& e : r.entries) zero += e.verdict == ZeroVerdict::Zero;
  return {r.pass() && zero == 4 && r.entries.size() == 4,
          std::to_string(zero) + "/" + std::to_string(r.entries.size()) + " equations vanish symbolically"};
}

Outcome case3() {
  bool ok = true;
  std::ostringstream d;
  for (auto [s, dd] : {std::pair{"1", "1"}, std::pair{"0", "y"}, std::pair{"c1", "c2"}}) {
    const auto op = case3_construct(P(s), P(dd));
    const Expr want = (diff(P(s), "y") + diff(P(dd), "z")) / integer(3);
    const bool good = op.pass() && same(op.f, want) && same(case3_solve_f(P(s), P(dd)), want);
    ok = ok && good;
    d << "(" << s << "," << dd << ") " << (good ? "ok" : "bad") << "; ";
  }
  const auto bad = case3_construct(P("y"), P("0"));
  const auto* c1 = bad.constraints.find("constraint 1");
  const bool fails = c1 && c1->verdict == ZeroVerdict::NonZero && c1->residual == P("2*y");
  d << "(y,0) constraint 1 residual " << (c1 ? to_string(c1->residual) : "?");
  return {ok && fails, d.str()};
}

Outcome reduction() {
  const auto inv = find_invariants(P("y*z"));
  bool ok = inv && same(inv->sigma, P("y")) && same(inv->omega, P("y/z"));
  const auto pkg = reduced_equation(P("y"), P("y/z"), P("0"));
  ok = ok && pkg.ode && same(pkg.ode->c1, P("2/w")) && is_zero_node(pkg.ode->c0) &&
       is_zero_node(pkg.ode->rhs);
  const Box box{1, 2, 1, 2};
  const auto a = solve_and_check(pkg, box, 1e-3, 1, 2, -1);
  const auto b = solve_and_check(pkg, box, 5e-4, 1, 2, -1);
  const double ratio = a.stats.max_abs / b.stats.max_abs;
  ok = ok && a.stats.max_abs < 1e-5 && std::abs(ratio - 4) <= 0.8;
  char buf[160];
  std::snprintf(buf, sizeof buf, "ode %s; max residual %.3e (h=1e-3), %.3e (h=5e-4), ratio %.3f",
                pkg.ode_text().c_str(), a.stats.max_abs, b.stats.max_abs, ratio);
  return {ok, buf};
}

Outcome lie_checks() {
  Context ctx = Context::standard();
  ctx.declare("declare g(u)");
  const Expr g = parse("g", ctx);
  using CO = ConditionalOperator;
  const bool dy = lie_invariance_check(CO::general(P("1"), P("0"), P("0")), g).pass();
  const bool dz = lie_invariance_check(CO::general(P("0"), P("1"), P("0")), g).pass();
  const bool boost = lie_invariance_check(CO::general(P("y"), P("-z"), P("0")), g).pass();
  const bool dil = lie_invariance_check(CO::general(P("y"), P("z"), P("-u")), P("u^3")).pass();
  const bool neg = !lie_invariance_check(CO::general(P("1"), P("0"), P("0")), P("y*u")).pass();
  std::ostringstream d;
  d << "d_y " << dy << ", d_z " << dz << ", y d_y - z d_z " << boost << ", dilation on u^3 " << dil
    << ", d_y rejected for y*u " << neg;
  return {dy && dz && boost && dil && neg, d.str()};
}

Outcome kernel_properties() {
  using namespace qcsym::testing;
  const PropertyOutcome r[] = {derivative_commutation(1000, kDefaultSeed),
                               simplifier_preserves_value(1000, kDefaultSeed + 1, 1e-9),
                               parser_round_trip(1000, kDefaultSeed + 2),
                               diff_matches_finite_difference(1000, kDefaultSeed + 3, 1e-6)};
  const char* names[] = {"commute", "value", "round-trip", "diff-vs-fd"};
  bool ok = true;
  std::ostringstream d;
  for (int i = 0; i < 4; ++i) {
    ok = ok && r[i].pass();
    d << names[i] << " " << r[i].cases - r[i].failures << "/" << r[i].cases;
    if (r[i].skipped) d << " (" << r[i].skipped << " skipped)";
    d << "; ";
    if (!r[i].pass()) d << "first failure: " << r[i].first_failure << "; ";
  }
  return {ok, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit;  // seconds; 0 for none
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"determining-system regression", 5, regression},
      {"Case-1 family soundness", 10, case1_catalog},
      {"worked instance", 0, worked_instance},
      {"Case-3 reproduction", 0, case3},
      {"end-to-end reduction", 30, reduction},
      {"classical-symmetry spot checks", 0, lie_checks},
      {"kernel properties", 60, kernel_properties},
  };
  int failed = 0, i = 0;
  for (const auto& c : criteria) {
    ++i;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit == 0 || secs < c.limit;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s [%d] %s (%.2fs%s) %s%s\n", pass ? "PASS" : "FAIL", i, c.name, secs,
                c.limit > 0 ? (" < " + std::to_string(static_cast<int>(c.limit)) + "s").c_str() : "",
                o.detail.c_str(), in_time ? "" : " [too slow]");
  }
  std::printf("%d/%d criteria pass\n", i - failed, i);
  return failed ? 1 : 0;
}
