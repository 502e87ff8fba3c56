#pragma once

// Determining equations for Q-conditional invariance of u_yz = f(y,z,u),
// verification of candidate operators, the case split on K, and the
// closed-form operator families.

#include <future>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "jet.hpp"
#include "parser.hpp"
#include "printer.hpp"
#include "ratfunc.hpp"
#include "verification.hpp"
#include "zero_test.hpp"

namespace qcsym {

/// Canonical operator forms:
///  ANonZero: Q = d_y + K d_z + L d_u   (condition u_y + K u_z = L)
///  AZero:    Q = d_y + L d_u           (condition u_y = L; the y<->z mirror of
///                                       Q = d_z + L d_u)
enum class OperatorForm { ANonZero, AZero };

inline const char* to_string(OperatorForm f) {
  return f == OperatorForm::ANonZero ? "a-ne-0" : "a-eq-0";
}

inline const FunctionSymbol& symbol_K() {
  static const FunctionSymbol s{"K", {"y", "z", "u"}};
  return s;
}
inline const FunctionSymbol& symbol_L() {
  static const FunctionSymbol s{"L", {"y", "z", "u"}};
  return s;
}
inline const FunctionSymbol& symbol_f() {
  static const FunctionSymbol s{"f", {"y", "z", "u"}};
  return s;
}
inline const FunctionSymbol& symbol_K_yz() {
  static const FunctionSymbol s{"K", {"y", "z"}};
  return s;
}

struct DeterminingMember {
  Expr residual;       // cleared of denominators: raw * K^k_power
  Expr raw;            // collected coefficient as generated
  std::string origin;  // jet monomial whose coefficient this is
  int k_power = 0;
};

struct DeterminingSystem {
  OperatorForm form = OperatorForm::ANonZero;
  bool ku_zero = false;
  std::vector<DeterminingMember> members;
};

namespace detail {

inline std::string monomial_label(const std::vector<std::string>& names, const std::vector<int>& key) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (key[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += names[i];
    if (key[i] > 1) s += "^" + std::to_string(key[i]);
  }
  return s.empty() ? "1" : s;
}

// Multiplies a coefficient by the power of K that clears its denominator.
inline DeterminingMember clear_k(const Expr& raw, std::string origin) {
  RatFunc r = to_ratfunc(raw);
  if (!r.factors.empty()) throw std::logic_error("determining coefficient has a non-monomial denominator");
  int k = 0;
  for (const auto& [a, e] : r.den_monomial.atoms) {
    const bool is_K = a.kind() == Kind::Function && a->symbol->name == "K" && a->children.empty() &&
                      std::all_of(a->index.begin(), a->index.end(), [](int i) { return i == 0; });
    if (!is_K) throw std::logic_error("determining coefficient has a denominator other than K");
    k = e;
  }
  return {to_expr(r.num), simplify(raw), std::move(origin), k};
}

inline DeterminingSystem generate_a_nonzero() {
  const Expr K = apply(symbol_K()), L = apply(symbol_L()), f = apply(symbol_f());
  const auto Q = ConditionalOperator::a_nonzero(K, L);
  const Expr uz = jet(0, 1), uzz = jet(0, 2);

  Expr inv = prolong(Q).eta_yz - (Q.a * diff(f, "y") + Q.b * diff(f, "z") + Q.c * diff(f, "u"));
  Bindings equation;
  equation.var(jet_name(1, 1), f);
  inv = eliminate(replace(inv, equation), Q);

  // D_z(Qu) = 0 together with u_yz = f is linear in u_zz with coefficient -K.
  const Expr relation = eliminate(jet(1, 1), Q) - f;
  auto lin = collect(relation, {uzz});
  if (lin.size() != 2 || !lin.count({1}) || !lin.count({0}))
    throw std::logic_error("constraint relation is not linear in u_zz");
  Bindings solve;
  solve.var(jet_name(0, 2), simplify(-lin.at({0}) / lin.at({1})));
  inv = simplify(replace(inv, solve));

  for (const auto& v : jet_variables(inv)) {
    if (v != jet_name(0, 1)) throw ProlongationInconsistency();
  }
  DeterminingSystem sys;
  sys.form = OperatorForm::ANonZero;
  auto coeffs = collect(inv, {uz});
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    sys.members.push_back(clear_k(it->second, monomial_label({"u_z"}, it->first)));
  }
  return sys;
}

inline DeterminingSystem generate_a_zero() {
  // Generated for Q = d_z + L d_u (u_z = L), then mirrored y <-> z.
  const Expr L = apply(symbol_L()), f = apply(symbol_f());
  const auto Q = ConditionalOperator::a_zero(L);
  Expr inv = prolong(Q).eta_yz - (Q.a * diff(f, "y") + Q.b * diff(f, "z") + Q.c * diff(f, "u"));
  Bindings equation;
  equation.var(jet_name(1, 1), f);
  inv = eliminate(replace(inv, equation), Q);

  std::vector<std::string> free = jet_variables(inv);
  std::vector<Expr> atoms;
  std::vector<std::string> mirrored;
  for (const auto& v : free) {
    atoms.push_back(variable(v));
    mirrored.push_back(to_string(mirror_yz(variable(v))));
  }
  DeterminingSystem sys;
  sys.form = OperatorForm::AZero;
  auto coeffs = collect(inv, atoms);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    const Expr c = simplify(mirror_yz(it->second));
    sys.members.push_back({c, c, monomial_label(mirrored, it->first), 0});
  }
  return sys;
}

}  // namespace detail

/// Builds the determining system: prolong, restrict to u_yz = f and the
/// Qu = 0 manifold, collect the invariance condition's coefficients in the
/// free jet monomials. With ku_zero, K is replaced by K(y,z) afterwards and
/// vanishing members are dropped.
inline DeterminingSystem generate_determining_system(OperatorForm form, bool ku_zero = false) {
  if (form == OperatorForm::AZero) {
    if (ku_zero) throw std::invalid_argument("the K_u = 0 specialization applies to the a != 0 form");
    return detail::generate_a_zero();
  }
  DeterminingSystem sys = detail::generate_a_nonzero();
  if (!ku_zero) return sys;
  Bindings b;
  b.fn(symbol_K(), apply(symbol_K_yz()));
  DeterminingSystem out;
  out.form = sys.form;
  out.ku_zero = true;
  for (const auto& m : sys.members) {
    Expr raw = simplify(replace(m.raw, b));
    if (is_zero_node(raw)) continue;
    out.members.push_back(detail::clear_k(raw, m.origin));
  }
  return out;
}

/// Generated systems are fixed; computed once per process.
inline const DeterminingSystem& cached_system(OperatorForm form, bool ku_zero = false) {
  if (form == OperatorForm::AZero) {
    static const DeterminingSystem s = generate_determining_system(OperatorForm::AZero);
    return s;
  }
  if (ku_zero) {
    static const DeterminingSystem s = generate_determining_system(OperatorForm::ANonZero, true);
    return s;
  }
  static const DeterminingSystem s = generate_determining_system(OperatorForm::ANonZero);
  return s;
}

// ---------------------------------------------------------------------------
// Published transcriptions, used as the regression reference.

inline Context transcription_context(bool ku_zero) {
  Context c = Context::standard();
  if (ku_zero) c.declare(symbol_K_yz());
  return c;
}

inline std::vector<std::string> transcription_text(OperatorForm form, bool ku_zero) {
  if (form == OperatorForm::AZero) {
    return {"L_uy + L_uu*L", "-f_y - L*f_u + L_yz + L_uz*L + L_u*f"};
  }
  if (ku_zero) {
    return {"-K*L_uu", "L_uy - L_uz*K + L_uu*L - L_u*K_y/K + K_y*K_z/K - K_yz",
            "-f_y - K*f_z - L*f_u + L_yz + L_uz*L + L_u*f - K_y/K*(L_z - f) - K_z*f"};
  }
  return {
      "-K_u^2 + K_uu*K",
      "-K*L_uu + K_u*K_y/K + K_u^2*L/K + K_u*(L_u - K_z) - K_uy - L*K_uu + K*K_zu",
      "L_uy - L_uz*K + L_uu*L - L_u*K_y/K + K_y*K_z/K - K_yz - 3*K_u*f - K_u*L/K*(L_u - K_z)"
      " + K_u*L_z - K_zu*L",
      "-f_y - K*f_z - L*f_u + L_yz + L_uz*L + L_u*f - K_y/K*(L_z - f) - K_z*f"
      " - K_u*L/K*(L_z - f)",
  };
}

inline std::vector<Expr> transcribed_system(OperatorForm form, bool ku_zero = false) {
  const Context ctx = transcription_context(ku_zero);
  std::vector<Expr> out;
  for (const auto& t : transcription_text(form, ku_zero)) out.push_back(parse(t, ctx));
  return out;
}

struct MemberMatch {
  Expr generated;    // cleared residual
  Expr transcribed;  // as published
  int k_power = 0;
  Expr difference;   // simplify(generated - K^k_power * transcribed)
  bool match = false;
};

struct RegressionResult {
  std::vector<MemberMatch> members;
  bool count_match = false;
  bool pass() const {
    if (!count_match) return false;
    for (const auto& m : members) {
      if (!m.match) return false;
    }
    return true;
  }
};

/// Member-by-member comparison after the K-power clearing.
inline RegressionResult compare_with_transcription(const DeterminingSystem& sys) {
  const auto ref = transcribed_system(sys.form, sys.ku_zero);
  RegressionResult r;
  r.count_match = ref.size() == sys.members.size();
  const Expr K = sys.ku_zero ? apply(symbol_K_yz()) : apply(symbol_K());
  for (std::size_t i = 0; i < std::max(ref.size(), sys.members.size()); ++i) {
    MemberMatch m;
    if (i < sys.members.size()) {
      m.generated = sys.members[i].residual;
      m.k_power = sys.members[i].k_power;
    }
    if (i < ref.size()) m.transcribed = ref[i];
    if (i < ref.size() && i < sys.members.size()) {
      m.difference = simplify(m.generated - power(K, m.k_power) * m.transcribed);
      m.match = is_zero_node(m.difference);
    }
    r.members.push_back(std::move(m));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Verification

inline bool mentions(const Expr& e, const std::string& fn) {
  for (const auto& s : function_symbols(e)) {
    if (s->name == fn) return true;
  }
  return false;
}

/// Substitutes (f, K, L) into the determining system and zero-tests every
/// member. For the a = 0 form K is ignored. f may be left opaque
/// (apply(symbol_f())): members that then still involve f are reported as
/// conditions on f rather than structural failures.
inline VerificationReport verify_conditional_operator(const Expr& f, const Expr& K, const Expr& L,
                                                      OperatorForm form,
                                                      const SamplingOptions& opt = {}) {
  if (form == OperatorForm::ANonZero && is_zero_node(simplify(K)))
    throw DivisionByZero("K vanishes identically; the a != 0 system divides by K (use the a = 0 form)");
  Bindings b;
  b.fn(symbol_f(), f).fn(symbol_L(), L);
  if (form == OperatorForm::ANonZero) b.fn(symbol_K(), K);
  VerificationReport rep;
  rep.title = std::string("determining system (") + to_string(form) + ")";
  const auto& sys = cached_system(form);
  for (const auto& m : sys.members) {
    ZeroCheck c = check_zero(m.residual, b, opt);
    std::string note;
    if (c.verdict == ZeroVerdict::NonZero && mentions(c.residual, "f")) note = "condition on f";
    rep.add(m.origin, c, note);
  }
  return rep;
}

struct Candidate {
  Expr f, K, L;
  OperatorForm form = OperatorForm::ANonZero;
};

/// Verifies independent candidates on up to `threads` worker threads.
inline std::vector<VerificationReport> verify_batch(const std::vector<Candidate>& cs,
                                                    unsigned threads = std::thread::hardware_concurrency(),
                                                    const SamplingOptions& opt = {}) {
  cached_system(OperatorForm::ANonZero);
  cached_system(OperatorForm::AZero);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cs.size())));
  std::vector<VerificationReport> out(cs.size());
  std::vector<std::future<void>> jobs;
  for (unsigned t = 0; t < threads; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < cs.size(); i += threads)
        out[i] = verify_conditional_operator(cs[i].f, cs[i].K, cs[i].L, cs[i].form, opt);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

// ---------------------------------------------------------------------------
// Case split

enum class CaseTag { Case1, Case2, Case3, Undecided };

inline const char* to_string(CaseTag t) {
  switch (t) {
    case CaseTag::Case1: return "Case1";
    case CaseTag::Case2: return "Case2";
    case CaseTag::Case3: return "Case3";
    case CaseTag::Undecided: return "Undecided";
  }
  return "?";
}

struct Classification {
  CaseTag tag = CaseTag::Undecided;
  Expr K_u;
  bool exponential_structure = false;  // K K_uu - K_u^2 = 0
  std::string reason;
};

namespace detail {

enum class Tri { Zero, NonZero, Unknown };

inline Tri decide(const Expr& e, const SamplingOptions& opt) {
  const Expr s = simplify(e);
  if (is_zero_node(s)) return Tri::Zero;
  if (has_functions(s)) return Tri::NonZero;  // generic opaque functions
  try {
    auto c = check_zero(s, {}, opt);
    return c.verdict == ZeroVerdict::NonZero ? Tri::NonZero : Tri::Unknown;
  } catch (const std::exception&) {
    return Tri::Unknown;
  }
}

}  // namespace detail

/// Case 1: K_u = 0, K != 0; Case 2: K = 0; Case 3: K_u != 0.
inline Classification classify_case(const Expr& K, const SamplingOptions& opt = {}) {
  Classification c;
  c.K_u = simplify(diff(K, "u"));
  const auto k = detail::decide(K, opt);
  if (k == detail::Tri::Zero) {
    c.tag = CaseTag::Case2;
    c.reason = "K = 0";
    return c;
  }
  const auto ku = detail::decide(c.K_u, opt);
  if (k == detail::Tri::Unknown || ku == detail::Tri::Unknown) {
    c.tag = CaseTag::Undecided;
    c.reason = "zero test inconclusive";
    return c;
  }
  if (ku == detail::Tri::Zero) {
    c.tag = CaseTag::Case1;
    c.reason = "K_u = 0, K != 0";
    return c;
  }
  c.tag = CaseTag::Case3;
  c.reason = "K_u != 0";
  c.exponential_structure =
      is_zero_node(simplify(K * diff(K, std::vector<std::string>{"u", "u"}) - power(c.K_u, 2)));
  return c;
}

// ---------------------------------------------------------------------------
// Case 1

struct Case1Operator {
  Expr K, s, L;
  VerificationReport structural;  // the f-free determining equations
};

inline Case1Operator case1_from_T(const Expr& T, const SamplingOptions& opt = {}) {
  const Expr Tz = simplify(diff(T, "z"));
  if (is_zero_node(Tz))
    throw std::invalid_argument("T_z vanishes identically; this operator belongs to the a = 0 branch");
  Case1Operator op;
  op.K = simplify(diff(T, "y") / Tz);
  op.s = simplify(diff(T, std::vector<std::string>{"y", "z"}) / Tz);
  op.L = simplify(op.s * variable("u"));
  const auto full = verify_conditional_operator(apply(symbol_f()), op.K, op.L,
                                                OperatorForm::ANonZero, opt);
  op.structural.title = "Case-1 structural equations";
  for (const auto& e : full.entries) {
    if (e.origin == "1") continue;  // the f-equation
    ZeroCheck c{e.verdict, e.residual, e.max_abs};
    op.structural.add(e.origin, c, e.note);
  }
  if (!op.structural.pass())
    throw std::logic_error("Case-1 construction failed its own determining equations");
  return op;
}

/// The linear first-order PDE that f must satisfy for (K, L) with K_u = 0,
/// cleared of denominators.
inline Expr case1_f_condition(const Expr& K, const Expr& L) {
  if (is_zero_node(simplify(K))) throw std::invalid_argument("K vanishes identically");
  if (!is_zero_node(simplify(diff(K, "u"))))
    throw std::invalid_argument("Case 1 requires K independent of u");
  const auto& sys = cached_system(OperatorForm::ANonZero);
  const DeterminingMember* feq = nullptr;
  for (const auto& m : sys.members) {
    if (m.origin == "1") feq = &m;
  }
  Bindings b;
  b.fn(symbol_K(), K).fn(symbol_L(), L);
  return numerator(replace(feq->raw, b));
}

// ---------------------------------------------------------------------------
// Case 2

struct Case2System {
  Expr u_y;  // = L
  Expr u_z;  // = (f - L_z) / L_u
  Expr compatibility;
  ZeroVerdict compatibility_verdict = ZeroVerdict::NonZero;
  VerificationReport determining;
};

inline Case2System case2_first_order_system(const Expr& L, const Expr& f,
                                            const SamplingOptions& opt = {}) {
  const Expr Lu = simplify(diff(L, "u"));
  if (is_zero_node(Lu))
    throw std::invalid_argument(
        "first-order reduction unavailable; condition is u_y=L with f constraint only");
  Case2System out;
  out.u_y = L;
  out.u_z = simplify((f - diff(L, "z")) / Lu);
  // D_z(u_y) - D_y(u_z) along u_y = L, u_z = g
  const Expr lhs = diff(L, "z") + diff(L, "u") * out.u_z;
  const Expr rhs = diff(out.u_z, "y") + diff(out.u_z, "u") * L;
  auto c = check_zero(lhs - rhs, {}, opt);
  out.compatibility = c.residual;
  out.compatibility_verdict = c.verdict;
  out.determining = verify_conditional_operator(f, integer(0), L, OperatorForm::AZero, opt);
  return out;
}

// ---------------------------------------------------------------------------
// Case 3

inline std::vector<std::string> case3_constraint_text() {
  return {"2*s_yz - s*d_z + 2*s_y*s - d_zz", "-s_yy + 2*d_yz + s_y*d - 2*d_z*d"};
}

struct Case3Operator {
  Expr K, L, f;
  VerificationReport constraints;
  VerificationReport system;
  bool pass() const { return constraints.pass() && system.pass(); }
};

inline Case3Operator case3_construct(const Expr& s, const Expr& d, const SamplingOptions& opt = {}) {
  const Context ctx = Context::standard();
  const auto sd = ctx.find("s");
  const auto dd = ctx.find("d");
  Case3Operator op;
  op.K = qcsym::exp(variable("u"));
  op.L = simplify(s * op.K + d);
  op.f = simplify((diff(s, "y") + diff(d, "z")) / integer(3));
  Bindings b;
  b.fn(*sd, s).fn(*dd, d);
  op.constraints.title = "Case-3 (s, d) constraints";
  int i = 0;
  for (const auto& t : case3_constraint_text()) {
    op.constraints.add("constraint " + std::to_string(++i), check_zero(parse(t, ctx), b, opt));
  }
  op.system = verify_conditional_operator(op.f, op.K, op.L, OperatorForm::ANonZero, opt);
  return op;
}

/// Substitutes K = exp(u), L = s exp(u) + d with f opaque and solves the
/// member that is linear in f (and free of f's derivatives) for f.
inline Expr case3_solve_f(const Expr& s, const Expr& d) {
  const Expr K = qcsym::exp(variable("u"));
  const Expr L = s * K + d;
  const Expr f = apply(symbol_f());
  Bindings b;
  b.fn(symbol_K(), K).fn(symbol_L(), L);
  for (const auto& m : cached_system(OperatorForm::ANonZero).members) {
    Expr r = simplify(replace(m.residual, b));
    if (!mentions(r, "f")) continue;
    auto lin = collect(r, {f});
    bool ok = lin.size() <= 2 && lin.count({1});
    for (const auto& [k, c] : lin) {
      if (mentions(c, "f")) ok = false;
    }
    if (!ok) continue;
    const Expr B = lin.count({0}) ? lin.at({0}) : integer(0);
    return simplify(-B / lin.at({1}));
  }
  throw std::logic_error("no determining equation is algebraically linear in f");
}

// ---------------------------------------------------------------------------
// Classical (Lie) invariance and the light-cone change of variables

/// Q generates a point symmetry of u_yz = f iff pr Q (u_yz - f) vanishes
/// on u_yz = f identically in the remaining jets.
inline VerificationReport lie_invariance_check(const ConditionalOperator& Q, const Expr& f,
                                               const SamplingOptions& opt = {}) {
  Expr inv = prolong(Q).eta_yz - (Q.a * diff(f, "y") + Q.b * diff(f, "z") + Q.c * diff(f, "u"));
  Bindings eq;
  eq.var(jet_name(1, 1), f);
  inv = simplify(replace(inv, eq));
  VerificationReport rep;
  rep.title = "Lie invariance of u_yz = f";
  const auto names = jet_variables(inv);
  if (names.empty()) {
    rep.add("1", check_zero(inv, {}, opt));
    return rep;
  }
  std::vector<Expr> atoms;
  for (const auto& n : names) atoms.push_back(variable(n));
  for (const auto& [key, c] : collect(inv, atoms)) {
    rep.add(detail::monomial_label(names, key), check_zero(c, {}, opt));
  }
  if (rep.entries.empty()) rep.add("1", check_zero(integer(0)));
  return rep;
}

enum class Direction { Forward, Inverse };

/// Light-cone coordinates y = t + x, z = t - x, so u_tt - u_xx = 4 u_yz.
/// Forward maps F(t,x,u) to f(y,z,u) = F((y+z)/2, (y-z)/2, u) / 4;
/// Inverse maps f(y,z,u) to F(t,x,u) = 4 f(t+x, t-x, u).
inline Expr lightcone_transform(const Expr& F, Direction dir) {
  Bindings b;
  if (dir == Direction::Forward) {
    b.var("t", (variable("y") + variable("z")) / integer(2));
    b.var("x", (variable("y") - variable("z")) / integer(2));
    return simplify(replace(F, b) / integer(4));
  }
  b.var("y", variable("t") + variable("x"));
  b.var("z", variable("t") - variable("x"));
  return simplify(integer(4) * replace(F, b));
}

inline constexpr const char* kLightconeConvention =
    "y = t + x, z = t - x; u_tt - u_xx = 4 u_yz, f(y,z,u) = F((y+z)/2, (y-z)/2, u)/4";

}  // namespace qcsym
