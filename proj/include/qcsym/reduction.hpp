#pragma once

// Case-1 reduction: the ansatz u = sigma(y,z) phi(omega(y,z)), its
// characteristic equations, the reduced second-order ODE in omega and the
// test that its coefficients really depend on omega alone.

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "detsys.hpp"
#include "numeric.hpp"

namespace qcsym {

class ReductionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kOmegaVar = "w";  // omega in reduced equations
inline constexpr const char* kPhiVar = "phi";  // phi as a plain variable when f depends on u

/// T_y omega_z + T_z omega_y = 0 and T_y sigma_z + T_z sigma_y = sigma T_yz.
inline VerificationReport check_characteristics(const Expr& T, const Expr& omega, const Expr& sigma,
                                                const SamplingOptions& opt = {}) {
  const Expr Ty = diff(T, "y"), Tz = diff(T, "z");
  VerificationReport rep;
  rep.title = "characteristic equations";
  rep.add("omega", check_zero(Ty * diff(omega, "z") + Tz * diff(omega, "y"), {}, opt));
  rep.add("sigma", check_zero(Ty * diff(sigma, "z") + Tz * diff(sigma, "y") -
                                  sigma * diff(T, std::vector<std::string>{"y", "z"}),
                              {}, opt));
  return rep;
}

// ---------------------------------------------------------------------------
// Invariants for T

struct Invariants {
  Expr omega, sigma;
  std::string source;  // "catalog" or "separable"
};

struct CatalogEntry {
  std::string T, omega, sigma;
};

inline const std::vector<CatalogEntry>& invariant_catalog() {
  static const std::vector<CatalogEntry> c{
      {"y+z", "y-z", "1"},         {"y*z", "y/z", "y"},   {"y^2*z", "y^2/z", "y^2"},
      {"y+z^2", "y-z^2", "1"},     {"exp(y)*z", "exp(y)/z", "exp(y)"},
      {"y/z", "y*z", "y"},
  };
  return c;
}

/// Catalog lookup, then additive (T_yz = 0) and multiplicative
/// (T T_yz = T_y T_z) separable forms, both normalized on y = 1, z = 1.
inline std::optional<Invariants> find_invariants(const Expr& T) {
  const Expr t = simplify(T);
  for (const auto& e : invariant_catalog()) {
    if (simplify(parse(e.T)) == t) return Invariants{parse(e.omega), parse(e.sigma), "catalog"};
  }
  auto at = [&](const std::string& v, int c) { return simplify(replace_variable(t, v, integer(c))); };
  const Expr Tyz = simplify(diff(t, std::vector<std::string>{"y", "z"}));
  try {
    if (is_zero_node(Tyz)) {
      Invariants inv{simplify(at("z", 1) - at("y", 1)), integer(1), "separable"};
      if (depends_on(inv.omega, "y") || depends_on(inv.omega, "z")) return inv;
    }
    if (is_zero_node(simplify(t * Tyz - diff(t, "y") * diff(t, "z")))) {
      const Expr a = at("z", 1), b = at("y", 1);
      if (!is_zero_node(a) && !is_zero_node(b)) {
        Invariants inv{simplify(a / b), a, "separable"};
        if (depends_on(inv.omega, "y") || depends_on(inv.omega, "z")) return inv;
      }
    }
  } catch (const DivisionByZero&) {
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Reduced equation

enum class Reducibility { ReducibleSymbolic, ReducibleNumeric, NotReducible };

inline const char* to_string(Reducibility r) {
  switch (r) {
    case Reducibility::ReducibleSymbolic: return "ReducibleSymbolic";
    case Reducibility::ReducibleNumeric: return "ReducibleNumeric";
    case Reducibility::NotReducible: return "NotReducible";
  }
  return "?";
}

/// phi'' + c1 phi' + c0 phi = rhs, coefficients in (w[, phi]).
struct NormalizedOde {
  Expr c1, c0, rhs;
};

struct ReductionPackage {
  Expr sigma, omega, f;
  Expr A0, A1, A2;
  Expr c1, c0, rhs;                   // normalized, still in (y, z[, phi])
  std::optional<NormalizedOde> ode;   // rewritten in w when the rewrite succeeded
  std::string rewrite_note;

  /// The normalized ODE as text: "phi'' + (c1)*phi' + (c0)*phi = rhs".
  std::string ode_text() const {
    const auto& o = ode ? *ode : NormalizedOde{c1, c0, rhs};
    std::string s = "phi''";
    if (!is_zero_node(o.c1)) s += " + (" + to_string(o.c1) + ")*phi'";
    if (!is_zero_node(o.c0)) s += " + (" + to_string(o.c0) + ")*phi";
    return s + " = " + to_string(o.rhs);
  }
};

namespace detail {

// Solves omega(y, z) = w for `var` when omega's numerator and denominator
// are both of degree <= 1 in var.
inline std::optional<Expr> solve_linear(const Expr& omega, const std::string& var) {
  const Expr x = variable(var), w = variable(kOmegaVar);
  try {
    auto n = collect(numerator(omega), {x});
    auto d = collect(denominator(omega), {x});
    for (const auto* m : {&n, &d}) {
      for (const auto& [k, c] : *m) {
        if (k[0] > 1 || depends_on(c, var)) return std::nullopt;
      }
    }
    auto get = [](const std::map<std::vector<int>, Expr>& m, int k) {
      auto it = m.find({k});
      return it == m.end() ? integer(0) : it->second;
    };
    const Expr a = get(n, 1), b = get(n, 0), c = get(d, 1), e = get(d, 0);
    // (a x + b) = w (c x + e)
    const Expr den = simplify(a - w * c);
    if (is_zero_node(den)) return std::nullopt;
    return simplify((w * e - b) / den);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline bool only_in(const Expr& e, std::initializer_list<const char*> allowed) {
  for (const auto& v : free_variables(e)) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return v == a; }) ==
        allowed.end())
      return false;
  }
  return true;
}

inline std::optional<NormalizedOde> rewrite_in_omega(const Expr& omega, const NormalizedOde& o,
                                                     std::string& note) {
  for (const char* var : {"y", "z"}) {
    auto x = solve_linear(omega, var);
    if (!x) continue;
    auto sub = [&](const Expr& e) { return simplify(replace_variable(e, var, *x)); };
    try {
      NormalizedOde r{sub(o.c1), sub(o.c0), sub(o.rhs)};
      if (only_in(r.c1, {kOmegaVar}) && only_in(r.c0, {kOmegaVar}) &&
          only_in(r.rhs, {kOmegaVar, kPhiVar})) {
        note = std::string("solved omega = w for ") + var;
        return r;
      }
      note = "coefficients keep y or z after eliminating " + std::string(var);
    } catch (const DivisionByZero&) {
      note = "rewrite divides by zero";
    }
  }
  if (note.empty()) note = "omega is not linear-fractional in y or z";
  return std::nullopt;
}

}  // namespace detail

/// A0 = sigma_yz, A1 = omega_y sigma_z + omega_z sigma_y + sigma omega_yz,
/// A2 = sigma omega_y omega_z; the equation A0 phi + A1 phi' + A2 phi'' = f
/// with u replaced by sigma*phi in f.
inline ReductionPackage reduced_equation(const Expr& sigma, const Expr& omega, const Expr& f) {
  const Expr wy = simplify(diff(omega, "y")), wz = simplify(diff(omega, "z"));
  if (is_zero_node(wy) && is_zero_node(wz)) throw ReductionError("omega is constant");
  ReductionPackage p;
  p.sigma = sigma;
  p.omega = omega;
  p.f = f;
  p.A0 = simplify(diff(sigma, std::vector<std::string>{"y", "z"}));
  p.A1 = simplify(wy * diff(sigma, "z") + wz * diff(sigma, "y") +
                  sigma * diff(omega, std::vector<std::string>{"y", "z"}));
  p.A2 = simplify(sigma * wy * wz);
  if (is_zero_node(p.A2))
    throw ReductionError("A2 vanishes identically: omega is constant along a null direction");
  const Expr rhs = replace_variable(f, "u", sigma * variable(kPhiVar));
  p.c1 = simplify(p.A1 / p.A2);
  p.c0 = simplify(p.A0 / p.A2);
  p.rhs = simplify(rhs / p.A2);
  p.ode = detail::rewrite_in_omega(omega, {p.c1, p.c0, p.rhs}, p.rewrite_note);
  return p;
}

/// u_yz for u = sigma phi(omega), phi opaque, minus A0 phi + A1 phi' + A2 phi''.
inline Expr ansatz_identity_residual(const Expr& sigma, const Expr& omega) {
  static const FunctionSymbol phi{"phi", {"w"}};
  auto at = [&](int k) { return apply(phi, {k}, {omega}); };
  const Expr u = sigma * at(0);
  const Expr uyz = diff(diff(u, "y"), "z");
  const Expr A0 = diff(sigma, std::vector<std::string>{"y", "z"});
  const Expr A1 = diff(omega, "y") * diff(sigma, "z") + diff(omega, "z") * diff(sigma, "y") +
                  sigma * diff(omega, std::vector<std::string>{"y", "z"});
  const Expr A2 = sigma * diff(omega, "y") * diff(omega, "z");
  return simplify(uyz - (A0 * at(0) + A1 * at(1) + A2 * at(2)));
}

struct ReducibilityResult {
  Reducibility verdict = Reducibility::NotReducible;
  bool symbolic = false;
  int pairs = 0;
  double max_disagreement = 0;
  double tol = 1e-9;
  std::string note;
};

class LevelSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples pairs of points on common level sets of omega in the box and
/// compares the normalized coefficients there.
inline ReducibilityResult reducibility_test(const ReductionPackage& pkg, const Box& box = {},
                                            int pairs = 20, double tol = 1e-9,
                                            std::uint64_t seed = kDefaultSeed) {
  ReducibilityResult r;
  r.tol = tol;
  r.symbolic = pkg.ode.has_value();
  const std::vector<std::string> vars{"y", "z", kPhiVar};
  const CompiledExpr w(pkg.omega, {"y", "z"});
  const std::vector<CompiledExpr> coeff{{pkg.c1, vars}, {pkg.c0, vars}, {pkg.rhs, vars}};

  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto safe = [](const CompiledExpr& c, double y, double z) -> std::optional<double> {
    try {
      return c({y, z});
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  // root of omega(., fixed) = target along one coordinate by scan + bisection
  auto solve = [&](bool along_y, double fixed, double target, std::optional<double> avoid) -> std::optional<double> {
    const double a = along_y ? box.y0 : box.z0, b = along_y ? box.y1 : box.z1;
    auto g = [&](double x) {
      return along_y ? safe(w, x, fixed) : safe(w, fixed, x);
    };
    const int n = 256;
    std::optional<double> prev = g(a);
    double xp = a;
    for (int k = 1; k <= n; ++k) {
      const double x = a + (b - a) * k / n;
      auto v = g(x);
      if (prev && v && (*prev - target) * (*v - target) <= 0) {
        double lo = xp, hi = x, flo = *prev - target;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
          const double mid = (lo + hi) / 2;
          auto fm = g(mid);
          if (!fm) return std::nullopt;
          if ((flo <= 0) == (*fm - target <= 0)) {
            lo = mid;
            flo = *fm - target;
          } else {
            hi = mid;
          }
        }
        const double root = (lo + hi) / 2;
        if (!avoid || std::abs(root - *avoid) > 1e-3 * (b - a)) return root;
      }
      prev = v;
      xp = x;
    }
    return std::nullopt;
  };

  for (int attempt = 0; attempt < 200 * pairs && r.pairs < pairs; ++attempt) {
    const double y1 = uni(box.y0, box.y1), z1 = uni(box.z0, box.z1), ph = uni(1.0, 2.0);
    auto target = safe(w, y1, z1);
    if (!target) continue;
    double y2 = 0, z2 = 0;
    const bool along_y = attempt % 2 == 0;
    if (along_y) {
      z2 = uni(box.z0, box.z1);
      auto s = solve(true, z2, *target, std::abs(z2 - z1) < 1e-6 ? std::optional(y1) : std::nullopt);
      if (!s) continue;
      y2 = *s;
    } else {
      y2 = uni(box.y0, box.y1);
      auto s = solve(false, y2, *target, std::abs(y2 - y1) < 1e-6 ? std::optional(z1) : std::nullopt);
      if (!s) continue;
      z2 = *s;
    }
    if (std::abs(y2 - y1) + std::abs(z2 - z1) < 1e-6) continue;
    try {
      for (const auto& c : coeff) {
        const double a = c({y1, z1, ph}), b = c({y2, z2, ph});
        const double d = std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
        r.max_disagreement = std::max(r.max_disagreement, d);
      }
    } catch (const std::exception&) {
      continue;
    }
    ++r.pairs;
  }
  if (r.pairs < pairs)
    throw LevelSetError("found only " + std::to_string(r.pairs) + " level-set pairs in the box");
  const bool agree = r.max_disagreement <= tol;
  if (!agree) {
    r.verdict = Reducibility::NotReducible;
    r.note = r.symbolic ? "symbolic rewrite disagrees with the level-set test" : pkg.rewrite_note;
  } else {
    r.verdict = r.symbolic ? Reducibility::ReducibleSymbolic : Reducibility::ReducibleNumeric;
    r.note = pkg.rewrite_note;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Solving and assembling

/// phi'' = rhs - c1 phi' - c0 phi as a callable; requires the rewritten ODE.
inline SecondOrderRhs ode_rhs(const ReductionPackage& pkg) {
  if (!pkg.ode) throw ReductionError("the reduced equation was not rewritten in omega");
  const std::vector<std::string> vars{kOmegaVar, kPhiVar};
  auto c1 = std::make_shared<CompiledExpr>(pkg.ode->c1, vars);
  auto c0 = std::make_shared<CompiledExpr>(pkg.ode->c0, vars);
  auto rhs = std::make_shared<CompiledExpr>(pkg.ode->rhs, vars);
  return [=](double w, double p, double dp) {
    return (*rhs)({w, p}) - (*c1)({w, p}) * dp - (*c0)({w, p}) * p;
  };
}

/// Real points of [a, b] where a coefficient of the rewritten ODE has a pole.
inline std::vector<double> ode_singularities(const ReductionPackage& pkg, double a, double b) {
  std::vector<double> out;
  if (!pkg.ode) return out;
  for (const auto& e : {pkg.ode->c1, pkg.ode->c0, pkg.ode->rhs}) {
    for (const auto& d : pole_loci(e)) {
      if (!detail::only_in(d, {kOmegaVar})) continue;
      if (auto p = find_pole(d, kOmegaVar, a, b)) out.push_back(*p);
    }
  }
  return out;
}

/// Range of omega over the box widened by `margin` on every side.
inline std::pair<double, double> omega_range(const Expr& omega, const Box& box, double margin = 0,
                                             int samples = 200) {
  const CompiledExpr w(omega, {"y", "z"});
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; j <= samples; ++j) {
      const double y = box.y0 - margin + (box.y1 - box.y0 + 2 * margin) * i / samples;
      const double z = box.z0 - margin + (box.z1 - box.z0 + 2 * margin) * j / samples;
      const double v = w({y, z});
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

/// u(y, z) = sigma(y, z) phi(omega(y, z)).
class AssembledSolution {
 public:
  AssembledSolution(const ReductionPackage& pkg, std::function<double(double)> phi)
      : sigma_(pkg.sigma, {"y", "z"}), omega_(pkg.omega, {"y", "z"}), phi_(std::move(phi)) {}

  AssembledSolution(const ReductionPackage& pkg, const DenseSolution& phi)
      : sigma_(pkg.sigma, {"y", "z"}), omega_(pkg.omega, {"y", "z"}) {
    auto p = std::make_shared<DenseSolution>(phi);
    phi_ = [p](double w) { return (*p)(w); };
  }

  double omega(double y, double z) const { return omega_({y, z}); }

  double operator()(double y, double z) const { return sigma_({y, z}) * phi_(omega_({y, z})); }

 private:
  CompiledExpr sigma_, omega_;
  std::function<double(double)> phi_;
};

inline AssembledSolution assemble_solution(const ReductionPackage& pkg, const DenseSolution& phi) {
  return {pkg, phi};
}

/// Symbolic assembly for closed-form phi(w).
inline Expr assemble_solution(const ReductionPackage& pkg, const Expr& phi) {
  return simplify(pkg.sigma * replace_variable(phi, kOmegaVar, pkg.omega));
}

struct NumericReduction {
  DenseSolution phi;
  ResidualStats stats;
  double h = 0;
};

/// Integrates the reduced ODE (step h) over the omega-range of the box plus
/// its ghost margin and measures the FD residual of the assembled u (step h).
inline NumericReduction solve_and_check(const ReductionPackage& pkg, const Box& box, double h,
                                        double w0, double phi0, double dphi0) {
  auto [lo, hi] = omega_range(pkg.omega, box, h);
  lo = std::min(lo, w0);
  hi = std::max(hi, w0);
  const double pad = 4 * h;
  NumericReduction out;
  out.h = h;
  out.phi = integrate_reduced_ode(ode_rhs(pkg), lo - pad, hi + pad, w0, phi0, dphi0, h,
                                  ode_singularities(pkg, lo - pad, hi + pad));
  const auto u = assemble_solution(pkg, out.phi);
  out.stats = fd_mixed_residual(u, pkg.f, box, h);
  return out;
}

}  // namespace qcsym
