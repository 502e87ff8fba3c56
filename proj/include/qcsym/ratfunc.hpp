#pragma once

// Rational-function normal form.
//
// An expression is mapped to N/D where N and D are sparse polynomials over
// "atoms": variables, function applications, log(...) nodes, and powers of
// sums that cannot be expanded. exp(...) is a unit: each monomial carries at
// most one exp factor whose (canonical) argument adds under multiplication,
// which implements exp(a)*exp(b) = exp(a+b). N = 0 decides zero-equivalence
// over independent atoms.
//
// D is kept factored: a monomial times normalized polynomial factors with
// multiplicities, taken from the structure of the input. Sums use the lcm
// of the factored denominators, and every exp-free factor that divides N
// exactly is cancelled. No general multivariate gcd is attempted, so two
// factors sharing a common divisor are kept apart.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expr.hpp"

namespace qcsym {

Expr simplify(const Expr& e);

struct Monomial {
  std::vector<std::pair<Expr, int>> atoms;  // sorted by ExprLess, exponents > 0
  std::optional<Expr> exp_arg;              // canonical, nonzero

  int degree() const {
    int d = 0;
    for (const auto& [a, k] : atoms) d += k;
    return d;
  }
};

namespace detail {

inline int compare_atoms(const Monomial& a, const Monomial& b) {
  const std::size_t n = std::min(a.atoms.size(), b.atoms.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a.atoms[i].first, b.atoms[i].first)) return c;
    if (a.atoms[i].second != b.atoms[i].second) return a.atoms[i].second > b.atoms[i].second ? -1 : 1;
  }
  return cmp3(b.atoms.size(), a.atoms.size());
}

inline int compare_exp(const Monomial& a, const Monomial& b) {
  if (a.exp_arg.has_value() != b.exp_arg.has_value()) return a.exp_arg ? 1 : -1;
  if (!a.exp_arg) return 0;
  return compare(*a.exp_arg, *b.exp_arg);
}

}  // namespace detail

/// Storage order: exp-free monomials first, then higher degree first.
struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    if (a.exp_arg.has_value() != b.exp_arg.has_value()) return !a.exp_arg.has_value();
    if (a.degree() != b.degree()) return a.degree() > b.degree();
    if (int c = detail::compare_atoms(a, b)) return c < 0;
    return detail::compare_exp(a, b) < 0;
  }
};

using Poly = std::map<Monomial, Rational, MonomialLess>;

namespace detail {

inline std::optional<Expr> add_exp(const std::optional<Expr>& a, const std::optional<Expr>& b) {
  if (!a) return b;
  if (!b) return a;
  Expr s = simplify(sum({*a, *b}));
  if (is_zero_node(s)) return std::nullopt;
  return s;
}

inline Monomial mul(const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t i = 0, j = 0;
  while (i < a.atoms.size() || j < b.atoms.size()) {
    int c;
    if (i == a.atoms.size()) {
      c = 1;
    } else if (j == b.atoms.size()) {
      c = -1;
    } else {
      c = compare(a.atoms[i].first, b.atoms[j].first);
    }
    if (c < 0) {
      r.atoms.push_back(a.atoms[i++]);
    } else if (c > 0) {
      r.atoms.push_back(b.atoms[j++]);
    } else {
      r.atoms.emplace_back(a.atoms[i].first, a.atoms[i].second + b.atoms[j].second);
      ++i;
      ++j;
    }
  }
  r.exp_arg = add_exp(a.exp_arg, b.exp_arg);
  return r;
}

inline void add_term(Poly& p, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = p.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

inline Poly constant(const Rational& c) {
  Poly p;
  add_term(p, Monomial{}, c);
  return p;
}

inline Poly atom(const Expr& a) {
  Poly p;
  p.emplace(Monomial{{{a, 1}}, std::nullopt}, Rational(1));
  return p;
}

inline Poly add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b) add_term(r, m, c);
  return r;
}

inline Poly scale(const Poly& a, const Rational& s) {
  Poly r;
  if (s == 0) return r;
  for (const auto& [m, c] : a) r.emplace(m, c * s);
  return r;
}

inline Poly mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) add_term(r, mul(ma, mb), ca * cb);
  }
  return r;
}

inline Poly mul(const Poly& a, const Monomial& m) {
  Poly r;
  for (const auto& [ma, ca] : a) add_term(r, mul(ma, m), ca);
  return r;
}

inline Poly pow(const Poly& a, int n) {
  Poly r = constant(1);
  Poly base = a;
  while (n) {
    if (n & 1) r = mul(r, base);
    n >>= 1;
    if (n) base = mul(base, base);
  }
  return r;
}

inline bool is_one(const Poly& p) {
  return p.size() == 1 && p.begin()->first.atoms.empty() && !p.begin()->first.exp_arg &&
         p.begin()->second == 1;
}

inline bool exp_free(const Poly& p) {
  for (const auto& [m, c] : p) {
    if (m.exp_arg) return false;
  }
  return true;
}

// Division order: graded lex on atoms, ties by exp argument.
inline bool div_less(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  if (int c = compare_atoms(a, b)) return c > 0;
  return compare_exp(a, b) < 0;
}

inline Poly::const_iterator leading(const Poly& p) {
  auto best = p.begin();
  for (auto it = p.begin(); it != p.end(); ++it) {
    if (div_less(best->first, it->first)) best = it;
  }
  return best;
}

// m / d for exp-free d; nullopt when some atom exponent would go negative.
inline std::optional<Monomial> div_monomial(const Monomial& m, const Monomial& d) {
  Monomial r;
  r.exp_arg = m.exp_arg;
  std::size_t j = 0;
  for (const auto& [a, k] : m.atoms) {
    if (j < d.atoms.size() && compare(d.atoms[j].first, a) < 0) return std::nullopt;
    if (j < d.atoms.size() && compare(d.atoms[j].first, a) == 0) {
      const int e = k - d.atoms[j].second;
      if (e < 0) return std::nullopt;
      if (e > 0) r.atoms.emplace_back(a, e);
      ++j;
    } else {
      r.atoms.emplace_back(a, k);
    }
  }
  if (j != d.atoms.size()) return std::nullopt;
  return r;
}

/// Exact multivariate division a / b (b exp-free, nonzero).
inline std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
  if (b.empty() || !exp_free(b)) return std::nullopt;
  const auto lb = leading(b);
  Poly q, rem = a;
  for (int guard = 0; !rem.empty(); ++guard) {
    if (guard > 20000) return std::nullopt;
    const auto lr = leading(rem);
    auto t = div_monomial(lr->first, lb->first);
    if (!t) return std::nullopt;
    const Rational c = lr->second / lb->second;
    add_term(q, *t, c);
    Poly sub = scale(mul(b, *t), -c);
    rem = add(rem, sub);
  }
  return q;
}

}  // namespace detail

/// N / (m * F1^k1 * ... * Fr^kr): N expanded; m an exp-free monomial with
/// coefficient 1; each Fi a normalized polynomial (at least two terms, no
/// monomial content, leading term exp-free with coefficient 1), all distinct.
struct RatFunc {
  Poly num;
  Monomial den_monomial;
  std::vector<std::pair<Poly, int>> factors;

  bool is_zero() const { return num.empty(); }
  bool den_is_one() const { return den_monomial.atoms.empty() && factors.empty(); }
};

namespace detail {

inline int compare_poly(const Poly& a, const Poly& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j) {
    if (MonomialLess{}(i->first, j->first)) return -1;
    if (MonomialLess{}(j->first, i->first)) return 1;
    if (i->second != j->second) return i->second < j->second ? -1 : 1;
  }
  return 0;
}

inline Poly monomial_poly(const Monomial& m) {
  Poly p;
  p.emplace(m, Rational(1));
  return p;
}

inline Monomial monomial_pow(const Monomial& m, int k) {
  Monomial r;
  for (const auto& [a, e] : m.atoms) r.atoms.emplace_back(a, e * k);
  if (m.exp_arg) r.exp_arg = simplify(product({integer(k), *m.exp_arg}));
  return r;
}

// lcm (max) or gcd (min) of the atom parts; exp parts are dropped.
inline Monomial monomial_combine(const Monomial& a, const Monomial& b, bool lcm) {
  std::map<Expr, int, ExprLess> x, y;
  for (const auto& [t, k] : a.atoms) x[t] = k;
  for (const auto& [t, k] : b.atoms) y[t] = k;
  Monomial r;
  if (lcm) {
    for (const auto& [t, k] : y) x[t] = std::max(x[t], k);
    for (const auto& [t, k] : x) r.atoms.emplace_back(t, k);
  } else {
    for (const auto& [t, k] : x) {
      auto it = y.find(t);
      if (it != y.end()) r.atoms.emplace_back(t, std::min(k, it->second));
    }
  }
  return r;
}

// Common atom content of all terms of p.
inline Monomial content(const Poly& p) {
  Monomial g = p.begin()->first;
  g.exp_arg.reset();
  for (const auto& [m, c] : p) {
    g = monomial_combine(g, m, false);
    if (g.atoms.empty()) break;
  }
  return g;
}

struct FactorSplit {
  Rational coeff;
  Monomial unit;  // atom content and exp shift
  std::optional<Poly> factor;
};

// p = coeff * unit * factor with factor normalized (absent when p is a monomial).
inline FactorSplit split_factor(const Poly& p) {
  if (p.empty()) throw DivisionByZero("division by zero");
  FactorSplit s;
  s.unit = content(p);
  Poly f;
  for (const auto& [m, c] : p) f.emplace(*div_monomial(m, s.unit), c);
  if (f.begin()->first.exp_arg) {
    Monomial shift;
    shift.exp_arg = simplify(product({integer(-1), *f.begin()->first.exp_arg}));
    s.unit.exp_arg = *f.begin()->first.exp_arg;
    f = mul(f, shift);
  }
  s.coeff = f.begin()->second;
  if (f.size() == 1) {
    s.unit = mul(s.unit, f.begin()->first);
    return s;
  }
  s.factor = scale(f, Rational(1) / s.coeff);
  return s;
}

inline void add_factor(std::vector<std::pair<Poly, int>>& fs, Poly f, int k) {
  for (auto& [g, n] : fs) {
    if (compare_poly(g, f) == 0) {
      n += k;
      return;
    }
  }
  auto it = std::lower_bound(fs.begin(), fs.end(), f,
                             [](const auto& a, const Poly& b) { return compare_poly(a.first, b) < 0; });
  fs.insert(it, {std::move(f), k});
}

// Cancels the monomial gcd and every exp-free factor dividing the numerator.
inline void cancel(RatFunc& r) {
  if (r.num.empty()) {
    r.den_monomial = Monomial{};
    r.factors.clear();
    return;
  }
  if (!r.den_monomial.atoms.empty()) {
    const Monomial g = monomial_combine(content(r.num), r.den_monomial, false);
    if (!g.atoms.empty()) {
      Poly n;
      for (const auto& [m, c] : r.num) n.emplace(*div_monomial(m, g), c);
      r.num = std::move(n);
      r.den_monomial = *div_monomial(r.den_monomial, g);
    }
  }
  for (auto it = r.factors.begin(); it != r.factors.end();) {
    if (exp_free(it->first)) {
      while (it->second > 0) {
        auto q = divide_exact(r.num, it->first);
        if (!q) break;
        r.num = std::move(*q);
        --it->second;
      }
    }
    it = it->second == 0 ? r.factors.erase(it) : std::next(it);
  }
}

// num / (den_monomial * prod parts^k) for arbitrary polynomial parts.
inline RatFunc build(Poly num, Monomial den_monomial, std::vector<std::pair<Poly, int>> factors,
                     const std::vector<std::pair<Poly, int>>& parts) {
  RatFunc r{std::move(num), std::move(den_monomial), std::move(factors)};
  for (const auto& [p, k] : parts) {
    FactorSplit s = split_factor(p);
    r.num = scale(r.num, Rational(1) / rational_pow(s.coeff, k));
    Monomial atoms_only = s.unit;
    atoms_only.exp_arg.reset();
    r.den_monomial = mul(r.den_monomial, monomial_pow(atoms_only, k));
    if (s.unit.exp_arg) {
      Monomial inv;
      inv.exp_arg = simplify(product({integer(-k), *s.unit.exp_arg}));
      r.num = mul(r.num, inv);
    }
    if (s.factor) add_factor(r.factors, std::move(*s.factor), k);
  }
  cancel(r);
  return r;
}

inline Poly expanded_den(const RatFunc& r) {
  Poly d = monomial_poly(r.den_monomial);
  for (const auto& [f, k] : r.factors) d = mul(d, pow(f, k));
  return d;
}

inline int multiplicity(const RatFunc& r, const Poly& f) {
  for (const auto& [g, k] : r.factors) {
    if (compare_poly(g, f) == 0) return k;
  }
  return 0;
}

inline RatFunc add(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  RatFunc r;
  r.den_monomial = monomial_combine(a.den_monomial, b.den_monomial, true);
  r.factors = a.factors;
  for (const auto& [f, k] : b.factors) {
    bool found = false;
    for (auto& [g, n] : r.factors) {
      if (compare_poly(g, f) == 0) {
        n = std::max(n, k);
        found = true;
      }
    }
    if (!found) add_factor(r.factors, f, k);
  }
  auto lift = [&](const RatFunc& x) {
    Poly n = mul(x.num, *div_monomial(r.den_monomial, x.den_monomial));
    for (const auto& [f, k] : r.factors) {
      const int missing = k - multiplicity(x, f);
      if (missing > 0) n = mul(n, pow(f, missing));
    }
    return n;
  };
  r.num = add(lift(a), lift(b));
  cancel(r);
  return r;
}

inline RatFunc mul(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero() || b.is_zero()) return RatFunc{};
  RatFunc r{mul(a.num, b.num), mul(a.den_monomial, b.den_monomial), a.factors};
  for (const auto& [f, k] : b.factors) add_factor(r.factors, f, k);
  cancel(r);
  return r;
}

inline RatFunc invert(const RatFunc& a) {
  if (a.is_zero()) throw DivisionByZero("division by zero");
  return build(expanded_den(a), Monomial{}, {}, {{a.num, 1}});
}

inline RatFunc pow(const RatFunc& a, int n) {
  if (n < 0) return pow(invert(a), -n);
  if (n == 0) return RatFunc{constant(1), {}, {}};
  RatFunc r{pow(a.num, n), monomial_pow(a.den_monomial, n), a.factors};
  for (auto& [f, k] : r.factors) k *= n;
  cancel(r);
  return r;
}

inline RatFunc poly(Poly p) { return RatFunc{std::move(p), {}, {}}; }

}  // namespace detail

/// Maps an expression to its normalized rational function.
inline RatFunc to_ratfunc(const Expr& e) {
  using namespace detail;
  switch (e.kind()) {
    case Kind::Number:
      return poly(constant(e->value));
    case Kind::Variable:
      return poly(atom(e));
    case Kind::Function: {
      if (e->children.empty()) return poly(atom(e));
      std::vector<Expr> args;
      for (const auto& a : e->children) args.push_back(simplify(a));
      return poly(atom(apply(e->symbol, e->index, std::move(args))));
    }
    case Kind::Log:
      return poly(atom(qcsym::log(simplify(e->children[0]))));
    case Kind::Exp: {
      Expr a = simplify(e->children[0]);
      if (is_zero_node(a)) return poly(constant(1));
      Poly p;
      p.emplace(Monomial{{}, a}, Rational(1));
      return poly(std::move(p));
    }
    case Kind::Sum: {
      RatFunc acc;
      for (const auto& c : e->children) acc = add(acc, to_ratfunc(c));
      return acc;
    }
    case Kind::Product: {
      RatFunc acc = poly(constant(1));
      for (const auto& c : e->children) acc = mul(acc, to_ratfunc(c));
      return acc;
    }
    case Kind::Power:
      return pow(to_ratfunc(e->children[0]), e->exponent);
  }
  return RatFunc{};
}

inline Expr to_expr(const Monomial& m, const Rational& c) {
  std::vector<Expr> fs{number(c)};
  for (const auto& [a, k] : m.atoms) fs.push_back(power(a, k));
  if (m.exp_arg) fs.push_back(qcsym::exp(*m.exp_arg));
  return product(std::move(fs));
}

inline Expr to_expr(const Poly& p) {
  std::vector<Expr> terms;
  for (const auto& [m, c] : p) terms.push_back(to_expr(m, c));
  return sum(std::move(terms));
}

/// The denominator as a product of its monomial and polynomial factors.
inline Expr denominator_expr(const RatFunc& r) {
  std::vector<Expr> fs{to_expr(r.den_monomial, Rational(1))};
  for (const auto& [f, k] : r.factors) fs.push_back(power(to_expr(f), k));
  return product(std::move(fs));
}

inline Expr to_expr(const RatFunc& r) {
  Expr n = to_expr(r.num);
  if (r.den_is_one()) return n;
  return product({n, power(denominator_expr(r), -1)});
}

/// Canonical form: expanded numerator over a factored denominator.
inline Expr simplify(const Expr& e) { return to_expr(to_ratfunc(e)); }

inline Expr numerator(const Expr& e) { return to_expr(to_ratfunc(e).num); }
inline Expr denominator(const Expr& e) { return denominator_expr(to_ratfunc(e)); }

/// Collects e as a polynomial in the given atoms (variables or function
/// applications). Keys are exponent vectors aligned with `atoms`; values are
/// canonical coefficients. Throws if an atom occurs in the denominator.
inline std::map<std::vector<int>, Expr> collect(const Expr& e, const std::vector<Expr>& atoms) {
  RatFunc r = to_ratfunc(e);
  auto check = [&](const Monomial& m) {
    for (const auto& [a, k] : m.atoms) {
      for (const auto& x : atoms) {
        if (a == x) throw std::invalid_argument("collect: atom occurs in denominator");
      }
    }
  };
  check(r.den_monomial);
  for (const auto& [f, k] : r.factors) {
    for (const auto& [m, c] : f) check(m);
  }
  std::map<std::vector<int>, Poly> groups;
  for (const auto& [m, c] : r.num) {
    std::vector<int> key(atoms.size(), 0);
    Monomial rest;
    rest.exp_arg = m.exp_arg;
    for (const auto& [a, k] : m.atoms) {
      bool hit = false;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (a == atoms[i]) {
          key[i] = k;
          hit = true;
        }
      }
      if (!hit) rest.atoms.emplace_back(a, k);
    }
    detail::add_term(groups[key], rest, c);
  }
  std::map<std::vector<int>, Expr> out;
  for (auto& [key, p] : groups) {
    if (p.empty()) continue;
    RatFunc g{std::move(p), r.den_monomial, r.factors};
    detail::cancel(g);
    out.emplace(key, to_expr(g));
  }
  return out;
}

}  // namespace qcsym
