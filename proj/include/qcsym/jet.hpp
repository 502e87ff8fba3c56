#pragma once

// Second-order jet space over (y, z; u): total derivatives, prolongation of
// vector fields Q = a d_y + b d_z + c d_u, and elimination of jet variables
// on the manifold cut out by Qu = 0 and its first-order consequences.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "calculus.hpp"
#include "parser.hpp"
#include "ratfunc.hpp"

namespace qcsym {

inline Expr jet(int ny, int nz) { return variable(jet_name(ny, nz)); }

inline int jet_order(const std::string& name) {
  auto o = jet_orders(name);
  return o ? o->first + o->second : -1;
}

/// Jet variables (u itself excluded) occurring in e.
inline std::vector<std::string> jet_variables(const Expr& e) {
  std::vector<std::string> out;
  for (const auto& v : free_variables(e)) {
    if (jet_order(v) > 0) out.push_back(v);
  }
  return out;
}

/// D_y or D_z: chain rule through u and every jet variable present.
inline Expr total_derivative(const Expr& e, char wrt) {
  if (wrt != 'y' && wrt != 'z') throw std::invalid_argument("total derivative is taken in y or z");
  const std::string v(1, wrt);
  const int dy = wrt == 'y', dz = wrt == 'z';
  std::vector<Expr> terms{diff(e, v)};
  for (const auto& name : free_variables(e)) {
    auto o = jet_orders(name);
    if (!o) continue;
    Expr d = diff(e, name);
    if (is_zero_node(d)) continue;
    terms.push_back(d * jet(o->first + dy, o->second + dz));
  }
  return sum(std::move(terms));
}

class ProlongationInconsistency : public std::logic_error {
 public:
  ProlongationInconsistency() : std::logic_error("prolongation inconsistency") {}
};

class EliminationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Q = a(y,z,u) d_y + b(y,z,u) d_z + c(y,z,u) d_u, with its canonical form.
struct ConditionalOperator {
  enum class Form { General, ANonZero, AZero };

  Expr a, b, c;
  Form form = Form::General;

  static ConditionalOperator general(Expr a, Expr b, Expr c) {
    return {std::move(a), std::move(b), std::move(c), Form::General};
  }
  /// Q = d_y + K d_z + L d_u; invariant-surface condition u_y + K u_z = L.
  static ConditionalOperator a_nonzero(Expr K, Expr L) {
    return {integer(1), std::move(K), std::move(L), Form::ANonZero};
  }
  /// Q = d_z + L d_u; invariant-surface condition u_z = L.
  static ConditionalOperator a_zero(Expr L) {
    return {integer(0), integer(1), std::move(L), Form::AZero};
  }

  const Expr& K() const { return b; }
  const Expr& L() const { return c; }

  /// The characteristic c - a u_y - b u_z; Qu = 0 reads characteristic = 0.
  Expr characteristic() const { return c - a * jet(1, 0) - b * jet(0, 1); }
};

struct Prolongation {
  Expr eta, eta_y, eta_z, eta_yy, eta_yz, eta_zz;
};

namespace detail {

inline void assert_no_third_order(const Expr& e) {
  for (const auto& v : jet_variables(e)) {
    if (jet_order(v) >= 3) throw ProlongationInconsistency();
  }
}

}  // namespace detail

/// Second prolongation by the characteristic formula
///   eta^J = D_J W + a u_{J y} + b u_{J z},  W = c - a u_y - b u_z.
/// Third-order jets must cancel in the second-order coefficients.
inline Prolongation prolong(const ConditionalOperator& Q) {
  const Expr W = Q.characteristic();
  auto coeff = [&](int ny, int nz) {
    Expr d = W;
    for (int i = 0; i < ny; ++i) d = total_derivative(d, 'y');
    for (int i = 0; i < nz; ++i) d = total_derivative(d, 'z');
    Expr eta = simplify(d + Q.a * jet(ny + 1, nz) + Q.b * jet(ny, nz + 1));
    detail::assert_no_third_order(eta);
    return eta;
  };
  Prolongation p;
  p.eta = Q.c;
  p.eta_y = coeff(1, 0);
  p.eta_z = coeff(0, 1);
  p.eta_yy = coeff(2, 0);
  p.eta_yz = coeff(1, 1);
  p.eta_zz = coeff(0, 2);
  return p;
}

/// Substitution rules for the jets that Qu = 0 and its first total
/// derivatives determine.
///  a != 0 (u_y + K u_z = L): u_y, u_yy, u_yz in terms of u, u_z, u_zz.
///  a == 0 (u_z = L):         u_z, u_yz, u_zz in terms of u, u_y.
inline Bindings elimination_rules(const ConditionalOperator& Q) {
  Bindings rules;
  if (Q.form == ConditionalOperator::Form::ANonZero) {
    const Expr uy = Q.L() - Q.K() * jet(0, 1);
    const Expr uyz = simplify(total_derivative(uy, 'z'));
    Bindings first;
    first.var(jet_name(1, 0), uy).var(jet_name(1, 1), uyz);
    const Expr uyy = simplify(replace(total_derivative(uy, 'y'), first));
    rules.var(jet_name(1, 0), uy).var(jet_name(1, 1), uyz).var(jet_name(2, 0), uyy);
  } else if (Q.form == ConditionalOperator::Form::AZero) {
    const Expr uz = Q.L();
    Bindings first;
    first.var(jet_name(0, 1), uz);
    const Expr uyz = simplify(replace(total_derivative(uz, 'y'), first));
    const Expr uzz = simplify(replace(total_derivative(uz, 'z'), first));
    rules.var(jet_name(0, 1), uz).var(jet_name(1, 1), uyz).var(jet_name(0, 2), uzz);
  } else {
    throw EliminationError("elimination requires a canonical operator form");
  }
  return rules;
}

/// Restricts e to the manifold of Qu = 0 and its first-order consequences.
inline Expr eliminate(const Expr& e, const ConditionalOperator& Q) {
  for (const auto& v : jet_variables(e)) {
    if (jet_order(v) > 2)
      throw EliminationError("the constraints do not determine " + v);
  }
  return simplify(replace(e, elimination_rules(Q)));
}

}  // namespace qcsym
