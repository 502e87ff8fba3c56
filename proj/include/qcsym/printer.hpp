#pragma once

// DSL printer. Output reparses (under the same declarations) to a
// structurally equal tree.

#include <sstream>
#include <string>
#include <vector>

#include "expr.hpp"

namespace qcsym {

std::string to_string(const Expr& e);

namespace detail {

inline std::string rational_string(const Rational& r) {
  auto n = boost::multiprecision::numerator(r);
  auto d = boost::multiprecision::denominator(r);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

inline std::string suffix_of(const Node& n) {
  std::string s;
  for (std::size_t i = 0; i < n.index.size(); ++i) {
    for (int k = 0; k < n.index[i]; ++k) s += n.symbol->deps[i];
  }
  return s;
}

// Atom-like rendering: safe as an operand of '*' or '^'.
inline std::string print_operand(const Expr& e) {
  switch (e.kind()) {
    case Kind::Sum:
    case Kind::Product:
      return "(" + to_string(e) + ")";
    case Kind::Number:
      if (e->value < 0 || boost::multiprecision::denominator(e->value) != 1)
        return "(" + to_string(e) + ")";
      return to_string(e);
    case Kind::Power:
      return "(" + to_string(e) + ")";
    default:
      return to_string(e);
  }
}

inline std::string print_factor(const Expr& base, int k) {
  std::string b = print_operand(base);
  return k == 1 ? b : b + "^" + std::to_string(k);
}

// Prints a product-like term with nonnegative coefficient magnitude.
inline std::string print_term(const Rational& coeff, const std::vector<Expr>& factors) {
  auto cn = boost::multiprecision::numerator(coeff);
  auto cd = boost::multiprecision::denominator(coeff);
  std::vector<std::string> num, den;
  for (const auto& f : factors) {
    auto [b, k] = split_power(f);
    if (k > 0) {
      num.push_back(print_factor(b, k));
    } else {
      den.push_back(print_factor(b, -k));
    }
  }
  if (cn != 1 || num.empty()) num.insert(num.begin(), cn.str());
  if (cd != 1) den.insert(den.begin(), cd.str());
  std::string out;
  for (std::size_t i = 0; i < num.size(); ++i) out += (i ? "*" : "") + num[i];
  if (!den.empty()) {
    out += "/";
    if (den.size() == 1) {
      out += den[0];
    } else {
      out += "(";
      for (std::size_t i = 0; i < den.size(); ++i) out += (i ? "*" : "") + den[i];
      out += ")";
    }
  }
  return out;
}

// Returns (negative?, magnitude text) for a summand.
inline std::pair<bool, std::string> print_summand(const Expr& t) {
  auto [c, rest] = split_coefficient(t);
  const bool neg = c < 0;
  const Rational mag = neg ? Rational(-c) : c;
  if (is_number(rest, 1)) return {neg, rational_string(mag)};
  std::vector<Expr> fs;
  if (rest.kind() == Kind::Product) {
    fs = rest->children;
  } else {
    fs = {rest};
  }
  return {neg, print_term(mag, fs)};
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  switch (e.kind()) {
    case Kind::Number:
      return detail::rational_string(e->value);
    case Kind::Variable:
      return e->name;
    case Kind::Function: {
      std::string s = e->symbol->name;
      const std::string suf = detail::suffix_of(*e);
      if (!suf.empty()) s += "_" + suf;
      if (!e->children.empty()) {
        s += "(";
        for (std::size_t i = 0; i < e->children.size(); ++i)
          s += (i ? ", " : "") + to_string(e->children[i]);
        s += ")";
      }
      return s;
    }
    case Kind::Exp:
      return "exp(" + to_string(e->children[0]) + ")";
    case Kind::Log:
      return "log(" + to_string(e->children[0]) + ")";
    case Kind::Sum: {
      std::string out;
      bool first = true;
      for (const auto& t : e->children) {
        auto [neg, text] = detail::print_summand(t);
        if (first) {
          out += neg ? "-" + text : text;
        } else {
          out += neg ? " - " + text : " + " + text;
        }
        first = false;
      }
      return out;
    }
    case Kind::Product:
    case Kind::Power: {
      auto [neg, text] = detail::print_summand(e);
      return neg ? "-" + text : text;
    }
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace qcsym
