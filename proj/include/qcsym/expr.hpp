#pragma once

// Immutable symbolic expression trees.
//
// Every Expr is built through the factory functions below, which perform a
// light canonicalization: sums and products are flattened, numeric parts are
// folded, like terms / equal bases are merged, and children are sorted under
// a fixed total order. Heavier rewriting (common denominators, exp
// contraction, expansion) lives in ratfunc.hpp.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qcsym {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Kind : std::uint8_t { Number, Variable, Function, Exp, Log, Sum, Product, Power };

/// A named function with an ordered dependency list, e.g. K(y,z,u).
/// Dependency names are single letters so that derivative suffixes
/// (K_yu) can be spelled unambiguously.
struct FunctionSymbol {
  std::string name;
  std::vector<std::string> deps;

  friend bool operator==(const FunctionSymbol&, const FunctionSymbol&) = default;
};

class Expr;
struct Node;

class Expr {
 public:
  Expr();  // the integer 0
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& operator*() const { return *node_; }
  const Node* operator->() const { return node_.get(); }
  const Node* get() const { return node_.get(); }

  Kind kind() const;
  std::size_t hash() const;

 private:
  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::Number;
  Rational value;                                // Number
  std::string name;                              // Variable
  std::shared_ptr<const FunctionSymbol> symbol;  // Function
  std::vector<int> index;                        // Function: derivative multi-index
  std::vector<Expr> children;  // Function explicit args | Sum/Product operands | Power base | Exp/Log arg
  int exponent = 0;            // Power
  std::size_t hash = 0;
};

inline Kind Expr::kind() const { return node_->kind; }
inline std::size_t Expr::hash() const { return node_->hash; }

namespace detail {

inline std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::size_t hash_rational(const Rational& r) {
  auto n = boost::multiprecision::numerator(r);
  auto d = boost::multiprecision::denominator(r);
  std::size_t h = std::hash<std::string>{}(n.str());
  return mix(h, std::hash<std::string>{}(d.str()));
}

inline Expr finish(Node&& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL;
  switch (n.kind) {
    case Kind::Number:
      h = mix(h, hash_rational(n.value));
      break;
    case Kind::Variable:
      h = mix(h, std::hash<std::string>{}(n.name));
      break;
    case Kind::Function:
      h = mix(h, std::hash<std::string>{}(n.symbol->name));
      for (const auto& d : n.symbol->deps) h = mix(h, std::hash<std::string>{}(d));
      for (int i : n.index) h = mix(h, static_cast<std::size_t>(i) + 17);
      break;
    case Kind::Power:
      h = mix(h, static_cast<std::size_t>(static_cast<long long>(n.exponent) + 1000003));
      break;
    default:
      break;
  }
  for (const auto& c : n.children) h = mix(h, c.hash());
  n.hash = h;
  return Expr(std::make_shared<const Node>(std::move(n)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Total order

int compare(const Expr& a, const Expr& b);

namespace detail {

inline int kind_rank(Kind k) {
  switch (k) {
    case Kind::Number: return 0;
    case Kind::Variable: return 1;
    case Kind::Function: return 2;
    case Kind::Exp: return 3;
    case Kind::Log: return 4;
    case Kind::Sum: return 5;
    case Kind::Product: return 6;
    case Kind::Power: return 7;
  }
  return 8;
}

template <class T>
int cmp3(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

inline int compare_list(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i], b[i])) return c;
  }
  return cmp3(a.size(), b.size());
}

// Non-power nodes only.
inline int compare_base(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return 0;
  if (int c = cmp3(kind_rank(a.kind()), kind_rank(b.kind()))) return c;
  const Node& x = *a;
  const Node& y = *b;
  switch (x.kind) {
    case Kind::Number:
      return cmp3(x.value, y.value);
    case Kind::Variable:
      return x.name.compare(y.name) < 0 ? -1 : (x.name == y.name ? 0 : 1);
    case Kind::Function: {
      if (x.symbol->name != y.symbol->name) return x.symbol->name < y.symbol->name ? -1 : 1;
      if (int c = cmp3(x.symbol->deps, y.symbol->deps)) return c;
      // lower derivative orders first
      int ox = 0, oy = 0;
      for (int i : x.index) ox += i;
      for (int i : y.index) oy += i;
      if (int c = cmp3(ox, oy)) return c;
      if (int c = cmp3(y.index, x.index)) return c;
      return compare_list(x.children, y.children);
    }
    default:
      return compare_list(x.children, y.children);
  }
}

}  // namespace detail

inline int compare(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return 0;
  const Expr& ba = a.kind() == Kind::Power ? a->children[0] : a;
  const Expr& bb = b.kind() == Kind::Power ? b->children[0] : b;
  if (int c = detail::compare_base(ba, bb)) return c;
  const int na = a.kind() == Kind::Power ? a->exponent : 1;
  const int nb = b.kind() == Kind::Power ? b->exponent : 1;
  return detail::cmp3(na, nb);
}

inline bool operator==(const Expr& a, const Expr& b) {
  return a.get() == b.get() || (a.hash() == b.hash() && compare(a, b) == 0);
}
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// ---------------------------------------------------------------------------
// Factories

inline Expr number(const Rational& v) {
  Node n;
  n.kind = Kind::Number;
  n.value = v;
  return detail::finish(std::move(n));
}

inline Expr integer(long long v) { return number(Rational(v)); }

inline Expr::Expr() : Expr(integer(0)) {}

inline Expr variable(const std::string& name) {
  Node n;
  n.kind = Kind::Variable;
  n.name = name;
  return detail::finish(std::move(n));
}

inline bool is_number(const Expr& e) { return e.kind() == Kind::Number; }
inline bool is_number(const Expr& e, long long v) {
  return e.kind() == Kind::Number && e->value == v;
}
inline bool is_zero_node(const Expr& e) { return is_number(e, 0); }
inline bool is_variable(const Expr& e, const std::string& name) {
  return e.kind() == Kind::Variable && e->name == name;
}

/// Function application. Empty `args` means the symbol is applied to its own
/// dependency variables; explicit args equal to the dependencies are
/// normalized to the empty form.
inline Expr apply(std::shared_ptr<const FunctionSymbol> sym, std::vector<int> index = {},
                  std::vector<Expr> args = {}) {
  if (index.empty()) index.assign(sym->deps.size(), 0);
  if (index.size() != sym->deps.size())
    throw std::invalid_argument("derivative index length does not match dependencies of " +
                                sym->name);
  for (int i : index) {
    if (i < 0) throw std::invalid_argument("negative derivative index for " + sym->name);
  }
  if (!args.empty()) {
    if (args.size() != sym->deps.size())
      throw std::invalid_argument("function " + sym->name + " expects " +
                                  std::to_string(sym->deps.size()) + " arguments, got " +
                                  std::to_string(args.size()));
    bool trivial = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!is_variable(args[i], sym->deps[i])) trivial = false;
    }
    if (trivial) args.clear();
  }
  Node n;
  n.kind = Kind::Function;
  n.symbol = std::move(sym);
  n.index = std::move(index);
  n.children = std::move(args);
  return detail::finish(std::move(n));
}

inline Expr apply(const FunctionSymbol& sym, std::vector<int> index = {},
                  std::vector<Expr> args = {}) {
  return apply(std::make_shared<const FunctionSymbol>(sym), std::move(index), std::move(args));
}

Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(const Expr& base, int n);
Expr exp(const Expr& arg);
Expr log(const Expr& arg);

namespace detail {

// Splits t into (numeric coefficient, remaining term).
inline std::pair<Rational, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == Kind::Number) return {t->value, integer(1)};
  if (t.kind() == Kind::Product && is_number(t->children.front())) {
    const auto& ch = t->children;
    if (ch.size() == 2) return {ch[0]->value, ch[1]};
    Node n;
    n.kind = Kind::Product;
    n.children.assign(ch.begin() + 1, ch.end());
    return {ch[0]->value, finish(std::move(n))};
  }
  return {Rational(1), t};
}

inline std::pair<Expr, int> split_power(const Expr& f) {
  if (f.kind() == Kind::Power) return {f->children[0], f->exponent};
  return {f, 1};
}

inline Rational rational_pow(const Rational& b, int n) {
  if (n < 0) {
    if (b == 0) throw DivisionByZero("division by zero");
    return rational_pow(Rational(1) / b, -n);
  }
  Rational r(1);
  Rational base = b;
  while (n) {
    if (n & 1) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

}  // namespace detail

inline Expr sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t.kind() == Kind::Sum) {
      flat.insert(flat.end(), t->children.begin(), t->children.end());
    } else {
      flat.push_back(std::move(t));
    }
  }
  Rational constant(0);
  std::map<Expr, Rational, ExprLess> coeffs;
  for (const auto& t : flat) {
    auto [c, rest] = detail::split_coefficient(t);
    if (is_number(rest, 1)) {
      constant += c;
    } else {
      coeffs[rest] += c;
    }
  }
  std::vector<Expr> out;
  for (const auto& [rest, c] : coeffs) {
    if (c == 0) continue;
    out.push_back(c == 1 ? rest : product({number(c), rest}));
  }
  if (constant != 0) out.push_back(number(constant));
  if (out.empty()) return integer(0);
  if (out.size() == 1) return out.front();
  Node n;
  n.kind = Kind::Sum;
  n.children = std::move(out);
  return detail::finish(std::move(n));
}

inline Expr product(std::vector<Expr> factors) {
  Rational coeff(1);
  std::map<Expr, int, ExprLess> powers;
  std::vector<Expr> work = std::move(factors);
  while (!work.empty()) {
    std::vector<Expr> next;
    for (auto& f : work) {
      if (f.kind() == Kind::Product) {
        next.insert(next.end(), f->children.begin(), f->children.end());
      } else if (f.kind() == Kind::Number) {
        coeff *= f->value;
      } else {
        auto [b, k] = detail::split_power(f);
        powers[b] += k;
      }
    }
    work = std::move(next);
  }
  if (coeff == 0) return integer(0);

  std::vector<Expr> out;
  bool refold = false;
  for (const auto& [b, k] : powers) {
    if (k == 0) continue;
    Expr p = power(b, k);
    if (p.kind() == Kind::Number || p.kind() == Kind::Product) refold = true;
    out.push_back(std::move(p));
  }
  if (refold) {
    out.push_back(number(coeff));
    return product(std::move(out));
  }
  std::sort(out.begin(), out.end(), ExprLess{});
  if (out.empty()) return number(coeff);
  if (coeff == 1 && out.size() == 1) return out.front();
  if (coeff != 1) out.insert(out.begin(), number(coeff));
  Node n;
  n.kind = Kind::Product;
  n.children = std::move(out);
  return detail::finish(std::move(n));
}

inline Expr power(const Expr& base, int n) {
  if (n == 0) return integer(1);
  if (n == 1) return base;
  switch (base.kind()) {
    case Kind::Number:
      return number(detail::rational_pow(base->value, n));
    case Kind::Power:
      return power(base->children[0], base->exponent * n);
    case Kind::Product: {
      std::vector<Expr> fs;
      for (const auto& c : base->children) fs.push_back(power(c, n));
      return product(std::move(fs));
    }
    case Kind::Exp:
      return exp(product({integer(n), base->children[0]}));
    default:
      break;
  }
  Node node;
  node.kind = Kind::Power;
  node.children = {base};
  node.exponent = n;
  return detail::finish(std::move(node));
}

inline Expr exp(const Expr& arg) {
  if (is_zero_node(arg)) return integer(1);
  if (arg.kind() == Kind::Log) return arg->children[0];
  Node n;
  n.kind = Kind::Exp;
  n.children = {arg};
  return detail::finish(std::move(n));
}

inline Expr log(const Expr& arg) {
  if (is_number(arg, 1)) return integer(0);
  if (arg.kind() == Kind::Exp) return arg->children[0];
  Node n;
  n.kind = Kind::Log;
  n.children = {arg};
  return detail::finish(std::move(n));
}

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
inline Expr operator-(const Expr& a) { return product({integer(-1), a}); }
inline Expr operator-(const Expr& a, const Expr& b) { return sum({a, -b}); }
inline Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) {
  if (is_zero_node(b)) throw DivisionByZero("division by zero");
  return product({a, power(b, -1)});
}
inline Expr operator+(const Expr& a, long long b) { return a + integer(b); }
inline Expr operator*(long long a, const Expr& b) { return integer(a) * b; }

// ---------------------------------------------------------------------------
// Generic traversal helpers

/// Rebuilds a node of the same kind from new children.
inline Expr rebuild(const Expr& e, std::vector<Expr> children) {
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Variable:
      return e;
    case Kind::Function:
      return apply(e->symbol, e->index, std::move(children));
    case Kind::Exp:
      return exp(children.at(0));
    case Kind::Log:
      return log(children.at(0));
    case Kind::Sum:
      return sum(std::move(children));
    case Kind::Product:
      return product(std::move(children));
    case Kind::Power:
      return power(children.at(0), e->exponent);
  }
  return e;
}

/// Bottom-up map; `fn` sees nodes whose children were already mapped.
template <class Fn>
Expr transform(const Expr& e, Fn&& fn) {
  if (e->children.empty()) return fn(e);
  std::vector<Expr> ch;
  ch.reserve(e->children.size());
  bool changed = false;
  for (const auto& c : e->children) {
    ch.push_back(transform(c, fn));
    if (ch.back().get() != c.get()) changed = true;
  }
  return fn(changed ? rebuild(e, std::move(ch)) : e);
}

template <class Fn>
void visit(const Expr& e, Fn&& fn) {
  fn(e);
  for (const auto& c : e->children) visit(c, fn);
}

/// Free variable names, including the implicit dependency variables of
/// function applications without explicit arguments.
inline std::vector<std::string> free_variables(const Expr& e) {
  std::vector<std::string> out;
  visit(e, [&](const Expr& n) {
    if (n.kind() == Kind::Variable) out.push_back(n->name);
    if (n.kind() == Kind::Function && n->children.empty()) {
      for (const auto& d : n->symbol->deps) out.push_back(d);
    }
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool depends_on(const Expr& e, const std::string& var) {
  const auto vs = free_variables(e);
  return std::binary_search(vs.begin(), vs.end(), var);
}

/// Function symbols appearing anywhere in e, by name.
inline std::vector<std::shared_ptr<const FunctionSymbol>> function_symbols(const Expr& e) {
  std::vector<std::shared_ptr<const FunctionSymbol>> out;
  visit(e, [&](const Expr& n) {
    if (n.kind() != Kind::Function) return;
    for (const auto& s : out) {
      if (*s == *n->symbol) return;
    }
    out.push_back(n->symbol);
  });
  return out;
}

inline bool has_functions(const Expr& e) { return !function_symbols(e).empty(); }

}  // namespace qcsym
