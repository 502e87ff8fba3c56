#pragma once

// Partial differentiation and substitution.

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "expr.hpp"
#include "printer.hpp"

namespace qcsym {

/// Partial derivative treating every variable (including jet variables) as
/// independent. Function applications get their multi-index incremented;
/// applications with explicit arguments use the chain rule.
inline Expr diff(const Expr& e, const std::string& v) {
  switch (e.kind()) {
    case Kind::Number:
      return integer(0);
    case Kind::Variable:
      return integer(e->name == v ? 1 : 0);
    case Kind::Function: {
      const auto& deps = e->symbol->deps;
      if (e->children.empty()) {
        for (std::size_t i = 0; i < deps.size(); ++i) {
          if (deps[i] == v) {
            auto idx = e->index;
            ++idx[i];
            return apply(e->symbol, std::move(idx));
          }
        }
        return integer(0);
      }
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < deps.size(); ++i) {
        Expr inner = diff(e->children[i], v);
        if (is_zero_node(inner)) continue;
        auto idx = e->index;
        ++idx[i];
        terms.push_back(apply(e->symbol, std::move(idx), e->children) * inner);
      }
      return sum(std::move(terms));
    }
    case Kind::Exp:
      return e * diff(e->children[0], v);
    case Kind::Log:
      return diff(e->children[0], v) / e->children[0];
    case Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& c : e->children) terms.push_back(diff(c, v));
      return sum(std::move(terms));
    }
    case Kind::Product: {
      const auto& ch = e->children;
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        Expr di = diff(ch[i], v);
        if (is_zero_node(di)) continue;
        std::vector<Expr> fs;
        for (std::size_t j = 0; j < ch.size(); ++j) fs.push_back(j == i ? di : ch[j]);
        terms.push_back(product(std::move(fs)));
      }
      return sum(std::move(terms));
    }
    case Kind::Power: {
      const Expr& b = e->children[0];
      const int n = e->exponent;
      Expr db = diff(b, v);
      if (is_zero_node(db)) return integer(0);
      return product({integer(n), power(b, n - 1), db});
    }
  }
  return integer(0);
}

/// Repeated differentiation, e.g. diff(e, {"y", "z"}) = e_yz.
inline Expr diff(const Expr& e, const std::vector<std::string>& vars) {
  Expr r = e;
  for (const auto& v : vars) r = diff(r, v);
  return r;
}

class SubstitutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Replacement rules for variables and function symbols. A function binding
/// gives the function's value in terms of its dependency variables; derivative
/// applications are replaced by the corresponding derivative of the binding.
struct Bindings {
  std::map<std::string, Expr> variables;
  std::map<std::string, std::pair<FunctionSymbol, Expr>> functions;

  Bindings& var(const std::string& name, Expr value) {
    variables[name] = std::move(value);
    return *this;
  }
  Bindings& fn(const FunctionSymbol& sym, Expr value) {
    functions[sym.name] = {sym, std::move(value)};
    return *this;
  }
  bool empty() const { return variables.empty() && functions.empty(); }
};

namespace detail {

class Replacer {
 public:
  explicit Replacer(const Bindings& b) : b_(b) {}

  Expr run(const Expr& e) {
    auto it = memo_.find(e);
    if (it != memo_.end()) return it->second;
    Expr r = step(e);
    memo_.emplace(e, r);
    return r;
  }

 private:
  Expr step(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        return e;
      case Kind::Variable: {
        auto it = b_.variables.find(e->name);
        return it == b_.variables.end() ? e : it->second;
      }
      case Kind::Function: {
        auto it = b_.functions.find(e->symbol->name);
        std::vector<Expr> args;
        if (e->children.empty()) {
          // implicit arguments are the dependency variables, which may be bound
          bool moved = false;
          for (const auto& dep : e->symbol->deps) {
            args.push_back(run(variable(dep)));
            if (!is_variable(args.back(), dep)) moved = true;
          }
          if (!moved) args.clear();
        } else {
          for (const auto& a : e->children) args.push_back(run(a));
        }
        if (it == b_.functions.end()) return apply(e->symbol, e->index, std::move(args));
        const auto& [sym, value] = it->second;
        if (sym.deps != e->symbol->deps)
          throw SubstitutionError("binding for " + sym.name +
                                  " has a dependency list that disagrees with its declaration");
        Expr d = derivative_of(sym, value, e->index);
        if (args.empty()) return d;
        std::map<std::string, Expr> at;
        for (std::size_t i = 0; i < sym.deps.size(); ++i) at[sym.deps[i]] = args[i];
        Bindings inner;
        inner.variables = std::move(at);
        return Replacer(inner).run(d);
      }
      default: {
        std::vector<Expr> ch;
        for (const auto& c : e->children) ch.push_back(run(c));
        return rebuild(e, std::move(ch));
      }
    }
  }

  Expr derivative_of(const FunctionSymbol& sym, const Expr& value, const std::vector<int>& index) {
    std::string key = sym.name;
    for (int i : index) key += "," + std::to_string(i);
    auto it = derivs_.find(key);
    if (it != derivs_.end()) return it->second;
    Expr d = value;
    for (std::size_t i = 0; i < index.size(); ++i) {
      for (int k = 0; k < index[i]; ++k) d = diff(d, sym.deps[i]);
    }
    derivs_.emplace(key, d);
    return d;
  }

  const Bindings& b_;
  std::unordered_map<Expr, Expr, ExprHash> memo_;
  std::map<std::string, Expr> derivs_;
};

}  // namespace detail

/// Simultaneous replacement without re-canonicalization beyond the
/// constructors' light normal form.
inline Expr replace(const Expr& e, const Bindings& b) {
  if (b.empty()) return e;
  return detail::Replacer(b).run(e);
}

inline Expr replace_variable(const Expr& e, const std::string& name, const Expr& value) {
  Bindings b;
  b.var(name, value);
  return replace(e, b);
}

/// Swaps y and z everywhere: variables, jet variables, and the y/z slots of
/// derivative multi-indices.
inline Expr mirror_yz(const Expr& e) {
  return transform(e, [](const Expr& n) -> Expr {
    if (n.kind() == Kind::Variable) {
      if (n->name == "y") return variable("z");
      if (n->name == "z") return variable("y");
      if (n->name.size() > 2 && n->name.rfind("u_", 0) == 0) {
        int ny = 0, nz = 0;
        for (char c : n->name.substr(2)) {
          if (c == 'y') ++ny;
          if (c == 'z') ++nz;
        }
        if (ny + nz + 2 == static_cast<int>(n->name.size()))
          return variable("u_" + std::string(static_cast<std::size_t>(nz), 'y') +
                          std::string(static_cast<std::size_t>(ny), 'z'));
      }
      return n;
    }
    if (n.kind() == Kind::Function && n->children.empty()) {
      const auto& deps = n->symbol->deps;
      int iy = -1, iz = -1;
      for (std::size_t i = 0; i < deps.size(); ++i) {
        if (deps[i] == "y") iy = static_cast<int>(i);
        if (deps[i] == "z") iz = static_cast<int>(i);
      }
      if (iy < 0 && iz < 0) return n;
      if (iy >= 0 && iz >= 0) {
        auto idx = n->index;
        std::swap(idx[static_cast<std::size_t>(iy)], idx[static_cast<std::size_t>(iz)]);
        return apply(n->symbol, std::move(idx));
      }
      // one-sided dependency: rename through explicit arguments
      std::vector<Expr> args;
      for (const auto& d : deps) {
        args.push_back(variable(d == "y" ? "z" : d == "z" ? "y" : d));
      }
      return apply(n->symbol, n->index, std::move(args));
    }
    return n;
  });
}

}  // namespace qcsym
