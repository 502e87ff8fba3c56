#pragma once

// Floating-point evaluation of expressions.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "expr.hpp"

namespace qcsym {

class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnboundSymbol : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point = std::map<std::string, double>;

namespace detail {

inline constexpr double kPoleThreshold = 1e-300;

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw PoleError(std::string("non-finite value in ") + what);
  return v;
}

inline double ipow(double b, int n) {
  if (n < 0) {
    if (std::abs(b) < kPoleThreshold) throw PoleError("division by a vanishing value");
    return 1.0 / ipow(b, -n);
  }
  double r = 1.0;
  while (n) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

class Evaluator {
 public:
  explicit Evaluator(const Bindings& fns) : fns_(fns) {}

  double eval(const Expr& e, const Point& at) {
    switch (e.kind()) {
      case Kind::Number:
        return static_cast<double>(e->value);
      case Kind::Variable: {
        auto it = at.find(e->name);
        if (it == at.end()) throw UnboundSymbol("unbound variable " + e->name);
        return it->second;
      }
      case Kind::Function: {
        auto it = fns_.functions.find(e->symbol->name);
        if (it == fns_.functions.end())
          throw UnboundSymbol("no numeric binding for function " + e->symbol->name);
        const auto& [sym, value] = it->second;
        if (sym.deps != e->symbol->deps)
          throw SubstitutionError("binding for " + sym.name + " disagrees with declaration");
        const Expr& d = derivative(sym, value, e->index);
        if (e->children.empty()) return eval(d, at);
        Point inner = at;
        for (std::size_t i = 0; i < sym.deps.size(); ++i)
          inner[sym.deps[i]] = eval(e->children[i], at);
        return eval(d, inner);
      }
      case Kind::Exp:
        return checked(std::exp(eval(e->children[0], at)), "exp");
      case Kind::Log: {
        const double a = eval(e->children[0], at);
        if (!(a > 0)) throw PoleError("log of a nonpositive value");
        return std::log(a);
      }
      case Kind::Sum: {
        double s = 0;
        for (const auto& c : e->children) s += eval(c, at);
        return s;
      }
      case Kind::Product: {
        double p = 1;
        for (const auto& c : e->children) p *= eval(c, at);
        return checked(p, "product");
      }
      case Kind::Power:
        return checked(ipow(eval(e->children[0], at), e->exponent), "power");
    }
    return 0;
  }

 private:
  const Expr& derivative(const FunctionSymbol& sym, const Expr& value, const std::vector<int>& idx) {
    std::string key = sym.name;
    for (int i : idx) key += "," + std::to_string(i);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Expr d = value;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (int k = 0; k < idx[i]; ++k) d = diff(d, sym.deps[i]);
    }
    return cache_.emplace(key, d).first->second;
  }

  const Bindings& fns_;
  std::map<std::string, Expr> cache_;
};

}  // namespace detail

/// Evaluates e at `point`, with function symbols resolved through `fns`.
inline double eval_at(const Expr& e, const Point& point, const Bindings& fns = {}) {
  detail::Evaluator ev(fns);
  return detail::checked(ev.eval(e, point), "result");
}

/// Flattened evaluator over a fixed variable order; for hot loops.
/// Function symbols must already be substituted away.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  CompiledExpr(const Expr& e, std::vector<std::string> vars) : vars_(std::move(vars)) {
    emit(e);
  }

  const std::vector<std::string>& variables() const { return vars_; }

  double operator()(const double* x) const {
    thread_local std::vector<double> st;
    st.clear();
    for (const auto& op : code_) {
      switch (op.code) {
        case Op::Const:
          st.push_back(op.value);
          break;
        case Op::Var:
          st.push_back(x[op.arg]);
          break;
        case Op::Add: {
          double s = 0;
          for (int i = 0; i < op.arg; ++i) {
            s += st.back();
            st.pop_back();
          }
          st.push_back(s);
          break;
        }
        case Op::Mul: {
          double p = 1;
          for (int i = 0; i < op.arg; ++i) {
            p *= st.back();
            st.pop_back();
          }
          st.push_back(p);
          break;
        }
        case Op::Pow:
          st.back() = detail::ipow(st.back(), op.arg);
          break;
        case Op::Exp:
          st.back() = std::exp(st.back());
          break;
        case Op::Log:
          if (!(st.back() > 0)) throw PoleError("log of a nonpositive value");
          st.back() = std::log(st.back());
          break;
      }
    }
    return detail::checked(st.back(), "compiled expression");
  }

  double operator()(std::initializer_list<double> x) const { return (*this)(x.begin()); }

 private:
  struct Op {
    enum Code { Const, Var, Add, Mul, Pow, Exp, Log } code;
    int arg = 0;
    double value = 0;
  };

  void emit(const Expr& e) {
    switch (e.kind()) {
      case Kind::Number:
        code_.push_back({Op::Const, 0, static_cast<double>(e->value)});
        return;
      case Kind::Variable:
        for (std::size_t i = 0; i < vars_.size(); ++i) {
          if (vars_[i] == e->name) {
            code_.push_back({Op::Var, static_cast<int>(i), 0});
            return;
          }
        }
        throw UnboundSymbol("unbound variable " + e->name);
      case Kind::Function:
        throw UnboundSymbol("cannot compile unbound function " + e->symbol->name);
      case Kind::Exp:
      case Kind::Log:
        emit(e->children[0]);
        code_.push_back({e.kind() == Kind::Exp ? Op::Exp : Op::Log, 0, 0});
        return;
      case Kind::Sum:
      case Kind::Product:
        for (const auto& c : e->children) emit(c);
        code_.push_back(
            {e.kind() == Kind::Sum ? Op::Add : Op::Mul, static_cast<int>(e->children.size()), 0});
        return;
      case Kind::Power:
        emit(e->children[0]);
        code_.push_back({Op::Pow, e->exponent, 0});
        return;
    }
  }

  std::vector<std::string> vars_;
  std::vector<Op> code_;
};

}  // namespace qcsym
