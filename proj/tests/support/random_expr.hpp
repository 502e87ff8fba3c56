#pragma once

// Random expressions over y, z, u that are finite on [1,2]^3: divisors
// and log arguments are drawn from a positive subgrammar.

#include <random>
#include <string>

#include "qcsym/qcsym.hpp"

namespace qcsym::testing {

class RandomExpr {
 public:
  explicit RandomExpr(std::uint64_t seed) : rng_(seed) {}

  Expr any(int depth) {
    if (depth <= 0) return leaf();
    switch (1 + pick(6)) {
      case 1: return any(depth - 1) + any(depth - 1);
      case 2: return any(depth - 1) - any(depth - 1);
      case 3: return any(depth - 1) * any(depth - 1);
      case 4: return any(depth - 1) / positive(depth - 1);
      case 5: return power(any(depth - 1), 2 + pick(2));
      default: return positive(depth);
    }
  }

  Expr positive(int depth) {
    if (depth <= 0) return positive_leaf();
    switch (1 + pick(5)) {
      case 1: return positive(depth - 1) + positive(depth - 1);
      case 2: return positive(depth - 1) * positive(depth - 1);
      case 3: return qcsym::exp(small(depth - 1));
      case 4: return positive(depth - 1) / positive(depth - 1);
      default: return power(positive(depth - 1), 1 + pick(2));
    }
  }

  std::mt19937_64& rng() { return rng_; }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Expr var() { return variable(std::string(1, "yzu"[pick(3)])); }

  Expr leaf() {
    switch (pick(4)) {
      case 0: return integer(pick(7) - 3);
      case 1: return number(Rational(pick(5) + 1, pick(3) + 2));
      default: return var();
    }
  }

  Expr positive_leaf() {
    switch (pick(5)) {
      case 0: return integer(pick(3) + 1);
      case 1: return qcsym::log(var() + integer(1));
      default: return var();
    }
  }

  // exp arguments stay moderate on the box
  Expr small(int depth) {
    if (depth <= 0 || pick(2) == 0) return leaf();
    return pick(2) ? leaf() - leaf() : leaf() * leaf() / positive_leaf();
  }

  std::mt19937_64 rng_;
};

}  // namespace qcsym::testing
