#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zero_test.hpp"

namespace qcsym {

struct VerificationEntry {
  int index = 0;
  std::string origin;  // e.g. the jet monomial a determining equation was collected from
  ZeroVerdict verdict = ZeroVerdict::NonZero;
  Expr residual;
  std::optional<double> max_abs;
  std::string note;
};

/// Per-equation verdicts; passes iff every verdict is Zero or ZeroProbabilistic.
struct VerificationReport {
  std::string title;
  std::vector<VerificationEntry> entries;
  std::vector<std::string> warnings;

  bool pass() const {
    for (const auto& e : entries) {
      if (!passes(e.verdict)) return false;
    }
    return true;
  }

  std::optional<double> max_abs() const {
    std::optional<double> m;
    for (const auto& e : entries) {
      if (e.max_abs) m = std::max(m.value_or(0.0), *e.max_abs);
    }
    return m;
  }

  void add(std::string origin, const ZeroCheck& c, std::string note = {}) {
    VerificationEntry e;
    e.index = static_cast<int>(entries.size()) + 1;
    e.origin = std::move(origin);
    e.verdict = c.verdict;
    e.residual = c.residual;
    e.max_abs = c.max_abs;
    e.note = std::move(note);
    if (c.verdict == ZeroVerdict::ZeroProbabilistic)
      warnings.push_back("equation " + std::to_string(e.index) + " (" + e.origin +
                         ") is zero only probabilistically");
    entries.push_back(std::move(e));
  }

  const VerificationEntry* find(const std::string& origin) const {
    for (const auto& e : entries) {
      if (e.origin == origin) return &e;
    }
    return nullptr;
  }
};

}  // namespace qcsym
