#pragma once

// Structured report documents and their text rendering.

#include <cmath>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "detsys.hpp"
#include "numeric.hpp"
#include "printer.hpp"
#include "verification.hpp"

namespace qcsym {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "qcsym.report/1";

inline Json to_json(const Expr& e) { return to_string(e); }

inline Json to_json(const VerificationReport& r, double tol) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json j;
    j["index"] = e.index;
    j["origin"] = e.origin;
    j["verdict"] = to_string(e.verdict);
    j["residual"] = to_string(e.residual);
    j["max_abs"] = e.max_abs ? Json(*e.max_abs) : Json(nullptr);
    if (e.max_abs) j["tolerance"] = tol;
    if (!e.note.empty()) j["note"] = e.note;
    entries.push_back(std::move(j));
  }
  Json j;
  j["title"] = r.title;
  j["pass"] = r.pass();
  j["equations"] = std::move(entries);
  return j;
}

inline Json to_json(const ResidualStats& s, double h, double tol) {
  Json j;
  j["h"] = h;
  j["nodes"] = s.nodes;
  j["max_abs"] = s.max_abs;
  j["mean"] = s.mean;
  j["tolerance"] = tol;
  if (s.slope) j["slope"] = *s.slope;
  return j;
}

inline Json to_json(const Box& b) { return Json::array({b.y0, b.y1, b.z0, b.z1}); }

/// One document per invocation; exit code 0 iff every verdict passes.
struct ReportDocument {
  Json doc;
  int exit_code = 0;

  bool pass() const { return exit_code == 0; }
};

inline Json report_header(const std::string& command, std::uint64_t seed, double tol) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["convention"] = kLightconeConvention;
  j["seed"] = seed;
  j["tolerance"] = tol;
  return j;
}

inline void finish(ReportDocument& r, bool pass, const std::string& summary,
                   const std::vector<std::string>& warnings = {}) {
  r.doc["verdict"] = {{"pass", pass}, {"summary", summary}};
  Json w = Json::array();
  for (const auto& s : warnings) w.push_back(s);
  r.doc["warnings"] = std::move(w);
  r.exit_code = pass ? 0 : 1;
}

namespace detail {

inline std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream s;
    s.precision(6);
    s << v.get<double>();
    return s.str();
  }
  return v.dump();
}

inline void render(std::ostream& out, const Json& v, int indent) {
  const std::string pad(indent, ' ');
  if (v.is_object()) {
    for (const auto& [k, x] : v.items()) {
      if (x.is_structured() && !x.empty()) {
        out << pad << k << ":\n";
        render(out, x, indent + 2);
      } else {
        out << pad << k << ": " << (x.is_structured() ? "-" : scalar_text(x)) << '\n';
      }
    }
  } else if (v.is_array()) {
    const bool flat = std::none_of(v.begin(), v.end(), [](const Json& x) { return x.is_structured(); });
    if (flat) {
      out << pad;
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << scalar_text(v[i]);
      out << '\n';
      return;
    }
    for (const auto& x : v) {
      out << pad << "-\n";
      render(out, x, indent + 2);
    }
  } else {
    out << pad << scalar_text(v) << '\n';
  }
}

}  // namespace detail

/// Human-readable rendering of a report document.
inline std::string render_text(const Json& doc) {
  std::ostringstream out;
  if (doc.contains("command")) out << "== " << doc["command"].get<std::string>() << " ==\n";
  if (doc.contains("convention")) out << "convention: " << doc["convention"].get<std::string>() << '\n';
  if (doc.contains("seed")) out << "seed: " << doc["seed"].dump() << ", tolerance: " << detail::scalar_text(doc["tolerance"]) << '\n';
  if (doc.contains("result")) detail::render(out, doc["result"], 0);
  if (doc.contains("results")) {
    for (const auto& r : doc["results"]) out << '\n' << render_text(r);
  }
  if (doc.contains("error")) out << "error: " << doc["error"].get<std::string>() << '\n';
  if (doc.contains("warnings")) {
    for (const auto& w : doc["warnings"]) out << "warning: " << w.get<std::string>() << '\n';
  }
  if (doc.contains("verdict")) {
    out << "verdict: " << (doc["verdict"]["pass"].get<bool>() ? "PASS" : "FAIL") << " ("
        << doc["verdict"]["summary"].get<std::string>() << ")\n";
  }
  return out.str();
}

}  // namespace qcsym
