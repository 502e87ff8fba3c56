#pragma once

// Command implementations behind the qcsym front end. Each takes parsed
// arguments and returns a report document; errors in the input are thrown.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detsys.hpp"
#include "numeric.hpp"
#include "parser.hpp"
#include "reduction.hpp"
#include "report.hpp"

namespace qcsym {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-9;

  SamplingOptions sampling() const {
    SamplingOptions o;
    o.seed = seed;
    o.tol = tol;
    return o;
  }
};

/// Declarations and `let` definitions shared by the commands of a session.
class Workspace {
 public:
  Workspace() : ctx_(Context::standard()) {}

  Context& context() { return ctx_; }

  void declare(const std::string& text) { ctx_.declare(text); }

  void define(const std::string& name, const std::string& text) {
    if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0])))
      throw UsageError("bad definition name '" + name + "'");
    static const std::vector<std::string> reserved{"y", "z", "u", "t", "x", "w", "phi", "exp", "log"};
    if (std::find(reserved.begin(), reserved.end(), name) != reserved.end() || jet_orders(name) ||
        ctx_.find(name))
      throw UsageError("cannot redefine '" + name + "'");
    lets_.var(name, expr(text));
  }

  /// Parses text and expands earlier definitions.
  Expr expr(const std::string& text) const {
    Expr e = parse(text, ctx_);
    return lets_.variables.empty() ? e : replace(e, lets_);
  }

 private:
  Context ctx_;
  Bindings lets_;
};

inline OperatorForm parse_form(const std::string& s) {
  if (s == "a-ne-0") return OperatorForm::ANonZero;
  if (s == "a-eq-0") return OperatorForm::AZero;
  throw UsageError("unknown form '" + s + "' (expected a-ne-0 or a-eq-0)");
}

// ---------------------------------------------------------------------------

inline ReportDocument cmd_detsys_generate(OperatorForm form, bool ku_zero, const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header(std::string("detsys generate --form ") + to_string(form) +
                            (ku_zero ? " --ku-zero" : ""),
                        g.seed, g.tol);
  if (ku_zero && form != OperatorForm::ANonZero)
    throw UsageError("--ku-zero applies to the a-ne-0 form");
  const auto& sys = cached_system(form, ku_zero);
  const auto cmp = compare_with_transcription(sys);
  Json eqs = Json::array();
  for (std::size_t i = 0; i < cmp.members.size(); ++i) {
    Json j;
    j["index"] = i + 1;
    if (i < sys.members.size()) {
      j["origin"] = sys.members[i].origin;
      j["k_power"] = sys.members[i].k_power;
    }
    j["generated"] = to_json(cmp.members[i].generated);
    j["reference"] = to_json(cmp.members[i].transcribed);
    j["difference"] = to_json(cmp.members[i].difference);
    j["match"] = cmp.members[i].match;
    eqs.push_back(std::move(j));
  }
  r.doc["result"] = {{"form", to_string(form)},
                     {"ku_zero", ku_zero},
                     {"count", sys.members.size()},
                     {"equations", std::move(eqs)},
                     {"match", cmp.pass()}};
  finish(r, cmp.pass(),
         std::to_string(sys.members.size()) + " equations, " +
             (cmp.pass() ? "match the reference system" : "differ from the reference system"));
  return r;
}

inline ReportDocument cmd_verify(const Workspace& ws, const std::string& f, const std::string& K,
                                 const std::string& L, OperatorForm form, const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header("verify --f \"" + f + "\" --K \"" + K + "\" --L \"" + L + "\" --form " +
                            to_string(form),
                        g.seed, g.tol);
  const Expr fe = ws.expr(f), Ke = ws.expr(K), Le = ws.expr(L);
  VerificationReport rep;
  try {
    rep = verify_conditional_operator(fe, Ke, Le, form, g.sampling());
  } catch (const DivisionByZero& e) {
    throw UsageError(e.what());
  }
  r.doc["result"] = {{"f", to_json(fe)},
                     {"K", form == OperatorForm::ANonZero ? to_json(Ke) : Json(nullptr)},
                     {"L", to_json(Le)},
                     {"report", to_json(rep, g.tol)}};
  int failing = 0;
  for (const auto& e : rep.entries) failing += !passes(e.verdict);
  finish(r, rep.pass(),
         rep.pass() ? "all " + std::to_string(rep.entries.size()) + " determining equations vanish"
                    : std::to_string(failing) + " determining equation(s) do not vanish",
         rep.warnings);
  return r;
}

inline ReportDocument cmd_classify(const Workspace& ws, const std::string& K, const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header("classify --K \"" + K + "\"", g.seed, g.tol);
  const Expr Ke = ws.expr(K);
  const auto c = classify_case(Ke, g.sampling());
  r.doc["result"] = {{"K", to_json(Ke)},
                     {"K_u", to_json(c.K_u)},
                     {"case", to_string(c.tag)},
                     {"reason", c.reason},
                     {"exponential_structure", c.exponential_structure}};
  finish(r, c.tag != CaseTag::Undecided, std::string(to_string(c.tag)) + ": " + c.reason);
  return r;
}

inline ReportDocument cmd_case1(const Workspace& ws, const std::string& T,
                                const std::optional<std::string>& f, const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header("case1 --T \"" + T + "\"" + (f ? " --f \"" + *f + "\"" : ""), g.seed, g.tol);
  const Expr Te = ws.expr(T);
  Case1Operator op;
  try {
    op = case1_from_T(Te, g.sampling());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Expr cond = case1_f_condition(op.K, op.L);
  Json res = {{"T", to_json(Te)},
              {"K", to_json(op.K)},
              {"s", to_json(op.s)},
              {"L", to_json(op.L)},
              {"structural", to_json(op.structural, g.tol)},
              {"f_condition", to_string(cond) + " = 0"}};
  bool pass = op.structural.pass();
  std::vector<std::string> warnings = op.structural.warnings;
  std::string summary = "operator constructed";
  if (f) {
    const Expr fe = ws.expr(*f);
    Bindings b;
    b.fn(symbol_f(), fe);
    const auto c = check_zero(cond, b, g.sampling());
    const auto full = verify_conditional_operator(fe, op.K, op.L, OperatorForm::ANonZero, g.sampling());
    res["f"] = to_json(fe);
    res["f_condition_check"] = {{"verdict", to_string(c.verdict)}, {"residual", to_json(c.residual)}};
    res["system"] = to_json(full, g.tol);
    pass = pass && passes(c.verdict) && full.pass();
    warnings.insert(warnings.end(), full.warnings.begin(), full.warnings.end());
    summary = pass ? "f satisfies the Case-1 condition" : "f violates the Case-1 condition";
  }
  r.doc["result"] = std::move(res);
  finish(r, pass, summary, warnings);
  return r;
}

inline ReportDocument cmd_case2(const Workspace& ws, const std::string& L, const std::string& f,
                                const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header("case2 --L \"" + L + "\" --f \"" + f + "\"", g.seed, g.tol);
  const Expr Le = ws.expr(L), fe = ws.expr(f);
  Json res = {{"L", to_json(Le)}, {"f", to_json(fe)}};
  std::vector<std::string> warnings;
  bool pass = true;
  try {
    const auto sys = case2_first_order_system(Le, fe, g.sampling());
    res["first_order_system"] = {{"u_y", to_json(sys.u_y)},
                                 {"u_z", to_json(sys.u_z)},
                                 {"compatibility", to_json(sys.compatibility)},
                                 {"compatibility_verdict", to_string(sys.compatibility_verdict)}};
    res["system"] = to_json(sys.determining, g.tol);
    warnings = sys.determining.warnings;
    pass = passes(sys.compatibility_verdict) && sys.determining.pass();
  } catch (const std::invalid_argument& e) {
    const auto rep = verify_conditional_operator(fe, integer(0), Le, OperatorForm::AZero, g.sampling());
    res["first_order_system"] = nullptr;
    res["system"] = to_json(rep, g.tol);
    warnings = rep.warnings;
    warnings.push_back(e.what());
    pass = rep.pass();
  }
  r.doc["result"] = std::move(res);
  finish(r, pass, pass ? "Case-2 operator admitted" : "Case-2 conditions fail", warnings);
  return r;
}

inline ReportDocument cmd_case3(const Workspace& ws, const std::string& s, const std::string& d,
                                const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header("case3 --s \"" + s + "\" --d \"" + d + "\"", g.seed, g.tol);
  const Expr se = ws.expr(s), de = ws.expr(d);
  const auto op = case3_construct(se, de, g.sampling());
  r.doc["result"] = {{"s", to_json(se)},
                     {"d", to_json(de)},
                     {"K", to_json(op.K)},
                     {"L", to_json(op.L)},
                     {"f", to_json(op.f)},
                     {"constraints", to_json(op.constraints, g.tol)},
                     {"system", to_json(op.system, g.tol)}};
  auto warnings = op.constraints.warnings;
  warnings.insert(warnings.end(), op.system.warnings.begin(), op.system.warnings.end());
  std::string summary = op.pass() ? "constraints and system hold" : "";
  if (!op.constraints.pass()) summary = "(s, d) constraints fail";
  else if (!op.system.pass()) summary = "determining system fails";
  finish(r, op.pass(), summary, warnings);
  return r;
}

struct ReduceArgs {
  std::string T, f = "0";
  std::optional<std::string> omega, sigma;
  bool numeric = false;
  Box box;
  double h = 1e-3;
  double w0 = 1, phi0 = 2, dphi0 = -1;
  double fd_tol = 1e-5;
  bool convergence = false;
};

inline ReportDocument cmd_reduce(const Workspace& ws, const ReduceArgs& a, const GlobalOptions& g) {
  ReportDocument r;
  std::string echo = "reduce --T \"" + a.T + "\"";
  if (a.omega) echo += " --omega \"" + *a.omega + "\"";
  if (a.sigma) echo += " --sigma \"" + *a.sigma + "\"";
  echo += " --f \"" + a.f + "\"";
  if (a.numeric) echo += " --numeric";
  if (a.convergence) echo += " --convergence";
  r.doc = report_header(echo, g.seed, g.tol);

  const Expr T = ws.expr(a.T), f = ws.expr(a.f);
  if (a.omega.has_value() != a.sigma.has_value()) throw UsageError("--omega and --sigma go together");
  Expr omega, sigma;
  std::string source = "given";
  if (a.omega) {
    omega = ws.expr(*a.omega);
    sigma = ws.expr(*a.sigma);
  } else {
    auto inv = find_invariants(T);
    if (!inv) throw UsageError("no invariants known for this T; pass --omega and --sigma");
    omega = inv->omega;
    sigma = inv->sigma;
    source = inv->source;
  }
  Json res = {{"T", to_json(T)}, {"omega", to_json(omega)}, {"sigma", to_json(sigma)},
              {"source", source}, {"f", to_json(f)}};
  const auto ch = check_characteristics(T, omega, sigma, g.sampling());
  res["characteristics"] = to_json(ch, g.tol);
  if (!ch.pass()) {
    r.doc["result"] = std::move(res);
    finish(r, false, "omega/sigma fail the characteristic equations", ch.warnings);
    return r;
  }
  ReductionPackage pkg;
  try {
    pkg = reduced_equation(sigma, omega, f);
  } catch (const ReductionError& e) {
    throw UsageError(e.what());
  }
  res["A0"] = to_json(pkg.A0);
  res["A1"] = to_json(pkg.A1);
  res["A2"] = to_json(pkg.A2);
  res["ode"] = pkg.ode_text();
  res["ode_variable"] = kOmegaVar;
  ReducibilityResult red;
  try {
    red = reducibility_test(pkg, a.box, 20, g.tol, g.seed);
  } catch (const LevelSetError& e) {
    throw UsageError(e.what());
  }
  res["reducibility"] = {{"verdict", to_string(red.verdict)},
                         {"pairs", red.pairs},
                         {"max_disagreement", red.max_disagreement},
                         {"tolerance", red.tol},
                         {"note", red.note}};
  bool pass = red.verdict != Reducibility::NotReducible;
  std::string summary = std::string("reduced ODE: ") + to_string(red.verdict);
  if (a.numeric && pass) {
    if (!pkg.ode) throw UsageError("--numeric needs the ODE rewritten in omega");
    const auto n = solve_and_check(pkg, a.box, a.h, a.w0, a.phi0, a.dphi0);
    Json num = {{"box", to_json(a.box)},
                {"initial", {{"w0", a.w0}, {"phi0", a.phi0}, {"dphi0", a.dphi0}}},
                {"span", {n.phi.lo(), n.phi.hi()}},
                {"residual", to_json(n.stats, a.h, a.fd_tol)}};
    bool ok = n.stats.max_abs < a.fd_tol;
    if (a.convergence) {
      const auto half = solve_and_check(pkg, a.box, a.h / 2, a.w0, a.phi0, a.dphi0);
      const double ratio = n.stats.max_abs / half.stats.max_abs;
      num["residual_half_step"] = to_json(half.stats, a.h / 2, a.fd_tol);
      num["convergence"] = {{"ratio", ratio},
                            {"slope", convergence_slope(n.stats.max_abs, half.stats.max_abs)},
                            {"expected_ratio", 4.0},
                            {"tolerance", 0.2}};
      ok = ok && std::abs(ratio - 4.0) <= 0.8;
    }
    res["numeric"] = std::move(num);
    pass = pass && ok;
    std::ostringstream s;
    s << "; max FD residual " << n.stats.max_abs << (ok ? " within " : " exceeds ") << a.fd_tol;
    summary += s.str();
  }
  r.doc["result"] = std::move(res);
  finish(r, pass, summary, ch.warnings);
  return r;
}

inline ReportDocument cmd_transform(const Workspace& ws, const std::string& F, Direction dir,
                                    bool roundtrip, const GlobalOptions& g) {
  ReportDocument r;
  r.doc = report_header(std::string("transform --F \"") + F + "\" --direction " +
                            (dir == Direction::Forward ? "forward" : "inverse") +
                            (roundtrip ? " --roundtrip" : ""),
                        g.seed, g.tol);
  const Expr in = ws.expr(F);
  const Expr out = lightcone_transform(in, dir);
  Json res = {{"input", to_json(in)}, {dir == Direction::Forward ? "f" : "F", to_json(out)}};
  bool pass = true;
  if (roundtrip) {
    const Expr back =
        lightcone_transform(out, dir == Direction::Forward ? Direction::Inverse : Direction::Forward);
    const auto c = check_zero(back - in, {}, g.sampling());
    res["roundtrip"] = {{"back", to_json(back)}, {"verdict", to_string(c.verdict)}};
    pass = passes(c.verdict);
  }
  r.doc["result"] = std::move(res);
  finish(r, pass, roundtrip ? (pass ? "round trip is the identity" : "round trip differs") : "transformed");
  return r;
}

struct CheckNumericArgs {
  std::optional<std::string> u;
  std::optional<std::string> grid_file;
  std::optional<std::string> export_grid;
  std::string f = "0";
  Box box;
  double h = 1e-3;
  double fd_tol = 1e-6;
  bool convergence = false;
};

inline ReportDocument cmd_check_numeric(const Workspace& ws, const CheckNumericArgs& a,
                                        const GlobalOptions& g) {
  ReportDocument r;
  std::string echo = "check-numeric";
  if (a.u) echo += " --u \"" + *a.u + "\"";
  if (a.grid_file) echo += " --grid " + *a.grid_file;
  echo += " --f \"" + a.f + "\"";
  r.doc = report_header(echo, g.seed, g.tol);
  if (a.u.has_value() == a.grid_file.has_value()) throw UsageError("pass exactly one of --u and --grid");
  const Expr f = ws.expr(a.f);
  for (const auto& v : free_variables(f)) {
    if (v != "y" && v != "z" && v != "u") throw UsageError("f may depend on y, z, u only");
  }
  if (has_functions(f)) throw UsageError("f must be explicit for numeric checks");
  Json res = {{"f", to_json(f)}};
  bool pass = true;
  std::ostringstream summary;
  if (a.grid_file) {
    std::ifstream in(*a.grid_file);
    if (!in) throw UsageError("cannot read grid file " + *a.grid_file);
    Grid2D grid;
    try {
      grid = Grid2D::read(in);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto st = fd_mixed_residual(grid, f);
    res["grid"] = {{"ny", grid.ny}, {"nz", grid.nz}, {"y0", grid.y0}, {"z0", grid.z0}, {"h", grid.h}};
    res["residual"] = to_json(st, grid.h, a.fd_tol);
    pass = st.max_abs < a.fd_tol;
    summary << "max FD residual " << st.max_abs;
  } else {
    const Expr u = ws.expr(*a.u);
    if (has_functions(u)) throw UsageError("u must be explicit for numeric checks");
    const CompiledExpr uc(u, {"y", "z"});
    auto uf = [&](double y, double z) { return uc({y, z}); };
    auto st = fd_mixed_residual(uf, f, a.box, a.h);
    res["u"] = to_json(u);
    res["box"] = to_json(a.box);
    if (a.convergence) {
      const auto half = fd_mixed_residual(uf, f, a.box, a.h / 2);
      st.slope = convergence_slope(st.max_abs, half.max_abs);
      res["residual_half_step"] = to_json(half, a.h / 2, a.fd_tol);
    }
    res["residual"] = to_json(st, a.h, a.fd_tol);
    pass = st.max_abs < a.fd_tol;
    summary << "max FD residual " << st.max_abs;
    if (a.export_grid) {
      std::ofstream out(*a.export_grid);
      if (!out) throw UsageError("cannot write grid file " + *a.export_grid);
      Grid2D::sample(uf, a.box, a.h).write(out);
      res["exported"] = *a.export_grid;
    }
  }
  summary << (pass ? " within " : " exceeds ") << a.fd_tol;
  r.doc["result"] = std::move(res);
  finish(r, pass, summary.str());
  return r;
}

}  // namespace qcsym
