// qcsym: command-line front end.
//
//   qcsym [--json] [--seed N] [--tol X] <verb> [options]
//   qcsym [--json] --session FILE
//
// Exit status: 0 all verdicts pass, 1 verification failure, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcsym/qcsym.hpp"

namespace {

using namespace qcsym;

constexpr int kUsage = 2;

struct Args {
  std::optional<std::string> session;
  bool json = false;
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-9;

  std::string form = "a-ne-0";
  bool ku_zero = false;
  std::string f = "0", K = "1", L = "0", T, s, d, F, direction = "forward";
  std::optional<std::string> f_opt;
  bool roundtrip = false;
  ReduceArgs reduce;
  CheckNumericArgs check;
  std::string box_text = "1,2,1,2";
};

struct Verbs {
  CLI::App *detsys, *generate, *verify, *classify, *case1, *case2, *case3, *reduce, *transform,
      *check;
};

Verbs build(CLI::App& app, Args& a) {
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.add_option("--session", a.session, "Run the statements of a session file");
  app.add_flag("--json", a.json, "Emit the machine-readable report");
  app.add_option("--seed", a.seed, "Seed for randomized zero tests")->capture_default_str();
  app.add_option("--tol", a.tol, "Tolerance for randomized zero tests")->capture_default_str();

  Verbs v{};
  v.detsys = app.add_subcommand("detsys", "Determining systems");
  v.detsys->require_subcommand(1);
  v.generate = v.detsys->add_subcommand("generate", "Generate and compare with the reference system");
  v.generate->add_option("--form", a.form, "a-ne-0 or a-eq-0")->capture_default_str();
  v.generate->add_flag("--ku-zero", a.ku_zero, "Specialize to K independent of u");

  v.verify = app.add_subcommand("verify", "Check a conditional operator against u_yz = f");
  v.verify->add_option("--f", a.f, "Right-hand side f(y,z,u)")->capture_default_str();
  v.verify->add_option("--K", a.K, "K(y,z,u) (a-ne-0 form)")->capture_default_str();
  v.verify->add_option("--L", a.L, "L(y,z,u)")->capture_default_str();
  v.verify->add_option("--form", a.form, "a-ne-0 or a-eq-0")->capture_default_str();

  v.classify = app.add_subcommand("classify", "Case split on K");
  v.classify->add_option("--K", a.K, "K(y,z,u)")->required();

  v.case1 = app.add_subcommand("case1", "Case-1 operator from T(y,z)");
  v.case1->add_option("--T", a.T, "T(y,z)")->required();
  v.case1->add_option("--f", a.f_opt, "Check this f against the operator");

  v.case2 = app.add_subcommand("case2", "Case-2 operator u_y = L");
  v.case2->add_option("--L", a.L, "L(y,z,u)")->required();
  v.case2->add_option("--f", a.f, "Right-hand side f(y,z,u)")->capture_default_str();

  v.case3 = app.add_subcommand("case3", "Case-3 operator K = exp(u), L = s exp(u) + d");
  v.case3->add_option("--s", a.s, "s(y,z)")->required();
  v.case3->add_option("--d", a.d, "d(y,z)")->required();

  auto& r = a.reduce;
  v.reduce = app.add_subcommand("reduce", "Reduce u_yz = f by the ansatz u = sigma phi(omega)");
  v.reduce->add_option("--T", r.T, "T(y,z)")->required();
  v.reduce->add_option("--omega", r.omega, "Invariant omega(y,z)");
  v.reduce->add_option("--sigma", r.sigma, "Multiplier sigma(y,z)");
  v.reduce->add_option("--f", r.f, "Right-hand side")->capture_default_str();
  v.reduce->add_flag("--numeric", r.numeric, "Integrate the reduced ODE and check u numerically");
  v.reduce->add_option("--box", a.box_text, "y0,y1,z0,z1")->capture_default_str();
  v.reduce->add_option("--h", r.h, "Grid and ODE step")->capture_default_str();
  v.reduce->add_option("--w0", r.w0, "Initial omega")->capture_default_str();
  v.reduce->add_option("--phi0", r.phi0, "phi(w0)")->capture_default_str();
  v.reduce->add_option("--dphi0", r.dphi0, "phi'(w0)")->capture_default_str();
  v.reduce->add_option("--fd-tol", r.fd_tol, "Bound on the FD residual")->capture_default_str();
  v.reduce->add_flag("--convergence", r.convergence, "Repeat with h/2 and report the ratio");

  v.transform = app.add_subcommand("transform", "Light-cone change of variables");
  v.transform->add_option("--F", a.F, "Expression to transform")->required();
  v.transform->add_option("--direction", a.direction, "forward (t,x -> y,z) or inverse")
      ->check(CLI::IsMember({"forward", "inverse"}))
      ->capture_default_str();
  v.transform->add_flag("--roundtrip", a.roundtrip, "Check that the inverse undoes the transform");

  auto& c = a.check;
  v.check = app.add_subcommand("check-numeric", "Finite-difference residual of u_yz - f");
  v.check->add_option("--u", c.u, "Closed-form u(y,z)");
  v.check->add_option("--grid", c.grid_file, "Grid file (header: ny nz y0 z0 h)");
  v.check->add_option("--export-grid", c.export_grid, "Write the sampled u to a grid file");
  v.check->add_option("--f", c.f, "Right-hand side f(y,z,u)")->capture_default_str();
  v.check->add_option("--box", a.box_text, "y0,y1,z0,z1")->capture_default_str();
  v.check->add_option("--h", c.h, "Step")->capture_default_str();
  v.check->add_option("--fd-tol", c.fd_tol, "Bound on the FD residual")->capture_default_str();
  v.check->add_flag("--convergence", c.convergence, "Also report the slope between h and h/2");
  return v;
}

// Runs the parsed verb; nullopt when no verb was given.
std::optional<ReportDocument> dispatch(const Verbs& v, Args& a, Workspace& ws) {
  const GlobalOptions g{a.seed, a.tol};
  if (*v.generate) return cmd_detsys_generate(parse_form(a.form), a.ku_zero, g);
  if (*v.verify) return cmd_verify(ws, a.f, a.K, a.L, parse_form(a.form), g);
  if (*v.classify) return cmd_classify(ws, a.K, g);
  if (*v.case1) return cmd_case1(ws, a.T, a.f_opt, g);
  if (*v.case2) return cmd_case2(ws, a.L, a.f, g);
  if (*v.case3) return cmd_case3(ws, a.s, a.d, g);
  if (*v.reduce) {
    a.reduce.box = Box::parse(a.box_text);
    return cmd_reduce(ws, a.reduce, g);
  }
  if (*v.transform)
    return cmd_transform(ws, a.F, a.direction == "forward" ? Direction::Forward : Direction::Inverse,
                         a.roundtrip, g);
  if (*v.check) {
    a.check.box = Box::parse(a.box_text);
    return cmd_check_numeric(ws, a.check, g);
  }
  return std::nullopt;
}

Json error_doc(const std::string& command, const std::string& message) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["error"] = message;
  j["verdict"] = {{"pass", false}, {"summary", "usage or parse error"}};
  return j;
}

// Runs f, turning input errors into an error document with exit status 2.
template <class F>
ReportDocument guarded(const std::string& command, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    return {error_doc(command, e.what()), kUsage};
  } catch (const UsageError& e) {
    return {error_doc(command, e.what()), kUsage};
  } catch (const CLI::Error& e) {
    return {error_doc(command, e.what()), kUsage};
  } catch (const std::invalid_argument& e) {
    return {error_doc(command, e.what()), kUsage};
  } catch (const std::domain_error& e) {
    return {error_doc(command, e.what()), kUsage};
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

ReportDocument run_session(const std::string& path, const Args& outer) {
  std::ifstream in(path);
  if (!in) return {error_doc("session " + path, "cannot open session file"), kUsage};
  Workspace ws;
  ReportDocument out;
  out.doc = report_header("session " + path, outer.seed, outer.tol);
  out.doc["results"] = Json::array();
  int worst = 0, failures = 0;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    const std::string stmt = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (stmt.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    ReportDocument r = guarded(stmt, [&]() -> ReportDocument {
      if (stmt.rfind("declare ", 0) == 0) {
        ws.declare(stmt);
        return {Json(), 0};
      }
      if (stmt.rfind("let ", 0) == 0) {
        const auto eq = stmt.find('=');
        if (eq == std::string::npos) throw UsageError("let needs '='");
        ws.define(trim(stmt.substr(4, eq - 4)), trim(stmt.substr(eq + 1)));
        return {Json(), 0};
      }
      Args a;
      a.seed = outer.seed;
      a.tol = outer.tol;
      CLI::App app{"session statement"};
      const Verbs v = build(app, a);
      app.parse(stmt, false);
      if (a.session) throw UsageError("sessions do not nest");
      auto doc = dispatch(v, a, ws);
      if (!doc) throw UsageError("no command in statement");
      return *doc;
    });
    if (r.doc.is_null()) continue;
    if (r.exit_code == kUsage) r.doc["error"] = where + ": " + r.doc["error"].get<std::string>();
    worst = std::max(worst, r.exit_code);
    failures += r.exit_code != 0;
    out.doc["results"].push_back(std::move(r.doc));
  }
  finish(out, worst == 0,
         std::to_string(out.doc["results"].size()) + " commands, " + std::to_string(failures) +
             " not passing");
  out.exit_code = worst;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-conditional symmetry workbench for u_yz = f(y,z,u)", "qcsym"};
  Args a;
  const Verbs v = build(app, a);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::string echo;
  for (int i = 1; i < argc; ++i) echo += (i > 1 ? " " : "") + std::string(argv[i]);

  ReportDocument r;
  if (a.session) {
    if (app.get_subcommands().size()) {
      std::cerr << "error: --session cannot be combined with a verb\n";
      return kUsage;
    }
    r = run_session(*a.session, a);
  } else {
    Workspace ws;
    r = guarded(echo, [&]() -> ReportDocument {
      auto doc = dispatch(v, a, ws);
      if (!doc) throw UsageError("no verb given (try --help)");
      return *doc;
    });
  }
  if (a.json) {
    std::cout << r.doc.dump(2) << '\n';
  } else {
    std::cout << render_text(r.doc);
  }
  if (r.exit_code == kUsage && r.doc.contains("error") && a.json)
    std::cerr << "error: " << r.doc["error"].get<std::string>() << '\n';
  return r.exit_code;
}
