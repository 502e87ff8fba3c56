#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "qcsym/qcsym.hpp"

using namespace qcsym;

namespace {

const GlobalOptions kG{};

}  // namespace

TEST(Commands, GenerateMatchesReference) {
  const auto r = cmd_detsys_generate(OperatorForm::ANonZero, false, kG);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.doc["schema"], kReportSchema);
  EXPECT_TRUE(r.doc["result"]["match"].get<bool>());
  EXPECT_THROW(cmd_detsys_generate(OperatorForm::AZero, true, kG), UsageError);
}

TEST(Commands, VerifyExitCodes) {
  Workspace ws;
  EXPECT_EQ(cmd_verify(ws, "1/(y+z)", "z/y", "u/y", OperatorForm::ANonZero, kG).exit_code, 0);
  EXPECT_EQ(cmd_verify(ws, "u^2", "1", "u", OperatorForm::ANonZero, kG).exit_code, 1);
  EXPECT_THROW(cmd_verify(ws, "u", "0", "u", OperatorForm::ANonZero, kG), UsageError);
  EXPECT_THROW(cmd_verify(ws, "1/(y+", "1", "0", OperatorForm::ANonZero, kG), ParseError);
}

TEST(Commands, VerifyReportShape) {
  Workspace ws;
  const auto r = cmd_verify(ws, "1/(y+z)", "z/y", "u/y", OperatorForm::ANonZero, kG);
  const auto& rep = r.doc["result"]["report"];
  ASSERT_TRUE(rep.contains("equations"));
  for (const auto& e : rep["equations"]) {
    EXPECT_TRUE(e.contains("origin"));
    EXPECT_EQ(e["verdict"], "Zero");
  }
  EXPECT_EQ(r.doc["seed"].get<std::uint64_t>(), kDefaultSeed);
  EXPECT_TRUE(r.doc["verdict"]["pass"].get<bool>());
}

TEST(Commands, Classify) {
  Workspace ws;
  EXPECT_EQ(cmd_classify(ws, "exp(u)", kG).doc["result"]["case"], "Case3");
  EXPECT_EQ(cmd_classify(ws, "z/y", kG).doc["result"]["case"], "Case1");
  EXPECT_EQ(cmd_classify(ws, "0", kG).doc["result"]["case"], "Case2");
}

TEST(Commands, Case1WithAndWithoutF) {
  Workspace ws;
  EXPECT_EQ(cmd_case1(ws, "y*z", std::nullopt, kG).exit_code, 0);
  EXPECT_EQ(cmd_case1(ws, "y*z", std::string("1/(y+z)"), kG).exit_code, 0);
  EXPECT_EQ(cmd_case1(ws, "y*z", std::string("u^2"), kG).exit_code, 1);
  EXPECT_THROW(cmd_case1(ws, "y", std::nullopt, kG), UsageError);
}

TEST(Commands, Case2FallsBackWithWarning) {
  Workspace ws;
  const auto r = cmd_case2(ws, "y", "0", kG);
  EXPECT_TRUE(r.doc["result"]["first_order_system"].is_null());
  bool warned = false;
  for (const auto& w : r.doc["warnings"]) warned = warned || w.get<std::string>().find("first-order") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(Commands, Case3) {
  Workspace ws;
  EXPECT_EQ(cmd_case3(ws, "1", "1", kG).exit_code, 0);
  EXPECT_EQ(cmd_case3(ws, "y", "0", kG).exit_code, 1);
}

TEST(Commands, ReduceProductT) {
  Workspace ws;
  ReduceArgs a;
  a.T = "y*z";
  a.f = "1/(y+z)";
  a.numeric = true;
  a.convergence = true;
  const auto r = cmd_reduce(ws, a, kG);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.doc["result"]["reducibility"]["verdict"], "ReducibleSymbolic");
  EXPECT_LT(r.doc["result"]["numeric"]["residual"]["max_abs"].get<double>(), 1e-5);
  EXPECT_NEAR(r.doc["result"]["numeric"]["convergence"]["ratio"].get<double>(), 4.0, 0.8);
}

TEST(Commands, ReduceInputErrors) {
  Workspace ws;
  ReduceArgs a;
  a.T = "y*z + y + z^2";
  EXPECT_THROW(cmd_reduce(ws, a, kG), UsageError);
  a.T = "y*z";
  a.omega = "y/z";
  EXPECT_THROW(cmd_reduce(ws, a, kG), UsageError);
  a.sigma = "1";
  EXPECT_EQ(cmd_reduce(ws, a, kG).exit_code, 1);  // sigma fails the characteristic equation
}

TEST(Commands, Transform) {
  Workspace ws;
  const auto r = cmd_transform(ws, "t*x*u", Direction::Forward, true, kG);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.doc["result"]["roundtrip"]["verdict"], "Zero");
}

TEST(Commands, CheckNumericAndGridExport) {
  Workspace ws;
  CheckNumericArgs a;
  a.u = "(y+z)*log(y+z)";
  a.f = "1/(y+z)";
  a.h = 1e-2;
  a.fd_tol = 1e-4;
  const std::string path = ::testing::TempDir() + "qcsym_grid.txt";
  a.export_grid = path;
  EXPECT_EQ(cmd_check_numeric(ws, a, kG).exit_code, 0);
  CheckNumericArgs b;
  b.grid_file = path;
  b.f = "1/(y+z)";
  b.fd_tol = 1e-4;
  EXPECT_EQ(cmd_check_numeric(ws, b, kG).exit_code, 0);
  b.f = "0";
  EXPECT_EQ(cmd_check_numeric(ws, b, kG).exit_code, 1);
  std::remove(path.c_str());
  b.grid_file = path + ".missing";
  EXPECT_THROW(cmd_check_numeric(ws, b, kG), UsageError);
  CheckNumericArgs none;
  EXPECT_THROW(cmd_check_numeric(ws, none, kG), UsageError);
}

TEST(Workspace, DeclarationsAndDefinitions) {
  Workspace ws;
  ws.declare("declare g(u)");
  ws.define("F", "1/(y+z)");
  EXPECT_EQ(ws.expr("F + g_u"), parse("1/(y+z)") + parse("g_u", ws.context()));
  EXPECT_THROW(ws.define("y", "1"), UsageError);
  EXPECT_THROW(ws.define("K", "1"), UsageError);
  EXPECT_THROW(parse_form("a-gt-0"), UsageError);
}

TEST(Report, DocumentsAreDeterministic) {
  Workspace ws;
  const auto a = cmd_verify(ws, "1/(y+z)", "z/y", "u/y", OperatorForm::ANonZero, kG);
  const auto b = cmd_verify(ws, "1/(y+z)", "z/y", "u/y", OperatorForm::ANonZero, kG);
  EXPECT_EQ(a.doc.dump(2), b.doc.dump(2));
  EXPECT_EQ(render_text(a.doc), render_text(b.doc));
  EXPECT_NE(render_text(a.doc).find("pass"), std::string::npos);
}
