#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

using json = nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" GKP_CLI_PATH "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("gkp_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("gate --code square --gate S").code, 0);
  EXPECT_EQ(run("gate --no-such-flag 1").code, 2);
  EXPECT_EQ(run("gate --gate T").code, 2);
  EXPECT_EQ(run("gate --delta-db abc").code, 2);
  EXPECT_EQ(run("noise --loss 1.5").code, 1);
  EXPECT_EQ(run("readout bin --eta 0").code, 1);
  EXPECT_EQ(run("gate --format xml").code, 2);
}

TEST(Cli, CsvHeaderForTables) {
  const auto r = run("tables --regime approx --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(first_line(r.out), "regime,code,gate,a,d_over_sqrt_pi");
  EXPECT_NE(r.out.find("approx,square,R@R*CZZ,4,0.966"), std::string::npos);
}

TEST(Cli, JsonRoundTripsAndCarriesMeta) {
  const auto r = run("gate --code hex --gate H@H*CZZ --regime approx --delta-db 12");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["meta"]["command"], "gate");
  EXPECT_EQ(j["meta"]["params"]["code"], "hex");
  ASSERT_EQ(j["rows"].size(), 1u);
  const double v = j["rows"][0]["avg_gate_infidelity"];
  EXPECT_NEAR(v, 0.0020134, 1e-6);
  EXPECT_EQ(json::parse(j.dump()), j);
}

TEST(Cli, RerunsAreByteIdentical) {
  const std::string args = "oracle --check rs --format csv";
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SeedFromEnvironment) {
  const auto a = run("oracle --check rs --format csv", "GKP_SEED=11");
  const auto b = run("oracle --check rs --format csv --seed 11");
  const auto c = run("oracle --check rs --format csv", "GKP_SEED=12");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(run("oracle --check rs", "GKP_SEED=abc").code, 2);
}

TEST(Cli, ConfigFileMergesUnderFlags) {
  const auto cfg = temp_file("gate.ini", "code = hex\ngate = S^2\ndelta_db = 11\n");
  const auto a = json::parse(run("gate --config " + cfg).out);
  EXPECT_EQ(a["rows"][0]["code"], "hex");
  EXPECT_EQ(a["rows"][0]["gate"], "S^2");
  const auto b = json::parse(run("gate --config " + cfg + " --gate S").out);
  EXPECT_EQ(b["rows"][0]["gate"], "S");
  EXPECT_NEAR(b["rows"][0]["delta_db"].get<double>(), 11.0, 1e-12);
  EXPECT_EQ(run("gate --config /nonexistent/file.ini").code, 2);
}

TEST(Cli, SweepSinglePointAndErrorColumn) {
  const auto one = run("sweep --command gate --param delta_db --start 10 --stop 14 --count 1 --format csv");
  ASSERT_EQ(one.code, 0);
  std::istringstream in(one.out);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2);
  const auto bad = run("sweep --command readout-bin --param eta --start 0.5 --stop 1.5 --count 3 --format csv");
  ASSERT_EQ(bad.code, 0);
  EXPECT_NE(first_line(bad.out).find(",error"), std::string::npos);
  EXPECT_NE(bad.out.find("\"eta must be in (0, 1]\""), std::string::npos);
}

TEST(Cli, SweepLogAndDbScales) {
  const auto j = json::parse(run("sweep --command readout-bin --param eta --start 0.7 --stop 0.9 --count 3").out);
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_NEAR(j["rows"][1]["eta"].get<double>(), 0.8, 1e-12);
  const auto l = json::parse(
      run("sweep --command gate --param delta --start 0.1 --stop 0.4 --count 3 --scale log").out);
  EXPECT_NEAR(l["rows"][1]["delta"].get<double>(), 0.2, 1e-12);
}

TEST(Cli, ModifiedPatchGapForPhaseGate) {
  const auto naive = json::parse(run("gate --code square --gate S --delta-db 12 --patch naive").out);
  const auto mod = json::parse(run("gate --code square --gate S --delta-db 12 --patch modified").out);
  const double a = naive["rows"][0]["avg_gate_infidelity"], b = mod["rows"][0]["avg_gate_infidelity"];
  EXPECT_GT(a / b, 30.0);
}

TEST(Cli, RewriteExample) {
  const auto in = temp_file("circ.txt", "n=2\nprep 0 q0\nprep 0 q1\ngate H q0\ngate CZ q0 q1\nmeas Z q0\nmeas Z q1\n");
  const auto r = run("rewrite --in " + in);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gate CXZ q0 q1"), std::string::npos);
  EXPECT_NE(r.out.find("frame q0 H"), std::string::npos);
  EXPECT_NE(r.out.find("frame q1 I"), std::string::npos);
  EXPECT_EQ(r.out.find("gate H"), std::string::npos);
  const auto j = json::parse(run("rewrite --format json --in " + in).out);
  EXPECT_TRUE(j.is_object());
  const auto bad = temp_file("bad.txt", "n=1\ngate T q0\n");
  EXPECT_EQ(run("rewrite --in " + bad).code, 2);
}

TEST(Cli, TwoModeUnits) {
  const auto a = json::parse(run("readout two-mode --g-rad-per-us 10 --eta 0.75 --target 0.92").out);
  EXPECT_NEAR(a["rows"][0]["t_us"].get<double>(), 0.63427, 1e-4);
  const auto b = json::parse(run("readout two-mode --g-cycles-mhz 1 --eta 0.75 --target 0.92").out);
  EXPECT_NEAR(b["rows"][0]["g_t"].get<double>(), a["rows"][0]["g_t"].get<double>(), 1e-9);
}

TEST(Cli, OracleChecksPass) {
  const auto r = run("oracle --check all --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find(",false"), std::string::npos);
}
