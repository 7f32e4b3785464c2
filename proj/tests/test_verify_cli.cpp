#include "scenario_io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace isotau;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
  fs::path d = fs::temp_directory_path() / ("isotau_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

int run(const std::string& args, const std::string& out = "") {
  std::string cmd = std::string(ISOTAU_CLI) + " " + args + " > " + (out.empty() ? "/dev/null" : out) + " 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_scenario(const std::string& name, const json& j) {
  fs::path p = tmpdir() / name;
  std::ofstream(p) << j.dump();
  return p;
}

json golden_json() { return json::parse(slurp(fs::path(ISOTAU_SCENARIOS) / "golden.json")); }

}  // namespace

TEST(Cli, GoldenVerifyPasses) {
  fs::path out = tmpdir() / "golden_report.json";
  EXPECT_EQ(run("verify --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --out " + out.string()), 0);
  json r = json::parse(slurp(out));
  EXPECT_EQ(r["overall"], "pass");
  EXPECT_EQ(r["environment"]["precision"], "IEEE 754 binary64");
  EXPECT_GE(r["checks"].size(), 28u);
  for (const auto& c : r["checks"]) {
    EXPECT_EQ(c["status"], "pass") << c["name"];
    for (const char* k : {"name", "criterion", "status", "residual", "tolerance", "runtime_ms", "notes"})
      EXPECT_TRUE(c.contains(k)) << k;
  }
}

TEST(Cli, NumbersAreSeventeenDigitStrings) {
  fs::path out = tmpdir() / "digits.json";
  auto j = golden_json();
  j["checks"] = {"legendre"};
  auto sc = write_scenario("digits_scn.json", j);
  ASSERT_EQ(run("verify --scenario " + sc.string() + " --out " + out.string()), 0);
  json r = json::parse(slurp(out));
  std::string t = r["scenario"]["t"][0];
  EXPECT_DOUBLE_EQ(std::stod(t), 0.1);
  std::string res = r["checks"][0]["residual"];
  size_t digits = 0;
  for (char ch : res.substr(0, res.find_first_of("eE")))
    if (std::isdigit(static_cast<unsigned char>(ch))) ++digits;
  EXPECT_EQ(digits, 17u) << res;
}

TEST(Cli, CheckSubset) {
  fs::path out = tmpdir() / "subset.json";
  ASSERT_EQ(run("verify --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --checks legendre --out " +
                out.string()),
            0);
  json r = json::parse(slurp(out));
  ASSERT_EQ(r["checks"].size(), 1u);
  EXPECT_EQ(r["checks"][0]["name"], "legendre");
}

TEST(Cli, SameSeedIsDeterministic) {
  fs::path a = tmpdir() / "seed_a.json", b = tmpdir() / "seed_b.json";
  std::string base = "verify --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --checks legendre,wp_ode --seed 7";
  ASSERT_EQ(run(base + " --jobs 2 --out " + a.string()), 0);
  ASSERT_EQ(run(base + " --out " + b.string()), 0);
  json ja = json::parse(slurp(a)), jb = json::parse(slurp(b));
  EXPECT_EQ(ja["seed"], "7");
  for (size_t i = 0; i < ja["checks"].size(); ++i) EXPECT_EQ(ja["checks"][i]["residual"], jb["checks"][i]["residual"]);
}

TEST(Cli, BadScenariosExitTwo) {
  fs::path out = tmpdir() / "bad.json";
  auto j = golden_json();
  j["e"] = {{1, 0}, {1, 0}, {-1, 0}};
  EXPECT_EQ(run("verify --scenario " + write_scenario("dup.json", j).string() + " --out " + out.string()), 2);
  j = golden_json();
  j["checks"] = {"no_such_check"};
  EXPECT_EQ(run("verify --scenario " + write_scenario("unknown.json", j).string() + " --out " + out.string()), 2);
  j = golden_json();
  j["bogus"] = 1;
  EXPECT_EQ(run("verify --scenario " + write_scenario("field.json", j).string() + " --out " + out.string()), 2);
  fs::path broken = tmpdir() / "broken.json";
  std::ofstream(broken) << "{\"e\": [";
  EXPECT_EQ(run("verify --scenario " + broken.string() + " --out " + out.string()), 2);
  EXPECT_EQ(run("verify --scenario /nonexistent/x.json --out " + out.string()), 2);
  EXPECT_EQ(run("verify --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --checks nope --out " + out.string()), 2);
}

TEST(Cli, ArgumentErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("verify --out x.json"), 2);
  EXPECT_EQ(run("verify --scenario a.json --out x.json --tol-scale -1"), 2);
  EXPECT_EQ(run("monodromy --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --loop 5"), 2);
  EXPECT_EQ(run("tau --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --grid s=0:1:0.1"), 2);
}

TEST(Cli, TauCsv) {
  fs::path out = tmpdir() / "tau.csv";
  ASSERT_EQ(run("tau --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --grid t=0.05:0.15:0.05 --out " +
                out.string()),
            0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,re_log_tau,im_log_tau,re_H_t,im_H_t");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) r.push_back(std::stod(f));
    ASSERT_EQ(r.size(), 5u);
    rows.push_back(r);
  }
  ASSERT_EQ(rows.size(), 3u);
  // H_t at t = 0.1 is the golden value
  EXPECT_NEAR(rows[1][3], -0.47251430874132, 1e-12);
  EXPECT_NEAR(rows[1][4], 0.50207225250092, 1e-12);
  // trapezoid of H_t against the log tau increment
  cplx h0(rows[0][3], rows[0][4]), h1(rows[1][3], rows[1][4]), h2(rows[2][3], rows[2][4]);
  cplx simpson = 0.05 / 3.0 * (h0 + 4.0 * h1 + h2);
  cplx dlt(rows[2][1] - rows[0][1], rows[2][2] - rows[0][2]);
  EXPECT_LT(std::abs(simpson - dlt), 1e-6);
}

TEST(Cli, MonodromyLoop) {
  fs::path out = tmpdir() / "mono.txt";
  ASSERT_EQ(run("monodromy --scenario " + std::string(ISOTAU_SCENARIOS) + "/golden.json --loop inf --theory", out.string()), 0);
  std::istringstream in(slurp(out));
  double v[8];
  for (double& x : v) in >> x;
  // M_inf = [[0, m], [-1/m, 0]] with m = -i
  EXPECT_NEAR(v[0], 0.0, 1e-6);
  EXPECT_NEAR(v[3], -1.0, 1e-6);
  EXPECT_NEAR(v[5], -1.0, 1e-6);
  EXPECT_NE(slurp(out).find("max difference"), std::string::npos);
}

TEST(ScenarioIo, ParsesAndValidates) {
  auto s = io::scenario_from_json(golden_json());
  EXPECT_EQ(s.a, cplx(2, 0));
  EXPECT_EQ(s.seed, 1u);
  json j = golden_json();
  j.erase("p");
  EXPECT_THROW(io::scenario_from_json(j), config_error);
  j = golden_json();
  j["tolerances"] = {{"legendre", -1.0}};
  EXPECT_THROW(io::scenario_from_json(j), config_error);
  j = golden_json();
  j["tolerances"] = {{"legendre", 1e-3}};
  EXPECT_DOUBLE_EQ(io::scenario_from_json(j).tolerances.at("legendre"), 1e-3);
  j = golden_json();
  j["a"] = {1, 0};
  EXPECT_THROW(io::scenario_from_json(j), config_error);
  j = golden_json();
  j["t"] = "0.1";
  EXPECT_THROW(io::scenario_from_json(j), config_error);
}

TEST(ScenarioIo, ToleranceOverrideAndScale) {
  Scenario s = golden_scenario();
  s.tolerances["legendre"] = 1e-30;
  RunOptions opt;
  opt.checks = {"legendre"};
  auto r = run_checks(s, opt);
  EXPECT_EQ(r.overall, Status::fail);
  opt.tol_scale = 1e30;
  r = run_checks(s, opt);
  EXPECT_EQ(r.overall, Status::pass);
  EXPECT_DOUBLE_EQ(r.records[0].tolerance, 1.0);
}
