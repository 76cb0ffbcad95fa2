#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "otamm/otamm.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int rc = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(OTAMM_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.rc = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const char* f) { return std::string(OTAMM_DATA_DIR) + "/" + f; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("otamm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, LoadRangeDefaults) {
  const auto r = run("loadrange --model " + data("reference.json"));
  ASSERT_EQ(r.rc, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "loadrange");
  EXPECT_EQ(j["results"]["criteria"]["xi_target"], 0.5);
  EXPECT_EQ(j["results"]["criteria"]["pm_target_deg"], 45.0);
  EXPECT_GE(j["results"]["ratio"].get<double>(), 100.0);
}

TEST_F(Cli, AcCsv) {
  const auto out = dir_ / "bode.csv";
  const auto r = run("ac --model " + data("reference.json") + " --cl 1n --out " + out.string());
  ASSERT_EQ(r.rc, 0);
  const auto text = slurp(out);
  EXPECT_EQ(text.rfind("freq_hz,mag_db,phase_deg\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  double f, mag, ph;
  char c1, c2;
  std::istringstream(line) >> f >> c1 >> mag >> c2 >> ph;
  EXPECT_DOUBLE_EQ(f, 1e-2);
  EXPECT_NEAR(mag, 119.3, 0.1);
}

TEST_F(Cli, NegativeLoadExit2) {
  EXPECT_EQ(run("step --cl -5p").rc, 2);
  EXPECT_EQ(run("step --cl 5q").rc, 2);
  EXPECT_EQ(run("ac --no-such-flag").rc, 2);
  EXPECT_EQ(run("").rc, 2);
}

TEST_F(Cli, BadModelExit3) {
  const auto f = dir_ / "three.json";
  std::ofstream(f) << R"({"stages": [{"gm": 1, "ro": 1, "co": 0}, {"gm": 1, "ro": 1, "co": 0},
    {"gm": 1, "ro": 1, "co": 0}], "comp": {"cm": 1, "ra": 1, "ca": 1}, "gmf": 0})";
  EXPECT_EQ(run("ac --model " + f.string()).rc, 3);
  EXPECT_EQ(run("ac --model " + (dir_ / "missing.json").string()).rc, 3);
}

TEST_F(Cli, Fom) {
  const auto r = run("fom --gbw 0.192 --sr 0.1185 --clmax 1000 --power 1.65 --format json --dataset " +
                     data("comparison.json"));
  ASSERT_EQ(r.rc, 0);
  const auto j = json::parse(r.out)["results"];
  EXPECT_NEAR(j["fom_s"].get<double>(), 116.4, 0.05);
  EXPECT_NEAR(j["fom_l"].get<double>(), 71.8, 0.05);
  EXPECT_NEAR(j["dataset_row"]["fom_l_printed"].get<double>(), 71.5, 1e-12);
  const auto text = run("fom --gbw 0.192 --sr 0.1185 --clmax 1000 --power 1.65");
  EXPECT_NE(text.out.find("FOM_S 116.4"), std::string::npos);
  EXPECT_NE(text.out.find("FOM_L 71.8"), std::string::npos);
}

TEST_F(Cli, PolesDoubletLightLoad) {
  const auto r = run("poles --cl 10f");
  ASSERT_EQ(r.rc, 0);
  const auto j = json::parse(r.out);
  bool near = false;
  for (const auto& d : j["results"][0]["doublets"])
    near |= std::abs(d["pole_freq_hz"].get<double>() / 663e3 - 1.0) < 0.05;
  EXPECT_TRUE(near);
}

TEST_F(Cli, ReportAndCheck) {
  const auto r = run("report --format json --dataset " + data("comparison.json"));
  ASSERT_EQ(r.rc, 0);
  EXPECT_FALSE(json::parse(r.out)["results"]["improvements"].empty());
  const auto c = run("check --cl 1n");
  ASSERT_EQ(c.rc, 0);
  EXPECT_EQ(json::parse(c.out)["results"][0]["pass"], false);
  EXPECT_EQ(run("xvalidate --cl 1n").rc, 1);
  EXPECT_EQ(run("xvalidate --cl 1n --no-check").rc, 0);
}

TEST_F(Cli, DeterministicOutput) {
  for (const char* cmd : {"mc --n 50 --seed 9 --threads 3", "approx --cl 1n --cl 10p", "slew --cl 1n"}) {
    const auto a = run(cmd);
    const auto b = run(cmd);
    ASSERT_EQ(a.rc, 0) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
  }
  EXPECT_EQ(run("mc --n 50 --seed 9 --threads 1").out, run("mc --n 50 --seed 9 --threads 4").out);
}

TEST_F(Cli, OutputsReadBack) {
  const auto model = dir_ / "ref.json";
  ASSERT_EQ(run("calibrate --out " + model.string()).rc, 0);
  const auto m = otamm::load_model_file(model.string());
  EXPECT_EQ(m, otamm::load_model_file(data("reference.json")));
  const auto j = json::parse(run("ac --model " + model.string() + " --format json --grid 1:10:1").out);
  EXPECT_EQ(otamm::parse_model_json(j["inputs"]["model_values"].dump()), m);

  const auto step = dir_ / "step.csv";
  ASSERT_EQ(run("step --cl 1n --amplitude 25m --out " + step.string()).rc, 0);
  const auto metrics = json::parse(slurp(dir_ / "step.metrics.json"));
  std::vector<double> t, v;
  std::istringstream in(slurp(step));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t_s,v_out_v");
  while (std::getline(in, line)) {
    const auto k = line.find(',');
    t.push_back(std::stod(line.substr(0, k)));
    v.push_back(std::stod(line.substr(k + 1)));
  }
  const auto sm = otamm::compute_step_metrics(t, v);
  EXPECT_EQ(sm.settling_time_1pct,
            metrics["results"]["metrics"]["settling_time_1pct"].get<double>());
}
