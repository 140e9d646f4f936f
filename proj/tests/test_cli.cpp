#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcpc/cli.hpp"

namespace fs = std::filesystem;
using namespace gcpc::cli;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gcpc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json short_run(const std::string& mode, double Xg) {
  return {{"controller_mode", mode},
          {"t_end", 5.0},
          {"fault", {{"t_start", 0.5}, {"t_clear", 3.0}, {"Xg", Xg}, {"Vg", 0.96}}}};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST(Cli, SimulateWritesOutputsAndManifest) {
  const fs::path dir = temp_dir("simulate");
  Options o;
  o.config_path = write_config(dir, short_run("FT_ISPC", 0.12)).string();
  o.out_dir = (dir / "out").string();
  o.seed = 7;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_simulate(o, out, err), kOk) << err.str();
  for (const char* f : {"trace.csv", "metrics.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const json man = read_json(dir / "out" / "manifest.json");
  EXPECT_EQ(man["seed"], 7);
  EXPECT_EQ(man["mode"], "FT_ISPC");
  EXPECT_EQ(man["version"], kToolVersion);
  EXPECT_EQ(man["config_hash"].get<std::string>().size(), std::string("fnv1a64:").size() + 16);
  EXPECT_TRUE(man["timing"].contains("identification_s"));
  EXPECT_TRUE(man["timing"].contains("control_step_mean_s"));
  EXPECT_TRUE(read_json(dir / "out" / "metrics.json").contains("activation_time"));
}

TEST(Cli, MetricsRecomputesFromTrace) {
  const fs::path dir = temp_dir("metrics");
  Options o;
  o.config_path = write_config(dir, short_run("CC", 0.1)).string();
  o.out_dir = (dir / "sim").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_simulate(o, out, err), kOk) << err.str();
  o.out_dir = (dir / "met").string();
  o.trace_path = (dir / "sim" / "trace.csv").string();
  ASSERT_EQ(cmd_metrics(o, out, err), kOk) << err.str();
  const json a = read_json(dir / "sim" / "metrics.json"), b = read_json(dir / "met" / "metrics.json");
  EXPECT_EQ(a["stable"], b["stable"]);
  EXPECT_NEAR(a["rmse_during"]["vdc2"].get<double>(), b["rmse_during"]["vdc2"].get<double>(), 1e-8);
}

TEST(Cli, BadConfigExitCode) {
  const fs::path dir = temp_dir("badcfg");
  json j = short_run("CC", 0.1);
  j["fault"].erase("t_clear");
  Options o;
  o.config_path = write_config(dir, j).string();
  o.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_simulate(o, out, err), kBadConfig);
  EXPECT_NE(err.str().find("fault.t_clear"), std::string::npos) << err.str();
}

TEST(Cli, IdentifyWithoutExcitationReportsRank) {
  const fs::path dir = temp_dir("identify0");
  json j = short_run("REGULAR_ISPC", 0.1);
  j["excitation_amplitude"] = 0.0;
  j["ispc"] = {{"T_regular", 400}, {"T_ini", 8}, {"N", 10}};
  Options o;
  o.config_path = write_config(dir, j).string();
  o.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_identify(o, out, err), kRankDeficient);
  const json rank = read_json(dir / "out" / "rank.json");
  EXPECT_FALSE(rank["full_row_rank"].get<bool>());
}

TEST(Cli, IdentifyArtifactFeedsSimulate) {
  const fs::path dir = temp_dir("identify");
  json j = short_run("REGULAR_ISPC", 0.2);
  j["ispc"] = {{"T_regular", 1000}};
  Options o;
  o.config_path = write_config(dir, j).string();
  o.out_dir = (dir / "id").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_identify(o, out, err), kOk) << err.str();
  ASSERT_TRUE(fs::exists(dir / "id" / "artifact.json"));

  j["ispc"]["artifact"] = (dir / "id" / "artifact.json").string();
  o.config_path = write_config(dir, j).string();
  o.out_dir = (dir / "a").string();
  ASSERT_EQ(cmd_simulate(o, out, err), kOk) << err.str();
  j["ispc"].erase("artifact");
  o.config_path = write_config(dir, j).string();
  o.out_dir = (dir / "b").string();
  ASSERT_EQ(cmd_simulate(o, out, err), kOk) << err.str();
  EXPECT_EQ(read_file((dir / "a" / "trace.csv").string()), read_file((dir / "b" / "trace.csv").string()));
}

TEST(Cli, SweepWithoutBracketFails) {
  const fs::path dir = temp_dir("sweep");
  json j = short_run("CC", 0.1);
  j["sweep"] = {{"modes", {"CC"}}, {"ranges", {{"CC", {0.05, 0.07}}}}, {"grid_points", 2}};
  Options o;
  o.config_path = write_config(dir, j).string();
  o.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(o, out, err), kNoBracket);
  const json crit = read_json(dir / "out" / "critical.json");
  EXPECT_TRUE(crit["CC"].contains("error"));
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep.csv"));
}

TEST(Cli, Fnv1aKnownValue) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
