#include <gtest/gtest.h>

#include <sstream>

#include "gcpc/config.hpp"
#include "gcpc/io.hpp"
#include "gcpc/ispc/artifact.hpp"

using namespace gcpc;
using nlohmann::json;

namespace {

json minimal() { return {{"fault", {{"t_start", 1.0}, {"t_clear", 5.0}, {"Xg", 0.1819}, {"Vg", 0.96}}}}; }

std::string field_of(const json& j) {
  try {
    parse_run_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST(Config, MinimalUsesDefaults) {
  const RunConfig rc = parse_run_config(minimal());
  EXPECT_EQ(rc.scenario.mode, ControllerMode::CC);
  EXPECT_EQ(rc.scenario.fault.Xg_fault, 0.1819);
  EXPECT_EQ(rc.scenario.ispc.T_ini, 25u);
  EXPECT_EQ(rc.scenario.control.gains.dc_link.ki, 40.0);
  EXPECT_FALSE(rc.artifact);
}

TEST(Config, FullSchema) {
  json j = minimal();
  j["controller_mode"] = "FT_ISPC";
  j["rng_seed"] = 42;
  j["excitation_amplitude"] = 0.03;
  j["plant"] = {{"Pwind", 0.8}, {"Xca", 0.4}};
  j["control"] = {{"current", {{"kp", 0.5}}}, {"vpcc_ref", 1.01}};
  j["ispc"] = {{"T_ft", 700}, {"N", 40}, {"R", {{1.0, 0.0}, {0.0, 2.0}}}, {"artifact", "a.json"}};
  j["sweep"] = {{"modes", {"CC"}}, {"ranges", {{"CC", {0.1, 0.2}}}}, {"tol", 1e-3}};
  const RunConfig rc = parse_run_config(j);
  EXPECT_EQ(rc.scenario.mode, ControllerMode::FT_ISPC);
  EXPECT_EQ(rc.scenario.rng_seed, 42u);
  EXPECT_EQ(rc.scenario.plant.Pwind, 0.8);
  EXPECT_EQ(rc.scenario.control.gains.current.kp, 0.5);
  EXPECT_EQ(rc.scenario.control.gains.current.ki, 3.27);
  EXPECT_EQ(rc.scenario.control.refs.vpcc_ref, 1.01);
  EXPECT_EQ(rc.scenario.T_ft, 700u);
  EXPECT_EQ(rc.scenario.ispc.N, 40u);
  EXPECT_EQ(rc.scenario.ispc.R(1, 1), 2.0);
  EXPECT_EQ(*rc.artifact, "a.json");
  EXPECT_EQ(rc.sweep.modes.size(), 1u);
  EXPECT_EQ(rc.sweep.ranges.at(ControllerMode::CC).hi, 0.2);
}

TEST(Config, ErrorsNameTheField) {
  json j = minimal();
  j["fault"].erase("t_clear");
  EXPECT_EQ(field_of(j), "fault.t_clear");

  EXPECT_EQ(field_of(json::object()), "fault");

  j = minimal();
  j["fault"]["Xg"] = "big";
  EXPECT_EQ(field_of(j), "fault.Xg");

  j = minimal();
  j["plant"] = {{"Xff", 0.1}};
  EXPECT_EQ(field_of(j), "plant.Xff");

  j = minimal();
  j["controller_mode"] = "MPC";
  EXPECT_EQ(field_of(j), "controller_mode");

  j = minimal();
  j["ispc"] = {{"R", {{1.0, 2.0}}}};
  j["controller_mode"] = "REGULAR_ISPC";
  EXPECT_EQ(field_of(j), "ispc.R");

  j = minimal();
  j["dt"] = 3e-4;
  EXPECT_EQ(field_of(j), "dt");

  j = minimal();
  j["fault"]["t_clear"] = 0.5;
  EXPECT_EQ(field_of(j), "fault.t_clear");

  j = minimal();
  j["rng_seed"] = -1;
  EXPECT_EQ(field_of(j), "rng_seed");
}

TEST(TraceCsv, RoundTrip) {
  Trace tr;
  tr.push(0.0, {1.0, 0.999}, {0.9, 0.07}, ControllerTag::cc, GridPhase::nominal);
  tr.push(0.001, {1.0001234567, 1.1}, {0.8, 0.1}, ControllerTag::identifying, GridPhase::fault);
  tr.push(0.002, {0.95, 1.0}, {0.7, 0.2}, ControllerTag::ispc, GridPhase::cleared);
  std::stringstream ss;
  io::write_trace_csv(tr, ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), io::kTraceHeader);
  const Trace back = io::read_trace_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_NEAR(back.vdc2[1], 1.0001234567, 5e-9);  // 9 significant digits
  EXPECT_EQ(back.controller, tr.controller);
  EXPECT_EQ(back.phase, tr.phase);
}

TEST(TraceCsv, ErrorsNameTheColumn) {
  auto message = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      io::read_trace_csv(ss);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("t,vdc2,vpll,iref_d,iref_q,controller\n").find("'phase'"), std::string::npos);
  EXPECT_NE(message("t,vdc2,vpll,iref_d,iref_q,controller,phase\n0,x,1,0,0,cc,nominal\n").find("'vdc2'"),
            std::string::npos);
  EXPECT_NE(message("t,vdc2,vpll,iref_d,iref_q,controller,phase\n0,1,1,0,0,pi,nominal\n")
                .find("'controller'"),
            std::string::npos);
}

TEST(MetricsJson, NullForNotSettled) {
  Metrics m;
  m.settling_after.vdc2 = 0.5;
  const json j = io::metrics_to_json(m);
  EXPECT_TRUE(j["settling_during"]["vdc2"].is_null());
  EXPECT_EQ(j["settling_after"]["vdc2"], 0.5);
  EXPECT_FALSE(j.contains("activation_time"));
  for (const char* key : {"rmse_during", "rmse_after", "osc_amplitude", "stable", "tube_radius"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Artifact, JsonRoundTrip) {
  ispc::IspcConfig c;
  c.T = 60;
  c.T_ini = 5;
  c.N = 6;
  ispc::Predictor p;
  p.P1 = Eigen::MatrixXd::Random(12, 10);
  p.P2 = Eigen::MatrixXd::Random(12, 10);
  p.Gamma = Eigen::MatrixXd::Random(12, 12);
  const ispc::Artifact a{c, p, ispc::compute_gains(p, c)};
  const ispc::Artifact b = ispc::artifact_from_json(json::parse(ispc::to_json(a).dump()));
  EXPECT_EQ(b.config.N, 6u);
  EXPECT_EQ(b.predictor.Gamma, p.Gamma);
  EXPECT_LE((b.gains.K1 - a.gains.K1).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((b.gains.Kr_sum - a.gains.Kr_sum).cwiseAbs().maxCoeff(), 1e-15);
}
