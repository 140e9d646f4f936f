#include <gtest/gtest.h>

#include "gcpc/scenario.hpp"
#include "gcpc/sweep.hpp"

using namespace gcpc;

namespace {

ScenarioConfig short_config(ControllerMode mode, double Xg) {
  ScenarioConfig c;
  c.mode = mode;
  c.fault = {0.5, 3.0, Xg, 0.96};
  c.t_end = 5.0;
  return c;
}

}  // namespace

TEST(Scenario, ValidateTiming) {
  ScenarioConfig c;
  EXPECT_NO_THROW(validate(c));
  c.dt = 3e-4;  // does not divide Ts
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.mode = ControllerMode::FT_ISPC;
  c.detection_delay = 3.9;  // identification would run past clearance
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Scenario, ModeNames) {
  for (auto m : {ControllerMode::CC, ControllerMode::FT_ISPC, ControllerMode::REGULAR_ISPC})
    EXPECT_EQ(parse_controller_mode(to_string(m)), m);
  EXPECT_THROW(parse_controller_mode("PI"), std::invalid_argument);
}

TEST(Scenario, SteadyStateInitialization) {
  const PlantState s = init_steady_state({}, {}, 0.9, 1e-5);
  const auto y = measure_outputs(s);
  EXPECT_NEAR(y.vdc2, 1.0, 1e-9);
  EXPECT_NEAR(y.vpll, 1.0, 1e-9);
  EXPECT_GT(s.i_f.d, 0.0);
}

TEST(Scenario, MildFaultIsStableUnderCc) {
  const ScenarioResult r = run_scenario(short_config(ControllerMode::CC, 0.08));
  EXPECT_FALSE(r.trace.diverged);
  EXPECT_TRUE(r.metrics.stable);
  EXPECT_EQ(r.trace.size(), 5000u);
  EXPECT_EQ(r.trace.phase.front(), GridPhase::nominal);
  EXPECT_EQ(r.trace.phase[1000], GridPhase::fault);
  EXPECT_EQ(r.trace.phase.back(), GridPhase::cleared);
}

TEST(Scenario, SevereFaultIsUnstableUnderCc) {
  const ScenarioResult r = run_scenario(short_config(ControllerMode::CC, 0.3));
  EXPECT_FALSE(r.metrics.stable);
}

TEST(Scenario, FaultTriggeredTagsAndTiming) {
  ScenarioConfig c = short_config(ControllerMode::FT_ISPC, 0.12);
  c.t_end = 4.0;
  const ScenarioResult r = simulate(c);
  ASSERT_TRUE(r.activation_time);
  ASSERT_TRUE(r.identification_start);
  EXPECT_NEAR(*r.identification_start, 1.5, 1e-9);
  EXPECT_NEAR(*r.activation_time, 1.5 + 0.75, 1e-9);
  const auto at = [&](double t) { return r.trace.controller[static_cast<std::size_t>(t * 1000 + 0.5)]; };
  EXPECT_EQ(at(1.0), ControllerTag::cc);
  EXPECT_EQ(at(2.0), ControllerTag::identifying);
  EXPECT_EQ(at(3.0), ControllerTag::ispc);
  EXPECT_GT(r.control_timing.steps, 0u);
}

TEST(Scenario, Deterministic) {
  ScenarioConfig c = short_config(ControllerMode::FT_ISPC, 0.12);
  c.t_end = 3.5;
  const Trace a = simulate(c).trace, b = simulate(c).trace;
  EXPECT_EQ(a.vdc2, b.vdc2);
  EXPECT_EQ(a.vpll, b.vpll);
  c.rng_seed = 2;
  EXPECT_NE(simulate(c).trace.vdc2, a.vdc2);
}

TEST(Sweep, BracketErrorReportsEndpoints) {
  ScenarioConfig c = short_config(ControllerMode::CC, 0.1);
  const SweepContext sc = prepare_sweep(c, ControllerMode::CC);
  try {
    critical_reactance(c, ControllerMode::CC, 0.05, 0.08, 5e-4, sc);
    FAIL();
  } catch (const BracketError& e) {
    EXPECT_TRUE(e.lo().stable);
    EXPECT_TRUE(e.hi().stable);
  }
  EXPECT_THROW(critical_reactance(c, ControllerMode::CC, 0.2, 0.1, 5e-4, sc), BracketError);
}

TEST(Sweep, GridMatchesSerialClassification) {
  ScenarioConfig c = short_config(ControllerMode::CC, 0.1);
  const SweepContext sc = prepare_sweep(c, ControllerMode::CC);
  const std::vector<double> grid{0.06, 0.3};
  const auto par = sweep_grid(c, ControllerMode::CC, grid, 2, sc);
  ASSERT_EQ(par.size(), 2u);
  EXPECT_TRUE(par[0].stable);
  EXPECT_FALSE(par[1].stable);
}
