#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gcpc/scenario.hpp"

using namespace gcpc;

namespace {

// 10 s trace at 1 ms with both channels given by f(t).
template <class F>
Trace synthetic(F f, double t_end = 10.0) {
  Trace tr;
  const auto n = static_cast<int>(std::lround(t_end / tr.Ts));
  for (int k = 0; k < n; ++k) {
    const double t = k * tr.Ts;
    tr.push(t, {f(t), f(t)}, {}, ControllerTag::cc, GridPhase::nominal);
  }
  return tr;
}

}  // namespace

TEST(Metrics, SinusoidAmplitude) {
  const Trace tr = synthetic([](double t) { return 1.0 + 0.2 * std::sin(2 * std::numbers::pi * 4 * t); });
  // Sampling at 1 ms can miss the crest by up to 0.2 (1 - cos(pi * 4 * 1e-3)).
  EXPECT_NEAR(oscillation_amplitude(tr, Channel::vdc2, {2.0, 3.0}), 0.2, 2e-5);
}

TEST(Metrics, EmptyWindowThrows) {
  const Trace tr = synthetic([](double) { return 1.0; });
  EXPECT_THROW(oscillation_amplitude(tr, Channel::vdc2, {20.0, 21.0}), std::invalid_argument);
  EXPECT_THROW(rmse(tr, Channel::vdc2, 1.0, {3.0, 3.0}), std::invalid_argument);
}

TEST(Metrics, ExponentialSettling) {
  // 1 + 0.1 e^{-(t-1)} enters a 0.001 band at t = 1 + ln(100).
  const Trace tr = synthetic([](double t) { return t < 1 ? 1.0 : 1.0 + 0.1 * std::exp(-(t - 1)); });
  const auto ts = settling_time(tr, Channel::vpll, 1.0, 0.001, {1.0, 10.0});
  ASSERT_TRUE(ts);
  EXPECT_NEAR(*ts, 1.0 + std::log(100.0), 2e-3);
}

TEST(Metrics, NeverSettles) {
  const Trace tr = synthetic([](double t) { return 1.0 + 0.1 * std::sin(30 * t); });
  EXPECT_FALSE(settling_time(tr, Channel::vdc2, 1.0, 0.01, {1.0, 5.0}));
  EXPECT_THROW(settling_time(tr, Channel::vdc2, 1.0, 0.0, {1.0, 5.0}), std::invalid_argument);
}

TEST(Metrics, AlreadyInsideSettlesAtWindowStart) {
  const Trace tr = synthetic([](double) { return 1.0; });
  EXPECT_EQ(settling_time(tr, Channel::vdc2, 1.0, 1e-3, {2.0, 4.0}), 2.0);
}

TEST(Metrics, RmseOfSquareWave) {
  const Trace tr = synthetic([](double t) { return std::fmod(t, 0.2) < 0.1 ? 1.1 : 0.9; });
  EXPECT_NEAR(rmse(tr, Channel::vdc2, 1.0, {1.0, 5.0}), 0.1, 1e-12);
}

TEST(Metrics, TubeFromCcTrace) {
  const FaultEvent f;
  const Trace cc = synthetic([](double t) { return 1.0 + 0.3 * std::sin(24 * t); });
  const TubeRadii tube = tube_from_cc_trace(cc, f);
  EXPECT_FALSE(tube.fallback);
  EXPECT_NEAR(tube.vdc2, 0.02 * 0.3, 1e-5);

  Trace quiet = synthetic([](double) { return 1.0; });
  EXPECT_EQ(tube_from_cc_trace(quiet, f).vpll, kMinTube);

  Trace diverged = cc;
  diverged.diverged = true;
  EXPECT_TRUE(tube_from_cc_trace(diverged, f).fallback);
  EXPECT_EQ(tube_from_cc_trace(diverged, f).vdc2, kFallbackTube);
}

TEST(Metrics, ClassifyStability) {
  const FaultEvent f;  // 1 s to 5 s
  const TubeRadii tube{0.002, 0.002, false};
  const auto decaying = synthetic([](double t) {
    return t < 1 ? 1.0 : 1.0 + 0.1 * std::exp(-(t - 1)) * std::sin(24 * t);
  });
  EXPECT_TRUE(classify_stability(decaying, f, {}, tube));

  const auto sustained = synthetic([](double t) {
    return t < 1 || t >= 5 ? 1.0 : 1.0 + 0.1 * std::sin(24 * t);
  });
  EXPECT_FALSE(classify_stability(sustained, f, {}, tube));

  const auto offset_after = synthetic([](double t) { return t < 5 ? 1.0 : 1.05; });
  EXPECT_FALSE(classify_stability(offset_after, f, {}, tube));

  Trace div = decaying;
  div.diverged = true;
  EXPECT_FALSE(classify_stability(div, f, {}, tube));
}

TEST(Metrics, ComputeMetricsNullsUncoveredWindows) {
  const FaultEvent f;
  const Trace short_tr = synthetic([](double) { return 1.0; }, 3.0);
  const Metrics m = compute_metrics(short_tr, f, {}, {});
  EXPECT_FALSE(m.settling_during.vdc2);
  EXPECT_FALSE(m.rmse_after.vpll);
  EXPECT_FALSE(m.stable);
}

TEST(Metrics, ComputeMetricsOnCleanTrace) {
  const FaultEvent f;
  const Trace tr = synthetic([](double t) {
    return t < 1 ? 1.0 : 1.0 + 0.1 * std::exp(-5 * (t - 1));
  });
  const Metrics m = compute_metrics(tr, f, {}, {0.001, 0.001, false});
  ASSERT_TRUE(m.settling_during.vdc2);
  EXPECT_NEAR(*m.settling_during.vdc2, std::log(100.0) / 5, 2e-3);
  EXPECT_EQ(*m.settling_after.vpll, 0.0);
  ASSERT_TRUE(m.rmse_during.vdc2);
  // sqrt(integral of 0.01 e^{-10 s} over 4 s / 4)
  EXPECT_NEAR(*m.rmse_during.vdc2, std::sqrt(0.01 / 10 / 4), 2e-4);
  EXPECT_TRUE(m.stable);
}
