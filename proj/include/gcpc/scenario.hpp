#pragma once

// Fault scenarios for the converter under conventional control (CC),
// fault-triggered iSPC (identified from fault-time data after a detection
// delay) and regular iSPC (identified beforehand under nominal conditions).

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcpc/conventional.hpp"
#include "gcpc/ispc/controller.hpp"
#include "gcpc/ispc/hankel.hpp"
#include "gcpc/ispc/predictor.hpp"
#include "gcpc/plant.hpp"

namespace gcpc {

enum class ControllerMode { CC, FT_ISPC, REGULAR_ISPC };

inline std::string to_string(ControllerMode m) {
  switch (m) {
    case ControllerMode::CC: return "CC";
    case ControllerMode::FT_ISPC: return "FT_ISPC";
    case ControllerMode::REGULAR_ISPC: return "REGULAR_ISPC";
  }
  return "?";
}

inline ControllerMode parse_controller_mode(const std::string& s) {
  if (s == "CC") return ControllerMode::CC;
  if (s == "FT_ISPC") return ControllerMode::FT_ISPC;
  if (s == "REGULAR_ISPC") return ControllerMode::REGULAR_ISPC;
  throw std::invalid_argument("controller_mode must be one of CC, FT_ISPC, REGULAR_ISPC (got '" +
                              s + "')");
}

struct ScenarioConfig {
  ControllerMode mode = ControllerMode::CC;
  FaultEvent fault;
  PlantParams plant;
  ConventionalConfig control;
  ispc::IspcConfig ispc;
  std::size_t T_ft = 750;
  std::size_t T_regular = 10000;
  double t_end = 9.0;
  double dt = 1e-5;
  double detection_delay = 1.0;
  double excitation_amplitude = 0.05;
  std::uint64_t rng_seed = 1;
  double metric_window = 4.0;

  // The iSPC configuration with T set for the given data-collection mode.
  ispc::IspcConfig ispc_for(ControllerMode m) const {
    ispc::IspcConfig c = ispc;
    c.T = (m == ControllerMode::FT_ISPC) ? T_ft : T_regular;
    return c;
  }

  std::size_t substeps() const { return static_cast<std::size_t>(std::llround(ispc.Ts / dt)); }
  std::int64_t sample_index(double t) const { return std::llround(t / ispc.Ts); }
};

inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  validate(c.plant);
  if (!(c.fault.t_start >= 0 && c.fault.t_start < c.fault.t_clear))
    fail("fault: require 0 <= fault.t_start < fault.t_clear");
  if (!(c.fault.Xg_fault >= 0)) fail("fault.Xg must be >= 0");
  if (!(c.fault.Vg_fault >= 0)) fail("fault.Vg must be >= 0");
  if (!(c.t_end > c.fault.t_clear)) fail("t_end must exceed fault.t_clear");
  if (!(c.dt > 0)) fail("dt must be > 0");
  if (!(c.ispc.Ts > 0)) fail("ispc.Ts must be > 0");
  const double ratio = c.ispc.Ts / c.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1)
    fail("dt must divide ispc.Ts exactly");
  if (!(c.excitation_amplitude >= 0)) fail("excitation_amplitude must be >= 0");
  if (!(c.detection_delay >= 0)) fail("detection_delay must be >= 0");
  if (!(c.metric_window > 0)) fail("metric_window must be > 0");
  if (!(c.control.refs.vdc2_ref > 0 && c.control.refs.vpcc_ref > 0))
    fail("references must be positive");
  if (c.mode != ControllerMode::CC) {
    ispc::validate(c.ispc_for(c.mode));
  }
  if (c.mode == ControllerMode::FT_ISPC) {
    const double t_act =
        c.fault.t_start + c.detection_delay + static_cast<double>(c.T_ft) * c.ispc.Ts;
    if (t_act > c.fault.t_clear + 1e-12)
      fail("FT_ISPC: fault.t_start + detection_delay + T_ft * Ts exceeds fault.t_clear");
  }
}

enum class ControllerTag { cc, identifying, ispc };
enum class GridPhase { nominal, fault, cleared };

inline const char* to_string(ControllerTag t) {
  switch (t) {
    case ControllerTag::cc: return "cc";
    case ControllerTag::identifying: return "identifying";
    case ControllerTag::ispc: return "ispc";
  }
  return "?";
}

inline const char* to_string(GridPhase p) {
  switch (p) {
    case GridPhase::nominal: return "nominal";
    case GridPhase::fault: return "fault";
    case GridPhase::cleared: return "cleared";
  }
  return "?";
}

enum class Channel { vdc2, vpll };

// Per-sample record at Ts resolution.
struct Trace {
  double Ts = 1e-3;
  std::vector<double> t;
  std::vector<double> vdc2;
  std::vector<double> vpll;
  std::vector<double> iref_d;
  std::vector<double> iref_q;
  std::vector<ControllerTag> controller;
  std::vector<GridPhase> phase;
  bool diverged = false;

  std::size_t size() const { return t.size(); }
  const std::vector<double>& channel(Channel c) const { return c == Channel::vdc2 ? vdc2 : vpll; }

  void push(double tk, const OutputSample& y, const DqVector& u, ControllerTag c, GridPhase p) {
    t.push_back(tk);
    vdc2.push_back(y.vdc2);
    vpll.push_back(y.vpll);
    iref_d.push_back(u.d);
    iref_q.push_back(u.q);
    controller.push_back(c);
    phase.push_back(p);
  }
};

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;  // exclusive
};

// Index range [first, last) of samples with begin <= t < end. A half-sample
// slack absorbs round-off in t.
inline std::pair<std::size_t, std::size_t> window_indices(const Trace& tr, TimeWindow w) {
  const double eps = 0.5 * tr.Ts;
  std::size_t first = 0;
  while (first < tr.size() && tr.t[first] < w.begin - eps) ++first;
  std::size_t last = first;
  while (last < tr.size() && tr.t[last] < w.end - eps) ++last;
  return {first, last};
}

// Half the peak-to-peak excursion over the window.
inline double oscillation_amplitude(const Trace& tr, Channel ch, TimeWindow w) {
  const auto [a, b] = window_indices(tr, w);
  if (a >= b) throw std::invalid_argument("oscillation_amplitude: empty window");
  const auto& y = tr.channel(ch);
  double lo = y[a];
  double hi = y[a];
  for (std::size_t i = a; i < b; ++i) {
    lo = std::min(lo, y[i]);
    hi = std::max(hi, y[i]);
  }
  return 0.5 * (hi - lo);
}

// Earliest time t >= window.begin after which the channel stays within
// steady_value +- tube_radius up to the window end; nullopt if it never does.
inline std::optional<double> settling_time(const Trace& tr, Channel ch, double steady_value,
                                           double tube_radius, TimeWindow w) {
  if (!(tube_radius > 0)) throw std::invalid_argument("settling_time: tube_radius must be > 0");
  const auto [a, b] = window_indices(tr, w);
  if (a >= b) return std::nullopt;
  const auto& y = tr.channel(ch);
  std::size_t i = b;
  while (i > a && std::abs(y[i - 1] - steady_value) <= tube_radius) --i;
  if (i == b) return std::nullopt;
  return i == a ? w.begin : tr.t[i];
}

inline double rmse(const Trace& tr, Channel ch, double reference, TimeWindow w) {
  const auto [a, b] = window_indices(tr, w);
  if (a >= b) throw std::invalid_argument("rmse: empty window");
  const auto& y = tr.channel(ch);
  double acc = 0.0;
  for (std::size_t i = a; i < b; ++i) acc += (y[i] - reference) * (y[i] - reference);
  return std::sqrt(acc / static_cast<double>(b - a));
}

// Tube radius used for settling: 2% of the CC oscillation amplitude.
struct TubeRadii {
  double vdc2 = 0.01;
  double vpll = 0.01;
  bool fallback = false;  // CC companion diverged; fixed 0.01 p.u. substituted

  double operator[](Channel c) const { return c == Channel::vdc2 ? vdc2 : vpll; }
};

inline constexpr double kTubeFraction = 0.02;
inline constexpr double kFallbackTube = 0.01;
// Lower bound on any tube; keeps a CC run whose oscillation has fully decayed
// from demanding settling to round-off level.
inline constexpr double kMinTube = 1e-4;
// Amplitudes below this are treated as fully decayed by classify_stability.
inline constexpr double kDecayedAmplitude = 1e-6;
inline constexpr double kDecayFactor = 0.5;

// CC amplitude over the last second of the fault.
inline TubeRadii tube_from_cc_trace(const Trace& cc, const FaultEvent& f) {
  TubeRadii tube;
  const TimeWindow last{f.t_clear - 1.0, f.t_clear};
  const auto [a, b] = window_indices(cc, last);
  const bool covered = !cc.diverged && b > a && cc.t.back() >= f.t_clear - cc.Ts * 1.5;
  if (!covered) {
    tube.fallback = true;
    return tube;
  }
  tube.vdc2 = std::max(kMinTube, kTubeFraction * oscillation_amplitude(cc, Channel::vdc2, last));
  tube.vpll = std::max(kMinTube, kTubeFraction * oscillation_amplitude(cc, Channel::vpll, last));
  return tube;
}

// Stable iff not diverged and, on both channels, the oscillation over the last
// second of the fault is at most half of that over the fault's second second,
// and the output settles into the tube after clearance.
inline bool classify_stability(const Trace& tr, const FaultEvent& f, const ControlReferences& refs,
                               const TubeRadii& tube) {
  if (tr.diverged || tr.size() == 0) return false;
  if (tr.t.back() < f.t_clear) return false;
  const TimeWindow second{f.t_start + 1.0, f.t_start + 2.0};
  const TimeWindow last{f.t_clear - 1.0, f.t_clear};
  const TimeWindow after{f.t_clear, tr.t.back() + tr.Ts};
  for (Channel ch : {Channel::vdc2, Channel::vpll}) {
    const double ref = ch == Channel::vdc2 ? refs.vdc2_ref : refs.vpcc_ref;
    const double a2 = oscillation_amplitude(tr, ch, second);
    const double a_last = oscillation_amplitude(tr, ch, last);
    if (a_last > kDecayFactor * a2 && a_last > kDecayedAmplitude) return false;
    if (!settling_time(tr, ch, ref, tube[ch], after)) return false;
  }
  return true;
}

struct ChannelPair {
  std::optional<double> vdc2;
  std::optional<double> vpll;

  std::optional<double>& operator[](Channel c) { return c == Channel::vdc2 ? vdc2 : vpll; }
  const std::optional<double>& operator[](Channel c) const {
    return c == Channel::vdc2 ? vdc2 : vpll;
  }
};

// Settling times are durations measured from the window start; nullopt marks
// not-settled (or a window the trace does not cover).
struct Metrics {
  ChannelPair settling_during;
  ChannelPair settling_after;
  ChannelPair rmse_during;
  ChannelPair rmse_after;
  ChannelPair osc_amplitude;  // this run, last second of the fault
  // FT iSPC only: during-fault settling measured from controller activation.
  ChannelPair settling_during_from_activation;
  std::optional<double> activation_time;
  TubeRadii tube;
  bool stable = false;
  bool diverged = false;
};

inline Metrics compute_metrics(const Trace& tr, const FaultEvent& f, const ControlReferences& refs,
                               const TubeRadii& tube, double window = 4.0,
                               std::optional<double> activation_time = std::nullopt) {
  Metrics m;
  m.tube = tube;
  m.diverged = tr.diverged;
  m.activation_time = activation_time;
  m.stable = classify_stability(tr, f, refs, tube);
  const double covered_until = tr.size() ? tr.t.back() + tr.Ts : 0.0;

  const TimeWindow during{f.t_start, f.t_clear};
  const TimeWindow after{f.t_clear, f.t_clear + window};
  const TimeWindow rmse_during_w{f.t_start, f.t_start + window};
  const TimeWindow last_second{f.t_clear - 1.0, f.t_clear};

  auto covers = [&](TimeWindow w) { return covered_until + 0.5 * tr.Ts >= w.end; };

  for (Channel ch : {Channel::vdc2, Channel::vpll}) {
    const double ref = ch == Channel::vdc2 ? refs.vdc2_ref : refs.vpcc_ref;
    if (!tr.diverged && covers(during)) {
      if (auto ts = settling_time(tr, ch, ref, tube[ch], during))
        m.settling_during[ch] = *ts - during.begin;
      if (activation_time) {
        const TimeWindow w{*activation_time, f.t_clear};
        if (auto ts = settling_time(tr, ch, ref, tube[ch], w))
          m.settling_during_from_activation[ch] = *ts - w.begin;
      }
      m.osc_amplitude[ch] = oscillation_amplitude(tr, ch, last_second);
    }
    if (!tr.diverged && covers(after)) {
      if (auto ts = settling_time(tr, ch, ref, tube[ch], after))
        m.settling_after[ch] = *ts - after.begin;
    }
    if (!tr.diverged && covers(rmse_during_w)) m.rmse_during[ch] = rmse(tr, ch, ref, rmse_during_w);
    if (!tr.diverged && covers(after)) m.rmse_after[ch] = rmse(tr, ch, ref, after);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Simulation.

namespace detail {

inline Eigen::VectorXd as_vector(const OutputSample& y) { return Eigen::Vector2d(y.vdc2, y.vpll); }
inline Eigen::VectorXd as_vector(const DqVector& u) { return Eigen::Vector2d(u.d, u.q); }
inline DqVector as_dq(const Eigen::VectorXd& u) { return {u[0], u[1]}; }

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

// Newton polish of the CC closed-loop equilibrium using a central-difference Jacobian.
inline PlantState newton_equilibrium(PlantState s, const PlantParams& p, const ConventionalConfig& cc,
                                     int max_iter = 20) {
  using V = PlantState::Vector;
  const ControllerOutputs cont{};
  auto f = [&](const V& x) {
    return closed_loop_derivative(PlantState::from_vector(x), cont, p, cc).to_vector();
  };
  V x = s.to_vector();
  for (int it = 0; it < max_iter; ++it) {
    const V fx = f(x);
    if (fx.cwiseAbs().maxCoeff() < 1e-13) break;
    Eigen::Matrix<double, PlantState::kSize, PlantState::kSize> jac;
    for (int i = 0; i < PlantState::kSize; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
      V xp = x;
      V xm = x;
      xp[i] += h;
      xm[i] -= h;
      jac.col(i) = (f(xp) - f(xm)) / (2 * h);
    }
    x -= jac.fullPivLu().solve(fx);
  }
  return PlantState::from_vector(x);
}

// Load-flow starting point of the CC closed loop with the given power export:
// settle by simulation from a flat start, then polish with Newton and require
// the two to agree.
inline PlantState init_steady_state(PlantParams plant, const ConventionalConfig& cc,
                                    double p_export, double dt = 1e-5) {
  plant.Pwind = p_export;
  PlantState s;
  s.v_pcc = {cc.refs.vpcc_ref, 0.0};
  s.i_f = {p_export, 0.0};
  s.i_g = {p_export, 0.0};
  s.vdc2 = cc.refs.vdc2_ref;
  s.cc.z_dc = p_export;

  const ControllerOutputs cont{};
  const auto check_every = static_cast<std::size_t>(std::llround(1e-3 / dt));
  const auto max_steps = static_cast<std::size_t>(std::llround(60.0 / dt));
  bool settled = false;
  for (std::size_t k = 0; k < max_steps; ++k) {
    if (k % check_every == 0) {
      const double res = closed_loop_derivative(s, cont, plant, cc).to_vector().cwiseAbs().maxCoeff();
      if (res <= 1e-9) {
        settled = true;
        break;
      }
    }
    const StepResult r = rk4_step(s, cont, plant, cc, dt);
    if (r.diverged) break;
    s = r.state;
  }
  if (!settled) throw std::runtime_error("init_steady_state: no equilibrium within 60 s");

  const PlantState polished = newton_equilibrium(s, plant, cc);
  const double gap = (polished.to_vector() - s.to_vector()).cwiseAbs().maxCoeff();
  const double res =
      closed_loop_derivative(polished, cont, plant, cc).to_vector().cwiseAbs().maxCoeff();
  if (gap > 1e-6 || !(res <= 1e-8))
    throw std::runtime_error("init_steady_state: root-finder disagrees with settled simulation");
  return polished;
}

struct ControlTiming {
  std::size_t steps = 0;
  double total_s = 0.0;
  double max_s = 0.0;

  double mean_s() const { return steps ? total_s / static_cast<double>(steps) : 0.0; }
  void add(double s) {
    ++steps;
    total_s += s;
    max_s = std::max(max_s, s);
  }
};

struct Identification {
  ispc::IspcConfig config;
  ispc::Predictor predictor;
  ispc::ControllerGains gains;
  double identification_s = 0.0;  // wall time of predictor estimation
  double gains_s = 0.0;           // wall time of gain computation
};

inline Identification identify_from_log(const ispc::IoLog& log, const ispc::IspcConfig& cfg) {
  Identification id;
  id.config = cfg;
  auto t0 = detail::Clock::now();
  const ispc::HankelSet h = ispc::build_hankel(log, cfg);
  id.predictor = ispc::estimate_predictor(h, cfg.pinv_rtol);
  id.identification_s = detail::seconds_since(t0);
  t0 = detail::Clock::now();
  id.gains = ispc::compute_gains(id.predictor, cfg);
  id.gains_s = detail::seconds_since(t0);
  return id;
}

// Advances the plant by one controller sample with fixed RK4 substeps.
class SampleIntegrator {
 public:
  SampleIntegrator(const ScenarioConfig& cfg) : cfg_(cfg), substeps_(cfg.substeps()) {}

  bool advance(PlantState& s, const ControllerOutputs& out, const PlantParams& p) const {
    for (std::size_t i = 0; i < substeps_; ++i) {
      const StepResult r = rk4_step(s, out, p, cfg_.control, cfg_.dt);
      s = r.state;
      if (r.diverged) return false;
    }
    return true;
  }

 private:
  const ScenarioConfig& cfg_;
  std::size_t substeps_;
};

// Nominal-grid data collection for regular iSPC: CC with excitation on its
// sampled current references, starting from the load-flow equilibrium.
inline ispc::IoLog collect_nominal_data(const ScenarioConfig& cfg, std::size_t samples) {
  const PlantState eq = init_steady_state(cfg.plant, cfg.control, cfg.plant.Pwind, cfg.dt);
  PlantState s = eq;
  const SampleIntegrator step(cfg);
  ispc::ExcitationRng rng(cfg.rng_seed);
  ispc::IoLog log;
  for (std::size_t k = 0; k < samples; ++k) {
    const OutputSample y = measure_outputs(s);
    const DqVector u_cc = outer_layer(y, cfg.control.refs, s.cc, cfg.control.gains).i_ref;
    const DqVector u = ispc::excite(u_cc, rng, cfg.excitation_amplitude);
    log.push(detail::as_vector(u), detail::as_vector(y));
    if (!step.advance(s, {u, false}, cfg.plant))
      throw std::runtime_error("identification run diverged");
  }
  return log;
}

inline Identification identify_regular(const ScenarioConfig& cfg) {
  const ispc::IspcConfig ic = cfg.ispc_for(ControllerMode::REGULAR_ISPC);
  return identify_from_log(collect_nominal_data(cfg, ic.required_samples()), ic);
}

struct ScenarioResult {
  Trace trace;
  Metrics metrics;
  ControlTiming control_timing;
  std::optional<Identification> identification;
  std::optional<double> identification_start;
  std::optional<double> activation_time;
};

// Optional precomputed inputs shared across runs (sweeps).
struct ScenarioContext {
  const Identification* regular = nullptr;  // reused instead of re-identifying
  std::optional<TubeRadii> tube;            // skips the CC companion run
  std::optional<PlantState> equilibrium;
};

// Closed-loop simulation only; metrics are left default.
inline ScenarioResult simulate(const ScenarioConfig& cfg, const ScenarioContext& ctx = {}) {
  validate(cfg);
  ScenarioResult res;
  res.trace.Ts = cfg.ispc.Ts;

  PlantState s = ctx.equilibrium ? *ctx.equilibrium
                                 : init_steady_state(cfg.plant, cfg.control, cfg.plant.Pwind, cfg.dt);
  const SampleIntegrator step(cfg);
  const auto& refs = cfg.control.refs;
  const Eigen::VectorXd r_y = Eigen::Vector2d(refs.vdc2_ref, refs.vpcc_ref);

  const std::int64_t k_end = cfg.sample_index(cfg.t_end);
  const std::int64_t k_fault = cfg.sample_index(cfg.fault.t_start);
  const std::int64_t k_clear = cfg.sample_index(cfg.fault.t_clear);

  const ispc::IspcConfig ic = cfg.ispc_for(cfg.mode);
  ispc::IspcRuntime rt(ic.n_u, ic.n_y, ic.T_ini);
  std::optional<Identification> ident;
  std::int64_t k_ident = -1;
  std::int64_t k_act = -1;
  ispc::ExcitationRng rng(cfg.rng_seed);
  ispc::IoLog log;

  if (cfg.mode == ControllerMode::REGULAR_ISPC) {
    ident = ctx.regular ? *ctx.regular : identify_regular(cfg);
    const OutputSample y0 = measure_outputs(s);
    const DqVector u0 = outer_layer(y0, refs, s.cc, cfg.control.gains).i_ref;
    rt = ispc::IspcRuntime::at_rest(detail::as_vector(u0), detail::as_vector(y0), ic.T_ini);
    k_act = 0;
  } else if (cfg.mode == ControllerMode::FT_ISPC) {
    k_ident = k_fault + cfg.sample_index(cfg.detection_delay);
    k_act = k_ident + static_cast<std::int64_t>(ic.T);
    if (k_act - static_cast<std::int64_t>(ic.required_samples()) < 0)
      throw std::invalid_argument("FT_ISPC: not enough history before activation");
    res.identification_start = static_cast<double>(k_ident) * cfg.ispc.Ts;
  }
  if (k_act >= 0) res.activation_time = static_cast<double>(k_act) * cfg.ispc.Ts;

  const PlantParams nominal = cfg.plant;
  for (std::int64_t k = 0; k < k_end; ++k) {
    const double tk = static_cast<double>(k) * cfg.ispc.Ts;
    const GridPhase phase = k < k_fault   ? GridPhase::nominal
                            : k < k_clear ? GridPhase::fault
                                          : GridPhase::cleared;
    // Parameters are switched on sample boundaries; the mid-sample time avoids
    // round-off at the switching instants.
    const PlantParams p = apply_fault_schedule(nominal, cfg.fault, tk + 0.5 * cfg.ispc.Ts);

    if (cfg.mode == ControllerMode::FT_ISPC && k == k_act) {
      ident = identify_from_log(log, ic);
      log = {};
    }

    const OutputSample y = measure_outputs(s);
    const Eigen::VectorXd yv = detail::as_vector(y);
    rt.observe(yv);

    DqVector u;
    ControllerOutputs out;
    ControllerTag tag = ControllerTag::cc;
    if (k_act >= 0 && k >= k_act) {
      const auto t0 = detail::Clock::now();
      const Eigen::VectorXd uv = ispc::control_step(rt, ident->gains, r_y);
      res.control_timing.add(detail::seconds_since(t0));
      u = detail::as_dq(uv);
      out = {u, true};
      tag = ControllerTag::ispc;
    } else {
      const DqVector u_cc = outer_layer(y, refs, s.cc, cfg.control.gains).i_ref;
      if (k_ident >= 0 && k >= k_ident) {
        u = ispc::excite(u_cc, rng, cfg.excitation_amplitude);
        out = {u, false};
        tag = ControllerTag::identifying;
      } else {
        u = u_cc;
        out = {};
      }
      rt.record_input(detail::as_vector(u));
      if (cfg.mode == ControllerMode::FT_ISPC) {
        log.push(detail::as_vector(u), yv);
        if (log.length() > ic.required_samples()) {
          log.u_seq.erase(log.u_seq.begin());
          log.y_seq.erase(log.y_seq.begin());
        }
      }
    }

    res.trace.push(tk, y, u, tag, phase);
    if (!step.advance(s, out, p)) {
      res.trace.diverged = true;
      break;
    }
  }
  res.identification = std::move(ident);
  return res;
}

// Full scenario: closed loop plus metrics. For iSPC modes the tube radius comes
// from a CC companion run of the same scenario unless supplied in ctx.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const ScenarioContext& ctx = {}) {
  ScenarioContext local = ctx;
  if (!local.equilibrium)
    local.equilibrium = init_steady_state(cfg.plant, cfg.control, cfg.plant.Pwind, cfg.dt);
  ScenarioResult res = simulate(cfg, local);

  TubeRadii tube;
  if (ctx.tube) {
    tube = *ctx.tube;
  } else if (cfg.mode == ControllerMode::CC) {
    tube = tube_from_cc_trace(res.trace, cfg.fault);
  } else {
    ScenarioConfig cc_cfg = cfg;
    cc_cfg.mode = ControllerMode::CC;
    tube = tube_from_cc_trace(simulate(cc_cfg, local).trace, cfg.fault);
  }
  res.metrics = compute_metrics(res.trace, cfg.fault, cfg.control.refs, tube, cfg.metric_window,
                                cfg.mode == ControllerMode::FT_ISPC ? res.activation_time
                                                                    : std::nullopt);
  return res;
}

}  // namespace gcpc
