#pragma once

// Averaged per-unit model of a grid-following converter: ideal voltage source,
// RL filter, shunt filter capacitor (the PCC node), lumped cable + grid RL
// branch, Thevenin grid source, DC-link energy balance and an SRF-PLL.
//
// The simulation frame rotates at exactly omega0 and is aligned with the grid
// source, so the source is (Vg, 0) and delta_pll is the PLL angle relative to it.

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "gcpc/conventional.hpp"
#include "gcpc/frames.hpp"

namespace gcpc {

struct PlantParams {
  double omega0 = 2.0 * std::numbers::pi * 60.0;
  double Xf = 0.15;
  double Rf = 0.003;
  double Bf = 0.178;
  double Xca = 0.45;
  double Rca = 0.045;
  double Xg = 0.01;
  double Vg = 1.0;
  double Cdc = 90e-3;
  double Vdc2_base = 1100.0 * 1100.0;
  double Pbase = 2e6;
  double Pwind = 0.9;
  double Kpll_p = 60.0;
  double Kpll_i = 1400.0;

  // Time constant C*Vdc2_base/(2*Pbase) of the DC-link energy balance, seconds.
  double dc_link_inertia() const { return Cdc * Vdc2_base / (2.0 * Pbase); }
};

// Throws std::invalid_argument naming the first offending field.
inline void validate(const PlantParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(std::isfinite(p.omega0) && p.omega0 > 0, "plant.omega0 must be > 0");
  require(p.Xf > 0, "plant.Xf must be > 0");
  require(p.Bf > 0, "plant.Bf must be > 0");
  require(p.Xca > 0, "plant.Xca must be > 0");
  require(p.Rf >= 0, "plant.Rf must be >= 0");
  require(p.Rca >= 0, "plant.Rca must be >= 0");
  require(p.Xg >= 0, "plant.Xg must be >= 0");
  require(p.Vg >= 0, "plant.Vg must be >= 0");
  require(p.Cdc > 0, "plant.Cdc must be > 0");
  require(p.Vdc2_base > 0, "plant.Vdc2_base must be > 0");
  require(p.Pbase > 0, "plant.Pbase must be > 0");
  require(p.Kpll_p >= 0 && p.Kpll_i >= 0, "plant.Kpll gains must be >= 0");
}

struct PlantState {
  DqVector i_f;    // filter current, grid frame
  DqVector v_pcc;  // filter-capacitor node voltage, grid frame
  DqVector i_g;    // cable/grid current, grid frame
  double vdc2 = 1.0;
  double delta_pll = 0.0;
  double xi_pll = 0.0;
  ConventionalState cc;

  static constexpr int kSize = 13;
  using Vector = Eigen::Matrix<double, kSize, 1>;

  Vector to_vector() const {
    Vector x;
    x << i_f.d, i_f.q, v_pcc.d, v_pcc.q, i_g.d, i_g.q, vdc2, delta_pll, xi_pll, cc.z_dc, cc.z_v,
        cc.z_id, cc.z_iq;
    return x;
  }

  static PlantState from_vector(const Vector& x) {
    PlantState s;
    s.i_f = {x[0], x[1]};
    s.v_pcc = {x[2], x[3]};
    s.i_g = {x[4], x[5]};
    s.vdc2 = x[6];
    s.delta_pll = x[7];
    s.xi_pll = x[8];
    s.cc = {x[9], x[10], x[11], x[12]};
    return s;
  }

  friend bool operator==(const PlantState& a, const PlantState& b) {
    return a.to_vector() == b.to_vector();
  }
};

// Same layout as the state; each field holds its time derivative.
using PlantStateDerivative = PlantState;

struct FaultEvent {
  double t_start = 1.0;
  double t_clear = 5.0;
  double Xg_fault = 0.1819;
  double Vg_fault = 0.96;
};

inline constexpr double kDivergenceThreshold = 1e3;

inline bool is_diverged(const PlantState& s) {
  const auto x = s.to_vector();
  if (!x.allFinite()) return true;
  if (x.cwiseAbs().maxCoeff() > kDivergenceThreshold) return true;
  return s.vdc2 <= 0.0;
}

// Converter-frame quantity helpers.
inline DqVector pcc_voltage_converter_frame(const PlantState& s) {
  return rotate(s.v_pcc, s.delta_pll);
}
inline DqVector filter_current_converter_frame(const PlantState& s) {
  return rotate(s.i_f, s.delta_pll);
}

inline OutputSample measure_outputs(const PlantState& s) {
  return {s.vdc2, pcc_voltage_converter_frame(s).d};
}

// Circuit, DC-link and PLL derivatives for a given converter voltage expressed
// in the PLL frame. Controller integrator derivatives are left at zero.
inline PlantStateDerivative derivative(const PlantState& s, const DqVector& v_co_c,
                                       const PlantParams& p) {
  if (!s.to_vector().allFinite() || !is_finite(v_co_c))
    throw std::domain_error("plant derivative: non-finite state or input");

  const DqVector v_co = rotate(v_co_c, -s.delta_pll);
  const DqVector v_src{p.Vg, 0.0};
  const double x_line = p.Xca + p.Xg;

  PlantStateDerivative ds;
  ds.cc = {};
  ds.i_f = (p.omega0 / p.Xf) * (v_co - s.v_pcc - p.Rf * s.i_f - p.Xf * cross(s.i_f));
  ds.v_pcc = (p.omega0 / p.Bf) * (s.i_f - s.i_g - p.Bf * cross(s.v_pcc));
  ds.i_g = (p.omega0 / x_line) * (s.v_pcc - v_src - p.Rca * s.i_g - x_line * cross(s.i_g));

  const double power = active_power(v_co_c, filter_current_converter_frame(s));
  ds.vdc2 = (p.Pwind - power) / p.dc_link_inertia();

  const double vq_c = pcc_voltage_converter_frame(s).q;
  ds.delta_pll = p.Kpll_p * vq_c + s.xi_pll;
  ds.xi_pll = p.Kpll_i * vq_c;
  return ds;
}

inline PlantParams apply_fault_schedule(PlantParams p, const FaultEvent& f, double t) {
  if (t >= f.t_start && t < f.t_clear) {
    p.Xg = f.Xg_fault;
    p.Vg = f.Vg_fault;
  }
  return p;
}

struct ConventionalConfig {
  ConventionalGains gains;
  ControlReferences refs;
};

// What the outer layer delivers to the inner current loop over one sample.
// Without a held reference, the continuous outer PIs drive the inner loop.
struct ControllerOutputs {
  std::optional<DqVector> held_i_ref;
  // Outer PI integrators stop while another controller owns the references.
  bool freeze_outer = false;
};

inline PlantStateDerivative closed_loop_derivative(const PlantState& s, const ControllerOutputs& out,
                                                   const PlantParams& p,
                                                   const ConventionalConfig& cc) {
  const OutputSample y = measure_outputs(s);
  const OuterLayerResult outer = outer_layer(y, cc.refs, s.cc, cc.gains);
  const DqVector i_ref = out.held_i_ref.value_or(outer.i_ref);
  const InnerLayerResult inner =
      inner_layer(filter_current_converter_frame(s), i_ref, y.vpll, s.cc, cc.gains);

  PlantStateDerivative ds = derivative(s, inner.v_co, p);
  if (!out.freeze_outer) {
    ds.cc.z_dc = outer.dz_dc;
    ds.cc.z_v = outer.dz_v;
  }
  ds.cc.z_id = inner.dz_id;
  ds.cc.z_iq = inner.dz_iq;
  return ds;
}

// Classical fourth-order Runge-Kutta step with inputs held over the step.
template <class Vec, class F>
Vec rk4(F&& f, const Vec& x, double dt) {
  const Vec k1 = f(x);
  const Vec k2 = f(Vec(x + (0.5 * dt) * k1));
  const Vec k3 = f(Vec(x + (0.5 * dt) * k2));
  const Vec k4 = f(Vec(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct StepResult {
  PlantState state;
  bool diverged = false;
};

inline StepResult rk4_step(const PlantState& s, const ControllerOutputs& out, const PlantParams& p,
                           const ConventionalConfig& cc, double dt) {
  using V = PlantState::Vector;
  bool bad = false;
  auto f = [&](const V& x) -> V {
    const PlantState xs = PlantState::from_vector(x);
    if (bad || is_diverged(xs)) {
      bad = true;
      return V::Zero();
    }
    return closed_loop_derivative(xs, out, p, cc).to_vector();
  };
  const V next = rk4(f, s.to_vector(), dt);
  StepResult r{PlantState::from_vector(next), bad};
  r.diverged = r.diverged || is_diverged(r.state);
  return r;
}

}  // namespace gcpc
