#pragma once

// Conventional cascaded PI control of a grid-following converter:
//   outer layer  (vdc2, V_PLL) errors  -> current references in the PLL frame
//   inner layer  current errors        -> converter terminal voltage, with
//                cross-coupling decoupling and V_PLL feedforward.
//
// Integrators are continuous-time states; their derivatives are returned to the
// caller so they can be advanced together with the circuit by the plant RK4.

#include "gcpc/frames.hpp"

namespace gcpc {

struct PiGains {
  double kp = 0.0;
  double ki = 0.0;
};

struct ConventionalGains {
  PiGains current{0.48, 3.27};
  PiGains dc_link{0.4, 40.0};
  PiGains voltage{0.25, 25.0};
  // Filter inductance estimate used for decoupling, as p.u. reactance.
  double l_tilde = 0.15;
};

struct ConventionalState {
  double z_dc = 0.0;
  double z_v = 0.0;
  double z_id = 0.0;
  double z_iq = 0.0;
};

struct ControlReferences {
  double vdc2_ref = 1.0;
  double vpcc_ref = 1.0;
};

// Sampled plant outputs fed to any outer controller.
struct OutputSample {
  double vdc2 = 0.0;
  double vpll = 0.0;
};

struct OuterLayerResult {
  DqVector i_ref;
  double dz_dc = 0.0;
  double dz_v = 0.0;
};

struct InnerLayerResult {
  DqVector v_co;
  double dz_id = 0.0;
  double dz_iq = 0.0;
};

// Errors are measurement minus reference; positive gains export more power
// when the DC link is over-charged and absorb reactive current on over-voltage.
inline OuterLayerResult outer_layer(const OutputSample& y, const ControlReferences& refs,
                                    const ConventionalState& s, const ConventionalGains& g) {
  const double e_dc = y.vdc2 - refs.vdc2_ref;
  const double e_v = y.vpll - refs.vpcc_ref;
  return {
      .i_ref = {g.dc_link.kp * e_dc + s.z_dc, g.voltage.kp * e_v + s.z_v},
      .dz_dc = g.dc_link.ki * e_dc,
      .dz_v = g.voltage.ki * e_v,
  };
}

// Current error is taken as reference minus measurement. With the filter
// current leaving the converter (the direction in which v_co * i_f is the
// exported power), the measurement-minus-reference form turns the current loop
// into positive feedback, so this is the only stabilizing polarity.
inline InnerLayerResult inner_layer(const DqVector& i_f_c, const DqVector& i_ref_c, double vpll,
                                    const ConventionalState& s, const ConventionalGains& g) {
  const DqVector e = i_ref_c - i_f_c;
  return {
      .v_co = {g.current.kp * e.d + s.z_id - g.l_tilde * i_f_c.q + vpll,
               g.current.kp * e.q + s.z_iq + g.l_tilde * i_f_c.d},
      .dz_id = g.current.ki * e.d,
      .dz_iq = g.current.ki * e.q,
  };
}

}  // namespace gcpc
