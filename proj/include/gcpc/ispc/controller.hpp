#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>

#include "gcpc/frames.hpp"
#include "gcpc/ispc/predictor.hpp"

namespace gcpc::ispc {

// Past window of the online controller: du_ini = col(du(k-T_ini) .. du(k-1)),
// y_ini = col(y(k-T_ini+1) .. y(k)), plus the last applied input.
class IspcRuntime {
 public:
  IspcRuntime(std::size_t n_u, std::size_t n_y, std::size_t t_ini)
      : n_u_(static_cast<Eigen::Index>(n_u)),
        n_y_(static_cast<Eigen::Index>(n_y)),
        t_ini_(t_ini),
        du_ini_(VectorXd::Zero(n_u_ * static_cast<Eigen::Index>(t_ini))),
        y_ini_(VectorXd::Zero(n_y_ * static_cast<Eigen::Index>(t_ini))),
        u_prev_(VectorXd::Zero(n_u_)) {}

  // Buffers pre-filled as if the plant had rested at (u, y) for T_ini samples.
  static IspcRuntime at_rest(const VectorXd& u, const VectorXd& y, std::size_t t_ini) {
    IspcRuntime rt(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(y.size()), t_ini);
    for (std::size_t i = 0; i < t_ini; ++i) rt.observe(y);
    rt.record_input(u);
    for (std::size_t i = 0; i < t_ini; ++i) rt.record_input(u);
    return rt;
  }

  void observe(const VectorXd& y) {
    push(y_ini_, y, n_y_);
    y_count_ = std::min(y_count_ + 1, t_ini_);
  }

  // Input applied by whoever is in control; keeps du_ini current before activation.
  void record_input(const VectorXd& u) {
    if (has_u_) {
      push(du_ini_, u - u_prev_, n_u_);
      du_count_ = std::min(du_count_ + 1, t_ini_);
    }
    u_prev_ = u;
    has_u_ = true;
  }

  bool ready() const { return has_u_ && du_count_ == t_ini_ && y_count_ == t_ini_; }

  const VectorXd& du_ini() const { return du_ini_; }
  const VectorXd& y_ini() const { return y_ini_; }
  const VectorXd& u_prev() const { return u_prev_; }

 private:
  // Oldest block first; drops the oldest and appends v at the end.
  static void push(VectorXd& buf, const VectorXd& v, Eigen::Index n) {
    const Eigen::Index len = buf.size();
    std::copy(buf.data() + n, buf.data() + len, buf.data());
    buf.tail(n) = v;
  }

  Eigen::Index n_u_;
  Eigen::Index n_y_;
  std::size_t t_ini_;
  VectorXd du_ini_;
  VectorXd y_ini_;
  VectorXd u_prev_;
  std::size_t du_count_ = 0;
  std::size_t y_count_ = 0;
  bool has_u_ = false;
};

// First optimal increment for a constant reference r_y.
inline VectorXd first_increment(const IspcRuntime& rt, const ControllerGains& g,
                                const VectorXd& r_y) {
  return g.K1 * rt.du_ini() + g.K2 * rt.y_ini() - g.Kr_sum * r_y;
}

// u(k) = u(k-1) + du0; the runtime records the applied input. The latest
// measurement must already have been passed to rt.observe().
inline VectorXd control_step(IspcRuntime& rt, const ControllerGains& g, const VectorXd& r_y) {
  if (!rt.ready()) throw std::logic_error("control_step: iSPC past window not yet filled");
  const VectorXd u = rt.u_prev() + first_increment(rt, g, r_y);
  rt.record_input(u);
  return u;
}

using ExcitationRng = std::mt19937_64;

// Zero-mean uniform white noise on [-amplitude, amplitude] per channel.
inline DqVector excite(const DqVector& u_nominal, ExcitationRng& rng, double amplitude) {
  if (!(amplitude >= 0)) throw std::invalid_argument("excite: amplitude must be >= 0");
  if (amplitude == 0) return u_nominal;
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  const double nd = dist(rng);
  const double nq = dist(rng);
  return {u_nominal.d + nd, u_nominal.q + nq};
}

}  // namespace gcpc::ispc
