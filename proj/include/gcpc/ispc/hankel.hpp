#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcpc::ispc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct IspcConfig {
  double Ts = 1e-3;
  std::size_t T = 10000;  // number of Hankel columns
  std::size_t T_ini = 25;
  std::size_t N = 50;
  std::size_t n_u = 2;
  std::size_t n_y = 2;
  MatrixXd Q = 8.5 * Eigen::Vector2d(0.85, 1.30).asDiagonal().toDenseMatrix();
  MatrixXd P = 8.5 * Eigen::Vector2d(0.85, 1.30).asDiagonal().toDenseMatrix();
  MatrixXd R = 120.0 * Eigen::Vector2d(1.2, 1.0).asDiagonal().toDenseMatrix();
  // Relative singular-value cutoff for the pseudo-inverse; <= 0 selects
  // max(rows, cols) * machine epsilon.
  double pinv_rtol = 0.0;

  // Raw (u, y) samples needed for T columns: one extra sample seeds the first increment.
  std::size_t required_samples() const { return T + T_ini + N + 1; }
};

// Ordered input/output record. Sample k pairs y(k), measured at t_k, with
// u(k), applied over [t_k, t_k + Ts).
struct IoLog {
  std::vector<VectorXd> u_seq;
  std::vector<VectorXd> y_seq;

  std::size_t length() const { return u_seq.size(); }
  void push(VectorXd u, VectorXd y) {
    u_seq.push_back(std::move(u));
    y_seq.push_back(std::move(y));
  }
};

struct HankelSet {
  MatrixXd dUp;  // (T_ini n_u) x T
  MatrixXd Yp;   // (T_ini n_y) x T
  MatrixXd dUf;  // (N n_u) x T
  MatrixXd Yf;   // (N n_y) x T

  // Stacked regressor [dUp; Yp; dUf].
  MatrixXd regressor() const {
    MatrixXd z(dUp.rows() + Yp.rows() + dUf.rows(), dUp.cols());
    z << dUp, Yp, dUf;
    return z;
  }
};

inline std::vector<VectorXd> increments(const std::vector<VectorXd>& u_seq) {
  if (u_seq.size() < 2)
    throw std::invalid_argument("increments: need at least 2 samples, got " +
                                std::to_string(u_seq.size()));
  std::vector<VectorXd> du;
  du.reserve(u_seq.size() - 1);
  for (std::size_t k = 1; k < u_seq.size(); ++k) du.push_back(u_seq[k] - u_seq[k - 1]);
  return du;
}

// Builds the four data matrices from the most recent required_samples() of
// the log. In increment time k (du[k] = u(k) - u(k-1), paired with y(k)),
// column c uses k' = T_ini + c:
//   dUp = du(k'-T_ini .. k'-1)   Yp = y(k'-T_ini+1 .. k')
//   dUf = du(k' .. k'+N-1)       Yf = y(k'+1 .. k'+N)
inline HankelSet build_hankel(const IoLog& log, const IspcConfig& cfg) {
  if (log.u_seq.size() != log.y_seq.size())
    throw std::invalid_argument("build_hankel: u and y logs differ in length");
  const std::size_t need = cfg.required_samples();
  if (log.length() < need) {
    std::ostringstream msg;
    msg << "build_hankel: insufficient data, required " << need << " samples (T=" << cfg.T
        << ", T_ini=" << cfg.T_ini << ", N=" << cfg.N << "), available " << log.length();
    throw std::invalid_argument(msg.str());
  }
  const std::size_t base = log.length() - need;
  const auto nu = static_cast<Eigen::Index>(cfg.n_u);
  const auto ny = static_cast<Eigen::Index>(cfg.n_y);

  // Increment-time accessors over the selected window.
  auto du = [&](std::size_t k) -> VectorXd {
    return log.u_seq[base + k + 1] - log.u_seq[base + k];
  };
  auto y = [&](std::size_t k) -> const VectorXd& { return log.y_seq[base + k + 1]; };

  const auto T = static_cast<Eigen::Index>(cfg.T);
  const auto Tini = static_cast<Eigen::Index>(cfg.T_ini);
  const auto N = static_cast<Eigen::Index>(cfg.N);
  HankelSet h{MatrixXd(Tini * nu, T), MatrixXd(Tini * ny, T), MatrixXd(N * nu, T),
              MatrixXd(N * ny, T)};

  for (Eigen::Index c = 0; c < T; ++c) {
    const auto kp = static_cast<std::size_t>(Tini + c);
    for (Eigen::Index i = 0; i < Tini; ++i) {
      h.dUp.block(i * nu, c, nu, 1) = du(kp - cfg.T_ini + static_cast<std::size_t>(i));
      h.Yp.block(i * ny, c, ny, 1) = y(kp - cfg.T_ini + 1 + static_cast<std::size_t>(i));
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      h.dUf.block(i * nu, c, nu, 1) = du(kp + static_cast<std::size_t>(i));
      h.Yf.block(i * ny, c, ny, 1) = y(kp + 1 + static_cast<std::size_t>(i));
    }
  }
  return h;
}

// Enforces the sizing rules N >= T_ini >= n_u + n_y and
// T >= (T_ini + N) n_u + n_u + n_y, plus weight shapes and definiteness. Throws
// std::invalid_argument naming the violated field.
inline void validate(const IspcConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(cfg.Ts > 0)) fail("ispc.Ts must be > 0");
  if (cfg.n_u == 0 || cfg.n_y == 0) fail("ispc.n_u and ispc.n_y must be positive");
  const std::size_t n_i = cfg.n_u + cfg.n_y;
  if (cfg.T_ini < n_i) fail("ispc.T_ini must be >= n_u + n_y");
  if (cfg.N < cfg.T_ini) fail("ispc.N must be >= ispc.T_ini");
  if (cfg.T < (cfg.T_ini + cfg.N) * cfg.n_u + n_i)
    fail("ispc.T must be >= (T_ini + N) * n_u + n_u + n_y = " +
         std::to_string((cfg.T_ini + cfg.N) * cfg.n_u + n_i));
  auto square = [](const MatrixXd& m, std::size_t n) {
    return m.rows() == static_cast<Eigen::Index>(n) && m.cols() == static_cast<Eigen::Index>(n);
  };
  if (!square(cfg.Q, cfg.n_y)) fail("ispc.Q must be n_y x n_y");
  if (!square(cfg.P, cfg.n_y)) fail("ispc.P must be n_y x n_y");
  if (!square(cfg.R, cfg.n_u)) fail("ispc.R must be n_u x n_u");
  auto symmetric = [](const MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  };
  if (!symmetric(cfg.Q) || !symmetric(cfg.P) || !symmetric(cfg.R))
    fail("ispc weights Q, P, R must be symmetric");
  auto min_eig = [](const MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff();
  };
  if (min_eig(cfg.Q) < 0) fail("ispc.Q must be positive semi-definite");
  if (min_eig(cfg.P) < 0) fail("ispc.P must be positive semi-definite");
  if (!(min_eig(cfg.R) > 0)) fail("ispc.R must be positive definite");
}

}  // namespace gcpc::ispc
