#pragma once

// Least-squares integral multi-step predictor and the analytic unconstrained
// control law built on it.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "gcpc/ispc/hankel.hpp"

namespace gcpc::ispc {

struct RankReport {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index rank = 0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;  // smallest singular value retained by the cutoff
  double tolerance = 0.0;  // absolute cutoff used
  bool full_row_rank = false;
};

inline double default_rtol(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

inline RankReport rank_from_singular_values(const VectorXd& sv, Eigen::Index rows,
                                            Eigen::Index cols, double rtol) {
  RankReport r;
  r.rows = rows;
  r.cols = cols;
  r.sigma_max = sv.size() > 0 ? sv.maxCoeff() : 0.0;
  r.tolerance = (rtol > 0 ? rtol : default_rtol(rows, cols)) * r.sigma_max;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > r.tolerance) {
      ++r.rank;
      r.sigma_min = r.sigma_min == 0.0 ? sv[i] : std::min(r.sigma_min, sv[i]);
    }
  }
  r.full_row_rank = r.sigma_max > 0 && r.rank == rows;
  return r;
}

// Numerical rank of [dUp; Yp; dUf].
inline RankReport check_persistency(const HankelSet& h, double rtol = 0.0) {
  const MatrixXd z = h.regressor();
  const Eigen::BDCSVD<MatrixXd> svd(z);
  return rank_from_singular_values(svd.singularValues(), z.rows(), z.cols(), rtol);
}

struct Predictor {
  MatrixXd P1;     // (N n_y) x (T_ini n_u)
  MatrixXd P2;     // (N n_y) x (T_ini n_y)
  MatrixXd Gamma;  // (N n_y) x (N n_u)
  double training_residual = 0.0;  // ||Yf - Theta Z||_F / ||Yf||_F
  RankReport rank;

  MatrixXd theta() const {
    MatrixXd t(P1.rows(), P1.cols() + P2.cols() + Gamma.cols());
    t << P1, P2, Gamma;
    return t;
  }

  // Predicted y(k+1..k+N) stacked.
  VectorXd predict(const VectorXd& du_ini, const VectorXd& y_ini, const VectorXd& du_future) const {
    return P1 * du_ini + P2 * y_ini + Gamma * du_future;
  }
};

// Minimum-norm solution of Theta [dUp; Yp; dUf] = Yf via a truncated SVD of
// the regressor. Rank deficiency is tolerated and reported.
inline Predictor estimate_predictor(const HankelSet& h, double rtol = 0.0) {
  const MatrixXd z = h.regressor();
  const Eigen::BDCSVD<MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();

  Predictor p;
  p.rank = rank_from_singular_values(sv, z.rows(), z.cols(), rtol);

  VectorXd inv = VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > p.rank.tolerance) inv[i] = 1.0 / sv[i];

  // Theta = Yf V S^+ U^T
  const MatrixXd theta =
      ((h.Yf * svd.matrixV()) * inv.asDiagonal()) * svd.matrixU().transpose();

  const Eigen::Index a = h.dUp.rows();
  const Eigen::Index b = h.Yp.rows();
  const Eigen::Index c = h.dUf.rows();
  p.P1 = theta.leftCols(a);
  p.P2 = theta.middleCols(a, b);
  p.Gamma = theta.rightCols(c);

  const double yf_norm = h.Yf.norm();
  const double res = (h.Yf - theta * z).norm();
  p.training_residual = yf_norm > 0 ? res / yf_norm : res;
  return p;
}

// Omega = diag(Q, ..., Q, P), N blocks.
inline MatrixXd output_weight(const IspcConfig& cfg) {
  const auto ny = static_cast<Eigen::Index>(cfg.n_y);
  const auto N = static_cast<Eigen::Index>(cfg.N);
  MatrixXd omega = MatrixXd::Zero(N * ny, N * ny);
  for (Eigen::Index i = 0; i < N; ++i)
    omega.block(i * ny, i * ny, ny, ny) = (i + 1 == N) ? cfg.P : cfg.Q;
  return omega;
}

// Psi = diag(R, ..., R), N blocks.
inline MatrixXd input_weight(const IspcConfig& cfg) {
  const auto nu = static_cast<Eigen::Index>(cfg.n_u);
  const auto N = static_cast<Eigen::Index>(cfg.N);
  MatrixXd psi = MatrixXd::Zero(N * nu, N * nu);
  for (Eigen::Index i = 0; i < N; ++i) psi.block(i * nu, i * nu, nu, nu) = cfg.R;
  return psi;
}

// Full-sequence gain K = -(Psi + Gamma' Omega Gamma)^{-1} Gamma' Omega.
inline MatrixXd sequence_gain(const MatrixXd& gamma, const IspcConfig& cfg) {
  const MatrixXd omega = output_weight(cfg);
  const MatrixXd psi = input_weight(cfg);
  if (gamma.rows() != omega.rows() || gamma.cols() != psi.rows())
    throw std::invalid_argument("sequence_gain: Gamma dimensions do not match N, n_u, n_y");
  const MatrixXd gto = gamma.transpose() * omega;
  const MatrixXd hess = psi + gto * gamma;
  const Eigen::LLT<MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("compute_gains: Psi + Gamma' Omega Gamma is not positive definite");
  return -llt.solve(gto);
}

// Gains acting on the first input increment only:
//   du0 = K1 du_ini + K2 y_ini - Kr col(r, ..., r)
struct ControllerGains {
  MatrixXd K1;  // n_u x (T_ini n_u)
  MatrixXd K2;  // n_u x (T_ini n_y)
  MatrixXd Kr;  // n_u x (N n_y)
  MatrixXd Kr_sum;  // n_u x n_y, Kr summed over blocks: the gain on a constant reference

  std::size_t n_u() const { return static_cast<std::size_t>(K1.rows()); }
};

inline ControllerGains gains_from_first_rows(const MatrixXd& k0, const Predictor& p,
                                            std::size_t n_y) {
  ControllerGains g;
  g.K1 = k0 * p.P1;
  g.K2 = k0 * p.P2;
  g.Kr = k0;
  const auto ny = static_cast<Eigen::Index>(n_y);
  g.Kr_sum = MatrixXd::Zero(k0.rows(), ny);
  for (Eigen::Index i = 0; i < k0.cols() / ny; ++i) g.Kr_sum += k0.middleCols(i * ny, ny);
  return g;
}

inline ControllerGains compute_gains(const Predictor& p, const IspcConfig& cfg) {
  const MatrixXd k = sequence_gain(p.Gamma, cfg);
  return gains_from_first_rows(k.topRows(static_cast<Eigen::Index>(cfg.n_u)), p, cfg.n_y);
}

}  // namespace gcpc::ispc
