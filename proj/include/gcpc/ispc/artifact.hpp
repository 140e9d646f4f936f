#pragma once

// JSON artifact holding an identified predictor and its controller gains, so
// identification and closed-loop runs can be separate invocations.
//
// Layout:
//   { "format": "gcpc-ispc-artifact", "version": 1,
//     "config":    { Ts, T, T_ini, N, n_u, n_y, Q, P, R, pinv_rtol },
//     "rank":      { rows, cols, rank, sigma_max, sigma_min, tolerance, full_row_rank },
//     "training_residual": <double>,
//     "predictor": { "P1": M, "P2": M, "Gamma": M },
//     "gains":     { "K1": M, "K2": M, "Kr": M } }
// where M = { "rows": r, "cols": c, "data": [row-major entries] }.

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

#include "gcpc/ispc/predictor.hpp"

namespace gcpc::ispc {

inline constexpr const char* kArtifactFormat = "gcpc-ispc-artifact";
inline constexpr int kArtifactVersion = 1;

inline nlohmann::json matrix_to_json(const MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw std::invalid_argument("artifact: matrix '" + name + "' needs rows, cols, data");
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::invalid_argument("artifact: matrix '" + name + "' has wrong entry count");
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

struct Artifact {
  IspcConfig config;
  Predictor predictor;
  ControllerGains gains;
};

inline nlohmann::json to_json(const Artifact& a) {
  const auto& c = a.config;
  const auto& r = a.predictor.rank;
  return {
      {"format", kArtifactFormat},
      {"version", kArtifactVersion},
      {"config",
       {{"Ts", c.Ts},
        {"T", c.T},
        {"T_ini", c.T_ini},
        {"N", c.N},
        {"n_u", c.n_u},
        {"n_y", c.n_y},
        {"Q", matrix_to_json(c.Q)},
        {"P", matrix_to_json(c.P)},
        {"R", matrix_to_json(c.R)},
        {"pinv_rtol", c.pinv_rtol}}},
      {"rank",
       {{"rows", r.rows},
        {"cols", r.cols},
        {"rank", r.rank},
        {"sigma_max", r.sigma_max},
        {"sigma_min", r.sigma_min},
        {"tolerance", r.tolerance},
        {"full_row_rank", r.full_row_rank}}},
      {"training_residual", a.predictor.training_residual},
      {"predictor",
       {{"P1", matrix_to_json(a.predictor.P1)},
        {"P2", matrix_to_json(a.predictor.P2)},
        {"Gamma", matrix_to_json(a.predictor.Gamma)}}},
      {"gains",
       {{"K1", matrix_to_json(a.gains.K1)},
        {"K2", matrix_to_json(a.gains.K2)},
        {"Kr", matrix_to_json(a.gains.Kr)}}},
  };
}

inline Artifact artifact_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kArtifactFormat)
    throw std::invalid_argument("artifact: unrecognised format tag");
  if (j.value("version", 0) != kArtifactVersion)
    throw std::invalid_argument("artifact: unsupported version");
  Artifact a;
  const auto& c = j.at("config");
  a.config.Ts = c.at("Ts").get<double>();
  a.config.T = c.at("T").get<std::size_t>();
  a.config.T_ini = c.at("T_ini").get<std::size_t>();
  a.config.N = c.at("N").get<std::size_t>();
  a.config.n_u = c.at("n_u").get<std::size_t>();
  a.config.n_y = c.at("n_y").get<std::size_t>();
  a.config.Q = matrix_from_json(c.at("Q"), "Q");
  a.config.P = matrix_from_json(c.at("P"), "P");
  a.config.R = matrix_from_json(c.at("R"), "R");
  a.config.pinv_rtol = c.value("pinv_rtol", 0.0);

  const auto& r = j.at("rank");
  auto& rr = a.predictor.rank;
  rr.rows = r.at("rows").get<Eigen::Index>();
  rr.cols = r.at("cols").get<Eigen::Index>();
  rr.rank = r.at("rank").get<Eigen::Index>();
  rr.sigma_max = r.at("sigma_max").get<double>();
  rr.sigma_min = r.at("sigma_min").get<double>();
  rr.tolerance = r.at("tolerance").get<double>();
  rr.full_row_rank = r.at("full_row_rank").get<bool>();
  a.predictor.training_residual = j.at("training_residual").get<double>();

  const auto& p = j.at("predictor");
  a.predictor.P1 = matrix_from_json(p.at("P1"), "P1");
  a.predictor.P2 = matrix_from_json(p.at("P2"), "P2");
  a.predictor.Gamma = matrix_from_json(p.at("Gamma"), "Gamma");

  const MatrixXd k0 = matrix_from_json(j.at("gains").at("Kr"), "Kr");
  a.gains = gains_from_first_rows(k0, a.predictor, a.config.n_y);
  return a;
}

inline void save_artifact(const Artifact& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write artifact: " + path);
  out << to_json(a).dump(1) << '\n';
}

inline Artifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read artifact: " + path);
  return artifact_from_json(nlohmann::json::parse(in));
}

}  // namespace gcpc::ispc
