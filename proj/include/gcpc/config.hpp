#pragma once

// JSON run configuration. Every section except `fault` is optional and
// defaults to the nominal converter, PI gains and iSPC weights; `fault` must
// give all of t_start, t_clear, Xg and Vg. Unknown keys are rejected. See
// README.md for the full schema.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gcpc/scenario.hpp"

namespace gcpc {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SweepRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SweepSettings {
  std::vector<ControllerMode> modes{ControllerMode::CC, ControllerMode::REGULAR_ISPC};
  std::map<ControllerMode, SweepRange> ranges{
      {ControllerMode::CC, {0.05, 0.30}},
      {ControllerMode::REGULAR_ISPC, {0.18, 0.80}},
      {ControllerMode::FT_ISPC, {0.05, 0.60}},
  };
  double tol = 5e-4;
  std::size_t grid_points = 11;
};

struct RunConfig {
  ScenarioConfig scenario;
  SweepSettings sweep;
  std::optional<std::string> artifact;  // precomputed regular-iSPC artifact
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    out = get<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(field(key), "missing required field");
    return get<T>(key);
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), field(key));
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
  }

 private:
  template <class T>
  T get(const std::string& key) const {
    const auto& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0))
          throw std::invalid_argument("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Eigen::MatrixXd read_matrix(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  if (cols == 0) throw ConfigError(field, "must be a non-empty array of rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(field, "rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw ConfigError(field, "entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

inline void read_pi(Section s, PiGains& g) {
  s.read("kp", g.kp);
  s.read("ki", g.ki);
  s.reject_unknown();
  if (g.kp < 0) throw ConfigError(s.field("kp"), "must be >= 0");
  if (g.ki < 0) throw ConfigError(s.field("ki"), "must be >= 0");
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
  using detail::Section;
  RunConfig rc;
  ScenarioConfig& c = rc.scenario;
  Section top(root, "");

  if (top.has("controller_mode"))
    try {
      c.mode = parse_controller_mode(top.require<std::string>("controller_mode"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("controller_mode", e.what());
    }
  top.read("t_end", c.t_end);
  top.read("dt", c.dt);
  top.read("detection_delay", c.detection_delay);
  top.read("excitation_amplitude", c.excitation_amplitude);
  top.read("rng_seed", c.rng_seed);
  top.read("metric_window", c.metric_window);

  if (!top.has("fault")) throw ConfigError("fault", "missing required section");
  {
    Section f = top.sub("fault");
    c.fault.t_start = f.require<double>("t_start");
    c.fault.t_clear = f.require<double>("t_clear");
    c.fault.Xg_fault = f.require<double>("Xg");
    c.fault.Vg_fault = f.require<double>("Vg");
    f.reject_unknown();
    if (!(c.fault.t_start >= 0)) throw ConfigError("fault.t_start", "must be >= 0");
    if (!(c.fault.t_clear > c.fault.t_start))
      throw ConfigError("fault.t_clear", "must exceed fault.t_start");
    if (!(c.fault.Xg_fault >= 0)) throw ConfigError("fault.Xg", "must be >= 0");
    if (!(c.fault.Vg_fault >= 0)) throw ConfigError("fault.Vg", "must be >= 0");
  }

  if (top.has("plant")) {
    Section p = top.sub("plant");
    auto& pp = c.plant;
    p.read("omega0", pp.omega0);
    p.read("Xf", pp.Xf);
    p.read("Rf", pp.Rf);
    p.read("Bf", pp.Bf);
    p.read("Xca", pp.Xca);
    p.read("Rca", pp.Rca);
    p.read("Xg", pp.Xg);
    p.read("Vg", pp.Vg);
    p.read("Cdc", pp.Cdc);
    p.read("Vdc2_base", pp.Vdc2_base);
    p.read("Pbase", pp.Pbase);
    p.read("Pwind", pp.Pwind);
    p.read("Kpll_p", pp.Kpll_p);
    p.read("Kpll_i", pp.Kpll_i);
    p.reject_unknown();
  }

  if (top.has("control")) {
    Section s = top.sub("control");
    auto& g = c.control.gains;
    if (s.has("current")) detail::read_pi(s.sub("current"), g.current);
    if (s.has("dc_link")) detail::read_pi(s.sub("dc_link"), g.dc_link);
    if (s.has("voltage")) detail::read_pi(s.sub("voltage"), g.voltage);
    s.read("l_tilde", g.l_tilde);
    s.read("vdc2_ref", c.control.refs.vdc2_ref);
    s.read("vpcc_ref", c.control.refs.vpcc_ref);
    s.reject_unknown();
  }

  if (top.has("ispc")) {
    Section s = top.sub("ispc");
    auto& ic = c.ispc;
    s.read("Ts", ic.Ts);
    s.read("T_ft", c.T_ft);
    s.read("T_regular", c.T_regular);
    s.read("T_ini", ic.T_ini);
    s.read("N", ic.N);
    s.read("pinv_rtol", ic.pinv_rtol);
    if (s.has("Q")) ic.Q = detail::read_matrix(s.raw("Q"), s.field("Q"));
    if (s.has("P")) ic.P = detail::read_matrix(s.raw("P"), s.field("P"));
    if (s.has("R")) ic.R = detail::read_matrix(s.raw("R"), s.field("R"));
    if (s.has("artifact")) rc.artifact = s.require<std::string>("artifact");
    s.reject_unknown();
  }

  if (top.has("sweep")) {
    Section s = top.sub("sweep");
    s.read("tol", rc.sweep.tol);
    s.read("grid_points", rc.sweep.grid_points);
    if (s.has("modes")) {
      const auto& arr = s.raw("modes");
      if (!arr.is_array() || arr.empty())
        throw ConfigError(s.field("modes"), "must be a non-empty array");
      rc.sweep.modes.clear();
      for (const auto& m : arr) {
        try {
          rc.sweep.modes.push_back(parse_controller_mode(m.get<std::string>()));
        } catch (const std::exception& e) {
          throw ConfigError(s.field("modes"), e.what());
        }
      }
    }
    if (s.has("ranges")) {
      Section r = s.sub("ranges");
      for (ControllerMode m :
           {ControllerMode::CC, ControllerMode::FT_ISPC, ControllerMode::REGULAR_ISPC}) {
        const std::string key = to_string(m);
        if (!r.has(key)) continue;
        const auto& v = r.raw(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
          throw ConfigError(r.field(key), "must be [low, high]");
        rc.sweep.ranges[m] = {v[0].get<double>(), v[1].get<double>()};
      }
      r.reject_unknown();
    }
    s.reject_unknown();
    if (!(rc.sweep.tol > 0)) throw ConfigError("sweep.tol", "must be > 0");
  }
  top.reject_unknown();

  try {
    validate(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    // Validation messages start with the offending field name.
    const std::string msg = e.what();
    std::string field = msg.substr(0, msg.find(' '));
    if (!field.empty() && field.back() == ':') field.pop_back();
    throw ConfigError(field, msg);
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace gcpc
