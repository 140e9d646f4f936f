#pragma once

// Subcommand implementations behind the `gcpc` executable. Each returns the
// process exit code and reports diagnostics on `err`.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gcpc/config.hpp"
#include "gcpc/io.hpp"
#include "gcpc/ispc/artifact.hpp"
#include "gcpc/scenario.hpp"
#include "gcpc/sweep.hpp"

namespace gcpc::cli {

inline constexpr const char* kToolName = "gcpc";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kBadConfig = 2,
  kDiverged = 3,
  kRankDeficient = 4,
  kNoBracket = 5,
  kIoError = 6,
};

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  unsigned jobs = 1;
  std::string trace_path;     // metrics
  std::string cc_trace_path;  // metrics, optional
};

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace detail {

struct Loaded {
  RunConfig rc;
  std::string text;
};

inline std::optional<Loaded> load(const Options& o, std::ostream& err) {
  try {
    Loaded l{load_run_config(o.config_path), read_file(o.config_path)};
    if (o.seed) l.rc.scenario.rng_seed = *o.seed;
    if (o.mode) l.rc.scenario.mode = parse_controller_mode(*o.mode);
    validate(l.rc.scenario);
    return l;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

inline bool prepare_out_dir(const std::string& dir, std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path probe = std::filesystem::path(dir) / ".write_probe";
  std::ofstream f(probe);
  if (ec || !f) {
    err << "error: output directory not writable: " << dir << '\n';
    return false;
  }
  f.close();
  std::filesystem::remove(probe, ec);
  return true;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

inline nlohmann::json manifest(const std::string& sub, const Options& o, const Loaded& l,
                               nlohmann::json timing, std::vector<std::string> outputs) {
  nlohmann::json cfg_json;
  try {
    cfg_json = nlohmann::json::parse(l.text, nullptr, true, true);
  } catch (...) {
    cfg_json = l.text;
  }
  return {
      {"tool", kToolName},
      {"version", kToolVersion},
      {"subcommand", sub},
      {"config_path", o.config_path},
      {"config_hash", "fnv1a64:" + fnv1a_hex(l.text)},
      {"seed", l.rc.scenario.rng_seed},
      {"mode", to_string(l.rc.scenario.mode)},
      {"jobs", o.jobs},
      {"outputs", outputs},
      {"timing", std::move(timing)},
      {"config", std::move(cfg_json)},
  };
}

inline nlohmann::json rank_json(const ispc::RankReport& r) {
  return {{"rows", r.rows},           {"cols", r.cols},
          {"rank", r.rank},           {"sigma_max", r.sigma_max},
          {"sigma_min", r.sigma_min}, {"tolerance", r.tolerance},
          {"full_row_rank", r.full_row_rank}};
}

inline Identification from_artifact(const ispc::Artifact& a, const ispc::IspcConfig& want) {
  if (a.config.T_ini != want.T_ini || a.config.N != want.N || a.config.n_u != want.n_u ||
      a.config.n_y != want.n_y)
    throw std::invalid_argument("artifact dimensions (T_ini, N, n_u, n_y) do not match config");
  Identification id;
  id.config = a.config;
  id.predictor = a.predictor;
  id.gains = a.gains;
  return id;
}

using Clock = std::chrono::steady_clock;

}  // namespace detail

inline int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(o, err);
  if (!loaded) return kBadConfig;
  if (!detail::prepare_out_dir(o.out_dir, err)) return kIoError;
  const ScenarioConfig& cfg = loaded->rc.scenario;
  const auto t0 = detail::Clock::now();
  try {
    ScenarioContext ctx;
    std::optional<Identification> pre;
    if (cfg.mode == ControllerMode::REGULAR_ISPC && loaded->rc.artifact) {
      pre = detail::from_artifact(ispc::load_artifact(*loaded->rc.artifact),
                                  cfg.ispc_for(ControllerMode::REGULAR_ISPC));
      ctx.regular = &*pre;
    }
    const ScenarioResult res = run_scenario(cfg, ctx);
    const std::filesystem::path dir(o.out_dir);
    {
      std::ofstream f(dir / "trace.csv");
      io::write_trace_csv(res.trace, f);
    }
    detail::write_json(dir / "metrics.json", io::metrics_to_json(res.metrics));

    nlohmann::json timing{
        {"wall_s", std::chrono::duration<double>(detail::Clock::now() - t0).count()},
        {"control_steps", res.control_timing.steps},
        {"control_step_mean_s", res.control_timing.mean_s()},
        {"control_step_max_s", res.control_timing.max_s},
    };
    if (res.identification) {
      timing["identification_s"] = res.identification->identification_s;
      timing["gains_s"] = res.identification->gains_s;
    }
    detail::write_json(dir / "manifest.json",
                       detail::manifest("simulate", o, *loaded, timing,
                                        {"trace.csv", "metrics.json", "manifest.json"}));
    out << "mode=" << to_string(cfg.mode) << " stable=" << (res.metrics.stable ? "true" : "false")
        << " samples=" << res.trace.size() << '\n';
    if (res.trace.diverged) {
      err << "error: simulation diverged at t=" << res.trace.t.back()
          << " s; metrics incomplete\n";
      return kDiverged;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

inline int cmd_identify(const Options& o, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(o, err);
  if (!loaded) return kBadConfig;
  if (!detail::prepare_out_dir(o.out_dir, err)) return kIoError;
  ScenarioConfig cfg = loaded->rc.scenario;
  try {
    const ispc::IspcConfig ic = cfg.ispc_for(ControllerMode::REGULAR_ISPC);
    ispc::validate(ic);
    const auto t0 = detail::Clock::now();
    const ispc::IoLog log = collect_nominal_data(cfg, ic.required_samples());
    const double collect_s = std::chrono::duration<double>(detail::Clock::now() - t0).count();
    const Identification id = identify_from_log(log, ic);

    const std::filesystem::path dir(o.out_dir);
    detail::write_json(dir / "rank.json", detail::rank_json(id.predictor.rank));
    ispc::save_artifact({ic, id.predictor, id.gains}, (dir / "artifact.json").string());
    const nlohmann::json timing{{"data_collection_s", collect_s},
                                {"identification_s", id.identification_s},
                                {"gains_s", id.gains_s}};
    detail::write_json(dir / "manifest.json",
                       detail::manifest("identify", o, *loaded, timing,
                                        {"artifact.json", "rank.json", "manifest.json"}));
    const auto& r = id.predictor.rank;
    out << "rank=" << r.rank << "/" << r.rows << " residual=" << id.predictor.training_residual
        << '\n';
    if (!r.full_row_rank) {
      err << "error: identification data not persistently exciting (rank " << r.rank << " of "
          << r.rows << "); see rank.json\n";
      return kRankDeficient;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(o, err);
  if (!loaded) return kBadConfig;
  if (!detail::prepare_out_dir(o.out_dir, err)) return kIoError;
  const RunConfig& rc = loaded->rc;
  std::vector<ControllerMode> modes = rc.sweep.modes;
  if (o.mode) modes = {parse_controller_mode(*o.mode)};

  const std::filesystem::path dir(o.out_dir);
  std::ofstream csv(dir / "sweep.csv");
  csv << "mode,Xg,stable\n";
  nlohmann::json critical = nlohmann::json::object();
  int code = kOk;
  const auto t0 = detail::Clock::now();

  for (ControllerMode mode : modes) {
    const SweepRange range = rc.sweep.ranges.at(mode);
    ScenarioConfig cfg = rc.scenario;
    cfg.mode = mode;
    try {
      const SweepContext sc = prepare_sweep(cfg, mode);
      std::vector<double> grid;
      const std::size_t n = std::max<std::size_t>(rc.sweep.grid_points, 2);
      if (range.hi > range.lo)
        for (std::size_t i = 0; i < n; ++i)
          grid.push_back(range.lo + (range.hi - range.lo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
      std::vector<SweepPoint> points = sweep_grid(cfg, mode, grid, o.jobs, sc);

      nlohmann::json entry{{"range", {range.lo, range.hi}}, {"tol", rc.sweep.tol}};
      try {
        const CriticalResult cr = critical_reactance(cfg, mode, range.lo, range.hi, rc.sweep.tol, sc);
        points.insert(points.end(), cr.evaluations.begin(), cr.evaluations.end());
        entry["critical"] = cr.critical;
        entry["unstable_bound"] = cr.unstable_bound;
        entry["evaluations"] = cr.evaluations.size();
        out << to_string(mode) << " critical Xg=" << cr.critical << '\n';
      } catch (const BracketError& e) {
        entry["error"] = e.what();
        entry["endpoints"] = {{{"Xg", e.lo().Xg}, {"stable", e.lo().stable}},
                              {{"Xg", e.hi().Xg}, {"stable", e.hi().stable}}};
        err << "error: " << to_string(mode) << ": " << e.what() << '\n';
        code = kNoBracket;
      }
      std::sort(points.begin(), points.end(),
                [](const SweepPoint& a, const SweepPoint& b) { return a.Xg < b.Xg; });
      points.erase(std::unique(points.begin(), points.end(),
                               [](const SweepPoint& a, const SweepPoint& b) { return a.Xg == b.Xg; }),
                   points.end());
      for (const auto& p : points)
        csv << to_string(mode) << ',' << io::format_g9(p.Xg) << ',' << (p.stable ? 1 : 0) << '\n';
      critical[to_string(mode)] = entry;
    } catch (const std::exception& e) {
      err << "error: " << to_string(mode) << ": " << e.what() << '\n';
      critical[to_string(mode)] = {{"error", e.what()}};
      code = kIoError;
    }
  }
  csv.close();
  detail::write_json(dir / "critical.json", critical);
  detail::write_json(
      dir / "manifest.json",
      detail::manifest("sweep", o, *loaded,
                       {{"wall_s", std::chrono::duration<double>(detail::Clock::now() - t0).count()}},
                       {"sweep.csv", "critical.json", "manifest.json"}));
  return code;
}

inline int cmd_metrics(const Options& o, std::ostream& out, std::ostream& err) {
  auto loaded = detail::load(o, err);
  if (!loaded) return kBadConfig;
  if (!detail::prepare_out_dir(o.out_dir, err)) return kIoError;
  const ScenarioConfig& cfg = loaded->rc.scenario;
  try {
    std::ifstream tf(o.trace_path);
    if (!tf) throw std::runtime_error("cannot open trace " + o.trace_path);
    const Trace tr = io::read_trace_csv(tf, cfg.ispc.Ts);
    if (tr.size() == 0) throw std::invalid_argument("trace csv: no data rows");

    const bool pure_cc = std::all_of(tr.controller.begin(), tr.controller.end(),
                                     [](ControllerTag t) { return t == ControllerTag::cc; });
    TubeRadii tube;
    if (!o.cc_trace_path.empty()) {
      std::ifstream cf(o.cc_trace_path);
      if (!cf) throw std::runtime_error("cannot open trace " + o.cc_trace_path);
      tube = tube_from_cc_trace(io::read_trace_csv(cf, cfg.ispc.Ts), cfg.fault);
    } else if (pure_cc) {
      tube = tube_from_cc_trace(tr, cfg.fault);
    } else {
      ScenarioConfig cc_cfg = cfg;
      cc_cfg.mode = ControllerMode::CC;
      tube = tube_from_cc_trace(simulate(cc_cfg).trace, cfg.fault);
    }

    std::optional<double> activation;
    const bool fault_triggered =
        std::find(tr.controller.begin(), tr.controller.end(), ControllerTag::identifying) !=
        tr.controller.end();
    if (fault_triggered) {
      const auto it = std::find(tr.controller.begin(), tr.controller.end(), ControllerTag::ispc);
      if (it != tr.controller.end()) activation = tr.t[static_cast<std::size_t>(it - tr.controller.begin())];
    }
    const Metrics m =
        compute_metrics(tr, cfg.fault, cfg.control.refs, tube, cfg.metric_window, activation);
    const std::filesystem::path dir(o.out_dir);
    detail::write_json(dir / "metrics.json", io::metrics_to_json(m));
    detail::write_json(dir / "manifest.json",
                       detail::manifest("metrics", o, *loaded, {{"trace", o.trace_path}},
                                        {"metrics.json", "manifest.json"}));
    out << "stable=" << (m.stable ? "true" : "false") << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

}  // namespace gcpc::cli
