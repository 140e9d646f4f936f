#pragma once

// Stability sweeps over the fault reactance and bisection for the critical
// (largest stable) value.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gcpc/scenario.hpp"

namespace gcpc {

struct SweepPoint {
  double Xg = 0.0;
  bool stable = false;
};

// Classifies one run of `mode` with the fault reactance set to Xg. The tube
// radius comes from the CC run at the same Xg.
inline bool classify_at(ScenarioConfig cfg, ControllerMode mode, double Xg,
                        const ScenarioContext& ctx = {}) {
  cfg.mode = mode;
  cfg.fault.Xg_fault = Xg;
  return run_scenario(cfg, ctx).metrics.stable;
}

// Prepares the shared read-only inputs of a sweep: the nominal equilibrium and,
// for regular iSPC, the nominal-grid identification.
struct SweepContext {
  PlantState equilibrium;
  std::optional<Identification> regular;

  ScenarioContext scenario() const {
    ScenarioContext c;
    c.equilibrium = equilibrium;
    c.regular = regular ? &*regular : nullptr;
    return c;
  }
};

inline SweepContext prepare_sweep(const ScenarioConfig& cfg, ControllerMode mode) {
  SweepContext sc;
  sc.equilibrium = init_steady_state(cfg.plant, cfg.control, cfg.plant.Pwind, cfg.dt);
  if (mode == ControllerMode::REGULAR_ISPC) sc.regular = identify_regular(cfg);
  return sc;
}

// Evaluates every Xg in `grid`, fanning runs out over `jobs` worker threads.
inline std::vector<SweepPoint> sweep_grid(const ScenarioConfig& cfg, ControllerMode mode,
                                          const std::vector<double>& grid, unsigned jobs,
                                          const SweepContext& sc) {
  std::vector<SweepPoint> out(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    const ScenarioContext ctx = sc.scenario();
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        out[i] = {grid[i], classify_at(cfg, mode, grid[i], ctx)};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

class BracketError : public std::invalid_argument {
 public:
  BracketError(double lo, bool lo_stable, double hi, bool hi_stable)
      : std::invalid_argument(describe(lo, lo_stable, hi, hi_stable)),
        lo_{lo, lo_stable},
        hi_{hi, hi_stable} {}

  SweepPoint lo() const { return lo_; }
  SweepPoint hi() const { return hi_; }

 private:
  static std::string describe(double lo, bool ls, double hi, bool hs) {
    std::ostringstream s;
    s << "critical_reactance: range does not bracket the stability boundary (Xg=" << lo << ": "
      << (ls ? "stable" : "unstable") << ", Xg=" << hi << ": " << (hs ? "stable" : "unstable")
      << "; need stable low end and unstable high end)";
    return s.str();
  }
  SweepPoint lo_;
  SweepPoint hi_;
};

struct CriticalResult {
  ControllerMode mode = ControllerMode::CC;
  double critical = 0.0;  // largest Xg classified stable
  double unstable_bound = 0.0;
  std::vector<SweepPoint> evaluations;
};

// Bisection on the fault reactance to within `tol`.
inline CriticalResult critical_reactance(const ScenarioConfig& cfg, ControllerMode mode, double lo,
                                         double hi, double tol, const SweepContext& sc) {
  if (!(tol > 0)) throw std::invalid_argument("critical_reactance: tol must be > 0");
  CriticalResult r;
  r.mode = mode;
  const ScenarioContext ctx = sc.scenario();
  auto eval = [&](double x) {
    const bool s = classify_at(cfg, mode, x, ctx);
    r.evaluations.push_back({x, s});
    return s;
  };
  if (!(hi > lo)) throw BracketError(lo, lo <= hi && eval(lo), hi, false);
  const bool lo_stable = eval(lo);
  const bool hi_stable = eval(hi);
  if (!lo_stable || hi_stable) throw BracketError(lo, lo_stable, hi, hi_stable);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid) ? lo : hi) = mid;
  }
  r.critical = lo;
  r.unstable_bound = hi;
  return r;
}

inline CriticalResult critical_reactance(const ScenarioConfig& cfg, ControllerMode mode, double lo,
                                         double hi, double tol = 5e-4) {
  return critical_reactance(cfg, mode, lo, hi, tol, prepare_sweep(cfg, mode));
}

}  // namespace gcpc
