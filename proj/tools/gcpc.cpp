#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "gcpc/cli.hpp"

int main(int argc, char** argv) {
  using namespace gcpc::cli;
  CLI::App app{"Grid-following converter fault simulator with dual-PI and iSPC outer loops"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Options o;
  std::uint64_t seed = 0;
  std::string mode;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Override rng_seed");
    sub->add_option("--mode", mode, "Override controller mode (CC, FT_ISPC, REGULAR_ISPC)")
        ->check(CLI::IsMember({"CC", "FT_ISPC", "REGULAR_ISPC"}));
    sub->add_option("--jobs", o.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  };

  auto* sim = app.add_subcommand("simulate", "Run one fault scenario");
  common(sim);
  auto* ident = app.add_subcommand("identify", "Identify the nominal-grid iSPC predictor");
  common(ident);
  auto* sweep = app.add_subcommand("sweep", "Stability sweep and critical reactance");
  common(sweep);
  auto* met = app.add_subcommand("metrics", "Recompute metrics from a trace");
  common(met);
  met->add_option("--trace", o.trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  met->add_option("--cc-trace", o.cc_trace_path, "CC trace for the tube radius")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  for (auto* sub : {sim, ident, sweep, met}) {
    if (sub->count_all() == 0) continue;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--mode")) o.mode = mode;
  }

  if (*sim) return cmd_simulate(o, std::cout, std::cerr);
  if (*ident) return cmd_identify(o, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(o, std::cout, std::cerr);
  return cmd_metrics(o, std::cout, std::cerr);
}
