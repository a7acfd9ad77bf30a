#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "adello/experiment.hpp"

namespace fs = std::filesystem;

namespace {

// Relative output paths are resolved against ADELLO_OUTPUT_ROOT when set.
std::string resolve_output(const std::string& dir) {
  const char* root = std::getenv("ADELLO_OUTPUT_ROOT");
  if (root == nullptr || fs::path(dir).is_absolute()) return dir;
  return (fs::path(root) / dir).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-tailed semi-supervised learning lab: distribution-alignment "
               "training on synthetic Gaussian-mixture tasks"};
  app.require_subcommand(1);

  std::string spec_path, dir, run_id, summary_path;
  int jobs = 1;
  int bins = 15;
  int final_window = 10;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  bool diagnostics = false;

  auto* cmd_run = app.add_subcommand("run", "Execute the sweep described by a spec file");
  cmd_run->add_option("spec", spec_path, "experiment spec file")->required();
  cmd_run->add_option("--jobs", jobs, "max concurrent runs");
  cmd_run->add_flag("--diagnostics", diagnostics, "enable hidden-label diagnostics");
  cmd_run->add_option("--seed-override", seed_override, "replace the spec's seed list")
      ->each([&](const std::string&) { has_seed_override = true; });

  auto* cmd_sum = app.add_subcommand("summarize", "Rebuild summary.csv from run metrics");
  cmd_sum->add_option("dir", dir, "output directory of a sweep")->required();
  cmd_sum->add_option("--final-window", final_window, "eval points averaged into the final score");

  auto* cmd_rel = app.add_subcommand("export-reliability", "Export reliability bins for one run");
  cmd_rel->add_option("run-id", run_id, "run id (setting__variant__seedN)")->required();
  cmd_rel->add_option("--bins", bins, "number of confidence bins");
  cmd_rel->add_option("--dir", dir, "output directory of the sweep")->default_val("runs");

  auto* cmd_rank = app.add_subcommand("rank", "Friedman-rank the variants of a summary.csv");
  cmd_rank->add_option("summary", summary_path, "path to summary.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      adello::ExperimentSpec spec = adello::parse_spec(spec_path);
      spec.output_dir = resolve_output(spec.output_dir);
      if (has_seed_override) spec.seeds = {seed_override};
      return adello::run_experiment(spec, jobs, diagnostics);
    }
    if (cmd_sum->parsed()) return adello::summarize_dir(resolve_output(dir), final_window);
    if (cmd_rel->parsed()) return adello::export_reliability(resolve_output(dir), run_id, bins);
    if (cmd_rank->parsed()) return adello::rank_summary(summary_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    const std::string msg = e.what();
    return msg.rfind("config error", 0) == 0 ? 1 : 2;
  }
  return 0;
}
