#pragma once

#include <string>
#include <vector>

#include "adello/trainer.hpp"

namespace adello {

struct TaskSpec {
  int dim = 2;
  int num_classes = 5;
  double separation = 2.5;
  double sigma_g = 1.0;
  int test_per_class = 200;
  std::uint64_t task_seed = 7;
};

struct SettingSpec {
  std::string name;
  LongTailSpec lt;
};

/// A full sweep: the cross-product of settings x variants x seeds, enumerated
/// deterministically in declaration order.
struct ExperimentSpec {
  TaskSpec task;
  std::vector<SettingSpec> settings;
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  TrainConfig train;  // shared across runs except variant/seed
  std::string output_dir = "runs";
};

/// Parses the INI-style experiment file (sections [task], [setting], [run],
/// [train]; syntax documented in the README). Unknown keys and out-of-range
/// values are errors.
ExperimentSpec parse_spec(const std::string& path);

std::string run_id(const SettingSpec& setting, Variant variant, std::uint64_t seed);

/// Executes every run in the sweep, writing one metrics CSV and one
/// predictions CSV per run plus summary.csv. Returns 0 on success, 2 if any
/// run aborted (partial outputs are preserved).
int run_experiment(const ExperimentSpec& spec, int jobs = 1, bool diagnostics = false);

/// Rebuilds summary.csv from the per-run metrics files in a directory.
int summarize_dir(const std::string& dir, int final_window = 10);

/// Bins the stored final predictions of a run and writes the reliability CSV.
int export_reliability(const std::string& dir, const std::string& id, int bins);

/// Reads a summary.csv and prints the Friedman ranking of its variants.
int rank_summary(const std::string& summary_path);

}  // namespace adello
