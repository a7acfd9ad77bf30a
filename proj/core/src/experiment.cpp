#include "adello/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace adello {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config error: " + msg); }

double parse_num(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    fail("key '" + key + "': cannot parse number '" + value + "'");
  }
}

double require_range(const std::string& key, double v, double lo, double hi) {
  if (v < lo || v > hi)
    fail("key '" + key + "': value " + std::to_string(v) + " outside [" + std::to_string(lo) +
         ", " + std::to_string(hi) + "]");
  return v;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open spec file: " + path);

  ExperimentSpec spec;
  spec.seeds.clear();
  std::string section;
  std::string line;
  bool have_setting = false;
  int lineno = 0;

  auto apply = [&](const std::string& key, const std::string& value) {
    if (section == "task") {
      if (key == "dim") spec.task.dim = static_cast<int>(require_range(key, parse_num(key, value), 2, 1024));
      else if (key == "classes") spec.task.num_classes = static_cast<int>(require_range(key, parse_num(key, value), 2, 1024));
      else if (key == "separation") spec.task.separation = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "sigma_g") spec.task.sigma_g = require_range(key, parse_num(key, value), 1e-9, 1e6);
      else if (key == "test_per_class") spec.task.test_per_class = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e7));
      else if (key == "task_seed") spec.task.task_seed = static_cast<std::uint64_t>(parse_num(key, value));
      else fail("unknown key '" + key + "' in [task]");
    } else if (section == "setting") {
      SettingSpec& st = spec.settings.back();
      if (key == "name") st.name = value;
      else if (key == "gamma_l") st.lt.gamma_labeled = require_range(key, parse_num(key, value), 1e-9, 1e9);
      else if (key == "gamma_u") st.lt.gamma_unlabeled = require_range(key, parse_num(key, value), 1e-9, 1e9);
      else if (key == "n1") st.lt.labeled_head = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e9));
      else if (key == "m1") st.lt.unlabeled_head = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e9));
      else if (key == "ood_fraction") st.lt.ood_fraction = require_range(key, parse_num(key, value), 0, 0.99);
      else fail("unknown key '" + key + "' in [setting]");
    } else if (section == "run") {
      if (key == "variants") {
        spec.variants.clear();
        for (const auto& v : split_list(value)) spec.variants.push_back(variant_from_string(v));
        if (spec.variants.empty()) fail("'variants' is empty");
      } else if (key == "seeds") {
        for (const auto& s : split_list(value)) {
          const auto seed = static_cast<std::uint64_t>(parse_num(key, s));
          if (std::find(spec.seeds.begin(), spec.seeds.end(), seed) != spec.seeds.end())
            fail("duplicate seed " + s);
          spec.seeds.push_back(seed);
        }
      } else if (key == "output") {
        spec.output_dir = value;
      } else {
        fail("unknown key '" + key + "' in [run]");
      }
    } else if (section == "train") {
      TrainConfig& tc = spec.train;
      if (key == "steps") tc.t_total = static_cast<std::int64_t>(require_range(key, parse_num(key, value), 1, 1e9));
      else if (key == "batch_size") tc.batch_size = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e6));
      else if (key == "mu") tc.unlabeled_ratio = static_cast<int>(require_range(key, parse_num(key, value), 1, 1024));
      else if (key == "tau") tc.tau = require_range(key, parse_num(key, value), 0, 1);
      else if (key == "d") tc.schedule.speed = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "alpha_min") tc.schedule.alpha_min = require_range(key, parse_num(key, value), 0, 1);
      else if (key == "warmup") tc.t_warmup = static_cast<std::int64_t>(require_range(key, parse_num(key, value), 0, 1e9));
      else if (key == "lambda_u") tc.lambda_u = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "lambda_uc") tc.lambda_uc = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "lr") tc.opt.learning_rate = require_range(key, parse_num(key, value), 1e-12, 1e6);
      else if (key == "momentum") tc.opt.momentum = require_range(key, parse_num(key, value), 0, 0.999999);
      else if (key == "weight_decay") tc.opt.weight_decay = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "ema_decay") tc.opt.ema_decay = require_range(key, parse_num(key, value), 0, 0.999999);
      else if (key == "prior_beta") tc.prior_beta = require_range(key, parse_num(key, value), 0, 0.999999);
      else if (key == "eval_interval") tc.eval_interval = static_cast<std::int64_t>(require_range(key, parse_num(key, value), 1, 1e9));
      else if (key == "final_window") tc.final_window = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e6));
      else if (key == "hidden") tc.hidden_dim = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e6));
      else if (key == "weak_sigma") tc.augment.weak_sigma = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "strong_sigma") tc.augment.strong_sigma = require_range(key, parse_num(key, value), 0, 1e6);
      else if (key == "strong_dropout") tc.augment.strong_dropout = require_range(key, parse_num(key, value), 0, 0.999999);
      else if (key == "bins") tc.reliability_bins = static_cast<int>(require_range(key, parse_num(key, value), 1, 1e6));
      else fail("unknown key '" + key + "' in [train]");
    } else {
      fail("key '" + key + "' outside any section");
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section == "setting") {
        spec.settings.emplace_back();
        have_setting = true;
      } else if (section != "task" && section != "run" && section != "train") {
        fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value at line " + std::to_string(lineno));
    apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  if (spec.settings.empty()) {
    spec.settings.emplace_back();
    have_setting = true;
  }
  for (std::size_t i = 0; i < spec.settings.size(); ++i) {
    SettingSpec& st = spec.settings[i];
    st.lt.num_classes = spec.task.num_classes;
    if (st.name.empty()) st.name = "setting" + std::to_string(i);
  }
  if (spec.train.t_warmup > spec.train.t_total) fail("warmup exceeds steps");
  if (spec.variants.empty()) spec.variants = {Variant::fixmatch, Variant::adello};
  if (spec.seeds.empty()) spec.seeds = {1, 2, 3};
  (void)have_setting;
  return spec;
}

std::string run_id(const SettingSpec& setting, Variant variant, std::uint64_t seed) {
  return setting.name + "__" + variant_name(variant) + "__seed" + std::to_string(seed);
}

namespace {

const char* kMetricsHeader =
    "step,loss_s,loss_u,loss_uc,loss_total,mask_rate,comp_mask_rate,alpha,temperature,"
    "kl_q_true,kl_q_uniform,balanced_acc,ece,mce\n";

void write_record(std::ofstream& out, const EvalRecord& r) {
  out << r.step << "," << fmt(r.loss_s) << "," << fmt(r.loss_u) << "," << fmt(r.loss_uc) << ","
      << fmt(r.loss_total) << "," << fmt(r.mask_rate) << "," << fmt(r.comp_mask_rate) << ","
      << fmt(r.alpha) << "," << fmt(r.temperature) << "," << fmt(r.kl_q_true) << ","
      << fmt(r.kl_q_uniform) << "," << fmt(r.balanced_acc) << "," << fmt(r.ece) << ","
      << fmt(r.mce) << "\n";
  out.flush();  // append-only stream: a crashed run leaves a valid prefix
}

struct RunJob {
  SettingSpec setting;
  Variant variant;
  std::uint64_t seed;
};

bool execute_run(const ExperimentSpec& spec, const SyntheticTask& task, const RunJob& job,
                 bool diagnostics) {
  const std::string id = run_id(job.setting, job.variant, job.seed);
  const fs::path dir(spec.output_dir);

  TrainConfig cfg = spec.train;
  cfg.variant = job.variant;
  cfg.seed = job.seed;
  cfg.diagnostics = diagnostics;

  const std::uint64_t split_seed = job.seed * 1000003ull + 17ull;
  const DataSplit split = sample_split(task, job.setting.lt, spec.task.test_per_class, split_seed);

  std::ofstream metrics(dir / (id + ".csv"));
  metrics << kMetricsHeader;
  const RunReport report =
      run(cfg, split, task, [&metrics](const EvalRecord& r) { write_record(metrics, r); });
  metrics.close();

  std::ofstream preds(dir / (id + "__predictions.csv"));
  preds << "max_prob,correct,prediction,label\n";
  for (std::size_t i = 0; i < report.final_max_probs.size(); ++i)
    preds << fmt(report.final_max_probs[i]) << "," << report.final_correct[i] << ","
          << report.final_predictions[i] << "," << split.test_y[i] << "\n";
  return !report.aborted;
}

struct RunSummary {
  std::vector<double> final_acc;
  std::vector<double> final_ece;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, int jobs, bool diagnostics) {
  fs::create_directories(spec.output_dir);
  const SyntheticTask task = make_task(spec.task.dim, spec.task.num_classes, spec.task.separation,
                                       spec.task.sigma_g, spec.task.task_seed);

  std::vector<RunJob> queue;
  for (const auto& setting : spec.settings)
    for (Variant v : spec.variants)
      for (std::uint64_t seed : spec.seeds) queue.push_back({setting, v, seed});

  std::mutex mu;
  std::size_t next = 0;
  bool all_ok = true;
  auto worker = [&]() {
    for (;;) {
      RunJob job;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= queue.size()) return;
        job = queue[next++];
      }
      const bool ok = execute_run(spec, task, job, diagnostics);
      if (!ok) {
        std::lock_guard<std::mutex> lock(mu);
        all_ok = false;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(queue.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const int summary_status = summarize_dir(spec.output_dir, spec.train.final_window);
  if (summary_status != 0) return summary_status;
  return all_ok ? 0 : 2;
}

namespace {

struct ParsedRun {
  std::string setting;
  std::string variant;
  std::uint64_t seed;
  double final_acc;
  double final_ece;
};

bool parse_run_file(const fs::path& path, int final_window, ParsedRun& out) {
  const std::string stem = path.stem().string();
  const auto p1 = stem.find("__");
  if (p1 == std::string::npos) return false;
  const auto p2 = stem.find("__", p1 + 2);
  if (p2 == std::string::npos) return false;
  if (stem.find("__", p2 + 2) != std::string::npos) return false;  // predictions etc.
  const std::string seed_part = stem.substr(p2 + 2);
  if (seed_part.rfind("seed", 0) != 0) return false;
  out.setting = stem.substr(0, p1);
  out.variant = stem.substr(p1 + 2, p2 - p1 - 2);
  out.seed = std::stoull(seed_part.substr(4));

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> acc, e;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 14) return false;
    acc.push_back(std::stod(cells[11]));
    e.push_back(std::stod(cells[12]));
  }
  if (acc.empty()) return false;
  const int w = std::min<int>(final_window, static_cast<int>(acc.size()));
  double sa = 0.0, se = 0.0;
  for (int i = 0; i < w; ++i) {
    sa += acc[acc.size() - 1 - i];
    se += e[e.size() - 1 - i];
  }
  out.final_acc = sa / w;
  out.final_ece = se / w;
  return true;
}

}  // namespace

int summarize_dir(const std::string& dir, int final_window) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv" && entry.path().filename() != "summary.csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::pair<std::string, std::string>, RunSummary> cells;
  std::set<std::string> settings_set, variants_set;
  for (const auto& f : files) {
    ParsedRun pr;
    if (!parse_run_file(f, final_window, pr)) continue;
    cells[{pr.setting, pr.variant}].final_acc.push_back(pr.final_acc);
    cells[{pr.setting, pr.variant}].final_ece.push_back(pr.final_ece);
    settings_set.insert(pr.setting);
    variants_set.insert(pr.variant);
  }
  if (cells.empty()) {
    std::fprintf(stderr, "summarize: no run metrics found in %s\n", dir.c_str());
    return 1;
  }

  const std::vector<std::string> settings(settings_set.begin(), settings_set.end());
  const std::vector<std::string> variants(variants_set.begin(), variants_set.end());

  FriedmanResult fr;
  bool have_ranks = false;
  if (variants.size() >= 2) {
    ScoreTable table;
    table.methods = variants;
    table.settings = settings;
    table.scores = Matrix(variants.size(), settings.size());
    bool complete = true;
    for (std::size_t m = 0; m < variants.size(); ++m)
      for (std::size_t s = 0; s < settings.size(); ++s) {
        const auto it = cells.find({settings[s], variants[m]});
        if (it == cells.end()) { complete = false; break; }
        table.scores(m, s) = mean_of(it->second.final_acc);
      }
    if (complete) {
      fr = friedman_rank(table, /*higher_is_better=*/true);
      have_ranks = true;
    }
  }

  std::vector<int> final_rank(variants.size(), 0);
  if (have_ranks)
    for (std::size_t i = 0; i < fr.final_order.size(); ++i)
      final_rank[fr.final_order[i]] = static_cast<int>(i) + 1;

  std::ofstream out(fs::path(dir) / "summary.csv");
  out << "setting,variant,num_seeds,mean_bal_acc,std_bal_acc,mean_ece,std_ece,"
         "friedman_mean_rank,final_rank\n";
  for (const auto& s : settings) {
    for (std::size_t m = 0; m < variants.size(); ++m) {
      const auto it = cells.find({s, variants[m]});
      if (it == cells.end()) continue;
      const RunSummary& rs = it->second;
      out << s << "," << variants[m] << "," << rs.final_acc.size() << ","
          << fmt(mean_of(rs.final_acc)) << "," << fmt(std_of(rs.final_acc)) << ","
          << fmt(mean_of(rs.final_ece)) << "," << fmt(std_of(rs.final_ece)) << ",";
      if (have_ranks)
        out << fmt(fr.mean_ranks[m]) << "," << final_rank[m] << "\n";
      else
        out << ",\n";
    }
  }
  return 0;
}

int export_reliability(const std::string& dir, const std::string& id, int bins) {
  const fs::path pred_path = fs::path(dir) / (id + "__predictions.csv");
  std::ifstream in(pred_path);
  if (!in) {
    std::fprintf(stderr, "export-reliability: unknown run id '%s' (no %s)\n", id.c_str(),
                 pred_path.string().c_str());
    return 1;
  }
  std::string line;
  std::getline(in, line);  // header
  Vec max_probs;
  std::vector<int> correct;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) continue;
    max_probs.push_back(std::stod(cells[0]));
    correct.push_back(std::stoi(cells[1]));
  }
  const ReliabilityBins rb = bin_predictions(max_probs, correct, bins);
  write_reliability_csv(rb, (fs::path(dir) / (id + "__reliability.csv")).string());
  return 0;
}

int rank_summary(const std::string& summary_path) {
  std::ifstream in(summary_path);
  if (!in) {
    std::fprintf(stderr, "rank: cannot open %s\n", summary_path.c_str());
    return 1;
  }
  std::string line;
  std::getline(in, line);  // header
  std::map<std::pair<std::string, std::string>, double> scores;
  std::set<std::string> settings_set, variants_set;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) continue;
    scores[{cells[0], cells[1]}] = std::stod(cells[3]);
    settings_set.insert(cells[0]);
    variants_set.insert(cells[1]);
  }
  ScoreTable table;
  table.settings.assign(settings_set.begin(), settings_set.end());
  table.methods.assign(variants_set.begin(), variants_set.end());
  table.scores = Matrix(table.methods.size(), table.settings.size());
  for (std::size_t m = 0; m < table.methods.size(); ++m)
    for (std::size_t s = 0; s < table.settings.size(); ++s) {
      const auto it = scores.find({table.settings[s], table.methods[m]});
      if (it == scores.end()) {
        std::fprintf(stderr, "rank: missing cell %s/%s\n", table.settings[s].c_str(),
                     table.methods[m].c_str());
        return 1;
      }
      table.scores(m, s) = it->second;
    }
  const FriedmanResult fr = friedman_rank(table, true);
  std::printf("variant,friedman_mean_rank,final_rank\n");
  std::vector<int> final_rank(table.methods.size());
  for (std::size_t i = 0; i < fr.final_order.size(); ++i)
    final_rank[fr.final_order[i]] = static_cast<int>(i) + 1;
  for (std::size_t m = 0; m < table.methods.size(); ++m)
    std::printf("%s,%s,%d\n", table.methods[m].c_str(), fmt(fr.mean_ranks[m]).c_str(),
                final_rank[m]);
  return 0;
}

}  // namespace adello
