#pragma once

#include <chrono>
#include <filesystem>
#include <limits>
#include <optional>

#include "pinn/benchcli/checkpoint.hpp"
#include "pinn/benchcli/config.hpp"
#include "pinn/benchcli/gradcheck.hpp"
#include "pinn/benchcli/io.hpp"
#include "pinn/pra/edf.hpp"

namespace pinn::benchcli {

/// Files a command has produced so far; removed again unless the command commits.
class OutputGuard {
 public:
  explicit OutputGuard(std::string dir) : dir_(std::move(dir)) {}
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p, ec);
  }

  std::string path(const std::string& name) {
    paths_.push_back((std::filesystem::path(dir_) / name).string());
    return paths_.back();
  }
  void commit() { committed_ = true; }

 private:
  std::string dir_;
  std::vector<std::string> paths_;
  bool committed_ = false;
};

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- datasets ----

inline std::vector<intercoord::IcSample> generate_ic(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (cfg.k > 0) return intercoord::make_dataset(n, cfg.k, cfg.ic_wmmse(), seed);
  return intercoord::make_mixture({n, cfg.ic.k_max, cfg.ic.small_fraction, cfg.ic.small_k_max}, cfg.ic_wmmse(), seed);
}

inline std::vector<pra::PraSample> generate_pra(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed, bool feasible) {
  return pra::make_pra_samples(cfg.pra, {n, cfg.pra_small_fraction, cfg.pra_small_k_max, cfg.k, feasible}, seed);
}

inline std::vector<pra::PraInstance> instances_of(const std::vector<pra::PraSample>& samples) {
  std::vector<pra::PraInstance> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.instance);
  return out;
}

/// Training data: the configured file, else generated from `seed`.
inline std::vector<intercoord::IcSample> ic_train_set(const ExperimentConfig& cfg) {
  return cfg.data.empty() ? generate_ic(cfg, cfg.samples, cfg.seed) : load_ic_dataset(cfg.data);
}

/// Test data: the configured file, else generated from `seed + 1`.
inline std::vector<intercoord::IcSample> ic_test_set(const ExperimentConfig& cfg) {
  return cfg.test_data.empty() ? generate_ic(cfg, cfg.test_samples, cfg.seed + 1) : load_ic_dataset(cfg.test_data);
}

// ---- gen ----

struct GenReport {
  std::size_t train = 0, test = 0;
  std::uint64_t train_checksum = 0, test_checksum = 0;
};

/// Writes <out>/dataset.jsonl and <out>/test.jsonl.
inline GenReport cmd_gen(const ExperimentConfig& cfg) {
  OutputGuard guard(cfg.out);
  GenReport rep;
  if (cfg.task == "ic") {
    const auto train = generate_ic(cfg, cfg.samples, cfg.seed);
    const auto test = generate_ic(cfg, cfg.test_samples, cfg.seed + 1);
    save_ic_dataset(guard.path("dataset.jsonl"), train);
    save_ic_dataset(guard.path("test.jsonl"), test);
    rep = {train.size(), test.size(), checksum(train), checksum(test)};
  } else {
    const auto train = instances_of(generate_pra(cfg, cfg.samples, cfg.seed, false));
    const auto test = instances_of(generate_pra(cfg, cfg.test_samples, cfg.seed + 1, true));
    save_pra_dataset(guard.path("dataset.jsonl"), train);
    save_pra_dataset(guard.path("test.jsonl"), test);
    rep = {train.size(), test.size(), checksum(train), checksum(test)};
  }
  guard.commit();
  return rep;
}

// ---- train ----

struct TrainReport {
  std::vector<double> trace;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Writes <out>/checkpoint.json and <out>/loss.csv (epoch, loss).
inline TrainReport cmd_train(const ExperimentConfig& cfg) {
  OutputGuard guard(cfg.out);
  TrainReport rep;
  Rng init = derive_rng(cfg.seed, 0x1417);
  std::string checkpoint = guard.path("checkpoint.json");
  if (cfg.task == "ic") {
    intercoord::IcModel m = intercoord::build_ic_model(cfg.ic_net(cfg.model), init);
    const auto res = intercoord::train_ic_supervised(m, ic_train_set(cfg), cfg.ic_hyper());
    rep = {res.loss_trace, res.warnings, res.seconds};
    save_checkpoint(checkpoint, m);
  } else {
    pra::PraModel m = pra::build_pra_model(cfg.pra_net(), init);
    const auto data = cfg.data.empty() ? instances_of(generate_pra(cfg, cfg.samples, cfg.seed, false))
                                       : load_pra_dataset(cfg.data);
    const auto res = pra::train_pra(m, data, cfg.pra_hyper());
    rep = {res.cost_trace, {}, res.seconds};
    save_checkpoint(checkpoint, m);
  }
  CsvTable loss({"epoch", "loss"});
  for (std::size_t e = 0; e < rep.trace.size(); ++e) loss.row(e, rep.trace[e]);
  loss.save(guard.path("loss.csv"));
  guard.commit();
  return rep;
}

// ---- eval ----

/// Mean EDF total time (frames summed over users) over generated scenarios.
inline double mean_edf_time(const std::vector<pra::PraSample>& samples, const pra::PraConfig& cfg, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Rng rng = derive_rng(seed, i);
    total += pra::edf_baseline(samples[i].scenario, cfg, rng).total_time;
  }
  return total / static_cast<double>(samples.size());
}

/// Writes <out>/metrics.csv (metric, value). Returns the rows.
inline std::vector<std::pair<std::string, double>> cmd_eval(const ExperimentConfig& cfg) {
  OutputGuard guard(cfg.out);
  const std::string ckpt = cfg.checkpoint.empty() ? (std::filesystem::path(cfg.out) / "checkpoint.json").string() : cfg.checkpoint;
  std::vector<std::pair<std::string, double>> rows;
  if (cfg.task == "ic") {
    intercoord::IcModel m = load_ic_checkpoint(ckpt);
    const auto ev = intercoord::evaluate_ic(m, ic_test_set(cfg), cfg.ic_wmmse());
    rows = {{"sum_rate_ratio", ev.ratio},
            {"median_ratio", ev.median_ratio},
            {"mse", ev.mse},
            {"mean_sum_rate", ev.mean_rate},
            {"mean_wmmse_sum_rate", ev.mean_label_rate},
            {"samples", static_cast<double>(ev.samples)}};
  } else {
    pra::PraModel m = load_pra_checkpoint(ckpt);
    std::optional<double> edf;
    std::vector<pra::PraInstance> test;
    if (cfg.test_data.empty()) {
      const auto samples = generate_pra(cfg, cfg.test_samples, cfg.seed + 1, true);
      test = instances_of(samples);
      edf = mean_edf_time(samples, cfg.pra, cfg.seed + 2);
    } else {
      test = load_pra_dataset(cfg.test_data);
    }
    const auto ev = pra::evaluate_pra(m, test);
    rows = {{"mean_objective", ev.mean_objective},
            {"mean_lp_optimum", ev.mean_optimum},
            {"relative_loss", ev.relative_loss},
            {"max_overload", ev.max_overload},
            {"max_qos_residual", ev.max_qos_residual},
            {"instances", static_cast<double>(ev.instances)}};
    if (edf) rows.emplace_back("mean_edf_time", *edf);
  }
  CsvTable t({"metric", "value"});
  for (const auto& [k, v] : rows) t.row(k, v);
  t.save(guard.path("metrics.csv"));
  guard.commit();
  return rows;
}

// ---- augment ----

struct AugmentReport {
  std::size_t base = 0, total = 0;
  double augment_seconds = 0.0;   // relabeling the bases up to `total`
  double labeling_seconds = 0.0;  // WMMSE-labeling `total` fresh samples
  std::vector<intercoord::IcSample> augmented;
  std::vector<intercoord::IcSample> labeled;

  double speedup() const { return augment_seconds > 0.0 ? labeling_seconds / augment_seconds : std::numeric_limits<double>::infinity(); }
};

/// Expands `augment.base` labeled samples to `augment.total` by relabeling, and times it against
/// WMMSE-labeling `augment.total` samples. Writes <out>/augmented.jsonl and <out>/augment_timing.csv.
inline AugmentReport cmd_augment(const ExperimentConfig& cfg) {
  if (cfg.task != "ic") throw ValidationError("task", "augment applies to the ic task only");
  if (cfg.augment.total < cfg.augment.base) throw ValidationError("augment.total", "must be at least augment.base");
  OutputGuard guard(cfg.out);
  AugmentReport rep;
  ExperimentConfig fixed = cfg;
  if (fixed.k == 0) fixed.k = cfg.ic.k_max;
  auto start = std::chrono::steady_clock::now();
  const auto base = cfg.data.empty() ? generate_ic(fixed, cfg.augment.base, cfg.seed) : load_ic_dataset(cfg.data);
  const double base_seconds = seconds_since(start);
  if (base.empty()) throw ContractError("augment: no base samples");
  Rng rng = derive_rng(cfg.seed, 0xa09);
  start = std::chrono::steady_clock::now();
  rep.augmented = intercoord::augment(base, cfg.augment.total - base.size(), rng);
  rep.augment_seconds = seconds_since(start) + (cfg.data.empty() ? base_seconds : 0.0);
  start = std::chrono::steady_clock::now();
  rep.labeled = generate_ic(fixed, cfg.augment.total, cfg.seed + 3);
  rep.labeling_seconds = seconds_since(start);
  rep.base = base.size();
  rep.total = rep.augmented.size();
  save_ic_dataset(guard.path("augmented.jsonl"), rep.augmented);
  CsvTable t({"method", "samples", "seconds"});
  t.row("augmentation", rep.total, rep.augment_seconds);
  t.row("wmmse_labeling", rep.labeled.size(), rep.labeling_seconds);
  t.save(guard.path("augment_timing.csv"));
  guard.commit();
  return rep;
}

// ---- gradcheck ----

/// Writes <out>/gradcheck.csv; the caller exits nonzero when any row failed.
inline std::vector<GradcheckRow> cmd_gradcheck(const ExperimentConfig& cfg) {
  OutputGuard guard(cfg.out);
  const auto rows = run_gradcheck_suite(cfg.gradcheck.cases, cfg.gradcheck.tolerance, cfg.seed);
  CsvTable t({"component", "cases", "max_relative_error", "passed"});
  for (const auto& r : rows) t.row(r.component, r.cases, r.max_relative_error, r.passed);
  t.save(guard.path("gradcheck.csv"));
  guard.commit();
  return rows;
}

inline bool all_passed(const std::vector<GradcheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const GradcheckRow& r) { return r.passed; });
}

// ---- bench ----

struct BenchRow {
  std::string model;
  std::size_t samples = 0;
  double ratio = 0.0;
  double train_seconds = 0.0;
};

struct BenchSummary {
  std::string model;
  std::optional<std::size_t> minimal_size;  // empty: target never reached
  double seconds_to_target = std::numeric_limits<double>::quiet_NaN();
};

/// Smallest swept size whose ratio reaches `target`.
inline std::optional<std::size_t> minimal_size(const std::vector<BenchRow>& rows, const std::string& model, double target) {
  std::optional<std::size_t> best;
  for (const auto& r : rows)
    if (r.model == model && r.ratio >= target && (!best || r.samples < *best)) best = r.samples;
  return best;
}

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;
};

/// Sweeps `bench.sizes` (prefixes of one shuffled labeled pool) for each model, training from
/// the same initial seed and scoring on one test set. A model's sweep stops at the first size
/// reaching `bench.target`. Writes <out>/bench.csv and <out>/bench_summary.csv.
inline BenchReport cmd_bench(const ExperimentConfig& cfg,
                             const std::function<void(const BenchRow&)>& on_row = {}) {
  if (cfg.task != "ic") throw ValidationError("task", "bench applies to the ic task only");
  OutputGuard guard(cfg.out);
  auto pool = generate_ic(cfg, cfg.bench.sizes.back(), cfg.seed);
  Rng shuffle_rng = derive_rng(cfg.seed, 0xbe7c);
  std::shuffle(pool.begin(), pool.end(), shuffle_rng);
  const auto test = ic_test_set(cfg);
  BenchReport rep;
  for (const auto& name : cfg.bench.models) {
    BenchSummary s{name, std::nullopt};
    for (std::size_t n : cfg.bench.sizes) {
      const std::vector<intercoord::IcSample> train(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
      Rng init = derive_rng(cfg.seed, 0x1417);
      intercoord::IcModel m = intercoord::build_ic_model(cfg.ic_net(name), init);
      intercoord::IcHyper hyper = cfg.ic_hyper();
      if (m.spec.kind == intercoord::IcKind::fc) hyper.learning_rate = cfg.bench.fc_learning_rate;
      const auto res = intercoord::train_ic_supervised(m, train, hyper);
      const BenchRow row{name, n, intercoord::evaluate_ic(m, test, cfg.ic_wmmse()).ratio, res.seconds};
      rep.rows.push_back(row);
      if (on_row) on_row(row);
      if (row.ratio >= cfg.bench.target) {
        s.minimal_size = n;
        s.seconds_to_target = res.seconds;
        break;
      }
    }
    rep.summary.push_back(s);
  }
  CsvTable rows({"model", "samples", "sum_rate_ratio", "train_seconds"});
  for (const auto& r : rep.rows) rows.row(r.model, r.samples, r.ratio, r.train_seconds);
  rows.save(guard.path("bench.csv"));
  CsvTable sum({"model", "target", "minimal_samples", "seconds_to_target"});
  for (const auto& s : rep.summary)
    sum.row(s.model, cfg.bench.target, s.minimal_size ? std::to_string(*s.minimal_size) : std::string("none"),
            s.seconds_to_target);
  sum.save(guard.path("bench_summary.csv"));
  guard.commit();
  return rep;
}

}  // namespace pinn::benchcli
