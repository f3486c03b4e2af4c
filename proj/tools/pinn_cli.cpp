// pinn_cli: dataset generation, training, evaluation and benchmarks.
//
//   pinn_cli <gen|train|eval|augment|gradcheck|bench> [--config file] [--seed n] [--out dir]
//            [--samples n] [--k n] [--target x]
//
// Exit status: 0 success, 1 contract/validation failure, 2 I/O failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pinn/benchcli.hpp"

namespace bc = pinn::benchcli;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> k;
  std::optional<double> target;
};

bc::ExperimentConfig load_config(const Overrides& o) {
  std::string text;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw pinn::IoError("cannot open config '" + o.config + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  bc::ExperimentConfig cfg = bc::parse_config(text);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.samples) cfg.samples = *o.samples;
  if (o.k) cfg.k = *o.k;
  if (o.target) cfg.bench.target = *o.target;
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const Overrides& o) {
  const bc::ExperimentConfig cfg = load_config(o);
  if (command == "gen") {
    const auto r = bc::cmd_gen(cfg);
    std::printf("wrote %zu training and %zu test samples to %s (checksums %016llx %016llx)\n", r.train, r.test,
                cfg.out.c_str(), static_cast<unsigned long long>(r.train_checksum),
                static_cast<unsigned long long>(r.test_checksum));
  } else if (command == "train") {
    const auto r = bc::cmd_train(cfg);
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("trained %zu epochs in %.2f s, final loss %.6g\n", r.trace.size(), r.seconds,
                r.trace.empty() ? 0.0 : r.trace.back());
  } else if (command == "eval") {
    for (const auto& [k, v] : bc::cmd_eval(cfg)) std::printf("%s = %.6g\n", k.c_str(), v);
  } else if (command == "augment") {
    const auto r = bc::cmd_augment(cfg);
    std::printf("augmented %zu -> %zu samples in %.4f s; WMMSE labeling took %.4f s (%.1fx)\n", r.base, r.total,
                r.augment_seconds, r.labeling_seconds, r.speedup());
  } else if (command == "gradcheck") {
    const auto rows = bc::cmd_gradcheck(cfg);
    for (const auto& r : rows)
      std::printf("%-10s cases=%zu max_rel_err=%.3e %s\n", r.component.c_str(), r.cases, r.max_relative_error,
                  r.passed ? "ok" : "FAILED");
    if (!bc::all_passed(rows)) return 1;
  } else if (command == "bench") {
    const auto r = bc::cmd_bench(cfg, [](const bc::BenchRow& row) {
      std::printf("%-12s n=%-6zu ratio=%.4f train=%.2fs\n", row.model.c_str(), row.samples, row.ratio, row.train_seconds);
      std::fflush(stdout);
    });
    for (const auto& s : r.summary) {
      if (s.minimal_size)
        std::printf("%s: minimal size %zu, %.2f s to target\n", s.model.c_str(), *s.minimal_size, s.seconds_to_target);
      else
        std::printf("%s: target not reached\n", s.model.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permutation-equivariant networks for wireless resource allocation"};
  app.require_subcommand(1, 1);
  Overrides o;
  for (const char* name : {"gen", "train", "eval", "augment", "gradcheck", "bench"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config, "JSON experiment config");
    sub->add_option("--seed", o.seed);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--samples", o.samples, "training-set size");
    sub->add_option("--k", o.k, "fixed K (0: mixture)");
    sub->add_option("--target", o.target, "bench target sum-rate ratio");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const pinn::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
