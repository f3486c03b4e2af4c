#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>
#include <unistd.h>

#include "pinn/benchcli.hpp"

using namespace pinn;
using namespace pinn::benchcli;
namespace fs = std::filesystem;
using numcore::Tensor;

namespace {

fs::path scratch_root() { return fs::temp_directory_path() / ("pinn_benchcli_test_" + std::to_string(::getpid())); }

struct ScratchCleanup : ::testing::Environment {
  void TearDown() override { fs::remove_all(scratch_root()); }
};
const auto* const cleanup = ::testing::AddGlobalTestEnvironment(new ScratchCleanup);

fs::path scratch(const std::string& name) {
  fs::path p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_bits(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

/// Random values with awkward binary expansions; no WMMSE labels needed for persistence tests.
std::vector<intercoord::IcSample> random_ic(std::size_t n, std::uint64_t seed) {
  std::vector<intercoord::IcSample> out;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> kd(1, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = kd(rng);
    intercoord::IcSample s{k, intercoord::generate_channels(k, rng), Tensor({k}), i % 3 == 0};
    for (double& v : s.y.values()) v = u(rng) / 3.0;
    out.push_back(std::move(s));
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PINN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// ---- config ----

TEST(Config, EmptyDocumentGivesDefaults) {
  for (const char* text : {"", "  \n", "{}"}) {
    const ExperimentConfig c = parse_config(text);
    EXPECT_EQ(c.task, "ic");
    EXPECT_EQ(c.model, "pinn-adp-k");
    EXPECT_EQ(c.seed, 1u);
    EXPECT_EQ(c.ic.k_max, 10u);
    EXPECT_EQ(c.pra.k_max, 8u);
    EXPECT_EQ(c.pra.t_f, 10u);
    EXPECT_EQ(c.pra.n_b, 4u);
    EXPECT_EQ(serialize_config(c), serialize_config(ExperimentConfig{}));
  }
}

TEST(Config, UnknownKeyRejectedByName) {
  try {
    parse_config(R"({"foo": 1})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "foo");
  }
  try {
    parse_config(R"({"train": {"epochs": 3, "momentum": 0.9}})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "train.momentum");
  }
}

TEST(Config, ParseErrorCarriesLineAndColumn) {
  try {
    parse_config("{\n  \"seed\": 3,\n  \"samples\": ,\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 14u);
  }
  EXPECT_THROW(parse_config("{\"seed\": 3"), ParseError);
}

TEST(Config, ValidationNamesField) {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"task": "vision"})"), "task");
  EXPECT_EQ(field_of(R"({"model": "cnn"})"), "model");
  EXPECT_EQ(field_of(R"({"seed": -4})"), "seed");
  EXPECT_EQ(field_of(R"({"samples": "many"})"), "samples");
  EXPECT_EQ(field_of(R"({"train": {"batch_size": 1}})"), "train.batch_size");
  EXPECT_EQ(field_of(R"({"pra": {"t_f": 0}})"), "pra.t_f");
  EXPECT_EQ(field_of(R"({"ic": {"wmmse_tolerance": 0}})"), "ic.tolerance");
  EXPECT_EQ(field_of(R"({"bench": {"sizes": [100, 50]}})"), "bench.sizes");
  EXPECT_EQ(field_of(R"({"bench": {"models": ["pinn", "rnn"]}})"), "model");
  EXPECT_EQ(field_of(R"({"k": 11})"), "k");
  EXPECT_EQ(field_of(R"({"ic": 3})"), "ic");
}

TEST(Config, TableShapedConfigRoundTrips) {
  const std::string text = R"({
    "task": "pra", "model": "pinn-adp-k", "seed": 77, "samples": 4000, "k": 6,
    "pra": {"k_max": 8, "t_f": 10, "n_b": 4, "hidden": [20, 20, 20], "dual_hidden": [64, 32],
            "mean_bandwidth": [10e6, 5e6], "edge_snr_db": 5.5},
    "train": {"epochs": 200, "batch_size": 32, "rho": 12.5, "lr_primal": 0.001, "lr_dual": 0.002},
    "bench": {"sizes": [10, 20], "target": 0.85, "models": ["pinn", "fc"]}
  })";
  const ExperimentConfig a = parse_config(text);
  EXPECT_EQ(a.seed, 77u);
  EXPECT_EQ(a.pra_hidden, (std::vector<std::size_t>{20, 20, 20}));
  EXPECT_DOUBLE_EQ(a.train.rho, 12.5);
  const std::string once = serialize_config(a);
  const ExperimentConfig b = parse_config(once);
  EXPECT_EQ(serialize_config(b), once);
  EXPECT_EQ(b.pra.mean_bandwidth, a.pra.mean_bandwidth);
  EXPECT_EQ(b.pra.edge_snr_db, a.pra.edge_snr_db);
}

// ---- datasets ----

TEST(Dataset, EmptyFileIsEmptyList) {
  const fs::path d = scratch("empty");
  write_text(d / "e.jsonl", "");
  EXPECT_TRUE(load_ic_dataset((d / "e.jsonl").string()).empty());
  save_ic_dataset((d / "f.jsonl").string(), {});
  EXPECT_EQ(fs::file_size(d / "f.jsonl"), 0u);
  EXPECT_TRUE(load_pra_dataset((d / "f.jsonl").string()).empty());
}

TEST(Dataset, OneSampleRoundTripIsBitExact) {
  const fs::path d = scratch("one");
  intercoord::IcSample s{3, Tensor({3, 3}, {0.1, 1.0 / 3.0, 2e-300, 1e300, 5e-324, std::nextafter(1.0, 2.0), 7.0, -0.0, 0.3}),
                         Tensor({3}, {1.0 / 7.0, 0.0, 1.0}), true};
  save_ic_dataset((d / "a.jsonl").string(), {s});
  const auto back = load_ic_dataset((d / "a.jsonl").string());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].k, 3u);
  EXPECT_TRUE(same_bits(back[0].x, s.x));
  EXPECT_TRUE(same_bits(back[0].y, s.y));
  EXPECT_TRUE(back[0].augmented);
}

TEST(Dataset, TenThousandSamplesPreserveChecksum) {
  const fs::path d = scratch("big");
  const auto samples = random_ic(10000, 5);
  const std::string path = (d / "big.jsonl").string();
  save_ic_dataset(path, samples);
  const auto back = load_ic_dataset(path);
  ASSERT_EQ(back.size(), samples.size());
  EXPECT_EQ(checksum(back), checksum(samples));
  auto nudged = samples;
  nudged[4321].x.values()[0] = std::nextafter(nudged[4321].x.values()[0], 10.0);
  EXPECT_NE(checksum(nudged), checksum(samples));
}

TEST(Dataset, PraRoundTripIsBitExact) {
  const fs::path d = scratch("pra");
  pra::PraConfig cfg;
  const auto data = pra::make_pra_dataset(cfg, {40, 0.5, 4, 0, false}, 9);
  save_pra_dataset((d / "p.jsonl").string(), data);
  const auto back = load_pra_dataset((d / "p.jsonl").string());
  ASSERT_EQ(back.size(), data.size());
  EXPECT_EQ(checksum(back), checksum(data));
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].n_b, data[i].n_b);
    EXPECT_TRUE(same_bits(back[i].r, data[i].r));
    EXPECT_TRUE(same_bits(back[i].m, data[i].m));
  }
}

TEST(Dataset, MalformedLineIsNamed) {
  const fs::path d = scratch("bad");
  const std::string good = ic_record(random_ic(1, 1)[0]).dump();
  write_text(d / "a.jsonl", good + "\n" + good + "\n{\"k\": 2, \"x\": [1, 2\n");
  try {
    load_ic_dataset((d / "a.jsonl").string());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_text(d / "b.jsonl", good + "\n{\"k\": 2, \"x\": [1, 2, 3], \"y\": [0.5, 0.5]}\n");
  try {
    load_ic_dataset((d / "b.jsonl").string());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  write_text(d / "c.jsonl", R"({"k": 1, "t_f": 1, "n_b": 1, "r": [1.0], "m": [2.0]})" "\n");
  EXPECT_THROW(load_pra_dataset((d / "c.jsonl").string()), FormatError);
  EXPECT_THROW(load_ic_dataset((d / "missing.jsonl").string()), IoError);
}

// ---- checkpoints ----

TEST(Checkpoint, IcRoundTripReproducesForwardExactly) {
  const fs::path d = scratch("ckpt_ic");
  const auto test = random_ic(40, 3);
  for (const char* kind : {"pinn", "pinn-adp-k", "fc"}) {
    ExperimentConfig cfg;
    cfg.ic.fc_hidden = {12, 8};
    Rng rng(11);
    intercoord::IcModel m = intercoord::build_ic_model(cfg.ic_net(kind), rng);
    // move the batch-norm statistics away from their initial values
    intercoord::train_ic_supervised(m, random_ic(64, 4), {2, 16, 0.01, 1});
    const std::string path = (d / (std::string(kind) + ".json")).string();
    save_checkpoint(path, m);
    intercoord::IcModel back = load_ic_checkpoint(path);
    EXPECT_EQ(checkpoint_kind(back), checkpoint_kind(m));
    const auto a = intercoord::ic_predict(m, test), b = intercoord::ic_predict(back, test);
    for (std::size_t i = 0; i < test.size(); ++i) EXPECT_TRUE(same_bits(a[i], b[i])) << kind << " sample " << i;
  }
}

TEST(Checkpoint, PraRoundTripReproducesForwardExactly) {
  const fs::path d = scratch("ckpt_pra");
  pra::PraConfig cfg;
  const auto test = pra::make_pra_dataset(cfg, {10, 0.5, 4, 0, false}, 2);
  for (const char* kind : {"pinn", "pinn-adp-k", "fc"}) {
    pra::PraNetSpec spec;
    spec.kind = pra::primal_kind_from_string(kind);
    Rng rng(3);
    pra::PraModel m = pra::build_pra_model(spec, rng);
    const std::string path = (d / (std::string(kind) + ".json")).string();
    save_checkpoint(path, m);
    pra::PraModel back = load_pra_checkpoint(path);
    for (const auto& inst : test) EXPECT_TRUE(same_bits(pra::predict_plan(m, inst), pra::predict_plan(back, inst))) << kind;
  }
}

TEST(Checkpoint, TruncatedFileIsStructuredError) {
  const fs::path d = scratch("trunc");
  Rng rng(1);
  intercoord::IcModel m = intercoord::build_ic_model({}, rng);
  const std::string path = (d / "c.json").string();
  save_checkpoint(path, m);
  const std::string text = read_text(path);
  write_text(path, text.substr(0, text.size() / 2));
  try {
    load_ic_checkpoint(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 1u);
  }
  EXPECT_THROW(load_ic_checkpoint((d / "absent.json").string()), IoError);
}

TEST(Checkpoint, KindMismatchRejected) {
  const fs::path d = scratch("kind");
  Rng rng(1);
  pra::PraModel p = pra::build_pra_model({}, rng);
  intercoord::IcModel ic = intercoord::build_ic_model({}, rng);
  save_checkpoint((d / "pra.json").string(), p);
  save_checkpoint((d / "ic.json").string(), ic);
  EXPECT_THROW(load_ic_checkpoint((d / "pra.json").string()), FormatError);
  EXPECT_THROW(load_pra_checkpoint((d / "ic.json").string()), FormatError);
  // a PINN-1D-based checkpoint whose spec claims a 2-D model
  Json doc = checkpoint_json(p);
  doc["kind"] = "ic-pinn-adp-k";
  write_text(d / "forged.json", doc.dump());
  EXPECT_THROW(load_ic_checkpoint((d / "forged.json").string()), FormatError);
}

TEST(Checkpoint, VersionAndShapeChecked) {
  const fs::path d = scratch("version");
  Rng rng(1);
  intercoord::IcModel m = intercoord::build_ic_model({}, rng);
  Json doc = checkpoint_json(m);
  doc["version"] = kCheckpointVersion + 1;
  write_text(d / "v.json", doc.dump());
  try {
    load_ic_checkpoint((d / "v.json").string());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  doc = checkpoint_json(m);
  doc["spec"]["hidden_blocks"] = {4, 3};
  write_text(d / "s.json", doc.dump());
  EXPECT_THROW(load_ic_checkpoint((d / "s.json").string()), FormatError);
  doc = checkpoint_json(m);
  doc["arrays"]["bn.scale"]["data"] = {1.0, 2.0};
  write_text(d / "l.json", doc.dump());
  EXPECT_THROW(load_ic_checkpoint((d / "l.json").string()), FormatError);
}

// ---- reports, guard, bench helpers ----

TEST(Reports, CsvHasHeaderAndFixedWidth) {
  CsvTable t({"model", "samples", "ratio"});
  t.row("fc", 100, 0.5);
  t.row(std::string("pinn"), std::size_t{200}, 0.875);
  EXPECT_EQ(t.str(), "model,samples,ratio\nfc,100,0.5\npinn,200,0.875\n");
  EXPECT_THROW(t.row("x", 1), ContractError);
}

TEST(Reports, OutputGuardRemovesUncommittedFiles) {
  const fs::path d = scratch("guard");
  {
    OutputGuard g(d.string());
    write_text(g.path("a.csv"), "x\n");
    write_text(g.path("b.csv"), "y\n");
  }
  EXPECT_FALSE(fs::exists(d / "a.csv"));
  EXPECT_FALSE(fs::exists(d / "b.csv"));
  {
    OutputGuard g(d.string());
    write_text(g.path("a.csv"), "x\n");
    g.commit();
  }
  EXPECT_TRUE(fs::exists(d / "a.csv"));
}

TEST(Bench, MinimalSizeMonotoneInTarget) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BenchRow> rows;
    for (std::size_t n : {100, 200, 500, 1000, 2000}) rows.push_back({"m", n, u(rng), 0.0});
    std::optional<std::size_t> prev;
    bool first = true;
    for (double target = 1.0; target >= 0.3; target -= 0.01) {
      const auto s = minimal_size(rows, "m", target);
      if (!first && prev) {
        ASSERT_TRUE(s.has_value());
        EXPECT_LE(*s, *prev);
      }
      prev = s;
      first = false;
    }
  }
  EXPECT_FALSE(minimal_size({{"m", 10, 0.5, 0.0}}, "m", 0.9).has_value());
  EXPECT_FALSE(minimal_size({{"m", 10, 0.95, 0.0}}, "other", 0.9).has_value());
}

// ---- commands ----

TEST(Commands, GenIsDeterministicPerSeed) {
  ExperimentConfig cfg;
  cfg.samples = 30;
  cfg.test_samples = 10;
  const fs::path a_dir = scratch("gen_a"), b_dir = scratch("gen_b"), c_dir = scratch("gen_c");
  cfg.out = a_dir.string();
  const auto a = cmd_gen(cfg);
  cfg.out = b_dir.string();
  const auto b = cmd_gen(cfg);
  EXPECT_EQ(a.train_checksum, b.train_checksum);
  EXPECT_EQ(a.test_checksum, b.test_checksum);
  EXPECT_NE(a.train_checksum, a.test_checksum);
  EXPECT_EQ(read_text(a_dir / "dataset.jsonl"), read_text(b_dir / "dataset.jsonl"));
  EXPECT_EQ(checksum(load_ic_dataset((a_dir / "test.jsonl").string())), a.test_checksum);
  cfg.seed = 2;
  cfg.out = c_dir.string();
  EXPECT_NE(cmd_gen(cfg).train_checksum, a.train_checksum);
}

TEST(Commands, TrainThenEvalForBothTasks) {
  ExperimentConfig ic;
  ic.samples = 60;
  ic.test_samples = 20;
  ic.train.epochs = 2;
  ic.out = scratch("te_ic").string();
  EXPECT_EQ(cmd_train(ic).trace.size(), 2u);
  const auto m = cmd_eval(ic);
  EXPECT_EQ(m.front().first, "sum_rate_ratio");
  EXPECT_GT(m.front().second, 0.0);
  EXPECT_EQ(read_text(fs::path(ic.out) / "loss.csv").substr(0, 11), "epoch,loss\n");

  ExperimentConfig p;
  p.task = "pra";
  p.samples = 20;
  p.test_samples = 5;
  p.train.epochs = 2;
  p.out = scratch("te_pra").string();
  cmd_train(p);
  const auto pm = cmd_eval(p);
  EXPECT_EQ(pm.back().first, "mean_edf_time");
  EXPECT_TRUE(fs::exists(fs::path(p.out) / "metrics.csv"));
}

TEST(Commands, FailedEvalLeavesNoReport) {
  ExperimentConfig cfg;
  cfg.out = scratch("fail").string();
  cfg.checkpoint = (fs::path(cfg.out) / "nothing.json").string();
  EXPECT_THROW(cmd_eval(cfg), IoError);
  EXPECT_FALSE(fs::exists(fs::path(cfg.out) / "metrics.csv"));
}

TEST(Commands, AugmentKeepsLabelsValid) {
  ExperimentConfig cfg;
  cfg.k = 4;
  cfg.augment = {5, 200};
  cfg.out = scratch("aug").string();
  const auto r = cmd_augment(cfg);
  EXPECT_EQ(r.total, 200u);
  EXPECT_EQ(r.labeled.size(), 200u);
  EXPECT_EQ(load_ic_dataset((fs::path(cfg.out) / "augmented.jsonl").string()).size(), 200u);
  const std::string timing = read_text(fs::path(cfg.out) / "augment_timing.csv");
  EXPECT_EQ(timing.substr(0, timing.find('\n')), "method,samples,seconds");
  cfg.augment = {5, 3};
  EXPECT_THROW(cmd_augment(cfg), ValidationError);
}

// ---- CLI ----

TEST(Cli, GradcheckExitsZero) {
  const fs::path d = scratch("cli_gc");
  EXPECT_EQ(run_cli("gradcheck --out " + d.string()), 0);
  EXPECT_TRUE(fs::exists(d / "gradcheck.csv"));
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("cli_codes");
  write_text(d / "unknown.json", R"({"foo": 1})");
  write_text(d / "broken.json", "{\"seed\": ");
  write_text(d / "tiny.json", R"({"samples": 12, "test_samples": 4, "train": {"epochs": 1, "batch_size": 4}})");
  EXPECT_EQ(run_cli("gen --config " + (d / "unknown.json").string()), 1);
  EXPECT_EQ(run_cli("gen --config " + (d / "broken.json").string()), 1);
  EXPECT_EQ(run_cli("gen --config " + (d / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("eval --out " + (d / "empty").string()), 2);
  EXPECT_EQ(run_cli("train --k 99 --out " + d.string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  const std::string out = (d / "run").string();
  EXPECT_EQ(run_cli("gen --config " + (d / "tiny.json").string() + " --seed 4 --samples 9 --out " + out), 0);
  EXPECT_EQ(load_ic_dataset(out + "/dataset.jsonl").size(), 9u);
  EXPECT_EQ(run_cli("train --config " + (d / "tiny.json").string() + " --out " + out), 0);
  EXPECT_EQ(run_cli("eval --config " + (d / "tiny.json").string() + " --out " + out), 0);
  write_text(out + "/checkpoint.json", "{\"format\": \"pinn-checkpoint\", \"version\": 9}");
  EXPECT_EQ(run_cli("eval --config " + (d / "tiny.json").string() + " --out " + out), 1);
}
