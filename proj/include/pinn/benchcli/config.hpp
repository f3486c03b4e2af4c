#pragma once

#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "pinn/error.hpp"
#include "pinn/intercoord/model.hpp"
#include "pinn/pra/train.hpp"

namespace pinn::benchcli {

using Json = nlohmann::ordered_json;

struct IcSection {
  std::size_t k_max = 10;
  double small_fraction = 0.8;
  std::size_t small_k_max = 5;
  std::vector<std::size_t> hidden_blocks{3, 3};
  std::vector<std::size_t> fc_hidden{400, 300, 200};
  double noise_power = 1.0;
  double p_max = 1.0;
  double wmmse_tolerance = 1e-6;
  std::size_t wmmse_max_iterations = 500;
  bool log2 = false;
};

struct TrainSection {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;  // ic (RMSprop)
  double rho = 10.0;            // pra
  double lr_primal = 0.01;
  double lr_dual = 0.01;
};

struct BenchSection {
  std::vector<std::size_t> sizes{100, 200, 500, 1000, 2000, 5000};
  double target = 0.9;
  std::vector<std::string> models{"pinn-adp-k", "fc"};
  double fc_learning_rate = 0.001;  // the FC baseline trains with a smaller step
};

struct AugmentSection {
  std::size_t base = 10;
  std::size_t total = 10000;
};

struct GradcheckSection {
  std::size_t cases = 50;
  double tolerance = 1e-5;
};

struct ExperimentConfig {
  std::string task = "ic";
  std::string model = "pinn-adp-k";
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  std::size_t test_samples = 200;
  std::size_t k = 0;  // 0: mixture over K
  std::string out = "out";
  std::string data;        // training dataset; generated when empty
  std::string test_data;   // test dataset; generated when empty
  std::string checkpoint;  // cmd_eval input; <out>/checkpoint.json when empty
  IcSection ic;
  pra::PraConfig pra;
  double pra_small_fraction = 0.8;
  std::size_t pra_small_k_max = 4;
  std::vector<std::size_t> pra_hidden{20, 20};
  std::vector<std::size_t> pra_dual_hidden{64, 32};
  TrainSection train;
  BenchSection bench;
  AugmentSection augment;
  GradcheckSection gradcheck;

  void validate() const {
    if (task != "ic" && task != "pra") throw ValidationError("task", "must be 'ic' or 'pra', got '" + task + "'");
    if (task == "ic") intercoord::ic_kind_from_string(model);
    else pra::primal_kind_from_string(model);
    if (samples == 0) throw ValidationError("samples", "must be positive");
    if (test_samples == 0) throw ValidationError("test_samples", "must be positive");
    if (ic.k_max == 0) throw ValidationError("ic.k_max", "must be positive");
    if (ic.small_k_max == 0) throw ValidationError("ic.small_k_max", "must be positive");
    if (ic.small_fraction < 0.0 || ic.small_fraction > 1.0) throw ValidationError("ic.small_fraction", "must lie in [0, 1]");
    if (task == "ic" && k > ic.k_max) throw ValidationError("k", "exceeds ic.k_max");
    if (task == "pra" && k > pra.k_max) throw ValidationError("k", "exceeds pra.k_max");
    prefixed("ic.", [&] { ic_wmmse().validate(); });
    prefixed("pra.", [&] { pra.validate(); });
    if (pra_small_fraction < 0.0 || pra_small_fraction > 1.0) throw ValidationError("pra.small_fraction", "must lie in [0, 1]");
    if (pra_small_k_max == 0) throw ValidationError("pra.small_k_max", "must be positive");
    if (train.batch_size < 2) throw ValidationError("train.batch_size", "must be at least 2");
    if (!(train.rho > 0.0)) throw ValidationError("train.rho", "must be positive");
    if (train.learning_rate < 0.0 || train.lr_primal < 0.0 || train.lr_dual < 0.0)
      throw ValidationError("train.learning_rate", "must be non-negative");
    if (bench.sizes.empty()) throw ValidationError("bench.sizes", "must not be empty");
    for (std::size_t i = 1; i < bench.sizes.size(); ++i)
      if (bench.sizes[i] <= bench.sizes[i - 1]) throw ValidationError("bench.sizes", "must be strictly increasing");
    for (const auto& m : bench.models) intercoord::ic_kind_from_string(m);
    if (!(bench.target > 0.0)) throw ValidationError("bench.target", "must be positive");
    if (augment.base == 0) throw ValidationError("augment.base", "must be positive");
    if (gradcheck.cases == 0) throw ValidationError("gradcheck.cases", "must be positive");
  }

  template <class F>
  static void prefixed(const std::string& prefix, F&& check) {
    try {
      check();
    } catch (const ValidationError& e) {
      throw ValidationError(prefix + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
  }

  intercoord::WmmseConfig ic_wmmse() const {
    return {ic.wmmse_max_iterations, ic.wmmse_tolerance, ic.noise_power, ic.p_max, ic.log2};
  }

  intercoord::IcNetSpec ic_net(const std::string& which) const {
    intercoord::IcNetSpec s;
    s.kind = intercoord::ic_kind_from_string(which);
    s.k_max = ic.k_max;
    s.hidden_blocks = ic.hidden_blocks;
    s.fc_hidden = ic.fc_hidden;
    return s;
  }

  intercoord::IcHyper ic_hyper() const { return {train.epochs, train.batch_size, train.learning_rate, seed}; }

  pra::PraNetSpec pra_net() const {
    pra::PraNetSpec s;
    s.kind = pra::primal_kind_from_string(model);
    s.k_max = pra.k_max;
    s.t_f = pra.t_f;
    s.hidden = pra_hidden;
    s.dual_hidden = pra_dual_hidden;
    return s;
  }

  pra::PraHyper pra_hyper() const {
    return {train.rho, train.epochs, train.batch_size, train.lr_primal, train.lr_dual, seed};
  }
};

namespace detail {

/// Reads fields out of one JSON object, remembering which keys were consumed so that
/// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  template <class T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) throw ValidationError(name(key), "must be a non-negative integer");
    }
    try {
      field = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(name(key), std::string("wrong type (") + e.what() + ")");
    }
  }

  ObjectReader section(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return ObjectReader(it == obj_.end() ? empty() : *it, name(key));
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(name(it.key()), "unknown key");
  }

 private:
  static const Json& empty() {
    static const Json e = Json::object();
    return e;
  }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses JSON text; a missing key keeps its default and an unknown key is rejected by name.
inline ExperimentConfig parse_config(const std::string& text) {
  Json doc;
  const bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    try {
      doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
      const auto [line, col] = detail::line_col(text, at);
      throw ParseError("config: malformed JSON", line, col);
    }
  } else {
    doc = Json::object();
  }
  ExperimentConfig c;
  detail::ObjectReader root(doc, "");
  root.read("task", c.task);
  root.read("model", c.model);
  root.read("seed", c.seed);
  root.read("samples", c.samples);
  root.read("test_samples", c.test_samples);
  root.read("k", c.k);
  root.read("out", c.out);
  root.read("data", c.data);
  root.read("test_data", c.test_data);
  root.read("checkpoint", c.checkpoint);

  auto ic = root.section("ic");
  ic.read("k_max", c.ic.k_max);
  ic.read("small_fraction", c.ic.small_fraction);
  ic.read("small_k_max", c.ic.small_k_max);
  ic.read("hidden_blocks", c.ic.hidden_blocks);
  ic.read("fc_hidden", c.ic.fc_hidden);
  ic.read("noise_power", c.ic.noise_power);
  ic.read("p_max", c.ic.p_max);
  ic.read("wmmse_tolerance", c.ic.wmmse_tolerance);
  ic.read("wmmse_max_iterations", c.ic.wmmse_max_iterations);
  ic.read("log2", c.ic.log2);
  ic.finish();

  auto pr = root.section("pra");
  pr.read("n_b", c.pra.n_b);
  pr.read("k_max", c.pra.k_max);
  pr.read("t_f", c.pra.t_f);
  pr.read("t_s", c.pra.t_s);
  pr.read("delta", c.pra.delta);
  pr.read("cell_radius", c.pra.cell_radius);
  pr.read("n_tx", c.pra.n_tx);
  pr.read("p_max", c.pra.p_max);
  pr.read("noise_power", c.pra.noise_power);
  pr.read("edge_snr_db", c.pra.edge_snr_db);
  pr.read("mean_bandwidth", c.pra.mean_bandwidth);
  pr.read("bandwidth_std_fraction", c.pra.bandwidth_std_fraction);
  pr.read("file_bits", c.pra.file_bits);
  pr.read("speed_min", c.pra.speed_min);
  pr.read("speed_max", c.pra.speed_max);
  pr.read("road_offsets", c.pra.road_offsets);
  pr.read("edf_fading", c.pra.edf_fading);
  pr.read("small_fraction", c.pra_small_fraction);
  pr.read("small_k_max", c.pra_small_k_max);
  pr.read("hidden", c.pra_hidden);
  pr.read("dual_hidden", c.pra_dual_hidden);
  pr.finish();

  auto tr = root.section("train");
  tr.read("epochs", c.train.epochs);
  tr.read("batch_size", c.train.batch_size);
  tr.read("learning_rate", c.train.learning_rate);
  tr.read("rho", c.train.rho);
  tr.read("lr_primal", c.train.lr_primal);
  tr.read("lr_dual", c.train.lr_dual);
  tr.finish();

  auto be = root.section("bench");
  be.read("sizes", c.bench.sizes);
  be.read("target", c.bench.target);
  be.read("models", c.bench.models);
  be.read("fc_learning_rate", c.bench.fc_learning_rate);
  be.finish();

  auto au = root.section("augment");
  au.read("base", c.augment.base);
  au.read("total", c.augment.total);
  au.finish();

  auto gc = root.section("gradcheck");
  gc.read("cases", c.gradcheck.cases);
  gc.read("tolerance", c.gradcheck.tolerance);
  gc.finish();

  root.finish();
  c.validate();
  return c;
}

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["task"] = c.task;
  j["model"] = c.model;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["test_samples"] = c.test_samples;
  j["k"] = c.k;
  j["out"] = c.out;
  j["data"] = c.data;
  j["test_data"] = c.test_data;
  j["checkpoint"] = c.checkpoint;
  j["ic"] = {{"k_max", c.ic.k_max},
             {"small_fraction", c.ic.small_fraction},
             {"small_k_max", c.ic.small_k_max},
             {"hidden_blocks", c.ic.hidden_blocks},
             {"fc_hidden", c.ic.fc_hidden},
             {"noise_power", c.ic.noise_power},
             {"p_max", c.ic.p_max},
             {"wmmse_tolerance", c.ic.wmmse_tolerance},
             {"wmmse_max_iterations", c.ic.wmmse_max_iterations},
             {"log2", c.ic.log2}};
  j["pra"] = {{"n_b", c.pra.n_b},
              {"k_max", c.pra.k_max},
              {"t_f", c.pra.t_f},
              {"t_s", c.pra.t_s},
              {"delta", c.pra.delta},
              {"cell_radius", c.pra.cell_radius},
              {"n_tx", c.pra.n_tx},
              {"p_max", c.pra.p_max},
              {"noise_power", c.pra.noise_power},
              {"edge_snr_db", c.pra.edge_snr_db},
              {"mean_bandwidth", c.pra.mean_bandwidth},
              {"bandwidth_std_fraction", c.pra.bandwidth_std_fraction},
              {"file_bits", c.pra.file_bits},
              {"speed_min", c.pra.speed_min},
              {"speed_max", c.pra.speed_max},
              {"road_offsets", c.pra.road_offsets},
              {"edf_fading", c.pra.edf_fading},
              {"small_fraction", c.pra_small_fraction},
              {"small_k_max", c.pra_small_k_max},
              {"hidden", c.pra_hidden},
              {"dual_hidden", c.pra_dual_hidden}};
  j["train"] = {{"epochs", c.train.epochs},       {"batch_size", c.train.batch_size}, {"learning_rate", c.train.learning_rate},
                {"rho", c.train.rho},             {"lr_primal", c.train.lr_primal},   {"lr_dual", c.train.lr_dual}};
  j["bench"] = {{"sizes", c.bench.sizes}, {"target", c.bench.target}, {"models", c.bench.models},
                {"fc_learning_rate", c.bench.fc_learning_rate}};
  j["augment"] = {{"base", c.augment.base}, {"total", c.augment.total}};
  j["gradcheck"] = {{"cases", c.gradcheck.cases}, {"tolerance", c.gradcheck.tolerance}};
  return j;
}

inline std::string serialize_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace pinn::benchcli
