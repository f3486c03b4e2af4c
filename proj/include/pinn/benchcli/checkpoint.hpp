#pragma once

#include "pinn/benchcli/config.hpp"
#include "pinn/benchcli/io.hpp"

namespace pinn::benchcli {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline Json tensor_json(const Tensor& t) { return {{"shape", t.shape()}, {"data", flat(t)}}; }

inline void fill_tensor(Tensor& t, const Json& arrays, const std::string& name) {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw FormatError("checkpoint: missing array '" + name + "'");
  std::vector<double> data;
  try {
    if (it->at("shape").get<numcore::Shape>() != t.shape())
      throw FormatError("checkpoint: array '" + name + "' has shape " + it->at("shape").dump() + ", spec implies " +
                        numcore::shape_str(t.shape()));
    data = it->at("data").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint: array '" + name + "' is malformed (" + e.what() + ")");
  }
  if (data.size() != t.size()) throw FormatError("checkpoint: array '" + name + "' length differs from its shape");
  std::copy(data.begin(), data.end(), t.values().begin());
}

template <class Named>
void put_all(Json& arrays, const std::string& prefix, const Named& named) {
  for (const auto& [name, t] : named) arrays[prefix + name] = tensor_json(*t);
}

template <class Named>
void fill_all(const Json& arrays, const std::string& prefix, const Named& named) {
  for (const auto& [name, t] : named) fill_tensor(*t, arrays, prefix + name);
}

inline Json read_document(const std::string& path) {
  std::ifstream in = open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("checkpoint '" + path + "': malformed or truncated", line, col);
  }
}

inline Json checked_document(const std::string& path, const std::string& expected_kind) {
  const Json doc = read_document(path);
  if (!doc.is_object() || doc.value("format", "") != "pinn-checkpoint") throw FormatError("'" + path + "' is not a checkpoint");
  const int version = doc.value("version", -1);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  const std::string kind = doc.value("kind", "");
  if (kind.rfind(expected_kind.substr(0, expected_kind.find('-') + 1), 0) != 0)
    throw FormatError("checkpoint kind '" + kind + "' cannot be loaded as a " + expected_kind + " model");
  if (!doc.contains("spec") || !doc.contains("arrays")) throw FormatError("checkpoint: missing spec or arrays");
  return doc;
}

}  // namespace detail

inline std::string checkpoint_kind(const intercoord::IcModel& m) { return std::string("ic-") + intercoord::to_string(m.spec.kind); }
inline std::string checkpoint_kind(const pra::PraModel& m) { return std::string("pra-") + pra::to_string(m.spec.kind); }

inline Json checkpoint_json(const intercoord::IcModel& m) {
  Json doc;
  doc["format"] = "pinn-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["kind"] = checkpoint_kind(m);
  doc["spec"] = {{"model", intercoord::to_string(m.spec.kind)},
                 {"k_max", m.spec.k_max},
                 {"hidden_blocks", m.spec.hidden_blocks},
                 {"fc_hidden", m.spec.fc_hidden},
                 {"fc_bias", m.spec.fc_bias},
                 {"beta_hidden", m.spec.beta_hidden}};
  Json arrays = Json::object();
  if (m.spec.is_pinn()) {
    detail::put_all(arrays, "pinn.", equinet::named_tensors(m.pinn));
    if (m.spec.kind == intercoord::IcKind::pinn_adp_k) detail::put_all(arrays, "beta.", equinet::named_tensors(m.beta));
  } else {
    detail::put_all(arrays, "fc.", equinet::named_tensors(m.fc));
  }
  arrays["bn.scale"] = detail::tensor_json(m.bn.scale);
  arrays["bn.shift"] = detail::tensor_json(m.bn.shift);
  arrays["bn.running_mean"] = detail::tensor_json(m.bn.running_mean);
  arrays["bn.running_var"] = detail::tensor_json(m.bn.running_var);
  doc["arrays"] = std::move(arrays);
  return doc;
}

inline Json checkpoint_json(const pra::PraModel& m) {
  Json doc;
  doc["format"] = "pinn-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["kind"] = checkpoint_kind(m);
  doc["spec"] = {{"model", pra::to_string(m.spec.kind)},   {"k_max", m.spec.k_max},
                 {"t_f", m.spec.t_f},                      {"hidden", m.spec.hidden},
                 {"dual_hidden", m.spec.dual_hidden},      {"beta_hidden", m.spec.beta_hidden}};
  Json arrays = Json::object();
  if (m.spec.kind == pra::PrimalKind::fc) {
    detail::put_all(arrays, "primal.", equinet::named_tensors(m.primal_fc));
  } else {
    detail::put_all(arrays, "primal.", equinet::named_tensors(m.primal));
    if (m.spec.kind == pra::PrimalKind::pinn_adp_k) detail::put_all(arrays, "beta.", equinet::named_tensors(m.beta));
  }
  detail::put_all(arrays, "dual.", equinet::named_tensors(m.dual));
  doc["arrays"] = std::move(arrays);
  return doc;
}

template <class Model>
void save_checkpoint(const std::string& path, const Model& m) {
  const std::string text = checkpoint_json(m).dump(1) + "\n";
  detail::write_atomically(path, [&](std::ostream& out) { out << text; });
}

inline intercoord::IcModel load_ic_checkpoint(const std::string& path) {
  const Json doc = detail::checked_document(path, "ic-model");
  intercoord::IcNetSpec spec;
  try {
    const Json& s = doc.at("spec");
    spec.kind = intercoord::ic_kind_from_string(s.at("model").get<std::string>());
    spec.k_max = s.at("k_max").get<std::size_t>();
    spec.hidden_blocks = s.at("hidden_blocks").get<std::vector<std::size_t>>();
    spec.fc_hidden = s.at("fc_hidden").get<std::vector<std::size_t>>();
    spec.fc_bias = s.at("fc_bias").get<bool>();
    spec.beta_hidden = s.at("beta_hidden").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad spec (") + e.what() + ")");
  }
  if (doc.at("kind").get<std::string>() != std::string("ic-") + intercoord::to_string(spec.kind))
    throw FormatError("checkpoint: kind and spec disagree");
  Rng rng(0);
  intercoord::IcModel m = intercoord::build_ic_model(spec, rng, equinet::Init::zeros);
  const Json& arrays = doc.at("arrays");
  if (m.spec.is_pinn()) {
    detail::fill_all(arrays, "pinn.", equinet::named_tensors(m.pinn));
    if (m.spec.kind == intercoord::IcKind::pinn_adp_k) detail::fill_all(arrays, "beta.", equinet::named_tensors(m.beta));
  } else {
    detail::fill_all(arrays, "fc.", equinet::named_tensors(m.fc));
  }
  detail::fill_tensor(m.bn.scale, arrays, "bn.scale");
  detail::fill_tensor(m.bn.shift, arrays, "bn.shift");
  detail::fill_tensor(m.bn.running_mean, arrays, "bn.running_mean");
  detail::fill_tensor(m.bn.running_var, arrays, "bn.running_var");
  return m;
}

inline pra::PraModel load_pra_checkpoint(const std::string& path) {
  const Json doc = detail::checked_document(path, "pra-model");
  pra::PraNetSpec spec;
  try {
    const Json& s = doc.at("spec");
    spec.kind = pra::primal_kind_from_string(s.at("model").get<std::string>());
    spec.k_max = s.at("k_max").get<std::size_t>();
    spec.t_f = s.at("t_f").get<std::size_t>();
    spec.hidden = s.at("hidden").get<std::vector<std::size_t>>();
    spec.dual_hidden = s.at("dual_hidden").get<std::vector<std::size_t>>();
    spec.beta_hidden = s.at("beta_hidden").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad spec (") + e.what() + ")");
  }
  if (doc.at("kind").get<std::string>() != std::string("pra-") + pra::to_string(spec.kind))
    throw FormatError("checkpoint: kind and spec disagree");
  Rng rng(0);
  pra::PraModel m = pra::build_pra_model(spec, rng, equinet::Init::zeros);
  const Json& arrays = doc.at("arrays");
  if (spec.kind == pra::PrimalKind::fc) {
    detail::fill_all(arrays, "primal.", equinet::named_tensors(m.primal_fc));
  } else {
    detail::fill_all(arrays, "primal.", equinet::named_tensors(m.primal));
    if (spec.kind == pra::PrimalKind::pinn_adp_k) detail::fill_all(arrays, "beta.", equinet::named_tensors(m.beta));
  }
  detail::fill_all(arrays, "dual.", equinet::named_tensors(m.dual));
  return m;
}

}  // namespace pinn::benchcli
