#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pinn/error.hpp"
#include "pinn/intercoord/dataset.hpp"
#include "pinn/pra/scenario.hpp"

namespace pinn::benchcli {

using numcore::Tensor;

namespace detail {

inline std::vector<double> doubles(const nlohmann::json& j, const char* key, std::size_t expected, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw FormatError("line " + std::to_string(line) + ": missing array '" + key + "'");
  std::vector<double> v;
  v.reserve(it->size());
  for (const auto& e : *it) {
    if (!e.is_number()) throw FormatError("line " + std::to_string(line) + ": non-numeric entry in '" + key + "'");
    v.push_back(e.get<double>());
  }
  if (v.size() != expected)
    throw FormatError("line " + std::to_string(line) + ": '" + key + "' has " + std::to_string(v.size()) + " values, expected " +
                      std::to_string(expected));
  return v;
}

inline std::size_t count(const nlohmann::json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned() || it->get<std::size_t>() == 0)
    throw FormatError("line " + std::to_string(line) + ": '" + key + "' must be a positive integer");
  return it->get<std::size_t>();
}

inline std::vector<double> flat(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

/// Writes next to the target and renames, so a failed write never leaves a partial file.
inline void write_atomically(const std::string& path, const std::function<void(std::ostream&)>& body) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    body(out);
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("write to '" + path + "' failed");
    }
  }
  std::filesystem::rename(tmp, target);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

/// Calls `fn(json, line_no)` for every non-blank line.
inline void for_each_record(const std::string& path, const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("dataset '" + path + "': malformed record", no, e.byte);
    }
    if (!j.is_object()) throw ParseError("dataset '" + path + "': record is not an object", no, 1);
    fn(j, no);
  }
  if (in.bad()) throw IoError("read of '" + path + "' failed");
}

}  // namespace detail

inline nlohmann::json ic_record(const intercoord::IcSample& s) {
  return {{"k", s.k}, {"x", detail::flat(s.x)}, {"y", detail::flat(s.y)}, {"augmented", s.augmented}};
}

inline intercoord::IcSample ic_from_record(const nlohmann::json& j, std::size_t line) {
  intercoord::IcSample s;
  s.k = detail::count(j, "k", line);
  s.x = Tensor({s.k, s.k}, detail::doubles(j, "x", s.k * s.k, line));
  s.y = Tensor({s.k}, detail::doubles(j, "y", s.k, line));
  auto it = j.find("augmented");
  s.augmented = it != j.end() && it->is_boolean() && it->get<bool>();
  return s;
}

inline nlohmann::json pra_record(const pra::PraInstance& p) {
  return {{"k", p.k}, {"t_f", p.t_f}, {"n_b", p.n_b}, {"r", detail::flat(p.r)}, {"m", detail::flat(p.m)}};
}

inline pra::PraInstance pra_from_record(const nlohmann::json& j, std::size_t line) {
  pra::PraInstance p;
  p.k = detail::count(j, "k", line);
  p.t_f = detail::count(j, "t_f", line);
  p.n_b = detail::count(j, "n_b", line);
  p.r = Tensor({p.t_f, p.k}, detail::doubles(j, "r", p.t_f * p.k, line));
  p.m = Tensor({p.n_b, p.t_f, p.k}, detail::doubles(j, "m", p.n_b * p.t_f * p.k, line));
  try {
    pra::validate_instance(p);
  } catch (const std::exception& e) {
    throw FormatError("line " + std::to_string(line) + ": " + e.what());
  }
  return p;
}

/// One JSON object per line; doubles are written in shortest round-trip form, so a reload is bit-exact.
inline void save_ic_dataset(const std::string& path, const std::vector<intercoord::IcSample>& samples) {
  detail::write_atomically(path, [&](std::ostream& out) {
    for (const auto& s : samples) out << ic_record(s).dump() << '\n';
  });
}

inline std::vector<intercoord::IcSample> load_ic_dataset(const std::string& path) {
  std::vector<intercoord::IcSample> out;
  detail::for_each_record(path, [&](const nlohmann::json& j, std::size_t no) { out.push_back(ic_from_record(j, no)); });
  return out;
}

inline void save_pra_dataset(const std::string& path, const std::vector<pra::PraInstance>& samples) {
  detail::write_atomically(path, [&](std::ostream& out) {
    for (const auto& s : samples) out << pra_record(s).dump() << '\n';
  });
}

inline std::vector<pra::PraInstance> load_pra_dataset(const std::string& path) {
  std::vector<pra::PraInstance> out;
  detail::for_each_record(path, [&](const nlohmann::json& j, std::size_t no) { out.push_back(pra_from_record(j, no)); });
  return out;
}

/// FNV-1a over the bit patterns of every stored value.
class Checksum {
 public:
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h_ ^= (bits >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ull;
    }
  }
  void add(const Tensor& t) {
    for (double v : t.values()) add(v);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t checksum(const std::vector<intercoord::IcSample>& samples) {
  Checksum c;
  for (const auto& s : samples) {
    c.add(static_cast<double>(s.k));
    c.add(s.x);
    c.add(s.y);
    c.add(s.augmented ? 1.0 : 0.0);
  }
  return c.value();
}

inline std::uint64_t checksum(const std::vector<pra::PraInstance>& samples) {
  Checksum c;
  for (const auto& s : samples) {
    c.add(static_cast<double>(s.k));
    c.add(s.r);
    c.add(s.m);
  }
  return c.value();
}

/// Comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... Ts>
  void row(const Ts&... cells) {
    if (sizeof...(Ts) != header_.size()) throw ContractError("csv: row width differs from header");
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    rows_.push_back(std::move(r));
  }

  std::string str() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
      s += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return s;
  }

  void save(const std::string& path) const {
    detail::write_atomically(path, [&](std::ostream& out) { out << str(); });
  }

  std::size_t size() const { return rows_.size(); }

 private:
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  template <class T>
  static std::string cell(const T& v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace pinn::benchcli
