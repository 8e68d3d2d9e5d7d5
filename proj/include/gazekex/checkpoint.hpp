#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gazekex/error.hpp"
#include "gazekex/tensor.hpp"

namespace gazekex {

inline constexpr const char* kCheckpointMagic = "GAZEKEX-CKPT-1";

// Exact round-trip for doubles: C hexfloat in both directions.
inline std::string double_to_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double hex_to_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ParseError(where, 0, "bad float literal '" + s + "'");
  return v;
}

struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParamSet params;
};

// Text format, line oriented:
//   GAZEKEX-CKPT-1
//   meta <key> <value to end of line>
//   tensor <name> <rank> <dims...> <hexfloat values...>
// Meta keys are written in sorted order, tensors in ParamSet order.
inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << kCheckpointMagic << "\n";
  for (const auto& [k, v] : ckpt.meta) {
    if (k.find_first_of(" \t\n") != std::string::npos) {
      throw ContractError("checkpoint meta key contains whitespace: " + k);
    }
    if (v.find('\n') != std::string::npos) {
      throw ContractError("checkpoint meta value contains newline: " + k);
    }
    out << "meta " << k << " " << v << "\n";
  }
  for (const auto& name : ckpt.params.names()) {
    const Tensor& t = ckpt.params.at(name);
    out << "tensor " << name << " " << t.rank();
    for (std::size_t i = 0; i < t.rank(); ++i) out << " " << t.dim(i);
    for (double v : t.data()) out << " " << double_to_hex(v);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for read: " + path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  if (line != kCheckpointMagic) throw ParseError(path, 1, "bad magic '" + line + "'");
  Checkpoint ckpt;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "meta") {
      std::string key;
      ss >> key;
      if (key.empty()) throw ParseError(path, lineno, "meta line without key");
      std::string value;
      std::getline(ss, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.meta[key] = value;
    } else if (kind == "tensor") {
      std::string name;
      std::size_t rank = 0;
      if (!(ss >> name >> rank)) throw ParseError(path, lineno, "bad tensor header");
      Shape shape(rank);
      for (std::size_t i = 0; i < rank; ++i) {
        if (!(ss >> shape[i])) throw ParseError(path, lineno, "bad tensor dims for " + name);
      }
      const std::size_t n = shape_numel(shape);
      std::vector<double> data(n);
      std::string tok;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(ss >> tok)) throw ParseError(path, lineno, "tensor " + name + " truncated");
        data[i] = hex_to_double(tok, path);
      }
      if (ss >> tok) throw ParseError(path, lineno, "tensor " + name + " has trailing data");
      ckpt.params.add(name, Tensor(std::move(shape), std::move(data)));
    } else {
      throw ParseError(path, lineno, "unknown record '" + kind + "'");
    }
  }
  return ckpt;
}

}  // namespace gazekex
