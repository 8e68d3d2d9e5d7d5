#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gazekex/error.hpp"

namespace gazekex {

// Flat experiment configuration shared by every CLI subcommand. Files are
// line-oriented `key = value`; unknown keys are rejected so typos fail loudly
// instead of silently falling back to defaults. Every key has a default, and
// the fully resolved state echoes back out as a file that reloads to the same
// state byte for byte.
class RunConfig {
 public:
  // Key registry with defaults, sorted by key. Path-valued keys default to
  // empty, meaning "not provided".
  static const std::map<std::string, std::string>& registry() {
    static const std::map<std::string, std::string> keys = {
        {"att_hidden", "50"},
        {"attention_literal_norm", "false"},
        {"char_emb_dim", "50"},
        {"char_hidden", "50"},
        {"char_word_dim", "50"},
        {"clip_gradients", "true"},
        {"clip_norm", "5"},
        {"corpus_name", "osec"},
        {"dataset_mode", "generic"},
        {"dev", ""},
        {"early_stop_train_f1", "0"},
        {"embeddings", ""},
        {"epochs", "10"},
        {"expand_fill", "expanded"},
        {"freq_lexicon", ""},
        {"lambda_att", "0.3"},
        {"lambda_word", "0.7"},
        {"learning_rate", "0.001"},
        {"lexicon", ""},
        {"osec", ""},
        {"osec_format", "generic"},
        {"participants", "1"},
        {"posts", ""},
        {"regularize_frequency", "false"},
        {"regularize_length", "false"},
        {"seed", "1"},
        {"seeds", "1,2,3,4,5"},
        {"split_ratios", "0.8,0.1,0.1"},
        {"test", ""},
        {"train", ""},
        {"tweets", ""},
        {"variant", "baseline"},
        {"word_emb_dim", "100"},
        {"word_hidden", "100"},
    };
    return keys;
  }

  static bool is_known(const std::string& key) { return registry().count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    if (!is_known(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  // Effective value: explicit setting if present, registry default otherwise.
  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    auto def = registry().find(key);
    if (def == registry().end()) throw ConfigError("unknown config key '" + key + "'");
    return def->second;
  }

  bool is_set(const std::string& key) const { return values_.count(key) > 0; }

  long long get_int(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' needs an integer, got '" + s + "'");
    }
  }

  std::size_t get_size(const std::string& key) const {
    long long v = get_int(key);
    if (v < 0) throw ConfigError("config key '" + key + "' must be nonnegative, got " + get(key));
    return static_cast<std::size_t>(v);
  }

  double get_double(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' needs a number, got '" + s + "'");
    }
  }

  bool get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("config key '" + key + "' needs true/false, got '" + s + "'");
  }

  // Comma-separated nonempty list of nonnegative integers, e.g. "1,2,3,4,5".
  std::vector<std::uint64_t> get_seed_list(const std::string& key) const {
    std::vector<std::uint64_t> seeds;
    for (const std::string& part : split_commas(get(key), key)) {
      try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(part, &pos);
        if (pos != part.size()) throw std::invalid_argument("trailing");
        seeds.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs integers, got '" + part + "'");
      }
    }
    if (seeds.empty()) throw ConfigError("config key '" + key + "' needs at least one seed");
    return seeds;
  }

  // Exactly three comma-separated ratios, e.g. "0.8,0.1,0.1".
  std::array<double, 3> get_ratios(const std::string& key) const {
    std::vector<std::string> parts = split_commas(get(key), key);
    if (parts.size() != 3) {
      throw ConfigError("config key '" + key + "' needs three comma-separated ratios, got '" +
                        get(key) + "'");
    }
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      try {
        std::size_t pos = 0;
        out[i] = std::stod(parts[i], &pos);
        if (pos != parts[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs numbers, got '" + parts[i] + "'");
      }
    }
    return out;
  }

  // Path getter that distinguishes "absent" from a real value.
  std::string get_path(const std::string& key) const { return get(key); }
  bool has_path(const std::string& key) const { return !get(key).empty(); }

  // Full effective state, one `key = value` line per registry key, sorted.
  // Reloading the echo reproduces the same effective state exactly.
  std::string echo() const {
    std::ostringstream out;
    for (const auto& [key, def] : registry()) {
      out << key << " = " << get(key) << "\n";
    }
    return out.str();
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      std::size_t eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw ParseError(path, lineno, "expected `key = value`");
      }
      std::string key = trim(stripped.substr(0, eq));
      std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) throw ParseError(path, lineno, "empty key");
      if (!is_known(key)) {
        throw ConfigError("unknown config key '" + key + "' (" + path + ":" +
                          std::to_string(lineno) + ")");
      }
      if (cfg.is_set(key)) {
        throw ConfigError("duplicate config key '" + key + "' (" + path + ":" +
                          std::to_string(lineno) + ")");
      }
      cfg.set(key, value);
    }
    return cfg;
  }

  void write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    out << echo();
    if (!out) throw IoError("write failed: " + path);
  }

  bool operator==(const RunConfig& other) const { return echo() == other.echo(); }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split_commas(const std::string& s, const std::string& key) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = s.find(',', start);
      std::string part =
          trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
      if (part.empty()) throw ConfigError("config key '" + key + "' has an empty list element");
      parts.push_back(std::move(part));
      if (comma == std::string::npos) return parts;
      start = comma + 1;
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace gazekex
