#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gazekex/error.hpp"
#include "gazekex/log.hpp"

namespace gazekex {

inline std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::size_t alpha_length(const std::string& word) {
  std::size_t n = 0;
  for (unsigned char c : word) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) ++n;
  }
  return n;
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline double parse_double_field(const std::string& s, const std::string& file, std::size_t line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "bad numeric field '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// Fixation records
// ---------------------------------------------------------------------------

struct FixationRecord {
  std::string word;
  std::string context_id;
  double trt_ms = 0.0;  // summed over participants; 0 when skipped
  std::size_t participant_count = 1;
};

enum class OsecFormat { kGeneric, kGeco, kZuco };

inline OsecFormat osec_format_from_string(const std::string& s) {
  if (s == "generic" || s == "generic-tsv") return OsecFormat::kGeneric;
  if (s == "geco") return OsecFormat::kGeco;
  if (s == "zuco") return OsecFormat::kZuco;
  throw ConfigError("unknown corpus format '" + s + "' (expected generic, geco, or zuco)");
}

namespace detail {

struct OsecColumns {
  std::size_t word;
  std::size_t trt;
  std::size_t context;
};

// Header-driven mapping. The generic layout is positional with a fixed
// header; the corpus presets locate their native column names and tolerate
// extra columns (other gaze measures are present but unused).
inline OsecColumns resolve_columns(const std::vector<std::string>& header, OsecFormat format,
                                   const std::string& path) {
  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ParseError(path, 1, "missing column '" + name + "'");
  };
  switch (format) {
    case OsecFormat::kGeneric:
      return {find("word"), find("trt_ms"), find("context_id")};
    case OsecFormat::kGeco:
      return {find("WORD"), find("WORD_TOTAL_READING_TIME"), find("SENTENCE_ID")};
    case OsecFormat::kZuco:
      return {find("WORD"), find("TRT"), find("SENTENCE_ID")};
  }
  throw ConfigError("unreachable corpus format");
}

}  // namespace detail

inline std::vector<FixationRecord> ingest_osec(const std::string& path, OsecFormat format,
                                               std::size_t participant_count) {
  if (participant_count < 1) throw ContractError("participant count must be >= 1");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<FixationRecord> records;
  std::optional<detail::OsecColumns> cols;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (!cols) {
      cols = detail::resolve_columns(fields, format, path);
      continue;
    }
    const std::size_t needed = std::max({cols->word, cols->trt, cols->context});
    if (fields.size() <= needed) {
      throw ParseError(path, lineno, "expected at least " + std::to_string(needed + 1) + " columns");
    }
    FixationRecord rec;
    rec.word = fields[cols->word];
    rec.context_id = fields[cols->context];
    rec.participant_count = participant_count;
    const std::string& trt = fields[cols->trt];
    if (trt.empty() || trt == "-") {
      rec.trt_ms = 0.0;  // skipped word
    } else {
      rec.trt_ms = parse_double_field(trt, path, lineno);
      if (rec.trt_ms < 0.0) throw ParseError(path, lineno, "negative reading time");
    }
    if (rec.word.empty()) throw ParseError(path, lineno, "empty word field");
    records.push_back(std::move(rec));
  }
  return records;
}

// Mean over occurrences of (trt / participants), keyed by lowercased word.
// Skipped occurrences stay in the mean as zeros: skipping is itself evidence
// of low reading effort.
inline std::map<std::string, double> average_trt(const std::vector<FixationRecord>& records,
                                                 std::size_t participant_count) {
  if (participant_count < 1) throw ContractError("participant count must be >= 1");
  std::map<std::string, double> sums;
  std::map<std::string, std::size_t> counts;
  for (const auto& rec : records) {
    const std::string key = ascii_lower(rec.word);
    sums[key] += rec.trt_ms / static_cast<double>(participant_count);
    counts[key] += 1;
  }
  std::map<std::string, double> avg;
  for (const auto& [word, total] : sums) {
    avg[word] = total / static_cast<double>(counts[word]);
  }
  return avg;
}

// ---------------------------------------------------------------------------
// Frequency lexicon
// ---------------------------------------------------------------------------

class FrequencyLexicon {
 public:
  // counts are per 100 million tokens; l = log10(count * 10) puts them on a
  // per-billion log scale.
  void add(const std::string& word, double count_per_100m) {
    if (count_per_100m <= 0.0) throw ContractError("frequency count must be positive: " + word);
    l_bnc_[ascii_lower(word)] = std::log10(count_per_100m * 10.0);
    mean_dirty_ = true;
  }

  bool contains(const std::string& word) const { return l_bnc_.count(ascii_lower(word)) > 0; }

  double l_bnc(const std::string& word) const {
    auto it = l_bnc_.find(ascii_lower(word));
    if (it == l_bnc_.end()) throw ContractError("word not in frequency lexicon: " + word);
    return it->second;
  }

  double mean_l_bnc() const {
    if (l_bnc_.empty()) throw EmptyInputError("frequency lexicon has no entries");
    if (mean_dirty_) {
      double sum = 0.0;
      for (const auto& [w, l] : l_bnc_) sum += l;
      mean_ = sum / static_cast<double>(l_bnc_.size());
      mean_dirty_ = false;
    }
    return mean_;
  }

  std::size_t size() const { return l_bnc_.size(); }

  static FrequencyLexicon load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open frequency file: " + path);
    FrequencyLexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto fields = split_tabs(line);
      if (fields.size() != 2) throw ParseError(path, lineno, "expected word<TAB>count");
      const double count = parse_double_field(fields[1], path, lineno);
      if (count <= 0.0) throw ParseError(path, lineno, "count must be positive");
      lex.add(fields[0], count);
    }
    return lex;
  }

 private:
  std::map<std::string, double> l_bnc_;
  mutable double mean_ = 0.0;
  mutable bool mean_dirty_ = true;
};

// ---------------------------------------------------------------------------
// Regularization and normalization
// ---------------------------------------------------------------------------

inline std::map<std::string, double> regularize_frequency(const std::map<std::string, double>& avg,
                                                          const FrequencyLexicon& freq) {
  const double fallback = freq.mean_l_bnc();
  std::map<std::string, double> out;
  for (const auto& [word, value] : avg) {
    out[word] = value * (freq.contains(word) ? freq.l_bnc(word) : fallback);
  }
  return out;
}

inline constexpr double kLengthBase = 1.08;

inline std::map<std::string, double> regularize_length(const std::map<std::string, double>& avg) {
  std::map<std::string, double> out;
  for (const auto& [word, value] : avg) {
    out[word] = value / std::pow(kLengthBase, static_cast<double>(alpha_length(word)));
  }
  return out;
}

struct MinMax {
  double min = 0.0;
  double max = 0.0;
};

inline std::map<std::string, double> minmax_normalize(const std::map<std::string, double>& values,
                                                      MinMax* stats = nullptr) {
  if (values.empty()) throw EmptyInputError("cannot normalize an empty map");
  double lo = values.begin()->second, hi = values.begin()->second;
  for (const auto& [w, v] : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (stats) *stats = {lo, hi};
  std::map<std::string, double> out;
  for (const auto& [w, v] : values) {
    out[w] = (hi == lo) ? 0.0 : (v - lo) / (hi - lo);
  }
  return out;
}

// Intersection of two AVG-TRT maps, entrywise mean. Disjoint inputs produce
// an empty map with a warning rather than an error.
inline std::map<std::string, double> combine_avg(const std::map<std::string, double>& a,
                                                 const std::map<std::string, double>& b) {
  std::map<std::string, double> out;
  for (const auto& [word, va] : a) {
    auto it = b.find(word);
    if (it != b.end()) out[word] = 0.5 * (va + it->second);
  }
  if (out.empty()) log_warn("combine: corpora share no vocabulary");
  return out;
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

inline constexpr std::size_t kTrtBins = 11;

// Half-up rounding of value*10 onto bins 0..10.
inline std::size_t discretize(double normalized) {
  if (!(normalized >= 0.0 && normalized <= 1.0)) {
    throw ContractError("discretize expects a value in [0,1], got " + format_double(normalized));
  }
  return static_cast<std::size_t>(std::floor(normalized * 10.0 + 0.5));
}

inline std::vector<double> one_hot_trt(std::size_t bin) {
  if (bin >= kTrtBins) throw ContractError("bin index out of range: " + std::to_string(bin));
  std::vector<double> v(kTrtBins, 0.0);
  v[bin] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Lexicon container and TSV round-trip
// ---------------------------------------------------------------------------

enum class EntrySource { kNative, kExpanded, kMeanFilled };

inline const char* source_name(EntrySource s) {
  switch (s) {
    case EntrySource::kNative: return "native";
    case EntrySource::kExpanded: return "expanded";
    case EntrySource::kMeanFilled: return "mean_filled";
  }
  throw ContractError("unreachable entry source");
}

inline EntrySource source_from_name(const std::string& s, const std::string& file, std::size_t line) {
  if (s == "native") return EntrySource::kNative;
  if (s == "expanded") return EntrySource::kExpanded;
  if (s == "mean_filled") return EntrySource::kMeanFilled;
  throw ParseError(file, line, "unknown entry source '" + s + "'");
}

struct LexiconEntry {
  double avg_trt = 0.0;      // native entries only
  double regularized = 0.0;  // native entries only
  double normalized = 0.0;   // every entry; always in [0,1]
  EntrySource source = EntrySource::kNative;
};

struct LexiconMeta {
  std::string corpus = "unnamed";
  bool freq_regularized = false;
  bool len_regularized = false;
  double norm_min = 0.0;  // min/max of the regularized values the
  double norm_max = 0.0;  // normalization was computed over
};

struct RegularizerFlags {
  bool frequency = false;
  bool length = false;
};

class GazeLexicon {
 public:
  using EntryMap = std::map<std::string, LexiconEntry>;

  GazeLexicon() = default;
  explicit GazeLexicon(LexiconMeta meta) : meta_(std::move(meta)) {}

  LexiconMeta& meta() { return meta_; }
  const LexiconMeta& meta() const { return meta_; }
  const EntryMap& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool contains(const std::string& word) const { return entries_.count(ascii_lower(word)) > 0; }

  const LexiconEntry* find(const std::string& word) const {
    auto it = entries_.find(ascii_lower(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Missing words read as zero reading time; every consumer of the lexicon
  // shares that convention.
  double normalized_or_zero(const std::string& word) const {
    const LexiconEntry* e = find(word);
    return e ? e->normalized : 0.0;
  }

  void insert(const std::string& word, LexiconEntry entry) {
    if (!(entry.normalized >= 0.0 && entry.normalized <= 1.0)) {
      throw ContractError("normalized value out of [0,1] for '" + word + "'");
    }
    entries_[ascii_lower(word)] = entry;
  }

  std::vector<std::string> words_with_source(EntrySource source) const {
    std::vector<std::string> out;
    for (const auto& [word, entry] : entries_) {
      if (entry.source == source) out.push_back(word);
    }
    return out;
  }

  double mean_native_normalized() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [word, entry] : entries_) {
      if (entry.source == EntrySource::kNative) {
        sum += entry.normalized;
        ++n;
      }
    }
    if (n == 0) throw EmptyInputError("lexicon has no native entries");
    return sum / static_cast<double>(n);
  }

 private:
  EntryMap entries_;
  LexiconMeta meta_;
};

// Staged build: AVG-TRT -> configured regularizers -> min-max over natives.
// Frequency and length are both multiplicative on AVG-TRT, so their order
// does not change values; one normalization pass runs at the end.
inline GazeLexicon build_lexicon(const std::map<std::string, double>& avg,
                                 const RegularizerFlags& flags, const FrequencyLexicon* freq,
                                 const std::string& corpus_name) {
  if (avg.empty()) throw EmptyInputError("no averaged reading times to build from");
  std::map<std::string, double> reg = avg;
  if (flags.frequency) {
    if (!freq) throw ConfigError("frequency regularization requires a frequency lexicon");
    reg = regularize_frequency(reg, *freq);
  }
  if (flags.length) reg = regularize_length(reg);

  MinMax stats;
  std::map<std::string, double> norm = minmax_normalize(reg, &stats);

  LexiconMeta meta;
  meta.corpus = corpus_name;
  meta.freq_regularized = flags.frequency;
  meta.len_regularized = flags.length;
  meta.norm_min = stats.min;
  meta.norm_max = stats.max;

  GazeLexicon lex(meta);
  for (const auto& [word, a] : avg) {
    LexiconEntry e;
    e.avg_trt = a;
    e.regularized = reg.at(word);
    e.normalized = norm.at(word);
    e.source = EntrySource::kNative;
    lex.insert(word, e);
  }
  return lex;
}

// Rows: word<TAB>avg<TAB>regularized<TAB>normalized<TAB>source. The avg and
// regularized columns hold "-" for non-native entries (only normalized is
// meaningful there). Native rows are written first, each block sorted, so a
// lexicon's native section is byte-stable under expansion.
inline void write_lexicon_tsv(const std::string& path, const GazeLexicon& lex) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  const LexiconMeta& m = lex.meta();
  out << "# corpus " << m.corpus << "\n";
  out << "# regularizers freq=" << (m.freq_regularized ? 1 : 0)
      << " len=" << (m.len_regularized ? 1 : 0) << "\n";
  out << "# norm_min " << format_double(m.norm_min) << "\n";
  out << "# norm_max " << format_double(m.norm_max) << "\n";
  out << "word\tavg_trt\tregularized\tnormalized\tsource\n";
  auto write_block = [&](EntrySource source) {
    for (const auto& [word, e] : lex.entries()) {
      if (e.source != source) continue;
      out << word << "\t";
      if (e.source == EntrySource::kNative) {
        out << format_double(e.avg_trt) << "\t" << format_double(e.regularized) << "\t";
      } else {
        out << "-\t-\t";
      }
      out << format_double(e.normalized) << "\t" << source_name(e.source) << "\n";
    }
  };
  write_block(EntrySource::kNative);
  write_block(EntrySource::kExpanded);
  write_block(EntrySource::kMeanFilled);
  if (!out) throw IoError("write failed: " + path);
}

inline GazeLexicon read_lexicon_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file: " + path);
  GazeLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      if (key == "corpus") {
        std::string rest;
        std::getline(ss, rest);
        if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
        lex.meta().corpus = rest;
      } else if (key == "regularizers") {
        std::string tok;
        while (ss >> tok) {
          if (tok == "freq=1") lex.meta().freq_regularized = true;
          if (tok == "len=1") lex.meta().len_regularized = true;
        }
      } else if (key == "norm_min") {
        std::string v;
        ss >> v;
        lex.meta().norm_min = parse_double_field(v, path, lineno);
      } else if (key == "norm_max") {
        std::string v;
        ss >> v;
        lex.meta().norm_max = parse_double_field(v, path, lineno);
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 5) throw ParseError(path, lineno, "expected 5 tab-separated columns");
    if (!saw_header) {
      if (fields[0] != "word") throw ParseError(path, lineno, "missing column header row");
      saw_header = true;
      continue;
    }
    LexiconEntry e;
    e.source = source_from_name(fields[4], path, lineno);
    if (e.source == EntrySource::kNative) {
      e.avg_trt = parse_double_field(fields[1], path, lineno);
      e.regularized = parse_double_field(fields[2], path, lineno);
    } else {
      if (fields[1] != "-" || fields[2] != "-") {
        throw ParseError(path, lineno, "non-native rows must carry '-' stage columns");
      }
    }
    e.normalized = parse_double_field(fields[3], path, lineno);
    if (!(e.normalized >= 0.0 && e.normalized <= 1.0)) {
      throw ParseError(path, lineno, "normalized value out of [0,1]");
    }
    lex.insert(fields[0], e);
  }
  return lex;
}

// ---------------------------------------------------------------------------
// Coverage
// ---------------------------------------------------------------------------

inline double coverage(const GazeLexicon& lex, const std::vector<std::string>& vocab_tokens,
                       bool deduplicate) {
  if (vocab_tokens.empty()) throw EmptyInputError("coverage needs a nonempty vocabulary");
  if (deduplicate) {
    std::set<std::string> unique;
    for (const auto& t : vocab_tokens) unique.insert(ascii_lower(t));
    std::size_t covered = 0;
    for (const auto& t : unique) {
      if (lex.contains(t)) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(unique.size());
  }
  std::size_t covered = 0;
  for (const auto& t : vocab_tokens) {
    if (lex.contains(t)) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(vocab_tokens.size());
}

}  // namespace gazekex
