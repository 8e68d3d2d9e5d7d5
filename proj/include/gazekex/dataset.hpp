#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gazekex/error.hpp"
#include "gazekex/log.hpp"
#include "gazekex/rng.hpp"

namespace gazekex {

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Tokens that survive punctuation peeling whole. A URL chunk that still ends
// in punctuation is not protected yet; the trailing characters peel off first.
inline bool is_protected_token(const std::string& s) {
  if (s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0 || s.rfind("www.", 0) == 0) {
    return s.size() > (s[0] == 'w' ? 4u : 7u) && !is_ascii_punct(s.back());
  }
  if ((s[0] == '@' || s[0] == '#') && s.size() > 1) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (!is_word_char(s[i])) return false;
    }
    return true;
  }
  static const std::array<const char*, 10> emoticons = {":)", ":(", ":D",  ":P", ";)",
                                                        ":-)", ":-(", ":/", "<3", ":O"};
  for (const char* e : emoticons) {
    if (s == e) return true;
  }
  return false;
}

inline void emit_chunk(const std::string& chunk, std::vector<std::string>& out) {
  if (chunk.empty()) return;
  if (is_protected_token(chunk)) {
    out.push_back(chunk);
    return;
  }
  if (chunk.size() == 1) {
    out.push_back(chunk);
    return;
  }
  // Trailing peel runs first so "#tag)" re-checks protection as "#tag"
  // before its leading '#' could be mistaken for loose punctuation.
  if (is_ascii_punct(chunk.back())) {
    emit_chunk(chunk.substr(0, chunk.size() - 1), out);
    out.push_back(chunk.substr(chunk.size() - 1));
    return;
  }
  if (is_ascii_punct(chunk.front())) {
    out.push_back(chunk.substr(0, 1));
    emit_chunk(chunk.substr(1), out);
    return;
  }
  out.push_back(chunk);
}

}  // namespace detail

// Whitespace split, then leading/trailing ASCII punctuation peels off as
// single-character tokens. URLs, @mentions, #hashtags, and a small emoticon
// set stay whole. Idempotent: tokenizing the space-join of any output
// reproduces it.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string chunk;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      detail::emit_chunk(chunk, tokens);
      chunk.clear();
    } else {
      chunk.push_back(c);
    }
  }
  detail::emit_chunk(chunk, tokens);
  return tokens;
}

// ---------------------------------------------------------------------------
// Hashtag segmentation
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

}  // namespace detail

// Camel-case splitting for hashtag text (no leading '#'). Hashtags written in
// one case are left whole; mixed-case text is scanned left to right, greedily
// taking `(capital)*(lowercase)+`, falling back to `(capital)+`, with
// non-letter runs passed through as their own tokens. The output always
// concatenates back to the input.
inline std::vector<std::string> segment_hashtag(const std::string& text) {
  if (text.empty()) throw EmptyInputError("cannot segment an empty hashtag");
  bool has_upper = false, has_lower = false;
  for (char c : text) {
    has_upper |= detail::is_upper(c);
    has_lower |= detail::is_lower(c);
  }
  if (!has_upper || !has_lower) return {text};

  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!detail::is_upper(text[i]) && !detail::is_lower(text[i])) {
      std::size_t j = i;
      while (j < n && !detail::is_upper(text[j]) && !detail::is_lower(text[j])) ++j;
      out.push_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    std::size_t caps = i;
    while (caps < n && detail::is_upper(text[caps])) ++caps;
    if (caps < n && detail::is_lower(text[caps])) {
      // (capital)*(lowercase)+, greedy on both runs.
      std::size_t j = caps;
      while (j < n && detail::is_lower(text[j])) ++j;
      out.push_back(text.substr(i, j - i));
      i = j;
    } else {
      // (capital)+ with no lowercase continuation.
      out.push_back(text.substr(i, caps - i));
      i = caps;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SBMEN tags and spans
// ---------------------------------------------------------------------------

enum class Tag : std::uint8_t { kSingle = 0, kBegin = 1, kMiddle = 2, kEnd = 3, kNot = 4 };

inline constexpr std::size_t kTagCount = 5;

inline char tag_char(Tag t) {
  switch (t) {
    case Tag::kSingle: return 'S';
    case Tag::kBegin: return 'B';
    case Tag::kMiddle: return 'M';
    case Tag::kEnd: return 'E';
    case Tag::kNot: return 'N';
  }
  throw ContractError("unreachable tag");
}

inline Tag tag_from_char(char c) {
  switch (c) {
    case 'S': return Tag::kSingle;
    case 'B': return Tag::kBegin;
    case 'M': return Tag::kMiddle;
    case 'E': return Tag::kEnd;
    case 'N': return Tag::kNot;
  }
  throw ContractError(std::string("unknown tag character '") + c + "'");
}

using Span = std::pair<std::size_t, std::size_t>;  // half-open token range

inline std::vector<Tag> spans_to_tags(const std::vector<Span>& spans, std::size_t length) {
  std::vector<Tag> tags(length, Tag::kNot);
  for (const auto& [start, end] : spans) {
    if (start >= end || end > length) {
      throw ContractError("span [" + std::to_string(start) + "," + std::to_string(end) +
                          ") invalid for length " + std::to_string(length));
    }
    for (std::size_t i = start; i < end; ++i) {
      if (tags[i] != Tag::kNot) throw ContractError("overlapping keyphrase spans");
    }
    if (end - start == 1) {
      tags[start] = Tag::kSingle;
    } else {
      tags[start] = Tag::kBegin;
      for (std::size_t i = start + 1; i + 1 < end; ++i) tags[i] = Tag::kMiddle;
      tags[end - 1] = Tag::kEnd;
    }
  }
  return tags;
}

// Strict decode when the sequence matches (N | S | B M* E)*; anything else is
// repaired by reading every maximal run of non-Not tags as one span.
inline std::vector<Span> tags_to_spans(const std::vector<Tag>& tags) {
  std::vector<Span> spans;
  bool valid = true;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (tags[i] == Tag::kNot) {
      ++i;
    } else if (tags[i] == Tag::kSingle) {
      spans.emplace_back(i, i + 1);
      ++i;
    } else if (tags[i] == Tag::kBegin) {
      std::size_t j = i + 1;
      while (j < tags.size() && tags[j] == Tag::kMiddle) ++j;
      if (j < tags.size() && tags[j] == Tag::kEnd) {
        spans.emplace_back(i, j + 1);
        i = j + 1;
      } else {
        valid = false;
        break;
      }
    } else {
      valid = false;
      break;
    }
  }
  if (valid) return spans;

  spans.clear();
  std::size_t start = 0;
  bool in_run = false;
  for (std::size_t k = 0; k <= tags.size(); ++k) {
    const bool keyphrase = k < tags.size() && tags[k] != Tag::kNot;
    if (keyphrase && !in_run) {
      start = k;
      in_run = true;
    } else if (!keyphrase && in_run) {
      spans.emplace_back(start, k);
      in_run = false;
    }
  }
  return spans;
}

// ---------------------------------------------------------------------------
// Posts
// ---------------------------------------------------------------------------

struct Post {
  std::vector<std::string> tokens;
  std::vector<Span> gold_spans;
  std::vector<Tag> tags;

  void validate() const {
    if (tags.size() != tokens.size()) throw ContractError("tag/token length mismatch");
    if (spans_to_tags(gold_spans, tokens.size()) != tags) {
      throw ContractError("tags are not the encoding of the gold spans");
    }
  }

  // Lowercased token sequences of the gold spans.
  std::vector<std::vector<std::string>> gold_phrases() const;
};

enum class DatasetMode { kElectionTrec, kGeneralTwitter, kGeneric };

inline DatasetMode dataset_mode_from_string(const std::string& s) {
  if (s == "election-trec") return DatasetMode::kElectionTrec;
  if (s == "general-twitter") return DatasetMode::kGeneralTwitter;
  if (s == "generic") return DatasetMode::kGeneric;
  throw ConfigError("unknown dataset mode '" + s + "'");
}

namespace detail {

inline bool is_hashtag_token(const std::string& t) {
  return t.size() > 1 && t[0] == '#' && is_protected_token(t);
}

}  // namespace detail

// A tweet survives when it has exactly one hashtag and that hashtag sits
// strictly inside the token sequence. The '#' is stripped, the tag text
// segmented, and the resulting tokens become the gold keyphrase span. The
// mode only labels provenance; the filters are identical.
inline std::vector<Post> build_dataset(const std::vector<std::string>& tweet_texts,
                                       DatasetMode mode) {
  (void)mode;
  std::vector<Post> posts;
  for (const auto& text : tweet_texts) {
    std::vector<std::string> tokens = tokenize(text);
    std::vector<std::size_t> hashtag_positions;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (detail::is_hashtag_token(tokens[i])) hashtag_positions.push_back(i);
    }
    if (hashtag_positions.size() != 1) continue;
    const std::size_t p = hashtag_positions[0];
    if (p == 0 || p + 1 == tokens.size()) continue;

    std::vector<std::string> segments = segment_hashtag(tokens[p].substr(1));
    Post post;
    post.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(p));
    post.tokens.insert(post.tokens.end(), segments.begin(), segments.end());
    post.tokens.insert(post.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(p) + 1,
                       tokens.end());
    post.gold_spans = {{p, p + segments.size()}};
    post.tags = spans_to_tags(post.gold_spans, post.tokens.size());
    post.validate();
    posts.push_back(std::move(post));
  }
  if (posts.empty()) log_warn("build_dataset: no tweets passed the hashtag filters");
  return posts;
}

inline std::vector<std::vector<std::string>> Post::gold_phrases() const {
  std::vector<std::vector<std::string>> phrases;
  for (const auto& [start, end] : gold_spans) {
    std::vector<std::string> phrase;
    for (std::size_t i = start; i < end; ++i) {
      std::string t = tokens[i];
      for (char& c : t) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      phrase.push_back(std::move(t));
    }
    phrases.push_back(std::move(phrase));
  }
  return phrases;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct DatasetSplit {
  std::vector<Post> train, dev, test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
};

inline DatasetSplit split_dataset(std::vector<Post> posts, const std::array<double, 3>& ratios,
                                  std::uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1, got " + std::to_string(sum));
  }
  for (double r : ratios) {
    if (r < 0.0) throw ConfigError("split ratios must be nonnegative");
  }
  Rng rng(seed, rng_stream::kSplit);
  rng.shuffle(posts);
  const auto n = static_cast<double>(posts.size());
  const auto cut1 = static_cast<std::size_t>(std::llround(n * ratios[0]));
  const auto cut2 = static_cast<std::size_t>(std::llround(n * (ratios[0] + ratios[1])));

  DatasetSplit split;
  split.seed = seed;
  split.ratios = ratios;
  split.train.assign(posts.begin(), posts.begin() + static_cast<std::ptrdiff_t>(cut1));
  split.dev.assign(posts.begin() + static_cast<std::ptrdiff_t>(cut1),
                   posts.begin() + static_cast<std::ptrdiff_t>(cut2));
  split.test.assign(posts.begin() + static_cast<std::ptrdiff_t>(cut2), posts.end());
  return split;
}

// ---------------------------------------------------------------------------
// Post serialization (JSON lines)
// ---------------------------------------------------------------------------

inline void write_posts_jsonl(const std::string& path, const std::vector<Post>& posts) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  for (const auto& post : posts) {
    nlohmann::json j;
    j["tokens"] = post.tokens;
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& [s, e] : post.gold_spans) spans.push_back({s, e});
    j["gold_spans"] = spans;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<Post> read_posts_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open posts file: " + path);
  std::vector<Post> posts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
    if (!j.contains("tokens") || !j.contains("gold_spans")) {
      throw ParseError(path, lineno, "record needs 'tokens' and 'gold_spans'");
    }
    Post post;
    try {
      post.tokens = j["tokens"].get<std::vector<std::string>>();
      for (const auto& pair : j["gold_spans"]) {
        if (!pair.is_array() || pair.size() != 2) {
          throw ParseError(path, lineno, "each span must be a [start, end] pair");
        }
        post.gold_spans.emplace_back(pair[0].get<std::size_t>(), pair[1].get<std::size_t>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
    try {
      post.tags = spans_to_tags(post.gold_spans, post.tokens.size());
      post.validate();
    } catch (const ContractError& e) {
      throw ParseError(path, lineno, e.what());
    }
    posts.push_back(std::move(post));
  }
  return posts;
}

// Raw tweet input: plain text one tweet per line, or JSON records carrying a
// "text" field (detected per line).
inline std::vector<std::string> read_tweets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tweets file: " + path);
  std::vector<std::string> texts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, lineno, e.what());
      }
      if (!j.contains("text") || !j["text"].is_string()) {
        throw ParseError(path, lineno, "record needs a string 'text' field");
      }
      texts.push_back(j["text"].get<std::string>());
    } else {
      texts.push_back(line);
    }
  }
  return texts;
}

}  // namespace gazekex
