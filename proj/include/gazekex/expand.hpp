#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "gazekex/embedding.hpp"
#include "gazekex/error.hpp"
#include "gazekex/gaze.hpp"
#include "gazekex/log.hpp"

namespace gazekex {

inline constexpr std::size_t kExpansionTopK = 10;

// Produces a vector for any word; used when one side of a candidate pair has
// no pretrained embedding (typically the char-level encoder of a trained
// baseline tagger).
using CharEncoder = std::function<std::vector<double>(const std::string&)>;

enum class SimilaritySource { kPretrained, kCharLevel };

struct RankedCandidate {
  std::string word;
  double similarity;
  SimilaritySource source;
};

struct SimilarityRanking {
  std::string out_word;
  std::vector<RankedCandidate> candidates;  // descending similarity, <= 10
};

// Per pair: pretrained vectors when both words have them, otherwise the char
// encoder embeds BOTH words so the two sides live in one space. Candidates
// whose similarity is undefined (zero vector) are skipped with a warning.
inline SimilarityRanking rank_candidates(const std::string& out_word,
                                         const std::vector<std::string>& in_vocab,
                                         const EmbeddingTable& pretrained,
                                         const CharEncoder& char_encoder) {
  if (in_vocab.empty()) throw EmptyInputError("rank_candidates: no in-lexicon words");
  const std::vector<double>* out_pre = pretrained.find(out_word);
  std::vector<double> out_char;  // computed lazily, reused across candidates

  SimilarityRanking ranking;
  ranking.out_word = out_word;
  ranking.candidates.reserve(in_vocab.size());
  for (const auto& cand : in_vocab) {
    const std::vector<double>* cand_pre = pretrained.find(cand);
    RankedCandidate rc;
    rc.word = cand;
    try {
      if (out_pre && cand_pre) {
        rc.similarity = cosine(*out_pre, *cand_pre);
        rc.source = SimilaritySource::kPretrained;
      } else {
        if (!char_encoder) throw EvalError("no char encoder for out-of-embedding pair");
        if (out_char.empty()) out_char = char_encoder(out_word);
        rc.similarity = cosine(out_char, char_encoder(cand));
        rc.source = SimilaritySource::kCharLevel;
      }
    } catch (const EvalError& e) {
      log_warn("skipping candidate '" + cand + "' for '" + out_word + "': " + e.what());
      continue;
    }
    ranking.candidates.push_back(std::move(rc));
  }

  std::sort(ranking.candidates.begin(), ranking.candidates.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              return a.word < b.word;  // deterministic ties
            });
  if (ranking.candidates.size() > kExpansionTopK) ranking.candidates.resize(kExpansionTopK);
  return ranking;
}

// Rank weights over k candidates: the most similar gets k/D, the least gets
// 1/D, D = k(k+1)/2, so the weights are positive and sum to exactly 1.
inline std::vector<double> rank_weights(std::size_t k) {
  if (k == 0) throw EmptyInputError("rank_weights: k must be positive");
  const double denom = static_cast<double>(k * (k + 1)) / 2.0;
  std::vector<double> w(k);
  for (std::size_t j = 0; j < k; ++j) w[j] = static_cast<double>(k - j) / denom;
  return w;
}

// Weighted value for one out-of-lexicon word over its ranked candidates'
// values. A convex combination: the result lies in [min, max] of the values.
inline double expand_trt(const SimilarityRanking& ranking, const GazeLexicon& lexicon) {
  if (ranking.candidates.empty()) {
    throw EmptyInputError("expand_trt: empty ranking for '" + ranking.out_word + "'");
  }
  const auto weights = rank_weights(ranking.candidates.size());
  double value = 0.0;
  for (std::size_t j = 0; j < ranking.candidates.size(); ++j) {
    const LexiconEntry* e = lexicon.find(ranking.candidates[j].word);
    if (!e) throw ContractError("ranked candidate '" + ranking.candidates[j].word +
                                "' is not in the lexicon");
    value += weights[j] * e->normalized;
  }
  return value;
}

// Every uncovered target word gains a source=expanded entry; native entries
// are untouched. Words whose ranking comes back empty fall back to the mean
// of native values, like mean_fill, with a warning.
inline std::size_t expand_lexicon(GazeLexicon& lexicon, const std::vector<std::string>& target_vocab,
                                  const EmbeddingTable& pretrained, const CharEncoder& char_encoder) {
  if (lexicon.empty()) throw EmptyInputError("expand_lexicon: empty lexicon");
  const std::vector<std::string> in_vocab = lexicon.words_with_source(EntrySource::kNative);
  if (in_vocab.empty()) throw EmptyInputError("expand_lexicon: no native entries");

  std::size_t added = 0;
  std::set<std::string> seen;
  for (const auto& raw : target_vocab) {
    const std::string word = ascii_lower(raw);
    if (lexicon.contains(word) || !seen.insert(word).second) continue;
    LexiconEntry entry;
    entry.source = EntrySource::kExpanded;
    SimilarityRanking ranking = rank_candidates(word, in_vocab, pretrained, char_encoder);
    if (ranking.candidates.empty()) {
      log_warn("no usable similarity candidates for '" + word + "', using the native mean");
      entry.normalized = lexicon.mean_native_normalized();
      entry.source = EntrySource::kMeanFilled;
    } else {
      // Convex combination of values already in [0,1]; clamp guards rounding.
      entry.normalized = std::clamp(expand_trt(ranking, lexicon), 0.0, 1.0);
    }
    lexicon.insert(word, entry);
    ++added;
  }
  return added;
}

// Ablation alternative: every uncovered word gets one shared value, the mean
// of the native normalized entries.
inline std::size_t mean_fill(GazeLexicon& lexicon, const std::vector<std::string>& target_vocab) {
  if (lexicon.empty()) throw EmptyInputError("mean_fill: empty lexicon");
  const double fill = lexicon.mean_native_normalized();
  std::size_t added = 0;
  std::set<std::string> seen;
  for (const auto& raw : target_vocab) {
    const std::string word = ascii_lower(raw);
    if (lexicon.contains(word) || !seen.insert(word).second) continue;
    LexiconEntry entry;
    entry.normalized = fill;
    entry.source = EntrySource::kMeanFilled;
    lexicon.insert(word, entry);
    ++added;
  }
  return added;
}

}  // namespace gazekex
