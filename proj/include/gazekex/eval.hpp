#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gazekex/dataset.hpp"
#include "gazekex/error.hpp"
#include "gazekex/gaze.hpp"
#include "json.hpp"

namespace gazekex {

// Canonical phrase string for matching: lowercased tokens joined by single
// spaces. Tokens never contain whitespace, so the join is collision-free.
inline std::string phrase_key(const std::vector<std::string>& tokens, const Span& span) {
  if (span.first >= span.second || span.second > tokens.size()) {
    throw ContractError("phrase_key: span [" + std::to_string(span.first) + "," +
                        std::to_string(span.second) + ") invalid for " +
                        std::to_string(tokens.size()) + " tokens");
  }
  std::string out;
  for (std::size_t i = span.first; i < span.second; ++i) {
    if (i > span.first) out += ' ';
    out += ascii_lower(tokens[i]);
  }
  return out;
}

inline std::vector<std::string> phrase_keys(const std::vector<std::string>& tokens,
                                            const std::vector<Span>& spans) {
  std::vector<std::string> keys;
  keys.reserve(spans.size());
  for (const auto& s : spans) keys.push_back(phrase_key(tokens, s));
  return keys;
}

// Macro P/R/F1 over posts. Matching is case-insensitive exact token-sequence
// equality, multiset-aware. Undefined per-post ratios (no predictions for
// precision, no golds for recall) are excluded from their mean; the both-empty
// post counts as a perfect match on both axes.
struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t posts = 0;
  std::size_t predicted_spans = 0;
  std::size_t gold_spans = 0;
  std::size_t precision_posts = 0;
  std::size_t recall_posts = 0;
};

namespace detail {

inline std::size_t multiset_overlap(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
  std::map<std::string, std::size_t> counts;
  for (const auto& k : a) ++counts[k];
  std::size_t overlap = 0;
  for (const auto& k : b) {
    auto it = counts.find(k);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

}  // namespace detail

inline ScoreReport score(const std::vector<Post>& golds,
                         const std::vector<std::vector<Span>>& predictions) {
  if (golds.size() != predictions.size()) {
    throw ContractError("score: " + std::to_string(golds.size()) + " posts vs " +
                        std::to_string(predictions.size()) + " prediction lists");
  }
  ScoreReport r;
  r.posts = golds.size();
  double p_sum = 0.0;
  double r_sum = 0.0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto pred = phrase_keys(golds[i].tokens, predictions[i]);
    const auto gold = phrase_keys(golds[i].tokens, golds[i].gold_spans);
    r.predicted_spans += pred.size();
    r.gold_spans += gold.size();
    if (pred.empty() && gold.empty()) {
      p_sum += 1.0;
      ++r.precision_posts;
      r_sum += 1.0;
      ++r.recall_posts;
      continue;
    }
    const std::size_t correct = detail::multiset_overlap(gold, pred);
    if (!pred.empty()) {
      p_sum += static_cast<double>(correct) / static_cast<double>(pred.size());
      ++r.precision_posts;
    }
    if (!gold.empty()) {
      r_sum += static_cast<double>(correct) / static_cast<double>(gold.size());
      ++r.recall_posts;
    }
  }
  r.precision = r.precision_posts > 0 ? p_sum / static_cast<double>(r.precision_posts) : 0.0;
  r.recall = r.recall_posts > 0 ? r_sum / static_cast<double>(r.recall_posts) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
  return r;
}

// Posts where model A reproduced the gold phrase set exactly and model B did
// not. Swapping the arguments yields a disjoint subset by construction.
inline std::vector<std::size_t> disagreement_subset(const std::vector<std::vector<Span>>& preds_a,
                                                    const std::vector<std::vector<Span>>& preds_b,
                                                    const std::vector<Post>& golds) {
  if (preds_a.size() != golds.size() || preds_b.size() != golds.size()) {
    throw ContractError("disagreement_subset: misaligned prediction lists");
  }
  auto matches_gold = [](const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    return pred.size() == gold.size() && detail::multiset_overlap(gold, pred) == gold.size();
  };
  std::vector<std::size_t> subset;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto gold = phrase_keys(golds[i].tokens, golds[i].gold_spans);
    const auto a = phrase_keys(golds[i].tokens, preds_a[i]);
    const auto b = phrase_keys(golds[i].tokens, preds_b[i]);
    if (matches_gold(a, gold) && !matches_gold(b, gold)) subset.push_back(i);
  }
  return subset;
}

// Rank of the gold span's mean attention among the post's token attentions,
// descending, ties taking the best (smallest) rank. Exact for single-token
// golds under any strictly monotone reweighting; multi-token golds average
// first, so only order-preserving affine maps keep the rank unchanged.
struct RankRecord {
  std::size_t post_id = 0;
  std::string gold_phrase;
  double mean_attention = 0.0;
  std::size_t rank = 0;
};

inline std::size_t attention_rank(const std::vector<double>& attention, const Span& gold) {
  if (attention.empty()) throw ContractError("attention_rank: empty attention vector");
  if (gold.first >= gold.second || gold.second > attention.size()) {
    throw ContractError("attention_rank: gold span out of range");
  }
  double mean = 0.0;
  for (std::size_t i = gold.first; i < gold.second; ++i) mean += attention[i];
  mean /= static_cast<double>(gold.second - gold.first);
  std::size_t rank = 1;
  for (double a : attention) {
    if (a > mean) ++rank;
  }
  return rank;
}

inline RankRecord attention_rank_record(std::size_t post_id, const Post& post,
                                        const std::vector<double>& attention) {
  if (attention.size() != post.tokens.size()) {
    throw ContractError("attention_rank_record: attention length " +
                        std::to_string(attention.size()) + " vs " +
                        std::to_string(post.tokens.size()) + " tokens");
  }
  if (post.gold_spans.empty()) throw ContractError("attention_rank_record: post has no gold span");
  const Span& gold = post.gold_spans.front();
  RankRecord rec;
  rec.post_id = post_id;
  rec.gold_phrase = phrase_key(post.tokens, gold);
  double mean = 0.0;
  for (std::size_t i = gold.first; i < gold.second; ++i) mean += attention[i];
  rec.mean_attention = mean / static_cast<double>(gold.second - gold.first);
  rec.rank = attention_rank(attention, gold);
  return rec;
}

// Test posts none of whose gold phrases ever occur as a training gold phrase
// (case-insensitive string match).
inline std::vector<std::size_t> generalization_subset(const std::vector<Post>& train,
                                                      const std::vector<Post>& test) {
  std::set<std::string> seen;
  for (const auto& p : train) {
    for (const auto& k : phrase_keys(p.tokens, p.gold_spans)) seen.insert(k);
  }
  std::vector<std::size_t> subset;
  for (std::size_t i = 0; i < test.size(); ++i) {
    bool novel = true;
    for (const auto& k : phrase_keys(test[i].tokens, test[i].gold_spans)) {
      if (seen.count(k)) {
        novel = false;
        break;
      }
    }
    if (novel) subset.push_back(i);
  }
  return subset;
}

// Full evaluation artifact: per-run scores, their cross-run means, and the
// analysis payloads behind the rank histograms and subset studies. Per-run
// reports keep f1 harmonic in their own p/r; cross-run means average each
// metric independently (mean_f1 is the mean of per-run f1 values).
struct EvalReport {
  std::vector<ScoreReport> runs;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  std::vector<RankRecord> ranks_a;
  std::vector<RankRecord> ranks_b;
  std::size_t disagreement_size = 0;
  std::size_t generalization_size = 0;
  std::map<std::string, std::string> context;
};

inline void finalize_means(EvalReport& report) {
  report.mean_precision = 0.0;
  report.mean_recall = 0.0;
  report.mean_f1 = 0.0;
  if (report.runs.empty()) return;
  for (const auto& r : report.runs) {
    report.mean_precision += r.precision;
    report.mean_recall += r.recall;
    report.mean_f1 += r.f1;
  }
  const double n = static_cast<double>(report.runs.size());
  report.mean_precision /= n;
  report.mean_recall /= n;
  report.mean_f1 /= n;
}

namespace detail {

inline nlohmann::json score_to_json(const ScoreReport& r) {
  return nlohmann::json{{"precision", r.precision},
                        {"recall", r.recall},
                        {"f1", r.f1},
                        {"posts", r.posts},
                        {"predicted_spans", r.predicted_spans},
                        {"gold_spans", r.gold_spans},
                        {"precision_posts", r.precision_posts},
                        {"recall_posts", r.recall_posts}};
}

inline ScoreReport score_from_json(const nlohmann::json& j) {
  ScoreReport r;
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.posts = j.at("posts").get<std::size_t>();
  r.predicted_spans = j.at("predicted_spans").get<std::size_t>();
  r.gold_spans = j.at("gold_spans").get<std::size_t>();
  r.precision_posts = j.at("precision_posts").get<std::size_t>();
  r.recall_posts = j.at("recall_posts").get<std::size_t>();
  return r;
}

inline nlohmann::json ranks_to_json(const std::vector<RankRecord>& ranks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : ranks) {
    arr.push_back({{"post_id", rec.post_id},
                   {"gold_phrase", rec.gold_phrase},
                   {"mean_attention", rec.mean_attention},
                   {"rank", rec.rank}});
  }
  return arr;
}

inline std::vector<RankRecord> ranks_from_json(const nlohmann::json& arr) {
  std::vector<RankRecord> ranks;
  for (const auto& j : arr) {
    RankRecord rec;
    rec.post_id = j.at("post_id").get<std::size_t>();
    rec.gold_phrase = j.at("gold_phrase").get<std::string>();
    rec.mean_attention = j.at("mean_attention").get<double>();
    rec.rank = j.at("rank").get<std::size_t>();
    ranks.push_back(std::move(rec));
  }
  return ranks;
}

inline std::map<std::size_t, std::size_t> rank_histogram(const std::vector<RankRecord>& ranks) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& rec : ranks) ++hist[rec.rank];
  return hist;
}

}  // namespace detail

inline constexpr const char* kReportVersion = "gazekex-report-1";

// Writes report.json (versioned record), report.txt (summary), and ranks.tsv
// (rank, count for model A, count for model B) into `dir`.
inline void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  nlohmann::json j;
  j["version"] = kReportVersion;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) runs.push_back(detail::score_to_json(r));
  j["runs"] = runs;
  j["mean_precision"] = report.mean_precision;
  j["mean_recall"] = report.mean_recall;
  j["mean_f1"] = report.mean_f1;
  j["ranks_a"] = detail::ranks_to_json(report.ranks_a);
  j["ranks_b"] = detail::ranks_to_json(report.ranks_b);
  j["disagreement_size"] = report.disagreement_size;
  j["generalization_size"] = report.generalization_size;
  j["context"] = report.context;

  std::ofstream record(dir / "report.json");
  if (!record) throw IoError("cannot write " + (dir / "report.json").string());
  record << j.dump(2) << "\n";
  if (!record.good()) throw IoError("short write to " + (dir / "report.json").string());

  std::ofstream summary(dir / "report.txt");
  if (!summary) throw IoError("cannot write " + (dir / "report.txt").string());
  summary << "runs: " << report.runs.size() << "\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    summary << "  run " << i << ": P=" << format_double(r.precision)
            << " R=" << format_double(r.recall) << " F1=" << format_double(r.f1) << " over "
            << r.posts << " posts\n";
  }
  summary << "mean: P=" << format_double(report.mean_precision)
          << " R=" << format_double(report.mean_recall)
          << " F1=" << format_double(report.mean_f1) << "\n";
  summary << "disagreement subset: " << report.disagreement_size << "\n";
  summary << "generalization subset: " << report.generalization_size << "\n";
  for (const auto& [k, v] : report.context) summary << k << ": " << v << "\n";

  const auto ha = detail::rank_histogram(report.ranks_a);
  const auto hb = detail::rank_histogram(report.ranks_b);
  std::set<std::size_t> all_ranks;
  for (const auto& [rank, n] : ha) all_ranks.insert(rank);
  for (const auto& [rank, n] : hb) all_ranks.insert(rank);
  std::ofstream hist(dir / "ranks.tsv");
  if (!hist) throw IoError("cannot write " + (dir / "ranks.tsv").string());
  hist << "rank\tcount_modelA\tcount_modelB\n";
  for (std::size_t rank : all_ranks) {
    const auto ia = ha.find(rank);
    const auto ib = hb.find(rank);
    hist << rank << "\t" << (ia == ha.end() ? 0 : ia->second) << "\t"
         << (ib == hb.end() ? 0 : ib->second) << "\n";
  }
}

inline EvalReport load_report(const std::filesystem::path& dir) {
  const auto path = dir / "report.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  if (!j.contains("version") || j.at("version") != kReportVersion) {
    throw ParseError(path.string(), 0, "unknown report version");
  }
  EvalReport report;
  for (const auto& rj : j.at("runs")) report.runs.push_back(detail::score_from_json(rj));
  report.mean_precision = j.at("mean_precision").get<double>();
  report.mean_recall = j.at("mean_recall").get<double>();
  report.mean_f1 = j.at("mean_f1").get<double>();
  report.ranks_a = detail::ranks_from_json(j.at("ranks_a"));
  report.ranks_b = detail::ranks_from_json(j.at("ranks_b"));
  report.disagreement_size = j.at("disagreement_size").get<std::size_t>();
  report.generalization_size = j.at("generalization_size").get<std::size_t>();
  report.context = j.at("context").get<std::map<std::string, std::string>>();
  return report;
}

}  // namespace gazekex
