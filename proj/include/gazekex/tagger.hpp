#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gazekex/checkpoint.hpp"
#include "gazekex/dataset.hpp"
#include "gazekex/embedding.hpp"
#include "gazekex/error.hpp"
#include "gazekex/eval.hpp"
#include "gazekex/gaze.hpp"
#include "gazekex/nn.hpp"
#include "gazekex/optim.hpp"
#include "gazekex/rng.hpp"
#include "gazekex/tape.hpp"
#include "gazekex/tensor.hpp"

namespace gazekex {

enum class Variant { kBaseline, kAtt, kHa, kFeat };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kAtt: return "att";
    case Variant::kHa: return "ha";
    case Variant::kFeat: return "feat";
  }
  throw ContractError("variant_name: bad enum value");
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "baseline") return Variant::kBaseline;
  if (s == "att") return Variant::kAtt;
  if (s == "ha") return Variant::kHa;
  if (s == "feat") return Variant::kFeat;
  throw ConfigError("unknown variant '" + s + "' (expected baseline, att, ha, feat)");
}

inline bool variant_has_attention(Variant v) { return v == Variant::kAtt || v == Variant::kHa; }
inline bool variant_needs_lexicon(Variant v) { return v == Variant::kHa || v == Variant::kFeat; }

// Hyperparameters. Hidden sizes are per direction; the attention-augmented
// classifier consumes 2*word_hidden + 1 inputs. Defaults suit small synthetic
// runs; real corpora bump word_hidden to 300.
struct ModelConfig {
  Variant variant = Variant::kBaseline;
  std::size_t word_emb_dim = 100;
  std::size_t char_emb_dim = 50;
  std::size_t char_hidden = 50;
  std::size_t char_word_dim = 50;
  std::size_t word_hidden = 100;
  std::size_t att_hidden = 50;
  double lambda_word = 0.7;
  double lambda_att = 0.3;
  std::size_t epochs = 10;
  double learning_rate = 0.001;
  std::uint64_t seed = 1;
  bool attention_literal_norm = false;
  bool clip_gradients = true;
  double clip_norm = 5.0;
  double early_stop_train_f1 = 0.0;  // > 0 stops once train F1 reaches it

  void validate(bool has_lexicon) const {
    if (lambda_word < 0.0 || lambda_word > 1.0 || lambda_att < 0.0 || lambda_att > 1.0) {
      throw ConfigError("lambda_word and lambda_att must lie in [0,1]");
    }
    if (word_emb_dim == 0 || char_emb_dim == 0 || char_hidden == 0 || char_word_dim == 0 ||
        word_hidden == 0 || att_hidden == 0) {
      throw ConfigError("all model dimensions must be positive");
    }
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (variant_needs_lexicon(variant) && !has_lexicon) {
      throw ConfigError(std::string("variant '") + variant_name(variant) + "' requires a lexicon");
    }
  }
};

// Byte-level character inventory. Id 0 is the learned UNK character; bytes
// seen at build time get ids 1..n in ascending byte order.
class CharVocab {
 public:
  CharVocab() = default;

  static CharVocab build(const std::vector<Post>& posts) {
    std::set<unsigned char> seen;
    for (const auto& p : posts) {
      for (const auto& t : p.tokens) {
        for (char c : t) seen.insert(static_cast<unsigned char>(c));
      }
    }
    CharVocab v;
    for (unsigned char c : seen) v.ids_.emplace(c, v.ids_.size() + 1);
    return v;
  }

  std::size_t size() const { return ids_.size() + 1; }

  std::size_t id_of(unsigned char c) const {
    auto it = ids_.find(c);
    return it == ids_.end() ? 0 : it->second;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [c, id] : ids_) {
      if (!out.empty()) out += ' ';
      out += std::to_string(static_cast<unsigned>(c));
    }
    return out;
  }

  static CharVocab deserialize(const std::string& text) {
    CharVocab v;
    std::istringstream in(text);
    unsigned value = 0;
    long prev = -1;
    while (in >> value) {
      if (value > 255 || static_cast<long>(value) <= prev) {
        throw ParseError("char vocab", 0, "byte list must be ascending values in [0,255]");
      }
      prev = static_cast<long>(value);
      v.ids_.emplace(static_cast<unsigned char>(value), v.ids_.size() + 1);
    }
    if (!in.eof()) throw ParseError("char vocab", 0, "non-numeric byte entry");
    return v;
  }

  bool operator==(const CharVocab& other) const { return ids_ == other.ids_; }

 private:
  std::map<unsigned char, std::size_t> ids_;
};

struct TaggerModel {
  ModelConfig config;
  CharVocab chars;
  ParamSet params;
};

inline std::size_t word_input_dim(const ModelConfig& cfg) {
  return cfg.word_emb_dim + cfg.char_word_dim +
         (cfg.variant == Variant::kFeat ? kTrtBins : std::size_t{0});
}

inline std::size_t classifier_input_dim(const ModelConfig& cfg) {
  return 2 * cfg.word_hidden + (variant_has_attention(cfg.variant) ? std::size_t{1} : std::size_t{0});
}

// Parameter creation order is fixed; checkpoints serialize in this order, so
// two inits from the same seed are byte-identical.
inline TaggerModel init_model(const ModelConfig& cfg, const CharVocab& vocab) {
  TaggerModel model;
  model.config = cfg;
  model.chars = vocab;
  Rng rng(cfg.seed, rng_stream::kParamInit);
  ParamSet& p = model.params;

  p.add("char.emb", uniform_tensor({vocab.size() * cfg.char_emb_dim}, rng, kLstmInitRange));
  add_lstm_params(p, "char.fwd", cfg.char_emb_dim, cfg.char_hidden, rng);
  add_lstm_params(p, "char.bwd", cfg.char_emb_dim, cfg.char_hidden, rng);
  p.add("char.proj.W", uniform_tensor({cfg.char_word_dim, 2 * cfg.char_hidden}, rng, kLstmInitRange));
  p.add("char.proj.b", Tensor({cfg.char_word_dim}));
  p.add("word.unk", uniform_tensor({cfg.word_emb_dim}, rng, kLstmInitRange));
  add_lstm_params(p, "word.fwd", word_input_dim(cfg), cfg.word_hidden, rng);
  add_lstm_params(p, "word.bwd", word_input_dim(cfg), cfg.word_hidden, rng);
  if (variant_has_attention(cfg.variant)) {
    p.add("att.We", uniform_tensor({cfg.att_hidden, 2 * cfg.word_hidden}, rng, kLstmInitRange));
    p.add("att.be", Tensor({cfg.att_hidden}));
    p.add("att.Wa", uniform_tensor({1, cfg.att_hidden}, rng, kLstmInitRange));
    p.add("att.ba", Tensor({1}));
  }
  p.add("cls.W", uniform_tensor({kTagCount, classifier_input_dim(cfg)}, rng, kLstmInitRange));
  p.add("cls.b", Tensor({kTagCount}));
  return model;
}

// Character path: byte embeddings through the char BiLSTM; the final state
// (forward at the last byte, backward at the first) maps linearly down to the
// char-level word vector.
inline Tape::NodeId char_word_embed(Tape& tape, const TapeParams& tp, const TaggerModel& model,
                                    const std::string& word) {
  if (word.empty()) throw ContractError("char_word_embed: empty word");
  const std::size_t d = model.config.char_emb_dim;
  std::vector<Tape::NodeId> xs;
  xs.reserve(word.size());
  for (char c : word) {
    const std::size_t id = model.chars.id_of(static_cast<unsigned char>(c));
    xs.push_back(tape.slice(tp.at("char.emb"), id * d, d));
  }
  auto fwd = lstm_run(tape, tp, "char.fwd", xs, model.config.char_hidden, false);
  auto bwd = lstm_run(tape, tp, "char.bwd", xs, model.config.char_hidden, true);
  Tape::NodeId final_state = tape.concat({fwd.back(), bwd.front()});
  return tape.affine(tp.at("char.proj.W"), final_state, tp.at("char.proj.b"));
}

// Reading-time feature: 11-bin one-hot of the token's discretized normalized
// value, zero bin when the token is missing from the lexicon.
inline std::vector<double> feat_one_hot(const GazeLexicon& lexicon, const std::string& token) {
  return one_hot_trt(discretize(lexicon.normalized_or_zero(ascii_lower(token))));
}

// Token vector: [pretrained word vector or learned UNK : char-level vector],
// word part leading, plus the reading-time one-hot for the feat variant.
inline std::vector<Tape::NodeId> embed_post(Tape& tape, const TapeParams& tp,
                                            const TaggerModel& model,
                                            const std::vector<std::string>& tokens,
                                            const EmbeddingTable* pretrained,
                                            const GazeLexicon* lexicon) {
  if (tokens.empty()) throw EmptyInputError("embed_post: no tokens");
  if (model.config.variant == Variant::kFeat && lexicon == nullptr) {
    throw ConfigError("variant 'feat' requires a lexicon");
  }
  std::vector<Tape::NodeId> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    Tape::NodeId word_vec;
    const std::vector<double>* pre =
        pretrained != nullptr ? pretrained->find(token) : nullptr;
    if (pre != nullptr) {
      if (pre->size() != model.config.word_emb_dim) {
        throw ShapeError("embed_post: pretrained dim " + std::to_string(pre->size()) +
                         " vs configured " + std::to_string(model.config.word_emb_dim));
      }
      word_vec = tape.input(Tensor::row(*pre));
    } else {
      word_vec = tp.at("word.unk");
    }
    std::vector<Tape::NodeId> parts = {word_vec, char_word_embed(tape, tp, model, token)};
    if (model.config.variant == Variant::kFeat) {
      parts.push_back(tape.input(Tensor::row(feat_one_hot(*lexicon, token))));
    }
    out.push_back(tape.concat(parts));
  }
  return out;
}

struct AttentionNodes {
  Tape::NodeId logits;      // raw a, one entry per token
  Tape::NodeId normalized;  // probability vector over the post
};

// Feed-forward attention over hidden states: e = tanh(We h + be), a = Wa e +
// ba, then exp-normalization over the post (or literal sum-normalization when
// configured, which is undefined near zero-sum logits).
inline AttentionNodes attention_forward(Tape& tape, const TapeParams& tp,
                                        const std::vector<Tape::NodeId>& hidden,
                                        bool literal_norm) {
  if (hidden.empty()) throw EmptyInputError("attention_forward: no hidden states");
  std::vector<Tape::NodeId> scores;
  scores.reserve(hidden.size());
  for (Tape::NodeId h : hidden) {
    Tape::NodeId e = tape.tanh(tape.affine(tp.at("att.We"), h, tp.at("att.be")));
    scores.push_back(tape.affine(tp.at("att.Wa"), e, tp.at("att.ba")));
  }
  AttentionNodes att;
  att.logits = tape.concat(scores);
  att.normalized = literal_norm ? tape.sum_normalize(att.logits) : tape.softmax(att.logits);
  return att;
}

struct ForwardResult {
  std::vector<Tape::NodeId> prob_rows;  // one length-5 distribution per token
  AttentionNodes attention{};           // valid iff has_attention
  bool has_attention = false;
};

inline ForwardResult forward_post(Tape& tape, const TapeParams& tp, const TaggerModel& model,
                                  const std::vector<std::string>& tokens,
                                  const EmbeddingTable* pretrained, const GazeLexicon* lexicon) {
  const ModelConfig& cfg = model.config;
  if (variant_needs_lexicon(cfg.variant) && lexicon == nullptr) {
    throw ConfigError(std::string("variant '") + variant_name(cfg.variant) +
                      "' requires a lexicon");
  }
  auto inputs = embed_post(tape, tp, model, tokens, pretrained, lexicon);
  auto hidden = bilstm(tape, tp, "word", inputs, cfg.word_hidden);

  ForwardResult res;
  if (variant_has_attention(cfg.variant)) {
    res.attention = attention_forward(tape, tp, hidden, cfg.attention_literal_norm);
    res.has_attention = true;
  }
  res.prob_rows.reserve(tokens.size());
  for (std::size_t w = 0; w < tokens.size(); ++w) {
    Tape::NodeId cls_in = res.has_attention
                              ? tape.concat({hidden[w], tape.slice(res.attention.normalized, w, 1)})
                              : hidden[w];
    res.prob_rows.push_back(tape.softmax(tape.affine(tp.at("cls.W"), cls_in, tp.at("cls.b"))));
  }
  return res;
}

// Per-token lexicon values renormalized to a distribution; a post with no
// reading-time mass anywhere falls back to uniform.
inline std::vector<double> attention_target(const std::vector<std::string>& tokens,
                                            const GazeLexicon& lexicon) {
  if (tokens.empty()) throw EmptyInputError("attention_target: no tokens");
  std::vector<double> target(tokens.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    target[i] = lexicon.normalized_or_zero(ascii_lower(tokens[i]));
    if (target[i] < 0.0) throw ContractError("attention_target: negative lexicon value");
    sum += target[i];
  }
  if (sum <= 0.0) {
    const double u = 1.0 / static_cast<double>(tokens.size());
    for (auto& t : target) t = u;
  } else {
    for (auto& t : target) t /= sum;
  }
  return target;
}

inline double loss_word(const std::vector<std::vector<double>>& prob_rows,
                        const std::vector<Tag>& gold) {
  if (prob_rows.size() != gold.size()) {
    throw ContractError("loss_word: " + std::to_string(prob_rows.size()) + " rows vs " +
                        std::to_string(gold.size()) + " tags");
  }
  double total = 0.0;
  for (std::size_t w = 0; w < gold.size(); ++w) {
    if (prob_rows[w].size() != kTagCount) {
      throw ContractError("loss_word: row " + std::to_string(w) + " has " +
                          std::to_string(prob_rows[w].size()) + " entries");
    }
    for (std::size_t k = 0; k < kTagCount; ++k) {
      const double target = k == static_cast<std::size_t>(gold[w]) ? 1.0 : 0.0;
      const double d = prob_rows[w][k] - target;
      total += d * d;
    }
  }
  return total;
}

inline double loss_attention(const std::vector<double>& attention,
                             const std::vector<double>& target) {
  if (attention.size() != target.size()) {
    throw ContractError("loss_attention: " + std::to_string(attention.size()) + " weights vs " +
                        std::to_string(target.size()) + " targets");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < attention.size(); ++i) {
    const double d = attention[i] - target[i];
    total += d * d;
  }
  return total;
}

inline double loss_total(double word, double att, double lambda_word, double lambda_att) {
  if (lambda_word < 0.0 || lambda_word > 1.0 || lambda_att < 0.0 || lambda_att > 1.0) {
    throw ContractError("loss_total: lambdas must lie in [0,1]");
  }
  return lambda_word * word + lambda_att * att;
}

inline Tensor one_hot_tag(Tag tag) {
  Tensor t({kTagCount});
  t[static_cast<std::size_t>(tag)] = 1.0;
  return t;
}

// Tape mirror of loss_word: sum of per-token squared errors against one-hots.
inline Tape::NodeId loss_word_node(Tape& tape, const std::vector<Tape::NodeId>& prob_rows,
                                   const std::vector<Tag>& gold) {
  if (prob_rows.size() != gold.size()) {
    throw ContractError("loss_word_node: " + std::to_string(prob_rows.size()) + " rows vs " +
                        std::to_string(gold.size()) + " tags");
  }
  Tape::NodeId total = tape.squared_error(prob_rows[0], tape.input(one_hot_tag(gold[0])));
  for (std::size_t w = 1; w < gold.size(); ++w) {
    total = tape.add(total, tape.squared_error(prob_rows[w], tape.input(one_hot_tag(gold[w]))));
  }
  return total;
}

// Training objective. The attention-supervised variant trades off the word
// and attention losses; every other variant minimizes the word loss alone.
inline Tape::NodeId post_objective(Tape& tape, const TapeParams& tp, const TaggerModel& model,
                                   const Post& post, const EmbeddingTable* pretrained,
                                   const GazeLexicon* lexicon) {
  auto fwd = forward_post(tape, tp, model, post.tokens, pretrained, lexicon);
  Tape::NodeId word = loss_word_node(tape, fwd.prob_rows, post.tags);
  if (model.config.variant != Variant::kHa) return word;
  auto target = attention_target(post.tokens, *lexicon);
  Tape::NodeId att = tape.squared_error(fwd.attention.normalized, tape.input(Tensor::row(target)));
  return tape.add(tape.scale(word, model.config.lambda_word),
                  tape.scale(att, model.config.lambda_att));
}

struct Prediction {
  std::vector<Tag> tags;
  std::vector<Span> spans;
  std::vector<double> attention;  // empty unless the variant exposes it
  bool has_attention = false;
};

// Argmax ties prefer Not, then the earlier tag in S < B < M < E order; the
// decode repairs any invalid tag sequence.
inline Tag argmax_tag(const Tensor& row) {
  if (row.size() != kTagCount) {
    throw ContractError("argmax_tag: expected " + std::to_string(kTagCount) + " entries");
  }
  double best = row[0];
  for (std::size_t k = 1; k < kTagCount; ++k) best = std::max(best, row[k]);
  if (row[static_cast<std::size_t>(Tag::kNot)] == best) return Tag::kNot;
  for (std::size_t k = 0; k < kTagCount; ++k) {
    if (row[k] == best) return static_cast<Tag>(k);
  }
  throw ContractError("argmax_tag: unreachable");
}

inline Prediction predict(const TaggerModel& model, const std::vector<std::string>& tokens,
                          const EmbeddingTable* pretrained, const GazeLexicon* lexicon) {
  Tape tape;
  TapeParams tp(tape, model.params);
  auto fwd = forward_post(tape, tp, model, tokens, pretrained, lexicon);
  Prediction pred;
  pred.tags.reserve(tokens.size());
  for (Tape::NodeId row : fwd.prob_rows) pred.tags.push_back(argmax_tag(tape.value(row)));
  pred.spans = tags_to_spans(pred.tags);
  if (fwd.has_attention) {
    const Tensor& att = tape.value(fwd.attention.normalized);
    pred.attention.assign(att.data().begin(), att.data().end());
    pred.has_attention = true;
  }
  return pred;
}

inline std::vector<std::vector<Span>> predict_spans(const TaggerModel& model,
                                                    const std::vector<Post>& posts,
                                                    const EmbeddingTable* pretrained,
                                                    const GazeLexicon* lexicon) {
  std::vector<std::vector<Span>> spans;
  spans.reserve(posts.size());
  for (const auto& p : posts) spans.push_back(predict(model, p.tokens, pretrained, lexicon).spans);
  return spans;
}

// Rank of the gold phrase's mean attention within the post (ties best). Only
// the attention variants expose weights to rank.
inline RankRecord model_attention_rank(const TaggerModel& model, std::size_t post_id,
                                       const Post& post, const EmbeddingTable* pretrained,
                                       const GazeLexicon* lexicon) {
  if (!variant_has_attention(model.config.variant)) {
    throw ConfigError(std::string("variant '") + variant_name(model.config.variant) +
                      "' exposes no attention weights");
  }
  auto pred = predict(model, post.tokens, pretrained, lexicon);
  return attention_rank_record(post_id, post, pred.attention);
}

struct TrainLogEntry {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_f1 = 0.0;
  bool has_dev = false;
};

struct TrainResult {
  TaggerModel model;
  std::vector<TrainLogEntry> log;
};

namespace detail {

inline double macro_f1(const TaggerModel& model, const std::vector<Post>& posts,
                       const EmbeddingTable* pretrained, const GazeLexicon* lexicon) {
  return score(posts, predict_spans(model, posts, pretrained, lexicon)).f1;
}

inline void zero_params(ParamSet& grads) {
  for (const auto& name : grads.names()) grads.at(name).fill(0.0);
}

}  // namespace detail

// Per-post RMSprop over shuffled training posts. Logs one line per epoch as
// epoch<TAB>mean_loss<TAB>dev_f1, with "-" when no dev set is given. All
// randomness flows from config.seed, so reruns are bit-identical.
inline TrainResult train_tagger(const std::vector<Post>& train_posts,
                                const std::vector<Post>& dev_posts, const ModelConfig& cfg,
                                const EmbeddingTable* pretrained, const GazeLexicon* lexicon,
                                std::ostream* log_out = nullptr) {
  cfg.validate(lexicon != nullptr);
  if (train_posts.empty()) throw EmptyInputError("train_tagger: empty training set");
  for (std::size_t i = 0; i < train_posts.size(); ++i) {
    if (train_posts[i].tokens.empty()) {
      throw ContractError("train_tagger: post " + std::to_string(i) + " has no tokens");
    }
    if (train_posts[i].tags.size() != train_posts[i].tokens.size()) {
      throw ContractError("train_tagger: post " + std::to_string(i) + " tags misaligned");
    }
  }

  TrainResult res;
  res.model = init_model(cfg, CharVocab::build(train_posts));

  RmsPropConfig opt_cfg;
  opt_cfg.learning_rate = cfg.learning_rate;
  opt_cfg.clip = cfg.clip_gradients;
  opt_cfg.clip_norm = cfg.clip_norm;
  RmsProp opt(res.model.params, opt_cfg);
  ParamSet grads = res.model.params.zeros_like();

  Rng shuffle_rng(cfg.seed, rng_stream::kShuffle);
  std::vector<std::size_t> order(train_posts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      const Post& post = train_posts[idx];
      Tape tape;
      TapeParams tp(tape, res.model.params);
      Tape::NodeId loss = post_objective(tape, tp, res.model, post, pretrained, lexicon);
      const double value = tape.value(loss)[0];
      if (!std::isfinite(value)) {
        throw EvalError("training diverged: epoch " + std::to_string(epoch) + ", post " +
                        std::to_string(idx) + ", loss " + std::to_string(value));
      }
      loss_sum += value;
      tape.backward(loss);
      detail::zero_params(grads);
      tp.accumulate_grads(res.model.params, grads);
      opt.step(res.model.params, grads);
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(train_posts.size());
    if (!dev_posts.empty()) {
      entry.dev_f1 = detail::macro_f1(res.model, dev_posts, pretrained, lexicon);
      entry.has_dev = true;
    }
    res.log.push_back(entry);
    if (log_out != nullptr) {
      *log_out << entry.epoch << "\t" << format_double(entry.mean_loss) << "\t"
               << (entry.has_dev ? format_double(entry.dev_f1) : "-") << "\n";
    }
    if (cfg.early_stop_train_f1 > 0.0 &&
        detail::macro_f1(res.model, train_posts, pretrained, lexicon) >= cfg.early_stop_train_f1) {
      break;
    }
  }
  return res;
}

inline void save_model(const TaggerModel& model, const std::string& path) {
  Checkpoint ckpt;
  const ModelConfig& cfg = model.config;
  ckpt.meta["variant"] = variant_name(cfg.variant);
  ckpt.meta["word_emb_dim"] = std::to_string(cfg.word_emb_dim);
  ckpt.meta["char_emb_dim"] = std::to_string(cfg.char_emb_dim);
  ckpt.meta["char_hidden"] = std::to_string(cfg.char_hidden);
  ckpt.meta["char_word_dim"] = std::to_string(cfg.char_word_dim);
  ckpt.meta["word_hidden"] = std::to_string(cfg.word_hidden);
  ckpt.meta["att_hidden"] = std::to_string(cfg.att_hidden);
  ckpt.meta["lambda_word"] = double_to_hex(cfg.lambda_word);
  ckpt.meta["lambda_att"] = double_to_hex(cfg.lambda_att);
  ckpt.meta["epochs"] = std::to_string(cfg.epochs);
  ckpt.meta["learning_rate"] = double_to_hex(cfg.learning_rate);
  ckpt.meta["seed"] = std::to_string(cfg.seed);
  ckpt.meta["attention_literal_norm"] = cfg.attention_literal_norm ? "1" : "0";
  ckpt.meta["clip_gradients"] = cfg.clip_gradients ? "1" : "0";
  ckpt.meta["clip_norm"] = double_to_hex(cfg.clip_norm);
  ckpt.meta["early_stop_train_f1"] = double_to_hex(cfg.early_stop_train_f1);
  ckpt.meta["char_vocab"] = model.chars.serialize();
  ckpt.params = model.params;
  save_checkpoint(path, ckpt);
}

namespace detail {

inline const std::string& require_meta(const Checkpoint& ckpt, const std::string& key,
                                       const std::string& path) {
  auto it = ckpt.meta.find(key);
  if (it == ckpt.meta.end()) throw ParseError(path, 0, "missing meta key '" + key + "'");
  return it->second;
}

}  // namespace detail

inline TaggerModel load_model(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  TaggerModel model;
  ModelConfig& cfg = model.config;
  auto meta = [&](const std::string& key) -> const std::string& {
    return detail::require_meta(ckpt, key, path);
  };
  cfg.variant = variant_from_string(meta("variant"));
  cfg.word_emb_dim = std::stoul(meta("word_emb_dim"));
  cfg.char_emb_dim = std::stoul(meta("char_emb_dim"));
  cfg.char_hidden = std::stoul(meta("char_hidden"));
  cfg.char_word_dim = std::stoul(meta("char_word_dim"));
  cfg.word_hidden = std::stoul(meta("word_hidden"));
  cfg.att_hidden = std::stoul(meta("att_hidden"));
  cfg.lambda_word = hex_to_double(meta("lambda_word"), "lambda_word");
  cfg.lambda_att = hex_to_double(meta("lambda_att"), "lambda_att");
  cfg.epochs = std::stoul(meta("epochs"));
  cfg.learning_rate = hex_to_double(meta("learning_rate"), "learning_rate");
  cfg.seed = std::stoull(meta("seed"));
  cfg.attention_literal_norm = meta("attention_literal_norm") == "1";
  cfg.clip_gradients = meta("clip_gradients") == "1";
  cfg.clip_norm = hex_to_double(meta("clip_norm"), "clip_norm");
  cfg.early_stop_train_f1 = hex_to_double(meta("early_stop_train_f1"), "early_stop_train_f1");
  model.chars = CharVocab::deserialize(meta("char_vocab"));
  model.params = std::move(ckpt.params);
  return model;
}

}  // namespace gazekex
