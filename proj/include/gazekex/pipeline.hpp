#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gazekex/config.hpp"
#include "gazekex/dataset.hpp"
#include "gazekex/eval.hpp"
#include "gazekex/expand.hpp"
#include "gazekex/gaze.hpp"
#include "gazekex/gradcheck.hpp"
#include "gazekex/tagger.hpp"

namespace gazekex {

// Orchestration glue between RunConfig and the library modules. Every run
// directory receives the fully resolved config next to its artifacts, so a
// directory is self-describing and reproducible from its own contents.

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void write_effective_config(const RunConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  cfg.write_file(join_path(dir, "config.txt"));
}

inline ModelConfig model_config_from(const RunConfig& cfg) {
  ModelConfig mc;
  mc.variant = variant_from_string(cfg.get("variant"));
  mc.word_emb_dim = cfg.get_size("word_emb_dim");
  mc.char_emb_dim = cfg.get_size("char_emb_dim");
  mc.char_hidden = cfg.get_size("char_hidden");
  mc.char_word_dim = cfg.get_size("char_word_dim");
  mc.word_hidden = cfg.get_size("word_hidden");
  mc.att_hidden = cfg.get_size("att_hidden");
  mc.lambda_word = cfg.get_double("lambda_word");
  mc.lambda_att = cfg.get_double("lambda_att");
  mc.epochs = cfg.get_size("epochs");
  mc.learning_rate = cfg.get_double("learning_rate");
  mc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  mc.attention_literal_norm = cfg.get_bool("attention_literal_norm");
  mc.clip_gradients = cfg.get_bool("clip_gradients");
  mc.clip_norm = cfg.get_double("clip_norm");
  mc.early_stop_train_f1 = cfg.get_double("early_stop_train_f1");
  return mc;
}

// Embeds a word through a trained model's character path; used to compare
// words that lack pretrained vectors during lexicon expansion. The model must
// outlive the returned encoder.
inline CharEncoder char_encoder_from(const TaggerModel& model) {
  return [&model](const std::string& word) {
    Tape tape;
    TapeParams tp(tape, model.params);
    const Tensor& v = tape.value(char_word_embed(tape, tp, model, word));
    return std::vector<double>(v.data().begin(), v.data().end());
  };
}

inline std::vector<std::string> vocab_of_posts(const std::vector<Post>& posts) {
  std::vector<std::string> vocab;
  for (const Post& p : posts) {
    vocab.insert(vocab.end(), p.tokens.begin(), p.tokens.end());
  }
  return vocab;
}

// AVG-TRT stage of a saved lexicon, recovered from its native rows so the
// regularizer grid can be rebuilt without the original fixation records.
inline std::map<std::string, double> native_avg_of(const GazeLexicon& lex) {
  std::map<std::string, double> avg;
  for (const auto& [word, entry] : lex.entries()) {
    if (entry.source == EntrySource::kNative) avg[word] = entry.avg_trt;
  }
  if (avg.empty()) throw EmptyInputError("lexicon has no native entries to rebuild from");
  return avg;
}

// ---------------------------------------------------------------------------
// Single runs
// ---------------------------------------------------------------------------

struct RunInputs {
  std::vector<Post> train;
  std::vector<Post> dev;    // empty when no dev path is configured
  std::vector<Post> test;   // empty when no test path is configured
  std::optional<EmbeddingTable> embeddings;
  std::optional<GazeLexicon> lexicon;

  const EmbeddingTable* embeddings_ptr() const { return embeddings ? &*embeddings : nullptr; }
  const GazeLexicon* lexicon_ptr() const { return lexicon ? &*lexicon : nullptr; }
};

inline RunInputs load_run_inputs(const RunConfig& cfg, bool need_train) {
  RunInputs in;
  if (cfg.has_path("train")) {
    in.train = read_posts_jsonl(cfg.get_path("train"));
  } else if (need_train) {
    throw ConfigError("no training set configured (key 'train')");
  }
  if (cfg.has_path("dev")) in.dev = read_posts_jsonl(cfg.get_path("dev"));
  if (cfg.has_path("test")) in.test = read_posts_jsonl(cfg.get_path("test"));
  if (cfg.has_path("embeddings")) in.embeddings = EmbeddingTable::load_text(cfg.get_path("embeddings"));
  if (cfg.has_path("lexicon")) in.lexicon = read_lexicon_tsv(cfg.get_path("lexicon"));
  return in;
}

// Trains one model per the config and writes checkpoint, training log, and
// the effective config into out_dir.
inline TrainResult run_training(const RunConfig& cfg, const std::string& out_dir) {
  ModelConfig mc = model_config_from(cfg);
  RunInputs in = load_run_inputs(cfg, true);
  if (variant_needs_lexicon(mc.variant) && !in.lexicon) {
    throw ConfigError("variant '" + std::string(variant_name(mc.variant)) +
                      "' needs a lexicon (key 'lexicon')");
  }
  write_effective_config(cfg, out_dir);
  const std::string log_path = join_path(out_dir, "train_log.tsv");
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot open for write: " + log_path);
  TrainResult result =
      train_tagger(in.train, in.dev, mc, in.embeddings_ptr(), in.lexicon_ptr(), &log);
  if (!log) throw IoError("write failed: " + log_path);
  save_model(result.model, join_path(out_dir, "model.ckpt"));
  return result;
}

// Scores a trained model on the configured test set and writes the report
// files into out_dir.
inline ScoreReport run_evaluation(const TaggerModel& model, const RunConfig& cfg,
                                  const std::string& out_dir) {
  RunInputs in = load_run_inputs(cfg, false);
  if (in.test.empty()) throw ConfigError("no test set configured (key 'test')");
  if (variant_needs_lexicon(model.config.variant) && !in.lexicon) {
    throw ConfigError("variant '" + std::string(variant_name(model.config.variant)) +
                      "' needs a lexicon (key 'lexicon')");
  }
  std::vector<std::vector<Span>> preds =
      predict_spans(model, in.test, in.embeddings_ptr(), in.lexicon_ptr());
  ScoreReport score_report = score(in.test, preds);

  EvalReport report;
  report.runs.push_back(score_report);
  finalize_means(report);
  report.context["variant"] = variant_name(model.config.variant);
  report.context["test"] = cfg.get_path("test");
  write_effective_config(cfg, out_dir);
  emit_report(report, out_dir);
  return score_report;
}

// ---------------------------------------------------------------------------
// Ablation grid
// ---------------------------------------------------------------------------

struct AblationCell {
  std::string label;
  Variant variant;
  bool uses_lexicon = false;
  RegularizerFlags flags;
  bool mean_filled = false;
};

// Two lexicon-free baselines, then every regularizer combination crossed
// with both fill modes for the configured (lexicon-consuming) variant.
inline std::vector<AblationCell> ablation_grid(Variant configured) {
  if (!variant_needs_lexicon(configured)) {
    throw ConfigError("ablation grid needs a lexicon-consuming variant (ha or feat), got '" +
                      std::string(variant_name(configured)) + "'");
  }
  std::vector<AblationCell> cells;
  cells.push_back({"baseline", Variant::kBaseline, false, {}, false});
  cells.push_back({"att", Variant::kAtt, false, {}, false});
  const struct {
    const char* name;
    RegularizerFlags flags;
  } regs[] = {
      {"reg_none", {false, false}},
      {"reg_freq", {true, false}},
      {"reg_len", {false, true}},
      {"reg_freq_len", {true, true}},
  };
  for (const auto& reg : regs) {
    for (bool mean_filled : {false, true}) {
      AblationCell cell;
      cell.label = std::string(reg.name) + (mean_filled ? "+mean_filled" : "+expanded");
      cell.variant = configured;
      cell.uses_lexicon = true;
      cell.flags = reg.flags;
      cell.mean_filled = mean_filled;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

struct AblationRow {
  std::string label;
  std::string lexicon;  // "-" for the lexicon-free baselines
  std::size_t seeds = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;  // grid order
  std::string table_path;
};

inline std::size_t worker_cap_from_env() {
  const char* raw = std::getenv("GAZEKEX_THREADS");
  if (!raw || !*raw) return 1;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(raw, &pos);
    if (pos != std::string(raw).size() || v < 1) throw std::invalid_argument("range");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(std::string("GAZEKEX_THREADS must be a positive integer, got '") + raw + "'");
  }
}

namespace detail {

// One grid cell: train the cell's variant once per seed, score each model on
// the test set, write per-seed artifacts, and return the per-seed reports.
inline std::vector<ScoreReport> run_ablation_cell(
    const AblationCell& cell, const RunInputs& in, const GazeLexicon* cell_lexicon,
    const ModelConfig& base_config, const std::vector<std::uint64_t>& seeds,
    const std::string& cell_dir) {
  std::vector<ScoreReport> reports;
  for (std::uint64_t seed : seeds) {
    ModelConfig mc = base_config;
    mc.variant = cell.variant;
    mc.seed = seed;
    const std::string seed_dir = join_path(cell_dir, "seed_" + std::to_string(seed));
    ensure_dir(seed_dir);
    TrainResult trained =
        train_tagger(in.train, in.dev, mc, in.embeddings_ptr(), cell_lexicon, nullptr);
    save_model(trained.model, join_path(seed_dir, "model.ckpt"));
    std::vector<std::vector<Span>> preds =
        predict_spans(trained.model, in.test, in.embeddings_ptr(), cell_lexicon);
    ScoreReport sr = score(in.test, preds);
    EvalReport seed_report;
    seed_report.runs.push_back(sr);
    finalize_means(seed_report);
    seed_report.context["cell"] = cell.label;
    seed_report.context["seed"] = std::to_string(seed);
    emit_report(seed_report, seed_dir);
    reports.push_back(sr);
  }
  return reports;
}

}  // namespace detail

// Full ablation sweep. Builds the four regularized lexicons from the native
// rows of the configured base lexicon, derives each cell's training lexicon
// by expansion or mean fill over the corpus vocabulary, trains the grid over
// all configured seeds, and writes one summary row per cell to table.tsv.
// Cells run on up to `workers` threads; each cell is single-threaded and owns
// its output directory, so the artifacts and the table are identical for any
// worker count.
inline AblationResult run_ablation(const RunConfig& cfg, const std::string& out_dir,
                                   std::size_t workers) {
  ModelConfig base_config = model_config_from(cfg);
  std::vector<AblationCell> cells = ablation_grid(base_config.variant);
  const std::vector<std::uint64_t> seeds = cfg.get_seed_list("seeds");

  RunInputs in = load_run_inputs(cfg, true);
  if (in.test.empty()) throw ConfigError("ablation needs a test set (key 'test')");
  if (!in.lexicon) throw ConfigError("ablation needs a base lexicon (key 'lexicon')");
  if (!cfg.has_path("freq_lexicon")) {
    throw ConfigError("ablation needs a frequency lexicon (key 'freq_lexicon')");
  }
  FrequencyLexicon freq = FrequencyLexicon::load_tsv(cfg.get_path("freq_lexicon"));

  write_effective_config(cfg, out_dir);
  const std::string lexicons_dir = join_path(out_dir, "lexicons");
  ensure_dir(lexicons_dir);

  // Regularizer stage: one lexicon per flag combination, rebuilt from the
  // base lexicon's AVG-TRT values.
  const std::map<std::string, double> avg = native_avg_of(*in.lexicon);
  std::map<std::string, GazeLexicon> reg_lexicons;
  const std::vector<std::string> vocab = [&] {
    std::vector<Post> all = in.train;
    all.insert(all.end(), in.dev.begin(), in.dev.end());
    all.insert(all.end(), in.test.begin(), in.test.end());
    return vocab_of_posts(all);
  }();
  for (const AblationCell& cell : cells) {
    if (!cell.uses_lexicon) continue;
    const std::string reg_name = cell.label.substr(0, cell.label.find('+'));
    if (reg_lexicons.count(reg_name) > 0) continue;
    GazeLexicon lex = build_lexicon(avg, cell.flags, &freq, in.lexicon->meta().corpus);
    write_lexicon_tsv(join_path(lexicons_dir, reg_name + ".tsv"), lex);
    reg_lexicons.emplace(reg_name, std::move(lex));
  }

  // Fill stage: each lexicon cell covers the corpus vocabulary its own way.
  std::vector<std::optional<GazeLexicon>> cell_lexicons(cells.size());
  static const EmbeddingTable kNoEmbeddings;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].uses_lexicon) continue;
    const std::string reg_name = cells[i].label.substr(0, cells[i].label.find('+'));
    GazeLexicon lex = reg_lexicons.at(reg_name);
    if (cells[i].mean_filled) {
      mean_fill(lex, vocab);
    } else {
      expand_lexicon(lex, vocab, in.embeddings ? *in.embeddings : kNoEmbeddings, nullptr);
    }
    const std::string cell_dir = join_path(out_dir, join_path("cells", cells[i].label));
    ensure_dir(cell_dir);
    write_lexicon_tsv(join_path(cell_dir, "lexicon.tsv"), lex);
    cell_lexicons[i] = std::move(lex);
  }

  // Training stage: cells are independent work items pulled off a shared
  // cursor; results land in per-cell slots so assembly order is fixed.
  std::vector<std::vector<ScoreReport>> cell_reports(cells.size());
  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      const std::string cell_dir = join_path(out_dir, join_path("cells", cells[i].label));
      ensure_dir(cell_dir);
      const GazeLexicon* lex = cell_lexicons[i] ? &*cell_lexicons[i] : nullptr;
      cell_reports[i] = detail::run_ablation_cell(cells[i], in, lex, base_config, seeds, cell_dir);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::future<void>> pool;
    const std::size_t n = std::min(workers, cells.size());
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.push_back(std::async(std::launch::async, work));
    for (auto& f : pool) f.get();  // rethrows the first worker failure
  }

  // Summary table: per-cell macro metrics averaged over seeds.
  AblationResult result;
  result.table_path = join_path(out_dir, "table.tsv");
  std::ofstream table(result.table_path);
  if (!table) throw IoError("cannot open for write: " + result.table_path);
  table << "cell\tlexicon\tseeds\tprecision\trecall\tf1\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EvalReport cell_report;
    cell_report.runs = cell_reports[i];
    finalize_means(cell_report);
    AblationRow row;
    row.label = cells[i].label;
    row.lexicon = cells[i].uses_lexicon ? "cells/" + cells[i].label + "/lexicon.tsv" : "-";
    row.seeds = seeds.size();
    row.precision = cell_report.mean_precision;
    row.recall = cell_report.mean_recall;
    row.f1 = cell_report.mean_f1;
    table << row.label << "\t" << row.lexicon << "\t" << row.seeds << "\t"
          << format_double(row.precision) << "\t" << format_double(row.recall) << "\t"
          << format_double(row.f1) << "\n";
    result.rows.push_back(std::move(row));
  }
  if (!table) throw IoError("write failed: " + result.table_path);
  return result;
}

// ---------------------------------------------------------------------------
// Gradient check entry point
// ---------------------------------------------------------------------------

struct GradCheckRun {
  Variant variant;
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

// Gradient fidelity probe on a fixed 3-token post with a small model. The
// relative-error denominator floor sits at 1e-6: central differences at step
// 1e-5 on an order-one loss carry roughly 1e-11 of roundoff, so smaller true
// gradients are indistinguishable from noise and a tighter floor fails on
// healthy code.
inline GradCheckRun run_gradcheck(Variant variant, std::uint64_t seed) {
  ModelConfig mc;
  mc.variant = variant;
  mc.word_emb_dim = 6;
  mc.char_emb_dim = 4;
  mc.char_hidden = 3;
  mc.char_word_dim = 4;
  mc.word_hidden = 5;
  mc.att_hidden = 4;
  mc.seed = seed;

  Post post;
  post.tokens = {"senate", "votes", "today"};
  post.gold_spans = {{1, 2}};
  post.tags = spans_to_tags(post.gold_spans, post.tokens.size());

  GazeLexicon lexicon;
  LexiconEntry hot;
  hot.normalized = 1.0;
  lexicon.insert("votes", hot);
  LexiconEntry cold;
  cold.normalized = 0.25;
  lexicon.insert("senate", cold);
  const GazeLexicon* lex = variant_needs_lexicon(variant) ? &lexicon : nullptr;

  CharVocab vocab = CharVocab::build({post});
  TaggerModel model = init_model(mc, vocab);

  auto loss_fn = [&]() {
    Tape tape;
    TapeParams tp(tape, model.params);
    return tape.value(post_objective(tape, tp, model, post, nullptr, lex))[0];
  };

  ParamSet grads = model.params.zeros_like();
  {
    Tape tape;
    TapeParams tp(tape, model.params);
    tape.backward(post_objective(tape, tp, model, post, nullptr, lex));
    tp.accumulate_grads(model.params, grads);
  }

  Rng rng(seed, rng_stream::kGradCheck);
  GradCheckConfig gc;
  gc.rel_err_floor = 1e-6;
  GradCheckResult res = grad_check(model.params, grads, loss_fn, rng, gc);

  GradCheckRun run;
  run.variant = variant;
  run.max_rel_err = res.max_rel_err;
  run.checked = res.coords_checked;
  return run;
}

}  // namespace gazekex
