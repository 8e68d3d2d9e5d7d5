// Command line front end. Every subcommand resolves one effective RunConfig
// (config file, then flag overrides), echoes it into its output directory,
// and drives the library; all randomness flows from the configured seed.
#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gazekex/pipeline.hpp"

namespace {

using namespace gazekex;

LogLevel log_level_from_string(const std::string& s) {
  if (s == "quiet") return LogLevel::kQuiet;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  throw ConfigError("unknown log level '" + s + "' (expected quiet, warn, info, or debug)");
}

std::vector<std::string> read_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

double median_rank(std::vector<std::size_t> ranks) {
  std::sort(ranks.begin(), ranks.end());
  const std::size_t n = ranks.size();
  if (n == 0) throw EmptyInputError("median of an empty rank list");
  if (n % 2 == 1) return static_cast<double>(ranks[n / 2]);
  return 0.5 * static_cast<double>(ranks[n / 2 - 1] + ranks[n / 2]);
}

// Mutable state shared by the option handlers; lives for the whole parse.
struct Cli {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::pair<std::string, std::string>> overrides;  // config key, value

  std::string out_file;  // single-file output override
  std::string vocab_file;
  std::string model_path;
  std::string model_a_path;
  std::string model_b_path;
  std::string lexicon_a_path;
  std::string lexicon_b_path;
  std::string gradcheck_variant = "all";

  RunConfig config() const {
    RunConfig cfg =
        config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    return cfg;
  }

  std::string artifact_path(const std::string& default_name) const {
    return out_file.empty() ? join_path(out_dir, default_name) : out_file;
  }
};

// Registers a flag whose value lands in the config under `key`.
void key_option(CLI::App* cmd, Cli& cli, const std::string& flag, const std::string& key,
                const std::string& desc) {
  cmd->add_option_function<std::string>(
      flag, [&cli, key](const std::string& v) { cli.overrides.emplace_back(key, v); }, desc);
}

void key_flag(CLI::App* cmd, Cli& cli, const std::string& flag, const std::string& key,
              const std::string& desc) {
  cmd->add_flag_callback(
      flag, [&cli, key]() { cli.overrides.emplace_back(key, "true"); }, desc);
}

std::optional<FrequencyLexicon> load_freq_if_set(const RunConfig& cfg) {
  if (!cfg.has_path("freq_lexicon")) return std::nullopt;
  return FrequencyLexicon::load_tsv(cfg.get_path("freq_lexicon"));
}

RegularizerFlags flags_of(const RunConfig& cfg) {
  return {cfg.get_bool("regularize_frequency"), cfg.get_bool("regularize_length")};
}

std::vector<std::string> target_vocab(const Cli& cli, const RunConfig& cfg) {
  std::vector<std::string> vocab;
  if (cfg.has_path("posts")) {
    std::vector<Post> posts = read_posts_jsonl(cfg.get_path("posts"));
    vocab = vocab_of_posts(posts);
  }
  if (!cli.vocab_file.empty()) {
    std::vector<std::string> extra = read_vocab_file(cli.vocab_file);
    vocab.insert(vocab.end(), extra.begin(), extra.end());
  }
  if (vocab.empty()) {
    throw ConfigError("no target vocabulary (key 'posts' or --vocab)");
  }
  return vocab;
}

GazeLexicon required_lexicon(const RunConfig& cfg) {
  if (!cfg.has_path("lexicon")) throw ConfigError("no lexicon input (key 'lexicon')");
  return read_lexicon_tsv(cfg.get_path("lexicon"));
}

void write_lexicon_artifact(const Cli& cli, const RunConfig& cfg, const GazeLexicon& lex) {
  write_effective_config(cfg, cli.out_dir);
  const std::string path = cli.artifact_path("lexicon.tsv");
  write_lexicon_tsv(path, lex);
  std::cout << "wrote " << path << " (" << lex.size() << " entries, "
            << lex.words_with_source(EntrySource::kNative).size() << " native)\n";
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

void cmd_osec_build(const Cli& cli) {
  RunConfig cfg = cli.config();
  if (!cfg.has_path("osec")) throw ConfigError("no corpus input (key 'osec' or --input)");
  const std::size_t participants = cfg.get_size("participants");
  auto records = ingest_osec(cfg.get_path("osec"),
                             osec_format_from_string(cfg.get("osec_format")), participants);
  auto avg = average_trt(records, participants);
  auto freq = load_freq_if_set(cfg);
  GazeLexicon lex =
      build_lexicon(avg, flags_of(cfg), freq ? &*freq : nullptr, cfg.get("corpus_name"));
  write_lexicon_artifact(cli, cfg, lex);
}

void cmd_osec_regularize(const Cli& cli) {
  RunConfig cfg = cli.config();
  GazeLexicon input = required_lexicon(cfg);
  auto freq = load_freq_if_set(cfg);
  GazeLexicon lex = build_lexicon(native_avg_of(input), flags_of(cfg),
                                  freq ? &*freq : nullptr, input.meta().corpus);
  write_lexicon_artifact(cli, cfg, lex);
}

void cmd_osec_normalize(const Cli& cli) {
  RunConfig cfg = cli.config();
  GazeLexicon input = required_lexicon(cfg);
  if (input.size() != input.words_with_source(EntrySource::kNative).size()) {
    throw ContractError("normalize expects a native-only lexicon (run before expansion)");
  }
  std::map<std::string, double> reg;
  for (const auto& [word, entry] : input.entries()) reg[word] = entry.regularized;
  MinMax stats;
  auto norm = minmax_normalize(reg, &stats);

  LexiconMeta meta = input.meta();
  meta.norm_min = stats.min;
  meta.norm_max = stats.max;
  GazeLexicon lex(meta);
  for (const auto& [word, entry] : input.entries()) {
    LexiconEntry e = entry;
    e.normalized = norm.at(word);
    lex.insert(word, e);
  }
  write_lexicon_artifact(cli, cfg, lex);
}

void cmd_osec_combine(const Cli& cli) {
  RunConfig cfg = cli.config();
  GazeLexicon a = read_lexicon_tsv(cli.lexicon_a_path);
  GazeLexicon b = read_lexicon_tsv(cli.lexicon_b_path);
  auto avg = combine_avg(native_avg_of(a), native_avg_of(b));
  auto freq = load_freq_if_set(cfg);
  const std::string corpus = cfg.is_set("corpus_name")
                                 ? cfg.get("corpus_name")
                                 : a.meta().corpus + "+" + b.meta().corpus;
  GazeLexicon lex = build_lexicon(avg, flags_of(cfg), freq ? &*freq : nullptr, corpus);
  write_lexicon_artifact(cli, cfg, lex);
}

void cmd_osec_expand(const Cli& cli) {
  RunConfig cfg = cli.config();
  GazeLexicon lex = required_lexicon(cfg);
  auto vocab = target_vocab(cli, cfg);

  std::size_t added = 0;
  const std::string fill = cfg.get("expand_fill");
  if (fill == "mean_filled") {
    added = mean_fill(lex, vocab);
  } else if (fill == "expanded") {
    EmbeddingTable embeddings;
    if (cfg.has_path("embeddings")) {
      embeddings = EmbeddingTable::load_text(cfg.get_path("embeddings"));
    }
    std::optional<TaggerModel> model;
    CharEncoder encoder;
    if (!cli.model_path.empty()) {
      model = load_model(cli.model_path);
      encoder = char_encoder_from(*model);
    }
    added = expand_lexicon(lex, vocab, embeddings, encoder);
  } else {
    throw ConfigError("config key 'expand_fill' needs expanded or mean_filled, got '" + fill +
                      "'");
  }

  write_lexicon_artifact(cli, cfg, lex);
  std::cout << "added " << added << " entries\n";
  std::cout << "dedup_coverage " << format_double(coverage(lex, vocab, true)) << "\n";
  std::cout << "token_coverage " << format_double(coverage(lex, vocab, false)) << "\n";
}

void cmd_osec_coverage(const Cli& cli) {
  RunConfig cfg = cli.config();
  GazeLexicon lex = required_lexicon(cfg);
  auto vocab = target_vocab(cli, cfg);
  std::cout << "dedup_coverage " << format_double(coverage(lex, vocab, true)) << "\n";
  std::cout << "token_coverage " << format_double(coverage(lex, vocab, false)) << "\n";
}

void cmd_dataset_build(const Cli& cli) {
  RunConfig cfg = cli.config();
  if (!cfg.has_path("tweets")) throw ConfigError("no tweet input (key 'tweets' or --input)");
  auto texts = read_tweets(cfg.get_path("tweets"));
  auto posts = build_dataset(texts, dataset_mode_from_string(cfg.get("dataset_mode")));
  write_effective_config(cfg, cli.out_dir);
  const std::string path = cli.artifact_path("posts.jsonl");
  write_posts_jsonl(path, posts);
  std::cout << "wrote " << path << " (" << posts.size() << " posts from " << texts.size()
            << " tweets)\n";
}

void cmd_dataset_split(const Cli& cli) {
  RunConfig cfg = cli.config();
  if (!cfg.has_path("posts")) throw ConfigError("no posts input (key 'posts' or --posts)");
  auto posts = read_posts_jsonl(cfg.get_path("posts"));
  DatasetSplit split = split_dataset(posts, cfg.get_ratios("split_ratios"),
                                     static_cast<std::uint64_t>(cfg.get_int("seed")));
  write_effective_config(cfg, cli.out_dir);
  write_posts_jsonl(join_path(cli.out_dir, "train.jsonl"), split.train);
  write_posts_jsonl(join_path(cli.out_dir, "dev.jsonl"), split.dev);
  write_posts_jsonl(join_path(cli.out_dir, "test.jsonl"), split.test);
  std::cout << "train " << split.train.size() << "\ndev " << split.dev.size() << "\ntest "
            << split.test.size() << "\n";
}

void cmd_train(const Cli& cli) {
  RunConfig cfg = cli.config();
  TrainResult result = run_training(cfg, cli.out_dir);
  std::cout << "wrote " << join_path(cli.out_dir, "model.ckpt") << " (" << result.log.size()
            << " epochs)\n";
  if (!result.log.empty()) {
    const TrainLogEntry& last = result.log.back();
    std::cout << "final_loss " << format_double(last.mean_loss) << "\n";
    if (last.has_dev) std::cout << "final_dev_f1 " << format_double(last.dev_f1) << "\n";
  }
}

void cmd_evaluate(const Cli& cli) {
  RunConfig cfg = cli.config();
  TaggerModel model = load_model(cli.model_path);
  ScoreReport sr = run_evaluation(model, cfg, cli.out_dir);
  std::cout << "posts " << sr.posts << "\n";
  std::cout << "precision " << format_double(sr.precision) << "\n";
  std::cout << "recall " << format_double(sr.recall) << "\n";
  std::cout << "f1 " << format_double(sr.f1) << "\n";
}

void cmd_analyze_rank(const Cli& cli) {
  RunConfig cfg = cli.config();
  RunInputs in = load_run_inputs(cfg, false);
  if (in.test.empty()) throw ConfigError("no test set configured (key 'test')");
  TaggerModel model_a = load_model(cli.model_a_path);
  TaggerModel model_b = load_model(cli.model_b_path);
  for (const TaggerModel* m : {&model_a, &model_b}) {
    if (variant_needs_lexicon(m->config.variant) && !in.lexicon) {
      throw ConfigError("variant '" + std::string(variant_name(m->config.variant)) +
                        "' needs a lexicon (key 'lexicon')");
    }
  }

  auto preds_a = predict_spans(model_a, in.test, in.embeddings_ptr(), in.lexicon_ptr());
  auto preds_b = predict_spans(model_b, in.test, in.embeddings_ptr(), in.lexicon_ptr());
  auto subset = disagreement_subset(preds_a, preds_b, in.test);

  EvalReport report;
  report.disagreement_size = subset.size();
  report.context["model_a"] = cli.model_a_path;
  report.context["model_b"] = cli.model_b_path;
  report.context["variant_a"] = variant_name(model_a.config.variant);
  report.context["variant_b"] = variant_name(model_b.config.variant);
  std::vector<std::size_t> ranks_a, ranks_b;
  for (std::size_t idx : subset) {
    report.ranks_a.push_back(
        model_attention_rank(model_a, idx, in.test[idx], in.embeddings_ptr(), in.lexicon_ptr()));
    report.ranks_b.push_back(
        model_attention_rank(model_b, idx, in.test[idx], in.embeddings_ptr(), in.lexicon_ptr()));
    ranks_a.push_back(report.ranks_a.back().rank);
    ranks_b.push_back(report.ranks_b.back().rank);
  }
  write_effective_config(cfg, cli.out_dir);
  emit_report(report, cli.out_dir);

  std::cout << "disagreement_size " << subset.size() << "\n";
  if (!subset.empty()) {
    std::cout << "median_rank_a " << format_double(median_rank(ranks_a)) << "\n";
    std::cout << "median_rank_b " << format_double(median_rank(ranks_b)) << "\n";
  }
}

void cmd_analyze_generalization(const Cli& cli) {
  RunConfig cfg = cli.config();
  RunInputs in = load_run_inputs(cfg, true);
  if (in.test.empty()) throw ConfigError("no test set configured (key 'test')");
  auto subset = generalization_subset(in.train, in.test);

  std::vector<Post> posts;
  for (std::size_t idx : subset) posts.push_back(in.test[idx]);
  write_effective_config(cfg, cli.out_dir);
  write_posts_jsonl(join_path(cli.out_dir, "generalization.jsonl"), posts);
  EvalReport report;
  report.generalization_size = subset.size();
  report.context["train"] = cfg.get_path("train");
  report.context["test"] = cfg.get_path("test");
  emit_report(report, cli.out_dir);
  std::cout << "generalization_size " << subset.size() << " of " << in.test.size() << "\n";
}

void cmd_ablate(const Cli& cli) {
  RunConfig cfg = cli.config();
  AblationResult result = run_ablation(cfg, cli.out_dir, worker_cap_from_env());
  std::ifstream table(result.table_path);
  std::cout << table.rdbuf();
  std::cout << "wrote " << result.table_path << "\n";
}

void cmd_gradcheck(const Cli& cli) {
  RunConfig cfg = cli.config();
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  std::vector<Variant> variants;
  if (cli.gradcheck_variant == "all") {
    variants = {Variant::kBaseline, Variant::kAtt, Variant::kHa, Variant::kFeat};
  } else {
    variants = {variant_from_string(cli.gradcheck_variant)};
  }
  double worst = 0.0;
  for (Variant v : variants) {
    GradCheckRun run = run_gradcheck(v, seed);
    worst = std::max(worst, run.max_rel_err);
    std::cout << variant_name(v) << " max_rel_err " << format_double(run.max_rel_err)
              << " coords " << run.checked << "\n";
  }
  std::cout << "max_rel_err " << format_double(worst) << "\n";
  if (!(worst < 1e-4)) {
    throw EvalError("gradient check failed: max relative error " + format_double(worst));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reading-time lexicons and keyphrase tagging experiments"};
  app.require_subcommand(1);

  Cli cli;
  std::string stage = "startup";
  std::vector<std::function<void()>> pending;  // run after the parse succeeds

  app.add_option("--config", cli.config_path, "run configuration file");
  app.add_option("--out-dir", cli.out_dir, "artifact directory (default: out)");
  app.add_option_function<std::string>(
      "--log-level",
      [](const std::string& s) { gazekex::log_level() = log_level_from_string(s); },
      "quiet, warn, info, or debug");
  key_option(&app, cli, "--seed", "seed", "root random seed");

  auto defer = [&](CLI::App* cmd, const std::string& name, void (*fn)(const Cli&)) {
    cmd->fallthrough();
    cmd->callback([&stage, &pending, &cli, name, fn]() {
      pending.push_back([&stage, &cli, name, fn]() {
        stage = name;
        fn(cli);
      });
    });
  };

  CLI::App* osec = app.add_subcommand("osec", "gaze lexicon pipeline");
  osec->require_subcommand(1);
  osec->fallthrough();

  CLI::App* build = osec->add_subcommand("build", "average a fixation corpus into a lexicon");
  key_option(build, cli, "--input", "osec", "fixation records (TSV)");
  key_option(build, cli, "--format", "osec_format", "generic, geco, or zuco");
  key_option(build, cli, "--participants", "participants", "participant count");
  key_option(build, cli, "--corpus", "corpus_name", "corpus label for the lexicon header");
  key_flag(build, cli, "--frequency", "regularize_frequency", "regularize by word frequency");
  key_flag(build, cli, "--length", "regularize_length", "regularize by word length");
  key_option(build, cli, "--freq-lexicon", "freq_lexicon", "word frequency counts (TSV)");
  build->add_option("--out", cli.out_file, "output lexicon path");
  defer(build, "osec build", cmd_osec_build);

  CLI::App* regularize =
      osec->add_subcommand("regularize", "rebuild a lexicon's regularization stages");
  key_option(regularize, cli, "--lexicon", "lexicon", "input lexicon (TSV)");
  key_flag(regularize, cli, "--frequency", "regularize_frequency", "regularize by word frequency");
  key_flag(regularize, cli, "--length", "regularize_length", "regularize by word length");
  key_option(regularize, cli, "--freq-lexicon", "freq_lexicon", "word frequency counts (TSV)");
  regularize->add_option("--out", cli.out_file, "output lexicon path");
  defer(regularize, "osec regularize", cmd_osec_regularize);

  CLI::App* normalize = osec->add_subcommand("normalize", "recompute min-max normalization");
  key_option(normalize, cli, "--lexicon", "lexicon", "input lexicon (TSV)");
  normalize->add_option("--out", cli.out_file, "output lexicon path");
  defer(normalize, "osec normalize", cmd_osec_normalize);

  CLI::App* combine = osec->add_subcommand("combine", "merge two lexicons over shared words");
  combine->add_option("--a", cli.lexicon_a_path, "first lexicon (TSV)")->required();
  combine->add_option("--b", cli.lexicon_b_path, "second lexicon (TSV)")->required();
  key_option(combine, cli, "--corpus", "corpus_name", "corpus label for the merged lexicon");
  key_flag(combine, cli, "--frequency", "regularize_frequency", "regularize by word frequency");
  key_flag(combine, cli, "--length", "regularize_length", "regularize by word length");
  key_option(combine, cli, "--freq-lexicon", "freq_lexicon", "word frequency counts (TSV)");
  combine->add_option("--out", cli.out_file, "output lexicon path");
  defer(combine, "osec combine", cmd_osec_combine);

  CLI::App* expand = osec->add_subcommand("expand", "cover a target vocabulary");
  key_option(expand, cli, "--lexicon", "lexicon", "input lexicon (TSV)");
  key_option(expand, cli, "--posts", "posts", "posts whose tokens form the target vocabulary");
  expand->add_option("--vocab", cli.vocab_file, "extra vocabulary, one word per line");
  key_option(expand, cli, "--embeddings", "embeddings", "pretrained word vectors");
  expand->add_option("--model", cli.model_path, "checkpoint for char-level similarity");
  key_option(expand, cli, "--fill", "expand_fill", "expanded or mean_filled");
  expand->add_option("--out", cli.out_file, "output lexicon path");
  defer(expand, "osec expand", cmd_osec_expand);

  CLI::App* cover = osec->add_subcommand("coverage", "report lexicon coverage of a vocabulary");
  key_option(cover, cli, "--lexicon", "lexicon", "input lexicon (TSV)");
  key_option(cover, cli, "--posts", "posts", "posts whose tokens form the target vocabulary");
  cover->add_option("--vocab", cli.vocab_file, "extra vocabulary, one word per line");
  defer(cover, "osec coverage", cmd_osec_coverage);

  CLI::App* dataset = app.add_subcommand("dataset", "microblog dataset construction");
  dataset->require_subcommand(1);
  dataset->fallthrough();

  CLI::App* dbuild = dataset->add_subcommand("build", "hashtag-labeled posts from raw tweets");
  key_option(dbuild, cli, "--input", "tweets", "tweets, one per line or JSON records");
  key_option(dbuild, cli, "--mode", "dataset_mode", "election-trec, general-twitter, or generic");
  dbuild->add_option("--out", cli.out_file, "output posts path");
  defer(dbuild, "dataset build", cmd_dataset_build);

  CLI::App* dsplit = dataset->add_subcommand("split", "seeded train/dev/test partition");
  key_option(dsplit, cli, "--posts", "posts", "posts to split (JSONL)");
  key_option(dsplit, cli, "--ratios", "split_ratios", "train,dev,test ratios");
  defer(dsplit, "dataset split", cmd_dataset_split);

  CLI::App* train = app.add_subcommand("train", "train a keyphrase tagger");
  key_option(train, cli, "--variant", "variant", "baseline, att, ha, or feat");
  key_option(train, cli, "--train", "train", "training posts (JSONL)");
  key_option(train, cli, "--dev", "dev", "dev posts (JSONL)");
  key_option(train, cli, "--lexicon", "lexicon", "reading-time lexicon (TSV)");
  key_option(train, cli, "--embeddings", "embeddings", "pretrained word vectors");
  key_option(train, cli, "--epochs", "epochs", "training epochs");
  defer(train, "train", cmd_train);

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a test set");
  evaluate->add_option("--model", cli.model_path, "checkpoint to score")->required();
  key_option(evaluate, cli, "--test", "test", "test posts (JSONL)");
  key_option(evaluate, cli, "--lexicon", "lexicon", "reading-time lexicon (TSV)");
  key_option(evaluate, cli, "--embeddings", "embeddings", "pretrained word vectors");
  defer(evaluate, "evaluate", cmd_evaluate);

  CLI::App* analyze = app.add_subcommand("analyze", "post-hoc analyses");
  analyze->require_subcommand(1);
  analyze->fallthrough();

  CLI::App* rank = analyze->add_subcommand(
      "rank", "gold-phrase attention ranks on the disagreement subset");
  rank->add_option("--model-a", cli.model_a_path, "attention model A")->required();
  rank->add_option("--model-b", cli.model_b_path, "attention model B")->required();
  key_option(rank, cli, "--test", "test", "test posts (JSONL)");
  key_option(rank, cli, "--lexicon", "lexicon", "reading-time lexicon (TSV)");
  key_option(rank, cli, "--embeddings", "embeddings", "pretrained word vectors");
  defer(rank, "analyze rank", cmd_analyze_rank);

  CLI::App* gen = analyze->add_subcommand(
      "generalization", "test posts whose gold phrase never occurs in training");
  key_option(gen, cli, "--train", "train", "training posts (JSONL)");
  key_option(gen, cli, "--test", "test", "test posts (JSONL)");
  defer(gen, "analyze generalization", cmd_analyze_generalization);

  CLI::App* ablate = app.add_subcommand("ablate", "regularizer and fill-mode grid");
  key_option(ablate, cli, "--variant", "variant", "lexicon-consuming variant (ha or feat)");
  key_option(ablate, cli, "--train", "train", "training posts (JSONL)");
  key_option(ablate, cli, "--dev", "dev", "dev posts (JSONL)");
  key_option(ablate, cli, "--test", "test", "test posts (JSONL)");
  key_option(ablate, cli, "--lexicon", "lexicon", "base lexicon (TSV)");
  key_option(ablate, cli, "--freq-lexicon", "freq_lexicon", "word frequency counts (TSV)");
  key_option(ablate, cli, "--embeddings", "embeddings", "pretrained word vectors");
  key_option(ablate, cli, "--seeds", "seeds", "comma-separated training seeds");
  key_option(ablate, cli, "--epochs", "epochs", "training epochs per cell");
  defer(ablate, "ablate", cmd_ablate);

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient probe");
  gradcheck->add_option("--variant", cli.gradcheck_variant,
                        "baseline, att, ha, feat, or all (default)");
  defer(gradcheck, "gradcheck", cmd_gradcheck);

  try {
    app.parse(argc, argv);
    for (auto& run : pending) run();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gazekex::Error& e) {
    std::cerr << "gazekex " << stage << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gazekex " << stage << ": unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
