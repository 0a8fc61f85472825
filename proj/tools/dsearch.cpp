// dsearch: schema-label enhanced dataset search.
//
// Stage 1 (label generation):  ingest -> cooccur -> train-cofactor ->
//   train-generator -> generate
// Stage 2 (retrieval):         index / search / run / tune
// Evaluation:                  pool / evaluate / features
//
// Every stage reads and writes plain files, so each step can be inspected
// and re-run in isolation.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dsearch/common.hpp"
#include "dsearch/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dsearch;

namespace {

struct CommonOpts {
  std::string corpus_dir;
  std::size_t max_rows = 1000;
};

void add_corpus_opts(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--corpus", opts.corpus_dir, "corpus root directory")->required();
  cmd->add_option("--max-rows", opts.max_rows, "data rows sampled per dataset")
      ->capture_default_str();
}

Corpus load(const CommonOpts& opts) {
  LoadOptions lo;
  lo.max_rows = opts.max_rows;
  auto corpus = load_corpus(opts.corpus_dir, lo);
  for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << '\n';
  return corpus;
}

struct RankOpts {
  double w_text = 1.0, w_data = 0.0, w_l = 0.0;
  std::string gen_labels, vectors;
  std::string normalization = "minmax";
  double bm25_k1 = 1.2, bm25_b = 0.75;
  double wmd_floor = -2.0;
  bool include_original_labels = false;
  int depth = 100;
  // single-field baseline mode (SDR): set --baseline to bypass the mixed model
  std::string baseline;  // bm25|tfidf|lm-jm|lm-dirichlet
  std::string baseline_field = "all";
  double lm_lambda = 0.5, lm_mu = 1000.0;
};

void add_rank_opts(CLI::App* cmd, RankOpts& opts) {
  cmd->add_option("--w-text", opts.w_text, "weight of the title+description field")
      ->capture_default_str();
  cmd->add_option("--w-data", opts.w_data, "weight of the data table field")->capture_default_str();
  cmd->add_option("--w-l", opts.w_l, "weight of the generated-labels field")->capture_default_str();
  cmd->add_option("--gen-labels", opts.gen_labels, "generated labels TSV (needed when --w-l > 0)");
  cmd->add_option("--vectors", opts.vectors, "pretrained vector file (needed when --w-l > 0)");
  cmd->add_option("--normalization", opts.normalization,
                  "per-query score normalization: minmax|none")
      ->capture_default_str();
  cmd->add_option("--bm25-k1", opts.bm25_k1, "BM25 k1")->capture_default_str();
  cmd->add_option("--bm25-b", opts.bm25_b, "BM25 b")->capture_default_str();
  cmd->add_option("--wmd-floor", opts.wmd_floor, "label score when a side has no embeddings")
      ->capture_default_str();
  cmd->add_flag("--include-original-labels", opts.include_original_labels,
                "score original labels alongside generated ones in WMD");
  cmd->add_option("--depth", opts.depth, "ranked list depth")->capture_default_str();
  cmd->add_option("--baseline", opts.baseline,
                  "single-field baseline instead of the mixed model: bm25|tfidf|lm-jm|lm-dirichlet");
  cmd->add_option("--field", opts.baseline_field, "baseline field: text|data|labels-orig|labels-gen|all")
      ->capture_default_str();
  cmd->add_option("--lm-lambda", opts.lm_lambda, "Jelinek-Mercer lambda")->capture_default_str();
  cmd->add_option("--lm-mu", opts.lm_mu, "Dirichlet mu")->capture_default_str();
}

ScorerParams scorer_params(const RankOpts& opts) {
  ScorerParams params;
  params.bm25 = {opts.bm25_k1, opts.bm25_b};
  params.lm_lambda = opts.lm_lambda;
  params.lm_mu = opts.lm_mu;
  return params;
}

RankerConfig ranker_config(const RankOpts& opts) {
  RankerConfig cfg;
  cfg.w_text = opts.w_text;
  cfg.w_data = opts.w_data;
  cfg.w_l = opts.w_l;
  cfg.use_text = opts.w_text > 0;
  cfg.use_data = opts.w_data > 0;
  cfg.use_labels = opts.w_l > 0;
  cfg.text_bm25 = {opts.bm25_k1, opts.bm25_b};
  cfg.data_bm25 = {opts.bm25_k1, opts.bm25_b};
  if (opts.normalization == "minmax")
    cfg.normalization = RankerConfig::Normalization::minmax_per_query;
  else if (opts.normalization == "none")
    cfg.normalization = RankerConfig::Normalization::none;
  else
    throw Error("unknown normalization '" + opts.normalization + "' (minmax|none)");
  cfg.wmd_floor = opts.wmd_floor;
  cfg.include_original_labels_in_wmd = opts.include_original_labels;
  cfg.depth = opts.depth;
  return cfg;
}

// scoring context for search/run/tune: corpus with generated labels attached
// plus the embedding store when the labels field is active
struct SearchContext {
  Corpus corpus;
  EmbeddingStore store;
  RankerConfig cfg;
};

SearchContext make_context(const CommonOpts& common, const RankOpts& opts) {
  SearchContext ctx;
  ctx.cfg = ranker_config(opts);
  ctx.corpus = load(common);
  if (ctx.cfg.use_labels) {
    if (opts.gen_labels.empty()) throw Error("--w-l > 0 requires --gen-labels <file>");
    if (opts.vectors.empty()) throw Error("--w-l > 0 requires --vectors <file>");
    load_generated_labels(ctx.corpus, opts.gen_labels);
    ctx.store = load_vectors(opts.vectors);
    for (const auto& w : ctx.store.warnings) std::cerr << "warning: " << w << '\n';
  }
  return ctx;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_weights_config(const RankerConfig& cfg, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[32];
  auto line = [&](const char* key, double value) {
    std::snprintf(buf, sizeof(buf), "%g", value);
    out << key << " = " << buf << '\n';
  };
  line("w-text", cfg.use_text ? cfg.w_text : 0.0);
  line("w-data", cfg.use_data ? cfg.w_data : 0.0);
  line("w-l", cfg.use_labels ? cfg.w_l : 0.0);
}

// Expands `--config FILE` into ordinary `--key value` arguments appended to
// the command line. Keys already given as flags are skipped, so flags take
// precedence; unknown keys fail option parsing afterwards.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_file;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (config_file.empty()) return args;

  std::ifstream in(config_file);
  if (!in) throw Error("cannot open config file: " + config_file);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw Error(config_file + ":" + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) throw Error(config_file + ":" + std::to_string(line_no) + ": empty key");
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (given) continue;
    args.push_back(flag);
    if (!value.empty()) args.push_back(value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"schema-label enhanced dataset search"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  std::string config_placeholder;  // consumed by expand_config_args before parsing
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_placeholder,
                    "key = value options file (flags take precedence)");
    cmd->add_option("--seed", seed, "seed for the stochastic components")->capture_default_str();
  };

  // ---- ingest ----
  CommonOpts ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "load and validate a corpus directory");
  add_common(ingest);
  add_corpus_opts(ingest, ingest_opts);

  // ---- cooccur ----
  CommonOpts cooccur_opts;
  std::string cooccur_out;
  int k_neg = 1;
  int min_label_freq = 1;
  auto* cooccur = app.add_subcommand("cooccur", "build vocabulary, preference and SPPMI matrices");
  add_common(cooccur);
  add_corpus_opts(cooccur, cooccur_opts);
  cooccur->add_option("--out-dir", cooccur_out, "output directory")->required();
  cooccur->add_option("--k-neg", k_neg, "SPPMI negative-sample shift")->capture_default_str();
  cooccur->add_option("--min-label-freq", min_label_freq,
                      "drop labels appearing in fewer datasets")
      ->capture_default_str();

  // ---- train-cofactor ----
  std::string tc_pref, tc_sppmi, tc_out;
  CoFactorConfig cf_cfg;
  auto* train_cf = app.add_subcommand("train-cofactor", "jointly factorize preference and SPPMI");
  add_common(train_cf);
  train_cf->add_option("--preference", tc_pref, "preference triplet file")->required();
  train_cf->add_option("--sppmi", tc_sppmi, "SPPMI triplet file")->required();
  train_cf->add_option("--out", tc_out, "model output file")->required();
  train_cf->add_option("--latent-dim", cf_cfg.latent_dim, "latent factors")->capture_default_str();
  train_cf->add_option("--c1", cf_cfg.c1, "confidence on observed cells")->capture_default_str();
  train_cf->add_option("--c0", cf_cfg.c0, "confidence on zero cells")->capture_default_str();
  train_cf->add_option("--lambda-alpha", cf_cfg.lambda_alpha, "dataset factor regularization")
      ->capture_default_str();
  train_cf->add_option("--lambda-beta", cf_cfg.lambda_beta, "label factor regularization")
      ->capture_default_str();
  train_cf->add_option("--lambda-gamma", cf_cfg.lambda_gamma, "context factor regularization")
      ->capture_default_str();
  train_cf->add_option("--max-sweeps", cf_cfg.max_sweeps, "ALS sweep cap")->capture_default_str();
  train_cf->add_option("--tolerance", cf_cfg.tolerance, "relative objective tolerance")
      ->capture_default_str();

  // ---- train-generator ----
  CommonOpts tg_common;
  std::string tg_model, tg_vocab, tg_out;
  LabelGenConfig lg_cfg;
  auto* train_gen = app.add_subcommand("train-generator", "train the random-forest label generator");
  add_common(train_gen);
  add_corpus_opts(train_gen, tg_common);
  train_gen->add_option("--model", tg_model, "cofactor model file")->required();
  train_gen->add_option("--vocab", tg_vocab, "vocabulary file")->required();
  train_gen->add_option("--out", tg_out, "forest output file")->required();
  train_gen->add_option("--trees", lg_cfg.trees, "number of trees")->capture_default_str();
  train_gen->add_flag("--sibling-embedding", lg_cfg.sibling_mean_embedding,
                      "feature embedding = mean beta over sibling labels");

  // ---- generate ----
  CommonOpts gen_common;
  std::string gen_model, gen_vocab, gen_forest, gen_out;
  int top_m = 10;
  double threshold = 0.5;
  bool gen_sibling = false;
  auto* generate = app.add_subcommand("generate", "generate schema labels for every column");
  add_common(generate);
  add_corpus_opts(generate, gen_common);
  generate->add_option("--model", gen_model, "cofactor model file")->required();
  generate->add_option("--vocab", gen_vocab, "vocabulary file")->required();
  generate->add_option("--generator", gen_forest, "trained forest file")->required();
  generate->add_option("--out", gen_out, "generated labels TSV")->required();
  generate->add_option("--top-m", top_m, "labels generated per column")->capture_default_str();
  generate->add_option("--threshold", threshold, "minimum probability kept")->capture_default_str();
  generate->add_flag("--sibling-embedding", gen_sibling,
                     "feature embedding = mean beta over sibling labels");

  // ---- index ----
  CommonOpts idx_common;
  std::string idx_field = "text", idx_out, idx_gen_labels;
  auto* index_cmd = app.add_subcommand("index", "build and save a per-field inverted index");
  add_common(index_cmd);
  add_corpus_opts(index_cmd, idx_common);
  index_cmd->add_option("--field", idx_field, "text|data|labels-orig|labels-gen|all")
      ->capture_default_str();
  index_cmd->add_option("--out", idx_out, "index output file")->required();
  index_cmd->add_option("--gen-labels", idx_gen_labels, "generated labels TSV (labels-gen field)");

  // ---- search ----
  CommonOpts search_common;
  RankOpts search_rank;
  std::string query_text, search_topic = "q1", search_tag = "dsearch";
  auto* search = app.add_subcommand("search", "rank datasets for one query");
  add_common(search);
  add_corpus_opts(search, search_common);
  add_rank_opts(search, search_rank);
  search->add_option("--query", query_text, "query text")->required();
  search->add_option("--topic", search_topic, "topic id printed in the run lines")
      ->capture_default_str();
  search->add_option("--tag", search_tag, "run tag")->capture_default_str();

  // ---- run ----
  CommonOpts run_common;
  RankOpts run_rank;
  std::string run_tasks, run_out, run_tag = "dsearch";
  auto* run_cmd = app.add_subcommand("run", "rank every query of a task set");
  add_common(run_cmd);
  add_corpus_opts(run_cmd, run_common);
  add_rank_opts(run_cmd, run_rank);
  run_cmd->add_option("--tasks", run_tasks, "tasks file (task_id<TAB>query)")->required();
  run_cmd->add_option("--out", run_out, "run file output")->required();
  run_cmd->add_option("--tag", run_tag, "run tag")->capture_default_str();

  // ---- tune ----
  CommonOpts tune_common;
  RankOpts tune_rank;
  std::string tune_tasks, tune_qrels, tune_fields = "text,labels", tune_forced = "text";
  std::string tune_out;
  int tune_cutoff = 10;
  auto* tune = app.add_subcommand("tune", "coordinate-ascent field weight tuning");
  add_common(tune);
  add_corpus_opts(tune, tune_common);
  add_rank_opts(tune, tune_rank);
  tune->add_option("--tasks", tune_tasks, "tasks file")->required();
  tune->add_option("--qrels", tune_qrels, "qrels file")->required();
  tune->add_option("--fields", tune_fields, "comma list of tunable fields: text,data,labels")
      ->capture_default_str();
  tune->add_option("--forced", tune_forced, "comma list of fields forced non-zero")
      ->capture_default_str();
  tune->add_option("--metric-cutoff", tune_cutoff, "NDCG cutoff maximized")->capture_default_str();
  tune->add_option("--out", tune_out, "write tuned weights as a config file");
  std::string tune_grid;
  tune->add_option("--grid", tune_grid,
                   "grid-search a baseline scorer's parameters over --field instead of "
                   "tuning field weights: bm25|tfidf|lm-jm|lm-dirichlet");

  // ---- pool ----
  std::string pool_runs, pool_out;
  int pool_depth = 100;
  auto* pool = app.add_subcommand("pool", "union the top results of multiple runs");
  add_common(pool);
  pool->add_option("--runs", pool_runs, "comma list of run files")->required();
  pool->add_option("--depth", pool_depth, "pool depth per query")->capture_default_str();
  pool->add_option("--out", pool_out, "output TSV (task_id<TAB>dataset_id)")->required();

  // ---- evaluate ----
  std::string eval_run, eval_qrels, eval_ks = "5,10,20,50", eval_fields = "-", eval_out;
  double eval_rel_threshold = 2.0;
  auto* eval_cmd = app.add_subcommand("evaluate", "graded-relevance metrics for a run");
  add_common(eval_cmd);
  eval_cmd->add_option("--run", eval_run, "run file")->required();
  eval_cmd->add_option("--qrels", eval_qrels, "qrels file")->required();
  eval_cmd->add_option("--ks", eval_ks, "comma list of cutoffs")->capture_default_str();
  eval_cmd->add_option("--rel-threshold", eval_rel_threshold, "precision relevance threshold")
      ->capture_default_str();
  eval_cmd->add_option("--fields-label", eval_fields, "fields column in the report")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "report output file (default stdout)");

  // ---- features ----
  CommonOpts feat_common;
  std::string feat_tasks, feat_qrels, feat_vectors, feat_gen_labels, feat_out;
  bool feat_include_orig = false;
  auto* features = app.add_subcommand("features", "export semantic features for judged pairs");
  add_common(features);
  add_corpus_opts(features, feat_common);
  features->add_option("--tasks", feat_tasks, "tasks file")->required();
  features->add_option("--qrels", feat_qrels, "qrels file")->required();
  features->add_option("--vectors", feat_vectors, "pretrained vector file")->required();
  features->add_option("--gen-labels", feat_gen_labels, "generated labels TSV")->required();
  features->add_option("--out", feat_out, "feature output TSV")->required();
  features->add_flag("--include-original-labels", feat_include_orig,
                     "include original labels in the label token multiset");

  try {
    auto args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*ingest) {
      const auto corpus = load(ingest_opts);
      std::size_t columns = 0, labeled = 0;
      for (const auto& ds : corpus.datasets) {
        columns += ds.columns.size();
        for (const auto& col : ds.columns)
          if (!col.label_tokens.empty()) ++labeled;
      }
      std::cout << "datasets\t" << corpus.datasets.size() << '\n'
                << "columns\t" << columns << '\n'
                << "labeled_columns\t" << labeled << '\n'
                << "warnings\t" << corpus.warnings.size() << '\n';
    } else if (*cooccur) {
      const auto corpus = load(cooccur_opts);
      const auto [vocab, pref] = build_vocab_and_preference(corpus, min_label_freq);
      const auto counts = cooccurrence_counts(corpus, vocab);
      const auto sppmi = build_sppmi(counts, k_neg);
      fs::create_directories(cooccur_out);
      save_vocab(vocab, fs::path(cooccur_out) / "vocab.tsv");
      save_triplets(preference_to_sparse(pref), fs::path(cooccur_out) / "preference.txt");
      save_triplets(sppmi.mat, fs::path(cooccur_out) / "sppmi.txt");
      std::cout << "labels\t" << vocab.size() << '\n'
                << "preference_nnz\t" << pref.nnz() << '\n'
                << "sppmi_nnz\t" << sppmi.mat.nnz() << '\n';
    } else if (*train_cf) {
      cf_cfg.seed = seed;
      const auto pref = preference_from_sparse(load_triplets(tc_pref));
      SppmiMatrix sppmi;
      sppmi.mat = load_triplets(tc_sppmi);
      cf_cfg.latent_dim =
          std::min<int>(cf_cfg.latent_dim, static_cast<int>(std::min(pref.rows, pref.cols)));
      const auto result = train(pref, sppmi, cf_cfg);
      save_model(result.model, tc_out);
      std::cout << "sweeps\t" << result.sweeps << '\n'
                << "objective_initial\t" << result.objective_trace.front() << '\n'
                << "objective_final\t" << result.objective_trace.back() << '\n'
                << "jitter_warnings\t" << result.jitter_warnings << '\n';
    } else if (*train_gen) {
      lg_cfg.seed = seed;
      const auto corpus = load(tg_common);
      const auto model = load_model(tg_model);
      const auto vocab = load_vocab(tg_vocab);
      const auto training = build_training_set(corpus, model, vocab, lg_cfg);
      const auto forest = train_generator(training, lg_cfg);
      save_forest(forest, tg_out);
      std::cout << "training_samples\t" << training.x.size() << '\n'
                << "feature_dim\t" << training.feature_dim << '\n'
                << "trees\t" << forest.trees.size() << '\n';
    } else if (*generate) {
      LabelGenConfig cfg;
      cfg.sibling_mean_embedding = gen_sibling;
      auto corpus = load(gen_common);
      const auto model = load_model(gen_model);
      const auto vocab = load_vocab(gen_vocab);
      const auto forest = load_forest(gen_forest);
      generate_for_corpus(corpus, forest, model, vocab, cfg, top_m, threshold);
      save_generated_labels(corpus, gen_out);
      std::size_t total = 0;
      for (const auto& ds : corpus.datasets)
        for (const auto& col : ds.generated_labels) total += col.size();
      std::cout << "generated_labels\t" << total << '\n';
    } else if (*index_cmd) {
      auto corpus = load(idx_common);
      const Field field = parse_field(idx_field);
      if (field == Field::labels_gen) {
        if (idx_gen_labels.empty()) throw Error("field labels-gen requires --gen-labels <file>");
        load_generated_labels(corpus, idx_gen_labels);
      }
      const auto index = build_index(corpus, field);
      save_index(index, idx_out);
      std::cout << "documents\t" << index.num_docs << '\n'
                << "terms\t" << index.postings.size() << '\n'
                << "total_length\t" << index.total_len << '\n';
    } else if (*search) {
      RankedList ranked;
      if (!search_rank.baseline.empty()) {
        auto corpus = load(search_common);
        const Field field = parse_field(search_rank.baseline_field);
        if (field == Field::labels_gen) {
          if (search_rank.gen_labels.empty())
            throw Error("field labels-gen requires --gen-labels <file>");
          load_generated_labels(corpus, search_rank.gen_labels);
        }
        const auto index = build_index(corpus, field);
        ranked = baseline_rank(index, parse_scorer(search_rank.baseline),
                               scorer_params(search_rank), search_topic, query_text,
                               search_rank.depth);
      } else {
        const auto ctx = make_context(search_common, search_rank);
        const Ranker ranker(ctx.corpus, ctx.cfg, ctx.cfg.use_labels ? &ctx.store : nullptr);
        ranked = ranker.rank(search_topic, query_text);
      }
      char buf[32];
      int rank = 1;
      for (const auto& [id, score] : ranked.entries) {
        std::snprintf(buf, sizeof(buf), "%.6f", score);
        std::cout << search_topic << " Q0 " << id << ' ' << rank++ << ' ' << buf << ' '
                  << search_tag << '\n';
      }
    } else if (*run_cmd) {
      const auto tasks = load_tasks(run_tasks);
      RunFile run;
      if (!run_rank.baseline.empty()) {
        auto corpus = load(run_common);
        const Field field = parse_field(run_rank.baseline_field);
        if (field == Field::labels_gen) {
          if (run_rank.gen_labels.empty())
            throw Error("field labels-gen requires --gen-labels <file>");
          load_generated_labels(corpus, run_rank.gen_labels);
        }
        run = baseline_run_all(corpus, field, parse_scorer(run_rank.baseline),
                               scorer_params(run_rank), tasks, run_tag, run_rank.depth);
      } else {
        const auto ctx = make_context(run_common, run_rank);
        const Ranker ranker(ctx.corpus, ctx.cfg, ctx.cfg.use_labels ? &ctx.store : nullptr);
        run = ranker.run_all(tasks, run_tag);
      }
      save_run(run, run_out);
      std::cout << "topics\t" << run.entries.size() << '\n';
    } else if (*tune) {
      if (!tune_grid.empty()) {
        auto corpus = load(tune_common);
        const Field field = parse_field(tune_rank.baseline_field);
        if (field == Field::labels_gen) {
          if (tune_rank.gen_labels.empty())
            throw Error("field labels-gen requires --gen-labels <file>");
          load_generated_labels(corpus, tune_rank.gen_labels);
        }
        const Scorer scorer = parse_scorer(tune_grid);
        const auto params = grid_search_scorer(corpus, field, scorer, load_tasks(tune_tasks),
                                               load_qrels(tune_qrels), tune_cutoff);
        char buf[32];
        auto print = [&](const char* key, double v) {
          std::snprintf(buf, sizeof(buf), "%g", v);
          std::cout << key << " = " << buf << '\n';
        };
        if (scorer == Scorer::bm25) {
          print("bm25-k1", params.bm25.k1);
          print("bm25-b", params.bm25.b);
        } else if (scorer == Scorer::lm_jm) {
          print("lm-lambda", params.lm_lambda);
        } else if (scorer == Scorer::lm_dirichlet) {
          print("lm-mu", params.lm_mu);
        }
        return 0;
      }
      auto cfg = ranker_config(tune_rank);
      for (const auto& f : split_csv_list(tune_fields)) {
        if (f == "text") cfg.use_text = true;
        else if (f == "data") cfg.use_data = true;
        else if (f == "labels") cfg.use_labels = true;
        else throw Error("unknown tunable field '" + f + "'");
      }
      for (const auto& f : split_csv_list(tune_forced)) {
        if (f == "text") cfg.force_text = true;
        else if (f == "data") cfg.force_data = true;
        else if (f == "labels") cfg.force_labels = true;
        else throw Error("unknown forced field '" + f + "'");
      }
      auto corpus = load(tune_common);
      EmbeddingStore store;
      if (cfg.use_labels) {
        if (tune_rank.gen_labels.empty() || tune_rank.vectors.empty())
          throw Error("tuning the labels field requires --gen-labels and --vectors");
        load_generated_labels(corpus, tune_rank.gen_labels);
        store = load_vectors(tune_rank.vectors);
      }
      // forced fields must enter the ascent with a non-zero weight
      if (cfg.force_text && cfg.w_text == 0.0) cfg.w_text = 0.05;
      if (cfg.force_data && cfg.w_data == 0.0) cfg.w_data = 0.05;
      if (cfg.force_labels && cfg.w_l == 0.0) cfg.w_l = 0.05;
      const auto tasks = load_tasks(tune_tasks);
      const auto qrels = load_qrels(tune_qrels);
      const auto tuned = tune_weights(corpus, tasks, qrels, cfg,
                                      cfg.use_labels ? &store : nullptr, tune_cutoff);
      char buf[32];
      auto print = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%g", v);
        std::cout << key << " = " << buf << '\n';
      };
      print("w-text", tuned.use_text ? tuned.w_text : 0.0);
      print("w-data", tuned.use_data ? tuned.w_data : 0.0);
      print("w-l", tuned.use_labels ? tuned.w_l : 0.0);
      if (!tune_out.empty()) write_weights_config(tuned, tune_out);
    } else if (*pool) {
      std::vector<RunFile> runs;
      for (const auto& path : split_csv_list(pool_runs)) runs.push_back(load_run(path));
      if (runs.empty()) throw Error("--runs must list at least one run file");
      const auto pooled = pool_results(runs, pool_depth);
      std::ofstream out(pool_out);
      if (!out) throw Error("cannot write " + pool_out);
      for (const auto& [task, dataset] : pooled) out << task << '\t' << dataset << '\n';
      std::cout << "pooled_pairs\t" << pooled.size() << '\n';
    } else if (*eval_cmd) {
      const auto run = load_run(eval_run);
      const auto qrels = load_qrels(eval_qrels);
      std::vector<int> ks;
      for (const auto& k : split_csv_list(eval_ks)) ks.push_back(std::stoi(k));
      if (ks.empty()) throw Error("--ks must list at least one cutoff");
      const MetricReport report[] = {evaluate(run, qrels, ks, eval_rel_threshold, eval_fields)};
      if (eval_out.empty()) {
        const auto tmp = fs::temp_directory_path() / "dsearch-report.tsv";
        save_report(report, tmp);
        std::cout << std::ifstream(tmp).rdbuf();
        fs::remove(tmp);
      } else {
        save_report(report, eval_out);
      }
    } else if (*features) {
      auto corpus = load(feat_common);
      load_generated_labels(corpus, feat_gen_labels);
      const auto tasks = load_tasks(feat_tasks);
      const auto qrels = load_qrels(feat_qrels);
      const auto store = load_vectors(feat_vectors);
      RankerConfig cfg;
      cfg.include_original_labels_in_wmd = feat_include_orig;
      export_features(corpus, tasks, qrels, store, cfg, feat_out);
      std::cout << "features_written\t" << feat_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
