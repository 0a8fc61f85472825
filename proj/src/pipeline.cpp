#include "dsearch/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "dsearch/common.hpp"

namespace fs = std::filesystem;

namespace dsearch {

PipelineArtifacts run_pipeline(const PipelineConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  PipelineArtifacts paths;
  paths.vocab = cfg.out_dir / "vocab.tsv";
  paths.preference = cfg.out_dir / "preference.txt";
  paths.sppmi = cfg.out_dir / "sppmi.txt";
  paths.model = cfg.out_dir / "cofactor.model";
  paths.forest = cfg.out_dir / "forest.txt";
  paths.labels = cfg.out_dir / "generated_labels.tsv";
  paths.run = cfg.out_dir / "run.trec";
  paths.report = cfg.out_dir / "report.tsv";

  auto corpus = load_corpus(cfg.corpus_dir, cfg.load);
  const auto tasks = load_tasks(cfg.tasks_file);

  // stage 1: label representations and the label generator
  auto [vocab, preference] = build_vocab_and_preference(corpus);
  const auto counts = cooccurrence_counts(corpus, vocab);
  const auto sppmi = build_sppmi(counts, cfg.k_neg);
  save_vocab(vocab, paths.vocab);
  save_triplets(preference_to_sparse(preference), paths.preference);
  save_triplets(sppmi.mat, paths.sppmi);

  CoFactorConfig cofactor_cfg = cfg.cofactor;
  cofactor_cfg.latent_dim =
      std::min<int>(cofactor_cfg.latent_dim,
                    static_cast<int>(std::min(preference.rows, preference.cols)));
  const auto trained = train(preference, sppmi, cofactor_cfg);
  save_model(trained.model, paths.model);

  const auto training = build_training_set(corpus, trained.model, vocab, cfg.labelgen);
  const auto forest = train_generator(training, cfg.labelgen);
  save_forest(forest, paths.forest);

  generate_for_corpus(corpus, forest, trained.model, vocab, cfg.labelgen, cfg.top_m,
                      cfg.threshold);
  save_generated_labels(corpus, paths.labels);

  // stage 2: mixed ranking over the task set
  EmbeddingStore store;
  const EmbeddingStore* store_ptr = nullptr;
  if (cfg.ranker.use_labels) {
    store = load_vectors(cfg.vectors_file);
    store_ptr = &store;
  }
  const Ranker ranker(corpus, cfg.ranker, store_ptr);
  const auto run = ranker.run_all(tasks, cfg.run_tag);
  save_run(run, paths.run);

  if (!cfg.qrels_file.empty()) {
    const auto qrels = load_qrels(cfg.qrels_file);
    const MetricReport report[] = {
        evaluate(run, qrels, cfg.eval_ks, cfg.rel_threshold, field_summary(cfg.ranker))};
    save_report(report, paths.report);
  }
  return paths;
}

void export_features(const Corpus& corpus, const TaskSet& tasks, const Qrels& qrels,
                     const EmbeddingStore& store, const RankerConfig& cfg,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());

  std::unordered_map<std::string, const Dataset*> by_id;
  for (const auto& ds : corpus.datasets) by_id.emplace(ds.id, &ds);

  char buf[32];
  for (const auto& task : tasks.tasks) {
    const auto judged = qrels.by_task.find(task.id);
    if (judged == qrels.by_task.end()) continue;

    std::vector<std::string> query_tokens;
    for (const auto& q : task.queries)
      for (auto& t : tokenize_text(q)) query_tokens.push_back(std::move(t));

    for (const auto& [dataset_id, grade] : judged->second) {
      const auto it = by_id.find(dataset_id);
      if (it == by_id.end()) continue;  // judged dataset absent from this corpus
      std::vector<std::string> label_tokens;
      for (const auto& col : it->second->generated_labels)
        for (const auto& gl : col)
          for (auto& t : split_tokens(gl.label)) label_tokens.push_back(std::move(t));
      if (cfg.include_original_labels_in_wmd)
        for (const auto& col : it->second->columns)
          for (const auto& t : col.label_tokens) label_tokens.push_back(t);

      const auto f = semantic_features(store, query_tokens, label_tokens, cfg.wmd_floor,
                                       cfg.wmd_cloud_cap);
      out << task.id << '\t' << dataset_id;
      for (const double x : f) {
        std::snprintf(buf, sizeof(buf), "%.6f", x);
        out << '\t' << buf;
      }
      std::snprintf(buf, sizeof(buf), "%g", grade);
      out << '\t' << buf << '\n';
    }
  }
}

}  // namespace dsearch
