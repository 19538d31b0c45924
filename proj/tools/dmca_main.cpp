// dmca — train/predict/evaluate pipeline for dialogue sentiment quadruple
// extraction over JSONL corpora.
//
// Subcommands: gen-corpus, inspect, encode, train, predict, eval, gradcheck.
// Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dmca/aggregation.hpp"
#include "dmca/corpus.hpp"
#include "dmca/error.hpp"
#include "dmca/evaluation.hpp"
#include "dmca/inference.hpp"
#include "dmca/run_config.hpp"
#include "dmca/scorer.hpp"
#include "dmca/structure.hpp"
#include "dmca/tagging.hpp"
#include "dmca/training.hpp"

namespace {

using nlohmann::json;

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;

  dmca::RunConfig load() const {
    dmca::RunConfig c = config_path.empty()
                            ? dmca::RunConfig::defaults()
                            : dmca::RunConfig::from_json_file(config_path);
    for (const auto& o : overrides) c.apply_override(o);
    return c;
  }
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides,
                  "dotted config override, e.g. weights.eta=0 (repeatable)");
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file)
    throw dmca::Error(dmca::ErrorKind::io, "cannot write to " + path);
  return file;
}

dmca::Model train_model(const dmca::RunConfig& cfg,
                        const std::vector<dmca::Dialogue>& corpus,
                        const std::string& metrics_path,
                        const std::string& audit_path) {
  dmca::Model model = dmca::Model::build(cfg.encoder, cfg.schema,
                                         dmca::collect_vocab(corpus), cfg.seed);
  std::ofstream metrics_file;
  std::ostream* metrics = nullptr;
  if (!metrics_path.empty()) {
    metrics_file.open(metrics_path);
    if (!metrics_file)
      throw dmca::Error(dmca::ErrorKind::io,
                        "cannot write metrics to " + metrics_path);
    metrics = &metrics_file;
  }

  std::ofstream audit_file;
  dmca::TrainAuditFn audit;
  if (!audit_path.empty()) {
    audit_file.open(audit_path);
    if (!audit_file)
      throw dmca::Error(dmca::ErrorKind::io,
                        "cannot write audit log to " + audit_path);
    int last_epoch = cfg.train.epochs;
    audit = [&audit_file, last_epoch](int epoch, const std::string& doc_id,
                                      dmca::Task task,
                                      const dmca::DhaChoice& c) {
      if (epoch != last_epoch) return;  // final epoch only
      static const char* kChoice[] = {"refined_small", "extracted", "sum"};
      audit_file << json{{"epoch", epoch},
                         {"doc_id", doc_id},
                         {"task", dmca::to_string(task)},
                         {"thread", c.thread_id},
                         {"level", c.level},
                         {"parent_offset", c.parent_offset},
                         {"sub", c.sub == 0 ? "left" : "right"},
                         {"choice", kChoice[c.choice]}}
                        .dump()
                 << '\n';
    };
  }

  dmca::train(corpus, model, cfg.train, cfg.weights, metrics, audit);
  return model;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_gen_corpus(const ConfigArgs& cargs, const std::string& out,
                   int64_t seed, int n, int vocab, int max_utts) {
  dmca::RunConfig cfg = cargs.load();
  uint64_t s = seed >= 0 ? static_cast<uint64_t>(seed) : cfg.seed;
  int nd = n > 0 ? n : cfg.generator.n_dialogues;
  int vs = vocab > 0 ? vocab : cfg.generator.vocab_size;
  int mu = max_utts > 0 ? max_utts : cfg.generator.max_utterances;
  auto corpus = dmca::generate_synthetic(s, nd, vs, mu);
  dmca::save_corpus(corpus, out);
  std::cerr << "wrote " << corpus.size() << " dialogues to " << out << "\n";
  return 0;
}

int cmd_inspect(const std::string& corpus_path, const std::string& doc,
                const std::string& out_path) {
  auto corpus = dmca::load_corpus(corpus_path);
  std::ofstream file;
  std::ostream& out = open_or_stdout(file, out_path);
  for (const auto& d : corpus) {
    if (!doc.empty() && d.doc_id != doc) continue;
    json threads = json::array();
    for (const auto& t : dmca::extract_threads(d)) {
      json windows = json::array();
      for (const auto& w : dmca::generate_windows(t))
        windows.push_back(json{{"offset", w.offset},
                               {"length", w.length},
                               {"token_map", w.token_map}});
      threads.push_back(json{{"thread_id", t.thread_id},
                             {"utterance_ids", t.utterance_ids},
                             {"token_map", t.token_map},
                             {"windows", windows}});
    }
    out << json{{"doc_id", d.doc_id},
                {"n_tokens", d.token_count()},
                {"threads", threads}}
               .dump()
        << '\n';
  }
  return 0;
}

int cmd_encode(const ConfigArgs& cargs, const std::string& corpus_path,
               const std::string& out_path) {
  dmca::RunConfig cfg = cargs.load();
  auto corpus = dmca::load_corpus(corpus_path);
  std::ofstream file;
  std::ostream& out = open_or_stdout(file, out_path);
  for (const auto& d : corpus) {
    int n = d.token_count();
    std::vector<int> region(n);
    for (int i = 0; i < n; ++i) region[i] = i;
    auto gold = dmca::encode_gold(d, region, cfg.schema);
    auto grid_json = [&](const dmca::LabelGrid& g) {
      json rows = json::array();
      for (int i = 0; i < g.n(); ++i) {
        json row = json::array();
        for (int j = 0; j < g.n(); ++j) row.push_back(g.at(i, j));
        rows.push_back(row);
      }
      return rows;
    };
    out << json{{"doc_id", d.doc_id},
                {"region", region},
                {"ent", grid_json(gold.ent)},
                {"pair", grid_json(gold.pair)},
                {"pol", grid_json(gold.pol)}}
               .dump()
        << '\n';
  }
  return 0;
}

int cmd_train(const ConfigArgs& cargs, const std::string& corpus_path,
              const std::string& checkpoint, const std::string& metrics,
              const std::string& audit) {
  dmca::RunConfig cfg = cargs.load();
  std::string cp = corpus_path.empty() ? cfg.paths.corpus : corpus_path;
  if (cp.empty())
    throw dmca::Error(dmca::ErrorKind::config, "train: no corpus path given");
  auto corpus = dmca::load_corpus(cp);
  std::string ckpt = checkpoint.empty() ? cfg.paths.checkpoint : checkpoint;
  std::string met = metrics.empty() ? cfg.paths.metrics : metrics;
  dmca::Model model = train_model(cfg, corpus, met, audit);
  model.save_checkpoint(ckpt);
  std::cerr << "checkpoint written to " << ckpt << "\n";
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& corpus_path,
                const std::string& out, const std::string& aggregation,
                int jobs) {
  dmca::AggregationMode mode;
  if (aggregation == "sha")
    mode = dmca::AggregationMode::sha;
  else if (aggregation == "concat")
    mode = dmca::AggregationMode::concat;
  else
    throw dmca::Error(dmca::ErrorKind::config,
                      "unknown aggregation mode '" + aggregation + "'");
  dmca::Model model = dmca::Model::load_checkpoint(checkpoint);
  auto corpus = dmca::load_corpus(corpus_path);
  auto preds = dmca::predict_corpus(corpus, model, mode, jobs);
  dmca::save_predictions(preds, out);
  std::cerr << "predictions written to " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path,
             const std::string& format, const std::string& out_path,
             int jobs) {
  (void)jobs;  // scoring is cheap; flag kept for interface symmetry
  auto preds = dmca::load_predictions(pred_path);
  auto gold = dmca::load_corpus(gold_path);
  auto report = dmca::score(preds, gold);
  std::ofstream file;
  std::ostream& out = open_or_stdout(file, out_path);
  if (format == "md")
    out << dmca::emit_report_markdown(report);
  else if (format == "json")
    out << dmca::emit_report_json(report) << '\n';
  else
    throw dmca::Error(dmca::ErrorKind::config,
                      "unknown report format '" + format + "'");
  return 0;
}

int cmd_gradcheck(const ConfigArgs& cargs, const std::string& corpus_path,
                  int samples, double epsilon, double tol, int doc_index) {
  dmca::RunConfig cfg = cargs.load();
  std::string cp = corpus_path.empty() ? cfg.paths.corpus : corpus_path;
  std::vector<dmca::Dialogue> corpus;
  if (cp.empty())
    corpus = dmca::generate_synthetic(cfg.seed, std::max(doc_index + 1, 4),
                                      cfg.generator.vocab_size,
                                      cfg.generator.max_utterances);
  else
    corpus = dmca::load_corpus(cp);
  if (doc_index < 0 || doc_index >= static_cast<int>(corpus.size()))
    throw dmca::Error(dmca::ErrorKind::invalid_argument,
                      "gradcheck: --doc out of range");
  dmca::Model model = dmca::Model::build(
      cfg.encoder, cfg.schema, dmca::collect_vocab(corpus), cfg.seed);
  double err = dmca::grad_check(corpus[doc_index], model, cfg.weights, samples,
                                epsilon, cfg.seed + 17);
  std::cout << "max_relative_error " << err << " (tolerance " << tol << ")\n";
  return err <= tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dialogue sentiment quadruple extraction toolkit"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic corpus");
  ConfigArgs gen_cfg;
  add_config_flags(gen, gen_cfg);
  std::string gen_out = "corpus.jsonl";
  int64_t gen_seed = -1;
  int gen_n = 0, gen_vocab = 0, gen_max_utts = 0;
  gen->add_option("--out", gen_out, "output JSONL path");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--n", gen_n, "number of dialogues");
  gen->add_option("--vocab", gen_vocab, "vocabulary size (>= 30)");
  gen->add_option("--max-utterances", gen_max_utts, "max utterances (>= 2)");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "dump threads and windows");
  std::string ins_corpus, ins_doc, ins_out;
  inspect->add_option("--corpus", ins_corpus, "corpus JSONL")->required();
  inspect->add_option("--doc", ins_doc, "restrict to one doc_id");
  inspect->add_option("--out", ins_out, "output path (default stdout)");

  // encode
  auto* encode = app.add_subcommand("encode", "dump gold label grids");
  ConfigArgs enc_cfg;
  add_config_flags(encode, enc_cfg);
  std::string enc_corpus, enc_out;
  encode->add_option("--corpus", enc_corpus, "corpus JSONL")->required();
  encode->add_option("--out", enc_out, "output path (default stdout)");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  ConfigArgs train_cfg;
  add_config_flags(train, train_cfg);
  std::string tr_corpus, tr_ckpt, tr_metrics, tr_audit;
  train->add_option("--corpus", tr_corpus, "training corpus JSONL");
  train->add_option("--checkpoint", tr_ckpt, "checkpoint output path");
  train->add_option("--metrics", tr_metrics, "metrics JSONL output path");
  train->add_option("--dha-audit", tr_audit,
                    "dump final-epoch aggregation choices to this JSONL");

  // predict
  auto* predict = app.add_subcommand("predict", "run inference");
  std::string pr_ckpt, pr_corpus, pr_out = "predictions.jsonl";
  std::string pr_agg = "sha";
  int pr_jobs = 1;
  predict->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
  predict->add_option("--corpus", pr_corpus, "corpus JSONL")->required();
  predict->add_option("--out", pr_out, "prediction JSONL output");
  predict->add_option("--aggregation", pr_agg, "sha | concat");
  predict->add_option("--jobs", pr_jobs, "parallel workers");

  // eval
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  std::string ev_pred, ev_gold, ev_format = "md", ev_out;
  int ev_jobs = 1;
  eval->add_option("--pred", ev_pred, "prediction JSONL")->required();
  eval->add_option("--gold", ev_gold, "gold corpus JSONL")->required();
  eval->add_option("--format", ev_format, "md | json");
  eval->add_option("--out", ev_out, "output path (default stdout)");
  eval->add_option("--jobs", ev_jobs, "parallel workers");

  // gradcheck
  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  ConfigArgs gc_cfg;
  add_config_flags(gradcheck, gc_cfg);
  std::string gc_corpus;
  int gc_samples = 1000, gc_doc = 0;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  gradcheck->add_option("--corpus", gc_corpus,
                        "corpus JSONL (default: small synthetic)");
  gradcheck->add_option("--samples", gc_samples, "sampled parameters (>=100)");
  gradcheck->add_option("--epsilon", gc_eps, "finite-difference step");
  gradcheck->add_option("--tol", gc_tol, "max relative error tolerance");
  gradcheck->add_option("--doc", gc_doc, "dialogue index to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags -> usage text, exit 2
  }

  try {
    if (gen->parsed())
      return cmd_gen_corpus(gen_cfg, gen_out, gen_seed, gen_n, gen_vocab,
                            gen_max_utts);
    if (inspect->parsed()) return cmd_inspect(ins_corpus, ins_doc, ins_out);
    if (encode->parsed()) return cmd_encode(enc_cfg, enc_corpus, enc_out);
    if (train->parsed())
      return cmd_train(train_cfg, tr_corpus, tr_ckpt, tr_metrics, tr_audit);
    if (predict->parsed())
      return cmd_predict(pr_ckpt, pr_corpus, pr_out, pr_agg, pr_jobs);
    if (eval->parsed())
      return cmd_eval(ev_pred, ev_gold, ev_format, ev_out, ev_jobs);
    if (gradcheck->parsed())
      return cmd_gradcheck(gc_cfg, gc_corpus, gc_samples, gc_eps, gc_tol,
                           gc_doc);
  } catch (const dmca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
