#pragma once

#include <string>

#include "dmca/scorer.hpp"
#include "dmca/training.hpp"

namespace dmca {

// Single JSON config document with flag/--set overrides. Unknown keys are
// rejected so typos cannot silently fall back to defaults.
struct RunConfig {
  uint64_t seed = 1;

  struct Paths {
    std::string corpus;
    std::string heldout;
    std::string checkpoint = "model.json";
    std::string metrics = "metrics.jsonl";
    std::string predictions = "predictions.jsonl";
    std::string report;
  } paths;

  TagSchema schema = TagSchema::reference();
  ModelDims encoder;      // vocab is always derived from the corpus
  LossWeights weights;    // alpha/eta/zeta default 1
  TrainConfig train;      // 25 epochs, lr 1e-3, adam 0.9/0.999/1e-8

  struct Generator {
    int n_dialogues = 200;
    int vocab_size = 100;
    int max_utterances = 9;
  } generator;

  static RunConfig defaults() { return RunConfig{}; }
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_json_file(const std::string& path);

  // dotted-path override, e.g. "weights.eta=0" or "train.epochs=5"
  void apply_override(const std::string& key_equals_value);

  std::string to_json_text() const;
};

}  // namespace dmca
