#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dmca/aggregation.hpp"
#include "dmca/corpus.hpp"
#include "dmca/scorer.hpp"

namespace dmca {

struct LossWeights {
  double eta = 1.0;   // thread-loss weight
  double zeta = 1.0;  // window-loss weight
  double alpha = 1.0; // dynamic aggregation weight
};

struct TrainConfig {
  int epochs = 25;
  double learning_rate = 1e-3;
  uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

// Nine-component breakdown: per task, window / thread / dialogue stages.
struct LossBreakdown {
  double window_loss[kNumTasks] = {0, 0, 0};
  double thread_loss[kNumTasks] = {0, 0, 0};
  double dialogue_loss[kNumTasks] = {0, 0, 0};
  double total = 0.0;

  double stage_sum(int stage) const;  // 0=window 1=thread 2=dialogue
};

using BundleAuditFn = std::function<void(Task, const DhaChoice&)>;

// Full multi-stage loss of one dialogue:
//   per task:  L = L_dialogue + eta * L_thread + zeta * L_window
//   total   :  sum over ent / pair / pol
// Window and thread losses are unnormalized sums; the dialogue loss is
// masked to covered cells and divided by N^2. With accumulate_grad the
// gradient lands in model.params.grad(). A replay trace freezes the dynamic
// aggregation choices (finite differences, forced-selection modes).
LossBreakdown dialogue_loss_bundle(const Dialogue& d, Model& model,
                                   const LossWeights& weights,
                                   bool accumulate_grad,
                                   SelectionTrace* trace = nullptr,
                                   const BundleAuditFn& audit = nullptr);

struct EpochRecord {
  int epoch = 0;
  LossBreakdown mean_loss;  // per-dialogue mean
  double train_f1 = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
};

// epoch-granular audit callback for the CLI dump; called once per selection
using TrainAuditFn =
    std::function<void(int epoch, const std::string& doc_id, Task task,
                       const DhaChoice& choice)>;

// Adaptive-moment training, one dialogue per optimization step, dialogue
// order reshuffled per epoch from config.seed. Logs one JSONL record per
// epoch to `metrics` when given. Aborts with a numeric error naming the
// dialogue if the loss becomes non-finite.
TrainResult train(const std::vector<Dialogue>& corpus, Model& model,
                  const TrainConfig& config, const LossWeights& weights,
                  std::ostream* metrics = nullptr,
                  const TrainAuditFn& audit = nullptr);

// Central finite-difference check of the analytic gradient over n_samples
// randomly chosen scalar parameters. Aggregation selections are frozen to
// the center point. Returns the max relative error
// |a - n| / max(1, |a|, |n|).
double grad_check(const Dialogue& d, Model& model, const LossWeights& weights,
                  int n_samples, double epsilon, uint64_t seed);

}  // namespace dmca
