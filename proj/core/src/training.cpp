#include "dmca/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dmca/error.hpp"
#include "dmca/evaluation.hpp"
#include "dmca/inference.hpp"
#include "dmca/rng.hpp"

namespace dmca {

using nlohmann::json;

double LossBreakdown::stage_sum(int stage) const {
  const double* arr = stage == 0   ? window_loss
                      : stage == 1 ? thread_loss
                                   : dialogue_loss;
  return arr[0] + arr[1] + arr[2];
}

LossBreakdown dialogue_loss_bundle(const Dialogue& d, Model& model,
                                   const LossWeights& weights,
                                   bool accumulate_grad, SelectionTrace* trace,
                                   const BundleAuditFn& audit) {
  validate_dialogue(d);
  auto threads = extract_threads(d);
  int n_tokens = d.token_count();

  Tape tape(&model.params);
  LossBreakdown out;

  // per task accumulation across threads
  std::vector<VarId> window_terms[kNumTasks];
  std::vector<VarId> thread_terms[kNumTasks];
  std::vector<VarId> thread_grids[kNumTasks];
  std::vector<std::vector<int>> thread_regions;

  for (const auto& thread : threads) {
    auto windows = generate_windows(thread);
    thread_regions.push_back(thread.token_map);

    std::vector<GoldGrids> window_gold;
    window_gold.reserve(windows.size());
    for (const auto& w : windows)
      window_gold.push_back(encode_gold(d, w.token_map, model.schema));
    GoldGrids thread_gold = encode_gold(d, thread.token_map, model.schema);

    // encode every window once, share representations across tasks
    std::vector<VarId> reps;
    reps.reserve(windows.size());
    for (const auto& w : windows)
      reps.push_back(encode_window_taped(tape, w, d, model));

    for (int ti = 0; ti < kNumTasks; ++ti) {
      Task task = static_cast<Task>(ti);
      std::vector<VarId> grids;
      std::vector<LabelGrid> labels;
      grids.reserve(windows.size());
      labels.reserve(windows.size());
      for (size_t wi = 0; wi < windows.size(); ++wi) {
        grids.push_back(score_pairs_taped(tape, reps[wi], model, task));
        labels.push_back(window_gold[wi].for_task(task));
        window_terms[ti].push_back(
            cross_entropy_taped(tape, grids[wi], labels[wi], false));
      }
      DhaAuditFn audit_fn;
      if (audit)
        audit_fn = [&audit, task](const DhaChoice& c) { audit(task, c); };
      VarId tr = aggregate_thread_dha_taped(tape, thread, windows, grids,
                                            labels, weights.alpha, trace,
                                            audit_fn);
      thread_grids[ti].push_back(tr);
      thread_terms[ti].push_back(cross_entropy_taped(
          tape, tr, thread_gold.for_task(task), false));
    }
  }

  auto mask = coverage_mask(thread_regions, n_tokens);
  GoldGrids full_labels = encode_gold(
      d, [&] {
        std::vector<int> all(n_tokens);
        for (int i = 0; i < n_tokens; ++i) all[i] = i;
        return all;
      }(),
      model.schema);

  std::vector<VarId> totals;
  std::vector<double> total_weights;
  for (int ti = 0; ti < kNumTasks; ++ti) {
    Task task = static_cast<Task>(ti);
    VarId dialogue_grid = aggregate_dialogue_taped(
        tape, thread_grids[ti], thread_regions, n_tokens,
        model.schema.k(task));
    VarId l_d = tape.cross_entropy(
        dialogue_grid, full_labels.for_task(task).labels,
        static_cast<double>(n_tokens) * n_tokens, mask);
    VarId l_w = tape.weighted_sum(
        window_terms[ti], std::vector<double>(window_terms[ti].size(), 1.0));
    VarId l_t = tape.weighted_sum(
        thread_terms[ti], std::vector<double>(thread_terms[ti].size(), 1.0));

    out.window_loss[ti] = tape.value(l_w).at(0, 0);
    out.thread_loss[ti] = tape.value(l_t).at(0, 0);
    out.dialogue_loss[ti] = tape.value(l_d).at(0, 0);

    totals.push_back(l_d);
    total_weights.push_back(1.0);
    totals.push_back(l_t);
    total_weights.push_back(weights.eta);
    totals.push_back(l_w);
    total_weights.push_back(weights.zeta);
  }

  VarId root = tape.weighted_sum(totals, total_weights);
  out.total = tape.value(root).at(0, 0);
  if (!std::isfinite(out.total))
    throw Error(ErrorKind::numeric,
                "non-finite loss on dialogue " + d.doc_id);
  if (accumulate_grad) tape.backward(root);
  return out;
}

namespace {

struct Adam {
  std::vector<double> m, v;
  long t = 0;

  explicit Adam(size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& value, const std::vector<double>& grad,
            const TrainConfig& c) {
    ++t;
    double b1 = c.adam_beta1, b2 = c.adam_beta2;
    double bias1 = 1.0 - std::pow(b1, static_cast<double>(t));
    double bias2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t i = 0; i < value.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
      v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
      double mh = m[i] / bias1;
      double vh = v[i] / bias2;
      value[i] -= c.learning_rate * mh / (std::sqrt(vh) + c.adam_epsilon);
    }
  }
};

void add_breakdown(LossBreakdown& acc, const LossBreakdown& b) {
  for (int t = 0; t < kNumTasks; ++t) {
    acc.window_loss[t] += b.window_loss[t];
    acc.thread_loss[t] += b.thread_loss[t];
    acc.dialogue_loss[t] += b.dialogue_loss[t];
  }
  acc.total += b.total;
}

void scale_breakdown(LossBreakdown& acc, double f) {
  for (int t = 0; t < kNumTasks; ++t) {
    acc.window_loss[t] *= f;
    acc.thread_loss[t] *= f;
    acc.dialogue_loss[t] *= f;
  }
  acc.total *= f;
}

double train_set_f1(const std::vector<Dialogue>& corpus, const Model& model) {
  std::vector<DocQuads> preds;
  preds.reserve(corpus.size());
  for (const auto& d : corpus)
    preds.push_back({d.doc_id, predict_dialogue(d, model)});
  return score(preds, corpus).quad_micro.f1;
}

}  // namespace

TrainResult train(const std::vector<Dialogue>& corpus, Model& model,
                  const TrainConfig& config, const LossWeights& weights,
                  std::ostream* metrics, const TrainAuditFn& audit) {
  if (corpus.empty())
    throw Error(ErrorKind::invalid_argument, "train: empty corpus");
  if (config.epochs < 1)
    throw Error(ErrorKind::invalid_argument, "train: epochs must be >= 1");

  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Adam adam(model.params.size());
  TrainResult result;

  std::vector<int> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);
    LossBreakdown sum;
    for (int di : order) {
      const Dialogue& d = corpus[di];
      model.params.zero_grad();
      BundleAuditFn bundle_audit;
      if (audit)
        bundle_audit = [&](Task task, const DhaChoice& c) {
          audit(epoch, d.doc_id, task, c);
        };
      LossBreakdown b =
          dialogue_loss_bundle(d, model, weights, /*accumulate_grad=*/true,
                               nullptr, bundle_audit);
      add_breakdown(sum, b);
      adam.step(model.params.value(), model.params.grad(), config);
    }
    scale_breakdown(sum, 1.0 / static_cast<double>(corpus.size()));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = sum;
    rec.train_f1 = train_set_f1(corpus, model);
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.epochs.push_back(rec);

    if (metrics) {
      json j{{"epoch", epoch},
             {"total", sum.total},
             {"train_f1", rec.train_f1},
             {"wall_ms", rec.wall_ms}};
      const char* names[] = {"ent", "pair", "pol"};
      for (int t = 0; t < kNumTasks; ++t)
        j[names[t]] = {{"l_w", sum.window_loss[t]},
                       {"l_t", sum.thread_loss[t]},
                       {"l_d", sum.dialogue_loss[t]}};
      (*metrics) << j.dump() << '\n';
    }
  }
  return result;
}

double grad_check(const Dialogue& d, Model& model, const LossWeights& weights,
                  int n_samples, double epsilon, uint64_t seed) {
  if (n_samples < 100)
    throw Error(ErrorKind::invalid_argument,
                "grad_check: n_samples must be >= 100");
  if (epsilon <= 0)
    throw Error(ErrorKind::invalid_argument, "grad_check: epsilon must be > 0");

  // center point: record selections, collect the analytic gradient
  SelectionTrace trace = SelectionTrace::recording();
  model.params.zero_grad();
  dialogue_loss_bundle(d, model, weights, /*accumulate_grad=*/true, &trace);
  std::vector<double> analytic = model.params.grad();
  trace.mode = SelectionTrace::Mode::replay;

  auto eval_at = [&]() {
    trace.rewind();
    LossBreakdown b = dialogue_loss_bundle(d, model, weights,
                                           /*accumulate_grad=*/false, &trace);
    if (!std::isfinite(b.total))
      throw Error(ErrorKind::numeric, "grad_check: non-finite loss");
    return b.total;
  };

  Rng rng(seed);
  double max_rel = 0.0;
  auto& value = model.params.value();
  for (int s = 0; s < n_samples; ++s) {
    size_t idx = static_cast<size_t>(
        rng.next_int(0, static_cast<int>(model.params.size()) - 1));
    double keep = value[idx];
    value[idx] = keep + epsilon;
    double up = eval_at();
    value[idx] = keep - epsilon;
    double down = eval_at();
    value[idx] = keep;
    double numeric = (up - down) / (2.0 * epsilon);
    double a = analytic[idx];
    double rel = std::abs(a - numeric) /
                 std::max({1.0, std::abs(a), std::abs(numeric)});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace dmca
