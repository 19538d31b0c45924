#include "dmca/inference.hpp"

#include <atomic>
#include <thread>

#include "dmca/aggregation.hpp"
#include "dmca/structure.hpp"

namespace dmca {

std::vector<Quad> predict_dialogue(const Dialogue& d, const Model& model,
                                   AggregationMode mode) {
  auto threads = extract_threads(d);
  int n_tokens = d.token_count();

  std::vector<LogitGrid> thread_grids[kNumTasks];
  for (const auto& thread : threads) {
    auto windows = generate_windows(thread);
    std::vector<Tensor> reps;
    if (mode == AggregationMode::sha) {
      reps.reserve(windows.size());
      for (const auto& w : windows)
        reps.push_back(encode_window(w, d, model));
    } else {
      // concat: only the largest window per thread is scored
      reps.push_back(encode_window(windows.back(), d, model));
    }

    for (int ti = 0; ti < kNumTasks; ++ti) {
      Task task = static_cast<Task>(ti);
      if (mode == AggregationMode::sha) {
        std::vector<LogitGrid> grids;
        grids.reserve(windows.size());
        for (size_t wi = 0; wi < windows.size(); ++wi)
          grids.push_back(
              score_pairs(reps[wi], model, task, windows[wi].token_map));
        thread_grids[ti].push_back(
            aggregate_thread_sha(thread, windows, grids));
      } else {
        thread_grids[ti].push_back(
            score_pairs(reps[0], model, task, windows.back().token_map));
      }
    }
  }

  DialogueLogits merged[kNumTasks];
  for (int ti = 0; ti < kNumTasks; ++ti)
    merged[ti] = aggregate_dialogue(thread_grids[ti], n_tokens);

  return decode(merged[0].grid, merged[1].grid, merged[2].grid, model.schema,
                d);
}

std::vector<DocQuads> predict_corpus(const std::vector<Dialogue>& corpus,
                                     const Model& model, AggregationMode mode,
                                     int jobs) {
  std::vector<DocQuads> out(corpus.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < corpus.size(); ++i)
      out[i] = {corpus[i].doc_id, predict_dialogue(corpus[i], model, mode)};
    return out;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= corpus.size()) return;
      out[i] = {corpus[i].doc_id, predict_dialogue(corpus[i], model, mode)};
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace dmca
