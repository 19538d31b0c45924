#include "dmca/aggregation.hpp"

#include <algorithm>
#include <cmath>

#include "dmca/error.hpp"
#include "dmca/scorer.hpp"

namespace dmca {

SelectionTrace SelectionTrace::forced(int choice, size_t steps) {
  SelectionTrace t;
  t.mode = Mode::replay;
  t.choices.assign(steps, choice);
  return t;
}

namespace {

// region-local positions of the small window's tokens inside `region`
std::vector<int> positions_in(const std::vector<int>& region,
                              const std::vector<int>& tokens) {
  std::vector<int> pos;
  pos.reserve(tokens.size());
  size_t r = 0;
  for (int tok : tokens) {
    while (r < region.size() && region[r] < tok) ++r;
    if (r == region.size() || region[r] != tok)
      throw Error(ErrorKind::region,
                  "window token " + std::to_string(tok) +
                      " is not contained in the larger region");
    pos.push_back(static_cast<int>(r));
  }
  return pos;
}

double unnorm_ce(const Tensor& logits, const std::vector<int>& labels) {
  double total = 0.0;
  for (int r = 0; r < logits.rows; ++r) {
    double mx = logits.at(r, 0);
    for (int k = 1; k < logits.cols; ++k) mx = std::max(mx, logits.at(r, k));
    double lse = 0.0;
    for (int k = 0; k < logits.cols; ++k)
      lse += std::exp(logits.at(r, k) - mx);
    total += std::log(lse) + mx - logits.at(r, labels[r]);
  }
  return total;
}

Tensor gather_block(const Tensor& grid, int n, const std::vector<int>& pos) {
  int m = static_cast<int>(pos.size());
  Tensor out(m * m, grid.cols);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < grid.cols; ++k)
        out.at(a * m + b, k) = grid.at(pos[a] * n + pos[b], k);
  return out;
}

void scatter_add_block(Tensor& grid, int n, const Tensor& sub,
                       const std::vector<int>& pos, double alpha) {
  int m = static_cast<int>(pos.size());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < grid.cols; ++k)
        grid.at(pos[a] * n + pos[b], k) += alpha * sub.at(a * m + b, k);
}

// candidate selection shared by the plain and taped paths; labels may be
// null only under a replay trace
int select_candidate(const Tensor& r_small, const Tensor& s_hat,
                     const std::vector<int>* labels, SelectionTrace* trace) {
  if (trace && trace->mode == SelectionTrace::Mode::replay) {
    if (trace->cursor >= trace->choices.size())
      throw Error(ErrorKind::invalid_argument,
                  "selection trace exhausted during replay");
    return trace->choices[trace->cursor++];
  }
  Tensor sum = add(r_small, s_hat);
  double ce[3] = {unnorm_ce(r_small, *labels), unnorm_ce(s_hat, *labels),
                  unnorm_ce(sum, *labels)};
  int best = 0;
  for (int c = 1; c < 3; ++c)
    if (ce[c] < ce[best]) best = c;  // ties keep the earlier candidate
  if (trace) trace->choices.push_back(best);
  return best;
}

}  // namespace

LogitGrid extract_sub(const LogitGrid& s_large, const Window& small) {
  auto pos = positions_in(s_large.region, small.token_map);
  LogitGrid out;
  out.task = s_large.task;
  out.region = small.token_map;
  out.logits = gather_block(s_large.logits, s_large.n(), pos);
  return out;
}

LogitGrid dha_step(const LogitGrid& r_small, const LogitGrid& s_large,
                   const LabelGrid& labels_small, double alpha, int* chosen) {
  if (r_small.task != s_large.task)
    throw Error(ErrorKind::region, "dha_step: task mismatch");
  if (labels_small.region != r_small.region)
    throw Error(ErrorKind::region,
                "dha_step: labels must cover the small window's region");
  if (!all_finite(r_small.logits) || !all_finite(s_large.logits))
    throw Error(ErrorKind::numeric, "dha_step: non-finite input grid");

  auto pos = positions_in(s_large.region, r_small.region);
  Tensor s_hat = gather_block(s_large.logits, s_large.n(), pos);
  int choice;
  {
    Tensor sum = add(r_small.logits, s_hat);
    double ce[3] = {unnorm_ce(r_small.logits, labels_small.labels),
                    unnorm_ce(s_hat, labels_small.labels),
                    unnorm_ce(sum, labels_small.labels)};
    choice = 0;
    for (int c = 1; c < 3; ++c)
      if (ce[c] < ce[choice]) choice = c;
  }
  if (chosen) *chosen = choice;

  LogitGrid out = s_large;
  const Tensor f = choice == 0   ? r_small.logits
                   : choice == 1 ? s_hat
                                 : add(r_small.logits, s_hat);
  scatter_add_block(out.logits, out.n(), f, pos, alpha);
  return out;
}

namespace {

// Runs the shared level schedule; `step` updates the parent grid in place
// given (parent index, sub index, left/right sub window index).
template <typename Step>
void run_schedule(const Thread& thread, const std::vector<Window>& windows,
                  Step&& step) {
  int len = thread.length();
  size_t expect = static_cast<size_t>(len) * (len + 1) / 2;
  if (windows.size() != expect)
    throw Error(ErrorKind::invalid_argument,
                "aggregation: windows must be the full length-major set");
  for (int l = 1; l < len; ++l) {
    for (int off = 0; off + l + 1 <= len; ++off) {
      int parent = window_index(off, l + 1, len);
      int left = window_index(off, l, len);
      int right = window_index(off + 1, l, len);
      step(parent, 0, left, l, off);
      step(parent, 1, right, l, off);
    }
  }
}

}  // namespace

LogitGrid aggregate_thread_dha(const Thread& thread,
                               const std::vector<Window>& windows,
                               const std::vector<LogitGrid>& s,
                               const std::vector<LabelGrid>& window_labels,
                               double alpha, SelectionTrace* trace,
                               const DhaAuditFn& audit) {
  if (s.size() != windows.size())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_thread_dha: one grid per window required");
  bool replay = trace && trace->mode == SelectionTrace::Mode::replay;
  if (!replay && window_labels.size() != windows.size())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_thread_dha: labels are required for selection");

  std::vector<LogitGrid> refined = s;  // R^1 starts as S^1
  run_schedule(thread, windows, [&](int parent, int sub, int child, int level,
                                    int parent_offset) {
    const LogitGrid& r_small = refined[child];
    LogitGrid& large = refined[parent];
    auto pos = positions_in(large.region, r_small.region);
    Tensor s_hat = gather_block(large.logits, large.n(), pos);
    int choice = select_candidate(
        r_small.logits, s_hat,
        replay ? nullptr : &window_labels[child].labels, trace);
    if (audit) audit({thread.thread_id, level, parent_offset, sub, choice});
    const Tensor f = choice == 0   ? r_small.logits
                     : choice == 1 ? s_hat
                                   : add(r_small.logits, s_hat);
    scatter_add_block(large.logits, large.n(), f, pos, alpha);
  });
  return refined[window_index(0, thread.length(), thread.length())];
}

LogitGrid aggregate_thread_sha(const Thread& thread,
                               const std::vector<Window>& windows,
                               const std::vector<LogitGrid>& s) {
  if (s.size() != windows.size())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_thread_sha: one grid per window required");
  std::vector<LogitGrid> refined = s;
  run_schedule(thread, windows,
               [&](int parent, int /*sub*/, int child, int, int) {
                 const LogitGrid& r_small = refined[child];
                 LogitGrid& large = refined[parent];
                 auto pos = positions_in(large.region, r_small.region);
                 scatter_add_block(large.logits, large.n(), r_small.logits,
                                   pos, 1.0);
               });
  return refined[window_index(0, thread.length(), thread.length())];
}

std::vector<uint8_t> coverage_mask(const std::vector<std::vector<int>>& regions,
                                   int n_tokens) {
  std::vector<uint8_t> mask(static_cast<size_t>(n_tokens) * n_tokens, 0);
  for (const auto& region : regions)
    for (int a : region)
      for (int b : region) mask[static_cast<size_t>(a) * n_tokens + b] = 1;
  return mask;
}

DialogueLogits aggregate_dialogue(const std::vector<LogitGrid>& thread_grids,
                                  int n_tokens) {
  if (thread_grids.empty())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_dialogue: no thread grids");
  int k = thread_grids.front().k();
  DialogueLogits out;
  out.grid.task = thread_grids.front().task;
  out.grid.region.resize(n_tokens);
  for (int i = 0; i < n_tokens; ++i) out.grid.region[i] = i;
  out.grid.logits = Tensor(n_tokens * n_tokens, k, 0.0);

  std::vector<std::vector<int>> regions;
  for (const auto& g : thread_grids) {
    if (g.task != out.grid.task || g.k() != k)
      throw Error(ErrorKind::region, "aggregate_dialogue: grid task mismatch");
    for (int tok : g.region)
      if (tok < 0 || tok >= n_tokens)
        throw Error(ErrorKind::region,
                    "aggregate_dialogue: region token out of range");
    scatter_add_block(out.grid.logits, n_tokens, g.logits, g.region, 1.0);
    regions.push_back(g.region);
  }
  out.coverage = coverage_mask(regions, n_tokens);
  return out;
}

// ---------------------------------------------------------------------------
// taped variants
// ---------------------------------------------------------------------------

VarId aggregate_thread_dha_taped(Tape& tape, const Thread& thread,
                                 const std::vector<Window>& windows,
                                 const std::vector<VarId>& s,
                                 const std::vector<LabelGrid>& window_labels,
                                 double alpha, SelectionTrace* trace,
                                 const DhaAuditFn& audit) {
  if (s.size() != windows.size())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_thread_dha_taped: one grid per window required");
  bool replay = trace && trace->mode == SelectionTrace::Mode::replay;
  if (!replay && window_labels.size() != windows.size())
    throw Error(ErrorKind::invalid_argument,
                "aggregate_thread_dha_taped: labels required for selection");

  std::vector<VarId> refined = s;
  run_schedule(thread, windows, [&](int parent, int sub, int child, int level,
                                    int parent_offset) {
    VarId r_small = refined[child];
    VarId large = refined[parent];
    int large_n = static_cast<int>(windows[parent].token_map.size());
    auto pos = positions_in(windows[parent].token_map,
                            windows[child].token_map);
    VarId s_hat = tape.block_gather(large, large_n, pos);
    int choice = select_candidate(
        tape.value(r_small), tape.value(s_hat),
        replay ? nullptr : &window_labels[child].labels, trace);
    if (audit) audit({thread.thread_id, level, parent_offset, sub, choice});
    // gradient flows through the chosen candidate only; the selection index
    // is a constant of the backward pass
    VarId f = choice == 0   ? r_small
              : choice == 1 ? s_hat
                            : tape.add(r_small, s_hat);
    refined[parent] = tape.block_scatter_add(large, large_n, f, pos, alpha);
  });
  return refined[window_index(0, thread.length(), thread.length())];
}

VarId aggregate_dialogue_taped(Tape& tape, const std::vector<VarId>& grids,
                               const std::vector<std::vector<int>>& regions,
                               int n_tokens, int classes) {
  VarId acc = tape.constant(Tensor(n_tokens * n_tokens, classes, 0.0));
  for (size_t i = 0; i < grids.size(); ++i)
    acc = tape.block_scatter_add(acc, n_tokens, grids[i], regions[i], 1.0);
  return acc;
}

}  // namespace dmca
