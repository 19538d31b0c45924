#pragma once

#include <functional>
#include <vector>

#include "dmca/autodiff.hpp"
#include "dmca/structure.hpp"
#include "dmca/tagging.hpp"

namespace dmca {

// Recorded (or forced) candidate choices of the dynamic aggregation, in
// schedule order. Replay mode skips the cross-entropy selection entirely —
// it both freezes selections for finite-difference checks and expresses
// "selector forced to the first candidate".
struct SelectionTrace {
  enum class Mode { record, replay };
  Mode mode = Mode::record;
  std::vector<int> choices;  // 0 = refined small, 1 = extracted, 2 = sum
  size_t cursor = 0;

  static SelectionTrace recording() { return {}; }
  static SelectionTrace forced(int choice, size_t steps);
  void rewind() { cursor = 0; }
};

// audit hook for the per-step selection dump
struct DhaChoice {
  int thread_id = 0;
  int level = 0;          // size of the sub-window
  int parent_offset = 0;  // offset of the window being updated
  int sub = 0;            // 0 = left sub-window, 1 = right
  int choice = 0;
};
using DhaAuditFn = std::function<void(const DhaChoice&)>;

// Sub-grid of s_large restricted to the tokens of `small`, coordinates
// relabeled. Throws region error when small is not contained.
LogitGrid extract_sub(const LogitGrid& s_large, const Window& small);

// One dynamic aggregation step: pick the candidate with minimal unnormalized
// cross-entropy among {refined small, extracted, their sum} (ties keep the
// earlier one) and add alpha times it onto the small window's block of
// s_large. Cells outside the block are unchanged.
LogitGrid dha_step(const LogitGrid& r_small, const LogitGrid& s_large,
                   const LabelGrid& labels_small, double alpha,
                   int* chosen = nullptr);

// Level-by-level aggregation over one thread's windows (length-major order,
// as produced by generate_windows). Each window of size l+1 absorbs its left
// then its right sub-window of size l. Returns the refined grid of the
// full-thread window. window_labels must align with windows unless a replay
// trace removes the need for selection.
LogitGrid aggregate_thread_dha(const Thread& thread,
                               const std::vector<Window>& windows,
                               const std::vector<LogitGrid>& s,
                               const std::vector<LabelGrid>& window_labels,
                               double alpha, SelectionTrace* trace = nullptr,
                               const DhaAuditFn& audit = nullptr);

// Label-free variant used at validation/test time: same schedule, every step
// adds the refined sub-window grid with weight 1.
LogitGrid aggregate_thread_sha(const Thread& thread,
                               const std::vector<Window>& windows,
                               const std::vector<LogitGrid>& s);

// Dialogue-level merge: zero-pad every thread grid to N x N and sum. The
// coverage mask marks cells touched by at least one thread; everything else
// is exactly zero.
struct DialogueLogits {
  LogitGrid grid;               // region = 0..N-1
  std::vector<uint8_t> coverage;  // N*N cells
};
DialogueLogits aggregate_dialogue(const std::vector<LogitGrid>& thread_grids,
                                  int n_tokens);

// --- taped variants (training path) ----------------------------------------

VarId aggregate_thread_dha_taped(Tape& tape, const Thread& thread,
                                 const std::vector<Window>& windows,
                                 const std::vector<VarId>& s,
                                 const std::vector<LabelGrid>& window_labels,
                                 double alpha, SelectionTrace* trace = nullptr,
                                 const DhaAuditFn& audit = nullptr);

VarId aggregate_dialogue_taped(Tape& tape, const std::vector<VarId>& grids,
                               const std::vector<std::vector<int>>& regions,
                               int n_tokens, int classes);

std::vector<uint8_t> coverage_mask(const std::vector<std::vector<int>>& regions,
                                   int n_tokens);

}  // namespace dmca
