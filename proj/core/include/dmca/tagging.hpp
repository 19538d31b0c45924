#pragma once

#include <string>
#include <vector>

#include "dmca/corpus.hpp"
#include "dmca/tensor.hpp"

namespace dmca {

enum class Task { ent = 0, pair = 1, pol = 2 };
inline constexpr int kNumTasks = 3;
const char* to_string(Task t);

// Per-task label vocabularies. NONE is always index 0. Role labels are
// resolved by name (case-insensitive), so a custom vocab may carry extra
// classes; encode never emits them and decode ignores them.
struct TagSchema {
  std::vector<std::string> ent_labels;   // default {NONE, TGT, ASP, OPI}
  std::vector<std::string> pair_labels;  // default {NONE, H2H, T2T}
  std::vector<std::string> pol_labels;   // default {NONE, POS, NEG, OTHER}

  // resolved role indices
  int tgt = 1, asp = 2, opi = 3;
  int h2h = 1, t2t = 2;
  int pol_index[3] = {1, 2, 3};  // by Polarity enum order

  static TagSchema reference();
  static TagSchema from_vocabs(std::vector<std::string> ent,
                               std::vector<std::string> pair,
                               std::vector<std::string> pol);

  const std::vector<std::string>& labels(Task t) const;
  int k(Task t) const { return static_cast<int>(labels(t).size()); }
  int ent_role_of(int label) const;  // 0=target 1=aspect 2=opinion, -1 none
  Polarity polarity_of(int label) const;
};

// Dense K-class word-pair label matrix over a token region. The region is a
// strictly increasing list of global token indices; matrices use row-major
// region-local coordinates.
struct LabelGrid {
  Task task = Task::ent;
  std::vector<int> region;
  std::vector<int> labels;  // n*n entries, values < K

  int n() const { return static_cast<int>(region.size()); }
  int at(int i, int j) const { return labels[static_cast<size_t>(i) * n() + j]; }
  void set(int i, int j, int v) { labels[static_cast<size_t>(i) * n() + j] = v; }
};

// Raw (pre-softmax) n*n*K score tensor over a token region; the currency of
// hierarchical aggregation. logits is (n*n) x K with cell (i,j) at row i*n+j.
struct LogitGrid {
  Task task = Task::ent;
  std::vector<int> region;
  Tensor logits;

  int n() const { return static_cast<int>(region.size()); }
  int k() const { return logits.cols; }
  double at(int i, int j, int kk) const {
    return logits.at(i * n() + j, kk);
  }
};

struct GoldGrids {
  LabelGrid ent;
  LabelGrid pair;
  LabelGrid pol;

  const LabelGrid& for_task(Task t) const;
};

// Gold encoding over a region: for each quad whose spans all lie in the
// region, mark span (head,tail) cells with the entity type, head/head and
// tail/tail cells of the T-A, T-O, A-O combinations with H2H / T2T, and the
// (target-head, opinion-head) cell with the polarity. Conflicting demands on
// one cell raise label_conflict.
GoldGrids encode_gold(const Dialogue& d, const std::vector<int>& region,
                      const TagSchema& schema);

// Argmax decode of the three grids back into quadruples: entity spans from
// the upper triangle, pair links requiring H2H at heads and T2T at tails,
// quads from targets linked to both an aspect and an opinion, polarity from
// the non-NONE argmax at (target-head, opinion-head). Deduplicated, sorted.
std::vector<Quad> decode(const LogitGrid& ent, const LogitGrid& pair,
                         const LogitGrid& pol, const TagSchema& schema,
                         const Dialogue& d);

// argmax with ties resolved to the lowest index (NONE wins exact ties)
int argmax_class(const Tensor& logits, int row);

// test/debug helper: one-hot logits from a label grid
LogitGrid one_hot(const LabelGrid& grid, int k, double margin = 1.0);

}  // namespace dmca
