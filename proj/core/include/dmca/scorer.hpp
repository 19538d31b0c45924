#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dmca/autodiff.hpp"
#include "dmca/corpus.hpp"
#include "dmca/params.hpp"
#include "dmca/structure.hpp"
#include "dmca/tagging.hpp"

namespace dmca {

struct ModelDims {
  int vocab = 0;              // filled from the training corpus
  int hidden = 64;            // D_h
  int pair_dim = 32;          // d', per-class bilinear width
  int max_window_tokens = 160;  // positional table size, >= longest window
};

// Reference trainable encoder + per-task pair scorers. Token and positional
// embeddings mixed by one residual self-attention layer; per task, head/tail
// projections into K parallel d'-wide slices scored bilinearly.
struct Model {
  ModelDims dims;
  TagSchema schema;
  std::vector<std::string> vocab;  // row i of the embedding table
  std::unordered_map<std::string, int> token_ids;
  ParamStore params;

  // parameter entry ids
  int embed = -1, pos = -1, wq = -1, wk = -1, wv = -1;
  struct TaskEntries {
    int head_w = -1, head_b = -1, tail_w = -1, tail_b = -1, cls_b = -1;
  };
  TaskEntries task[kNumTasks];

  static Model build(ModelDims dims, TagSchema schema,
                     std::vector<std::string> vocab_tokens, uint64_t seed);

  int token_id(const std::string& tok) const;  // throws on vocab miss

  void save_checkpoint(const std::string& path) const;
  static Model load_checkpoint(const std::string& path);
};

// Sorted unique token list over a corpus (the vocabulary builder).
std::vector<std::string> collect_vocab(const std::vector<Dialogue>& corpus);

// --- plain forward (inference and tests) -----------------------------------

// N_w x D_h rows aligned 1:1 with the window's tokens.
Tensor encode_window(const Window& w, const Dialogue& d, const Model& m);

// raw logits, no softmax; softmax lives in the losses and the final decode
LogitGrid score_pairs(ConstMat reps, const Model& m, Task task,
                      std::vector<int> region);

// -sum log softmax(logits[i][j])[y_ij] over unmasked cells, divided by n^2
// iff normalize. Masked-out cells are skipped but the divisor stays n^2.
double cross_entropy(const LogitGrid& grid, const LabelGrid& labels,
                     bool normalize,
                     const std::vector<uint8_t>* mask = nullptr);

// --- taped forward (training) ----------------------------------------------

VarId encode_window_taped(Tape& tape, const Window& w, const Dialogue& d,
                          const Model& m);
VarId score_pairs_taped(Tape& tape, VarId reps, const Model& m, Task task);
VarId cross_entropy_taped(Tape& tape, VarId grid, const LabelGrid& labels,
                          bool normalize,
                          const std::vector<uint8_t>* mask = nullptr);

}  // namespace dmca
