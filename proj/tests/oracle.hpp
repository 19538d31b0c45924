// Test-side oracles and fixtures. Everything here is written independently
// of the library internals it checks: cross-entropy is the direct per-cell
// formula in long double, gathers are brute-force coordinate scans.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dmca/corpus.hpp"
#include "dmca/rng.hpp"
#include "dmca/tagging.hpp"
#include "dmca/tensor.hpp"

namespace oracle {

// -sum(log softmax(cell)[label]) computed cell by cell
inline double grid_ce(const dmca::Tensor& logits,
                      const std::vector<int>& labels,
                      const std::vector<uint8_t>* mask = nullptr,
                      double divisor = 1.0) {
  long double total = 0.0L;
  for (int r = 0; r < logits.rows; ++r) {
    if (mask && !(*mask)[r]) continue;
    long double denom = 0.0L;
    for (int k = 0; k < logits.cols; ++k)
      denom += expl(static_cast<long double>(logits.at(r, k)));
    long double p =
        expl(static_cast<long double>(logits.at(r, labels[r]))) / denom;
    total += -logl(p);
  }
  return static_cast<double>(total / static_cast<long double>(divisor));
}

inline dmca::Tensor random_tensor(int rows, int cols, dmca::Rng& rng,
                                  double scale = 1.0) {
  dmca::Tensor t(rows, cols);
  for (auto& v : t.data) v = rng.next_normal(0.0, scale);
  return t;
}

inline dmca::LogitGrid random_grid(dmca::Task task, std::vector<int> region,
                                   int k, dmca::Rng& rng, double scale = 1.0) {
  dmca::LogitGrid g;
  g.task = task;
  int n = static_cast<int>(region.size());
  g.region = std::move(region);
  g.logits = random_tensor(n * n, k, rng, scale);
  return g;
}

inline dmca::LabelGrid random_labels(dmca::Task task, std::vector<int> region,
                                     int k, dmca::Rng& rng) {
  dmca::LabelGrid g;
  g.task = task;
  int n = static_cast<int>(region.size());
  g.region = std::move(region);
  g.labels.resize(static_cast<size_t>(n) * n);
  for (auto& l : g.labels) l = rng.next_int(0, k - 1);
  return g;
}

// --- fixtures ---------------------------------------------------------------

// Two utterances, one quad: target "iPhone 7" in the root, aspect
// "power consumption" and opinion "high" in the reply.
inline dmca::Dialogue worked_example() {
  dmca::Dialogue d;
  d.doc_id = "worked-example";
  d.utterances = {
      {0, 0, dmca::kNoReply, {"iPhone", "7", "any", "good"}},
      {1, 1, 0, {"power", "consumption", "is", "high"}},
  };
  dmca::Quad q;
  q.target = {0, 2, "iPhone 7"};
  q.aspect = {4, 6, "power consumption"};
  q.opinion = {7, 8, "high"};
  q.polarity = dmca::Polarity::neg;
  d.quads = {q};
  return d;
}

// root + a single reply chain => one thread of the given length
inline dmca::Dialogue chain_dialogue(int length, int tokens_per_utt = 2) {
  dmca::Dialogue d;
  d.doc_id = "chain-" + std::to_string(length);
  for (int i = 0; i < length; ++i) {
    dmca::Utterance u;
    u.id = i;
    u.speaker = i % 2;
    u.reply_to = i == 0 ? dmca::kNoReply : i - 1;
    for (int t = 0; t < tokens_per_utt; ++t)
      u.tokens.push_back("u" + std::to_string(i) + "t" + std::to_string(t));
    d.utterances.push_back(std::move(u));
  }
  return d;
}

// root with two children, each a chain of two -> threads {0,1,2} and {0,3,4}
inline dmca::Dialogue two_branch_dialogue() {
  dmca::Dialogue d;
  d.doc_id = "two-branch";
  auto utt = [](int id, int reply, std::vector<std::string> toks) {
    dmca::Utterance u;
    u.id = id;
    u.speaker = id;
    u.reply_to = reply;
    u.tokens = std::move(toks);
    return u;
  };
  d.utterances = {utt(0, dmca::kNoReply, {"a0", "a1"}),
                  utt(1, 0, {"b0", "b1"}),
                  utt(2, 1, {"c0"}),
                  utt(3, 0, {"d0", "d1"}),
                  utt(4, 3, {"e0"})};
  return d;
}

}  // namespace oracle
