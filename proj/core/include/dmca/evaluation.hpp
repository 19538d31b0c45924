#pragma once

#include <map>
#include <string>
#include <vector>

#include "dmca/corpus.hpp"

namespace dmca {

struct F1Stat {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  void finish();  // computes P/R/F1 with the 0-denominator-is-0 convention
};

struct CrossGroup {
  long gold_count = 0;
  F1Stat stat;
};

// Quad micro-F1 / iden-F1, per-type entity F1, per-combination pair F1 and
// the cross-utterance breakdown (cross-k = distinct utterances holding the
// quad's spans, minus one).
struct EvalReport {
  F1Stat quad_micro;
  F1Stat quad_iden;
  F1Stat entity[3];              // T, A, O
  F1Stat pair[3];                // T-A, T-O, A-O
  std::map<int, CrossGroup> cross;
  F1Stat intra;                  // cross-0 only
  F1Stat inter;                  // all cross-k with k >= 1
  long total_gold = 0;
  long total_pred = 0;
};

// Exact-match scoring over deduplicated quad sets; missing doc_ids count as
// empty predictions, unknown doc_ids or out-of-range spans are errors.
EvalReport score(const std::vector<DocQuads>& predictions,
                 const std::vector<Dialogue>& gold);

std::string emit_report_markdown(const EvalReport& r);
std::string emit_report_json(const EvalReport& r);  // schema-stable

}  // namespace dmca
