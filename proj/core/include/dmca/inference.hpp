#pragma once

#include <vector>

#include "dmca/corpus.hpp"
#include "dmca/scorer.hpp"

namespace dmca {

// sha: static hierarchical aggregation over every window (the default
// inference path). concat: only the largest window of each thread,
// dialogue-merged — the flat baseline.
enum class AggregationMode { sha, concat };

// Label-free inference: encode -> score -> thread aggregation -> dialogue
// merge -> decode. Never touches gold quads.
std::vector<Quad> predict_dialogue(const Dialogue& d, const Model& model,
                                   AggregationMode mode = AggregationMode::sha);

// jobs > 1 splits dialogues across worker threads; output order is stable.
std::vector<DocQuads> predict_corpus(const std::vector<Dialogue>& corpus,
                                     const Model& model,
                                     AggregationMode mode = AggregationMode::sha,
                                     int jobs = 1);

}  // namespace dmca
