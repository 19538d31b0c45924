#pragma once

#include <vector>

#include "dmca/corpus.hpp"

namespace dmca {

// Root utterance plus the full subtree of one direct root reply, flattened
// by ascending utterance id. The root belongs to every thread.
struct Thread {
  int thread_id = 0;
  std::vector<int> utterance_ids;  // first entry is always 0
  std::vector<int> token_map;      // global token indices, utterance order
  // offsets into token_map per member utterance, size |utterance_ids|+1
  std::vector<int> utt_token_begin;

  int length() const { return static_cast<int>(utterance_ids.size()); }
};

// Contiguous run of `length` utterances of a thread starting at `offset`.
struct Window {
  int thread_id = 0;
  int offset = 0;
  int length = 0;
  std::vector<int> token_map;  // global token indices of covered utterances
};

std::vector<Thread> extract_threads(const Dialogue& d);

// All contiguous subsequences, sizes 1..length, ordered by length ascending
// then offset ascending (the aggregation level schedule relies on this).
// Count is always length*(length+1)/2.
std::vector<Window> generate_windows(const Thread& t);

// The two maximal contained windows of w: (offset, length-1) then
// (offset+1, length-1). Throws for length-1 windows.
std::vector<Window> subwindows(const Window& w, const Thread& t);

// Index of window (offset, length) in generate_windows order.
int window_index(int offset, int length, int thread_length);

}  // namespace dmca
