#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dmca {

// reply_to sentinel for the dialogue root
inline constexpr int kNoReply = -1;

struct Utterance {
  int id = 0;
  int speaker = 0;
  int reply_to = kNoReply;
  std::vector<std::string> tokens;
};

// Half-open [start, end) over the concatenation of utterance token lists in
// id order. Spans never cross an utterance boundary.
struct Span {
  int start = 0;
  int end = 0;
  std::string text;

  friend bool operator==(const Span& a, const Span& b) {
    return a.start == b.start && a.end == b.end;
  }
  friend auto operator<=>(const Span& a, const Span& b) {
    if (a.start != b.start) return a.start <=> b.start;
    return a.end <=> b.end;
  }
};

enum class Polarity { pos, neg, other };

const char* to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);  // throws parse error

struct Quad {
  Span target;
  Span aspect;
  Span opinion;
  Polarity polarity = Polarity::pos;

  friend bool operator==(const Quad& a, const Quad& b) {
    return a.target == b.target && a.aspect == b.aspect &&
           a.opinion == b.opinion && a.polarity == b.polarity;
  }
  friend auto operator<=>(const Quad& a, const Quad& b) {
    if (auto c = a.target <=> b.target; c != 0) return c;
    if (auto c = a.aspect <=> b.aspect; c != 0) return c;
    if (auto c = a.opinion <=> b.opinion; c != 0) return c;
    return static_cast<int>(a.polarity) <=> static_cast<int>(b.polarity);
  }
};

struct Dialogue {
  std::string doc_id;
  std::vector<Utterance> utterances;
  std::vector<Quad> quads;  // gold; may be empty

  int token_count() const;
  // prefix token offsets, size |utterances| + 1
  std::vector<int> token_offsets() const;
  int utterance_of_token(int token_index) const;
  std::vector<std::string> all_tokens() const;
  const std::string& token(int global_index) const;
};

// Predictions (or any per-document quad list) keyed by doc id.
struct DocQuads {
  std::string doc_id;
  std::vector<Quad> quads;
};

// Throws Error with kinds reply_graph / span on invariant violations.
void validate_dialogue(const Dialogue& d);

// JSONL ingestion/serialization. load validates every dialogue and reports
// the offending line / doc_id in error messages.
std::vector<Dialogue> load_corpus(const std::string& path);
void save_corpus(const std::vector<Dialogue>& corpus, const std::string& path);
std::vector<DocQuads> load_predictions(const std::string& path);
void save_predictions(const std::vector<DocQuads>& preds,
                      const std::string& path);

// Seeded synthetic corpus generator. Quads always live inside a single
// thread; roughly 22% of them span multiple utterances.
std::vector<Dialogue> generate_synthetic(uint64_t seed, int n_dialogues,
                                         int vocab_size, int max_utterances);

}  // namespace dmca
