#pragma once

#include <stdexcept>
#include <string>

namespace dmca {

// All domain failures carry a kind so callers (and tests) can tell a parse
// problem from a structural one without string matching.
enum class ErrorKind {
  parse,           // malformed JSON / bad enum value, message carries line no
  reply_graph,     // reply cycle, multiple roots, id gaps
  span,            // span out of range, text mismatch, cross-utterance span
  label_conflict,  // two quads demand different labels for one grid cell
  region,          // region mismatch / containment violation between grids
  vocab,           // token missing from the model vocabulary
  config,          // unknown config key, bad value
  numeric,         // non-finite loss or intermediate
  io,              // file not found / unwritable
  invalid_argument // parameter out of the documented range
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dmca
