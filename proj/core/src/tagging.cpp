#include "dmca/tagging.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_map>

#include "dmca/error.hpp"

namespace dmca {

const char* to_string(Task t) {
  switch (t) {
    case Task::ent: return "ent";
    case Task::pair: return "pair";
    case Task::pol: return "pol";
  }
  return "?";
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

int find_role(const std::vector<std::string>& vocab,
              std::initializer_list<const char*> names) {
  for (size_t i = 1; i < vocab.size(); ++i) {
    std::string v = lower(vocab[i]);
    for (const char* n : names)
      if (v == n) return static_cast<int>(i);
  }
  return -1;
}

void check_vocab(const std::vector<std::string>& vocab, const char* task) {
  if (vocab.empty() || lower(vocab[0]) != "none")
    throw Error(ErrorKind::config,
                std::string(task) + " vocab must place NONE at index 0");
  std::set<std::string> seen;
  for (const auto& v : vocab)
    if (!seen.insert(lower(v)).second)
      throw Error(ErrorKind::config,
                  std::string(task) + " vocab has duplicate label '" + v + "'");
}

}  // namespace

TagSchema TagSchema::reference() {
  return from_vocabs({"NONE", "TGT", "ASP", "OPI"}, {"NONE", "H2H", "T2T"},
                     {"NONE", "POS", "NEG", "OTHER"});
}

TagSchema TagSchema::from_vocabs(std::vector<std::string> ent,
                                 std::vector<std::string> pair,
                                 std::vector<std::string> pol) {
  check_vocab(ent, "ent");
  check_vocab(pair, "pair");
  check_vocab(pol, "pol");
  TagSchema s;
  s.ent_labels = std::move(ent);
  s.pair_labels = std::move(pair);
  s.pol_labels = std::move(pol);
  s.tgt = find_role(s.ent_labels, {"tgt", "target"});
  s.asp = find_role(s.ent_labels, {"asp", "aspect"});
  s.opi = find_role(s.ent_labels, {"opi", "opinion"});
  s.h2h = find_role(s.pair_labels, {"h2h"});
  s.t2t = find_role(s.pair_labels, {"t2t"});
  s.pol_index[0] = find_role(s.pol_labels, {"pos", "positive"});
  s.pol_index[1] = find_role(s.pol_labels, {"neg", "negative"});
  s.pol_index[2] = find_role(s.pol_labels, {"other", "neu", "neutral"});
  if (s.tgt < 0 || s.asp < 0 || s.opi < 0)
    throw Error(ErrorKind::config,
                "ent vocab must name the tgt/asp/opi roles");
  if (s.h2h < 0 || s.t2t < 0)
    throw Error(ErrorKind::config, "pair vocab must name h2h and t2t");
  if (s.pol_index[0] < 0 || s.pol_index[1] < 0 || s.pol_index[2] < 0)
    throw Error(ErrorKind::config, "pol vocab must name pos/neg/other");
  return s;
}

const std::vector<std::string>& TagSchema::labels(Task t) const {
  switch (t) {
    case Task::ent: return ent_labels;
    case Task::pair: return pair_labels;
    case Task::pol: return pol_labels;
  }
  return ent_labels;
}

int TagSchema::ent_role_of(int label) const {
  if (label == tgt) return 0;
  if (label == asp) return 1;
  if (label == opi) return 2;
  return -1;
}

Polarity TagSchema::polarity_of(int label) const {
  for (int p = 0; p < 3; ++p)
    if (pol_index[p] == label) return static_cast<Polarity>(p);
  throw Error(ErrorKind::config, "pol label " + std::to_string(label) +
                                     " is not bound to a polarity");
}

const LabelGrid& GoldGrids::for_task(Task t) const {
  switch (t) {
    case Task::ent: return ent;
    case Task::pair: return pair;
    case Task::pol: return pol;
  }
  return ent;
}

namespace {

// region-local index of a global token, -1 when absent
struct RegionIndex {
  std::unordered_map<int, int> local;
  explicit RegionIndex(const std::vector<int>& region) {
    local.reserve(region.size());
    for (size_t i = 0; i < region.size(); ++i)
      local.emplace(region[i], static_cast<int>(i));
  }
  int at(int global) const {
    auto it = local.find(global);
    return it == local.end() ? -1 : it->second;
  }
};

void demand(LabelGrid& g, int i, int j, int label, const std::string& doc_id) {
  int prev = g.at(i, j);
  if (prev != 0 && prev != label)
    throw Error(ErrorKind::label_conflict,
                doc_id + ": conflicting " + std::string(to_string(g.task)) +
                    " labels at cell (" + std::to_string(i) + "," +
                    std::to_string(j) + "): " + std::to_string(prev) +
                    " vs " + std::to_string(label));
  g.set(i, j, label);
}

bool span_in_region(const RegionIndex& idx, const Span& s) {
  for (int t = s.start; t < s.end; ++t)
    if (idx.at(t) < 0) return false;
  return true;
}

}  // namespace

GoldGrids encode_gold(const Dialogue& d, const std::vector<int>& region,
                      const TagSchema& schema) {
  for (size_t i = 1; i < region.size(); ++i)
    if (region[i] <= region[i - 1])
      throw Error(ErrorKind::region,
                  "encode_gold: region must be strictly increasing");
  int n = static_cast<int>(region.size());
  GoldGrids out;
  for (Task t : {Task::ent, Task::pair, Task::pol}) {
    LabelGrid g;
    g.task = t;
    g.region = region;
    g.labels.assign(static_cast<size_t>(n) * n, 0);
    (t == Task::ent ? out.ent : t == Task::pair ? out.pair : out.pol) =
        std::move(g);
  }

  RegionIndex idx(region);
  for (const auto& q : d.quads) {
    if (!span_in_region(idx, q.target) || !span_in_region(idx, q.aspect) ||
        !span_in_region(idx, q.opinion))
      continue;  // out-of-region quads contribute nothing
    int th = idx.at(q.target.start), tt = idx.at(q.target.end - 1);
    int ah = idx.at(q.aspect.start), at = idx.at(q.aspect.end - 1);
    int oh = idx.at(q.opinion.start), ot = idx.at(q.opinion.end - 1);

    demand(out.ent, th, tt, schema.tgt, d.doc_id);
    demand(out.ent, ah, at, schema.asp, d.doc_id);
    demand(out.ent, oh, ot, schema.opi, d.doc_id);

    demand(out.pair, th, ah, schema.h2h, d.doc_id);
    demand(out.pair, tt, at, schema.t2t, d.doc_id);
    demand(out.pair, th, oh, schema.h2h, d.doc_id);
    demand(out.pair, tt, ot, schema.t2t, d.doc_id);
    demand(out.pair, ah, oh, schema.h2h, d.doc_id);
    demand(out.pair, at, ot, schema.t2t, d.doc_id);

    demand(out.pol, th, oh,
           schema.pol_index[static_cast<int>(q.polarity)], d.doc_id);
  }
  return out;
}

int argmax_class(const Tensor& logits, int row) {
  int best = 0;
  double best_v = logits.at(row, 0);
  for (int k = 1; k < logits.cols; ++k) {
    double v = logits.at(row, k);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

namespace {

struct CandidateSpan {
  Span span;
  int head = 0, tail = 0;  // region-local
};

// Model outputs may propose arbitrary cells; only keep spans that are valid
// against the data model (contiguous tokens inside one utterance).
bool valid_region_span(const std::vector<int>& region, int i, int j,
                       const Dialogue& d) {
  if (region[j] - region[i] != j - i) return false;
  return d.utterance_of_token(region[i]) == d.utterance_of_token(region[j]);
}

}  // namespace

std::vector<Quad> decode(const LogitGrid& ent, const LogitGrid& pair,
                         const LogitGrid& pol, const TagSchema& schema,
                         const Dialogue& d) {
  if (ent.region != pair.region || ent.region != pol.region)
    throw Error(ErrorKind::region, "decode: grids must share one region");
  const auto& region = ent.region;
  int n = ent.n();

  std::vector<CandidateSpan> spans[3];  // by role: target/aspect/opinion
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      int label = argmax_class(ent.logits, i * n + j);
      int role = label == 0 ? -1 : schema.ent_role_of(label);
      if (role < 0) continue;
      if (!valid_region_span(region, i, j, d)) continue;
      CandidateSpan c;
      c.head = i;
      c.tail = j;
      c.span.start = region[i];
      c.span.end = region[j] + 1;
      for (int t = c.span.start; t < c.span.end; ++t) {
        if (t > c.span.start) c.span.text += ' ';
        c.span.text += d.token(t);
      }
      spans[role].push_back(std::move(c));
    }
  }

  auto linked = [&](const CandidateSpan& x, const CandidateSpan& y) {
    return argmax_class(pair.logits, x.head * n + y.head) == schema.h2h &&
           argmax_class(pair.logits, x.tail * n + y.tail) == schema.t2t;
  };

  std::vector<Quad> quads;
  for (const auto& t : spans[0]) {
    for (const auto& a : spans[1]) {
      if (!linked(t, a)) continue;
      for (const auto& o : spans[2]) {
        if (!linked(t, o)) continue;
        Quad q;
        q.target = t.span;
        q.aspect = a.span;
        q.opinion = o.span;
        // polarity ignores the NONE class so every quad gets one; candidates
        // are visited in label-index order so exact ties keep the lowest
        int row = t.head * n + o.head;
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int x, int y) {
          return schema.pol_index[x] < schema.pol_index[y];
        });
        int best = order[0];
        double best_v = pol.logits.at(row, schema.pol_index[best]);
        for (int oi = 1; oi < 3; ++oi) {
          double v = pol.logits.at(row, schema.pol_index[order[oi]]);
          if (v > best_v) {
            best = order[oi];
            best_v = v;
          }
        }
        q.polarity = static_cast<Polarity>(best);
        quads.push_back(std::move(q));
      }
    }
  }

  std::sort(quads.begin(), quads.end());
  quads.erase(std::unique(quads.begin(), quads.end()), quads.end());
  return quads;
}

LogitGrid one_hot(const LabelGrid& grid, int k, double margin) {
  LogitGrid out;
  out.task = grid.task;
  out.region = grid.region;
  int n = grid.n();
  out.logits = Tensor(n * n, k, 0.0);
  for (int c = 0; c < n * n; ++c) out.logits.at(c, grid.labels[c]) = margin;
  return out;
}

}  // namespace dmca
