// Synthetic corpus generator.
//
// The vocabulary is split into a filler range and eight span classes
// (target/aspect begin+end, opinion begin per polarity, opinion end). Every
// gold span is a [begin, end] token bigram of its class, hosted in branch
// utterances of a single thread, at most one quad per thread. "Decoy" class
// tokens that never form a begin+end bigram are sprinkled into the filler so
// the tagging task needs local context, not just token identity.

#include <algorithm>
#include <set>

#include "dmca/corpus.hpp"
#include "dmca/error.hpp"
#include "dmca/rng.hpp"

namespace dmca {

namespace {

constexpr double kCrossQuadRate = 0.24;
constexpr double kDecoyRate = 0.06;

struct VocabLayout {
  int vocab_size;
  int class_width;
  int filler_end;  // filler token ids are [0, filler_end)

  // class ids: 0 t_begin, 1 t_end, 2 a_begin, 3 a_end,
  //            4 o_begin_pos, 5 o_begin_neg, 6 o_begin_other, 7 o_end
  int class_base(int c) const { return filler_end + c * class_width; }

  int class_of(int token) const {
    if (token < filler_end) return -1;
    return (token - filler_end) / class_width;
  }
};

VocabLayout make_layout(int vocab_size) {
  VocabLayout v;
  v.vocab_size = vocab_size;
  v.class_width = std::max(2, vocab_size / 20);
  v.filler_end = vocab_size - 8 * v.class_width;
  return v;
}

std::string token_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%04d", id);
  return buf;
}

// begin-class -> matching end-class, -1 when not a begin class
int matching_end_class(int c) {
  if (c == 0) return 1;
  if (c == 2) return 3;
  if (c >= 4 && c <= 6) return 7;
  return -1;
}

struct SpanPlan {
  int utterance = 0;
  int local_start = 0;
  int length = 2;
};

struct Builder {
  const VocabLayout& layout;
  Rng& rng;
  std::vector<std::vector<int>> tokens;   // per utterance, vocab ids
  std::vector<int> next_free;             // packing cursor per utterance
  std::vector<std::set<int>> span_cells;  // local positions used by spans

  Builder(const VocabLayout& l, Rng& r, const std::vector<int>& lengths)
      : layout(l), rng(r) {
    for (int len : lengths) {
      std::vector<int> utt(len);
      for (int& t : utt) t = rng.next_int(0, l.filler_end - 1);
      tokens.push_back(std::move(utt));
      next_free.push_back(rng.next_int(0, 2));
      span_cells.emplace_back();
    }
  }

  int pick(int cls) {
    return layout.class_base(cls) + rng.next_int(0, layout.class_width - 1);
  }

  SpanPlan place_span(int utt, int begin_cls) {
    auto& toks = tokens[utt];
    int start = next_free[utt];
    if (start + 2 > static_cast<int>(toks.size())) {
      while (static_cast<int>(toks.size()) < start + 2)
        toks.push_back(rng.next_int(0, layout.filler_end - 1));
    }
    toks[start] = pick(begin_cls);
    toks[start + 1] = pick(matching_end_class(begin_cls));
    span_cells[utt].insert(start);
    span_cells[utt].insert(start + 1);
    next_free[utt] = start + 3 + rng.next_int(0, 1);
    return {utt, start, 2};
  }

  void sprinkle_decoys() {
    for (size_t u = 0; u < tokens.size(); ++u) {
      auto& toks = tokens[u];
      for (size_t p = 0; p < toks.size(); ++p) {
        if (span_cells[u].count(static_cast<int>(p))) continue;
        if (rng.next_double() >= kDecoyRate) continue;
        for (int attempt = 0; attempt < 6; ++attempt) {
          int cls = rng.next_int(0, 7);
          int cand = pick(cls);
          // never create a begin+end bigram of one type by accident
          int prev_cls = p > 0 ? layout.class_of(toks[p - 1]) : -1;
          int next_cls = p + 1 < toks.size() ? layout.class_of(toks[p + 1]) : -1;
          bool bad = (prev_cls >= 0 && matching_end_class(prev_cls) == cls) ||
                     (matching_end_class(cls) >= 0 &&
                      matching_end_class(cls) == next_cls);
          if (!bad) {
            toks[p] = cand;
            break;
          }
        }
      }
    }
  }
};

}  // namespace

std::vector<Dialogue> generate_synthetic(uint64_t seed, int n_dialogues,
                                         int vocab_size, int max_utterances) {
  if (n_dialogues < 1)
    throw Error(ErrorKind::invalid_argument, "n_dialogues must be >= 1");
  if (vocab_size < 30)
    throw Error(ErrorKind::invalid_argument, "vocab_size must be >= 30");
  if (max_utterances < 2)
    throw Error(ErrorKind::invalid_argument, "max_utterances must be >= 2");

  VocabLayout layout = make_layout(vocab_size);
  Rng rng(seed);
  std::vector<Dialogue> corpus;
  corpus.reserve(n_dialogues);

  for (int di = 0; di < n_dialogues; ++di) {
    int n_utts = std::min(max_utterances, rng.next_int(5, 9));
    n_utts = std::max(n_utts, 2);

    // reply tree: u1 answers the root, later utterances open a new branch
    // with probability 0.3, otherwise extend a random earlier branch
    std::vector<int> reply(n_utts, kNoReply);
    reply[1] = 0;
    for (int i = 2; i < n_utts; ++i)
      reply[i] = rng.next_double() < 0.3 ? 0 : rng.next_int(1, i - 1);

    // thread membership: one thread per direct root child, ids ascending
    std::vector<int> thread_of(n_utts, -1);
    std::vector<std::vector<int>> branch_utts;  // per thread, excludes root
    for (int i = 1; i < n_utts; ++i) {
      if (reply[i] == 0) {
        thread_of[i] = static_cast<int>(branch_utts.size());
        branch_utts.push_back({i});
      } else {
        thread_of[i] = thread_of[reply[i]];
        branch_utts[thread_of[i]].push_back(i);
      }
    }

    std::vector<int> lengths(n_utts);
    lengths[0] = rng.next_int(3, 6);
    for (int i = 1; i < n_utts; ++i) lengths[i] = rng.next_int(4, 9);

    Builder b(layout, rng, lengths);

    // one quad per selected thread; cross quads grab multi-utterance
    // branches first so single-branch threads do not starve them
    int want = 1 + (rng.next_double() < 0.55 ? 1 : 0) +
               (rng.next_double() < 0.25 ? 1 : 0);
    int n_quads = std::min<int>(want, static_cast<int>(branch_utts.size()));
    std::vector<bool> want_cross_flags(n_quads);
    for (int qi = 0; qi < n_quads; ++qi)
      want_cross_flags[qi] = rng.next_double() < kCrossQuadRate;

    std::vector<int> thread_order(branch_utts.size());
    for (size_t t = 0; t < thread_order.size(); ++t)
      thread_order[t] = static_cast<int>(t);
    rng.shuffle(thread_order);
    std::vector<bool> thread_used(branch_utts.size(), false);
    auto claim_thread = [&](bool need_multi) {
      for (int t : thread_order) {
        if (thread_used[t]) continue;
        if (need_multi && branch_utts[t].size() < 2) continue;
        thread_used[t] = true;
        return t;
      }
      return -1;
    };

    struct Assignment {
      int thread;
      bool cross;
    };
    std::vector<Assignment> assignments;
    for (int qi = 0; qi < n_quads; ++qi) {
      if (!want_cross_flags[qi]) continue;
      int t = claim_thread(/*need_multi=*/true);
      if (t < 0) t = claim_thread(false);
      if (t >= 0) assignments.push_back({t, branch_utts[t].size() >= 2});
    }
    for (int qi = 0; qi < n_quads; ++qi) {
      if (want_cross_flags[qi]) continue;
      int t = claim_thread(false);
      if (t >= 0) assignments.push_back({t, false});
    }

    struct QuadPlan {
      SpanPlan spans[3];  // target, aspect, opinion
      Polarity pol;
    };
    std::vector<QuadPlan> plans;

    for (const auto& assignment : assignments) {
      const auto& branch = branch_utts[assignment.thread];
      bool cross = assignment.cross;

      double pr = rng.next_double();
      Polarity pol = pr < 0.45   ? Polarity::pos
                     : pr < 0.80 ? Polarity::neg
                                 : Polarity::other;
      int begin_cls[3] = {0, 2, 4 + static_cast<int>(pol)};

      int host_of[3];
      if (!cross) {
        int host = branch[rng.next_int(0, static_cast<int>(branch.size()) - 1)];
        host_of[0] = host_of[1] = host_of[2] = host;
      } else {
        std::vector<int> picks = branch;
        rng.shuffle(picks);
        int n_hosts = (rng.next_double() < 0.65 || picks.size() < 3) ? 2 : 3;
        if (n_hosts == 2) {
          int lone = rng.next_int(0, 2);  // which element sits alone
          for (int e = 0; e < 3; ++e) host_of[e] = picks[e == lone ? 1 : 0];
        } else {
          int perm[3] = {0, 1, 2};
          std::vector<int> pv(perm, perm + 3);
          rng.shuffle(pv);
          for (int e = 0; e < 3; ++e) host_of[e] = picks[pv[e]];
        }
      }

      QuadPlan plan;
      plan.pol = pol;
      for (int e = 0; e < 3; ++e)
        plan.spans[e] = b.place_span(host_of[e], begin_cls[e]);
      plans.push_back(plan);
    }

    b.sprinkle_decoys();

    Dialogue d;
    d.doc_id = "syn-" + std::to_string(100000 + di).substr(1);
    for (int i = 0; i < n_utts; ++i) {
      Utterance u;
      u.id = i;
      u.speaker = i == 0 ? 0 : rng.next_int(0, 4);
      u.reply_to = reply[i];
      for (int t : b.tokens[i]) u.tokens.push_back(token_name(t));
      d.utterances.push_back(std::move(u));
    }

    auto offsets = d.token_offsets();
    auto materialize = [&](const SpanPlan& p) {
      Span s;
      s.start = offsets[p.utterance] + p.local_start;
      s.end = s.start + p.length;
      for (int t = s.start; t < s.end; ++t) {
        if (t > s.start) s.text += ' ';
        s.text += d.token(t);
      }
      return s;
    };
    for (const auto& plan : plans) {
      Quad q;
      q.target = materialize(plan.spans[0]);
      q.aspect = materialize(plan.spans[1]);
      q.opinion = materialize(plan.spans[2]);
      q.polarity = plan.pol;
      d.quads.push_back(std::move(q));
    }

    validate_dialogue(d);
    corpus.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace dmca
