#include "dmca/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dmca/error.hpp"

namespace dmca {

using nlohmann::json;

void F1Stat::finish() {
  precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall)
                              : 0.0;
}

namespace {

using SpanKey = std::pair<int, int>;
using TripleKey = std::array<SpanKey, 3>;
struct QuadKey {
  TripleKey spans;
  int pol;
  auto operator<=>(const QuadKey&) const = default;
};

QuadKey key_of(const Quad& q) {
  return {{{{q.target.start, q.target.end},
            {q.aspect.start, q.aspect.end},
            {q.opinion.start, q.opinion.end}}},
          static_cast<int>(q.polarity)};
}

// distinct utterances containing the three spans, minus one
int cross_k(const Dialogue& d, const Quad& q) {
  std::set<int> utts;
  for (const Span* s : {&q.target, &q.aspect, &q.opinion})
    utts.insert(d.utterance_of_token(s->start));
  return static_cast<int>(utts.size()) - 1;
}

template <typename T>
void count_sets(const std::set<T>& pred, const std::set<T>& gold, F1Stat& s) {
  for (const auto& p : pred)
    gold.count(p) ? ++s.tp : ++s.fp;
  for (const auto& g : gold)
    if (!pred.count(g)) ++s.fn;
}

}  // namespace

EvalReport score(const std::vector<DocQuads>& predictions,
                 const std::vector<Dialogue>& gold) {
  std::unordered_map<std::string, const Dialogue*> docs;
  for (const auto& d : gold) docs.emplace(d.doc_id, &d);

  std::unordered_map<std::string, std::vector<Quad>> pred_by_doc;
  for (const auto& p : predictions) {
    if (!docs.count(p.doc_id))
      throw Error(ErrorKind::invalid_argument,
                  "prediction for unknown doc_id " + p.doc_id);
    auto& bucket = pred_by_doc[p.doc_id];
    bucket.insert(bucket.end(), p.quads.begin(), p.quads.end());
  }

  EvalReport r;
  std::map<int, CrossGroup> cross;

  for (const auto& d : gold) {
    int n = d.token_count();
    std::set<QuadKey> gold_quads;
    std::set<TripleKey> gold_triples;
    std::set<std::pair<int, SpanKey>> gold_entities;
    std::set<std::pair<int, std::pair<SpanKey, SpanKey>>> gold_pairs;
    std::map<int, std::set<QuadKey>> gold_by_k;
    for (const auto& q : d.quads) {
      QuadKey k = key_of(q);
      gold_quads.insert(k);
      gold_triples.insert(k.spans);
      gold_entities.insert({0, k.spans[0]});
      gold_entities.insert({1, k.spans[1]});
      gold_entities.insert({2, k.spans[2]});
      gold_pairs.insert({0, {k.spans[0], k.spans[1]}});  // T-A
      gold_pairs.insert({1, {k.spans[0], k.spans[2]}});  // T-O
      gold_pairs.insert({2, {k.spans[1], k.spans[2]}});  // A-O
      gold_by_k[cross_k(d, q)].insert(k);
    }
    for (const auto& [k, quads] : gold_by_k)
      cross[k].gold_count += static_cast<long>(quads.size());
    r.total_gold += static_cast<long>(gold_quads.size());

    std::set<QuadKey> pred_quads;
    std::set<TripleKey> pred_triples;
    std::set<std::pair<int, SpanKey>> pred_entities;
    std::set<std::pair<int, std::pair<SpanKey, SpanKey>>> pred_pairs;
    std::map<int, std::set<QuadKey>> pred_by_k;
    auto it = pred_by_doc.find(d.doc_id);
    if (it != pred_by_doc.end()) {
      for (const auto& q : it->second) {
        for (const Span* s : {&q.target, &q.aspect, &q.opinion})
          if (s->start < 0 || s->start >= s->end || s->end > n)
            throw Error(ErrorKind::span,
                        "prediction span out of range for doc " + d.doc_id);
        QuadKey k = key_of(q);
        pred_quads.insert(k);
        pred_triples.insert(k.spans);
        pred_entities.insert({0, k.spans[0]});
        pred_entities.insert({1, k.spans[1]});
        pred_entities.insert({2, k.spans[2]});
        pred_pairs.insert({0, {k.spans[0], k.spans[1]}});
        pred_pairs.insert({1, {k.spans[0], k.spans[2]}});
        pred_pairs.insert({2, {k.spans[1], k.spans[2]}});
        pred_by_k[cross_k(d, q)].insert(k);
      }
    }
    r.total_pred += static_cast<long>(pred_quads.size());

    count_sets(pred_quads, gold_quads, r.quad_micro);
    count_sets(pred_triples, gold_triples, r.quad_iden);
    for (int role = 0; role < 3; ++role) {
      std::set<SpanKey> pe, ge;
      for (const auto& [ro, sp] : pred_entities)
        if (ro == role) pe.insert(sp);
      for (const auto& [ro, sp] : gold_entities)
        if (ro == role) ge.insert(sp);
      count_sets(pe, ge, r.entity[role]);
    }
    for (int combo = 0; combo < 3; ++combo) {
      std::set<std::pair<SpanKey, SpanKey>> pp, gp;
      for (const auto& [co, pr] : pred_pairs)
        if (co == combo) pp.insert(pr);
      for (const auto& [co, pr] : gold_pairs)
        if (co == combo) gp.insert(pr);
      count_sets(pp, gp, r.pair[combo]);
    }

    std::set<int> ks;
    for (const auto& [k, _] : gold_by_k) ks.insert(k);
    for (const auto& [k, _] : pred_by_k) ks.insert(k);
    for (int k : ks) {
      static const std::set<QuadKey> empty;
      const auto& pk = pred_by_k.count(k) ? pred_by_k[k] : empty;
      const auto& gk = gold_by_k.count(k) ? gold_by_k[k] : empty;
      count_sets(pk, gk, cross[k].stat);
      F1Stat& bucket = k == 0 ? r.intra : r.inter;
      F1Stat delta;
      count_sets(pk, gk, delta);
      bucket.tp += delta.tp;
      bucket.fp += delta.fp;
      bucket.fn += delta.fn;
    }
  }

  r.quad_micro.finish();
  r.quad_iden.finish();
  for (auto& e : r.entity) e.finish();
  for (auto& p : r.pair) p.finish();
  r.intra.finish();
  r.inter.finish();
  for (auto& [k, g] : cross) g.stat.finish();
  r.cross = std::move(cross);
  return r;
}

namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

json stat_json(const F1Stat& s) {
  return json{{"tp", s.tp},         {"fp", s.fp},
              {"fn", s.fn},         {"precision", s.precision},
              {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

std::string emit_report_markdown(const EvalReport& r) {
  std::string out;
  out += "| T | A | O | T-A | T-O | A-O | micro-F1 | iden-F1 |\n";
  out += "|---|---|---|-----|-----|-----|----------|---------|\n";
  out += "| " + fmt4(r.entity[0].f1) + " | " + fmt4(r.entity[1].f1) + " | " +
         fmt4(r.entity[2].f1) + " | " + fmt4(r.pair[0].f1) + " | " +
         fmt4(r.pair[1].f1) + " | " + fmt4(r.pair[2].f1) + " | " +
         fmt4(r.quad_micro.f1) + " | " + fmt4(r.quad_iden.f1) + " |\n";
  out += "\n";
  out += "| cross-k | gold | micro-F1 |\n";
  out += "|---------|------|----------|\n";
  for (const auto& [k, g] : r.cross)
    out += "| " + std::to_string(k) + " | " + std::to_string(g.gold_count) +
           " | " + fmt4(g.stat.f1) + " |\n";
  out += "\n";
  out += "| intra | inter |\n|-------|-------|\n";
  out += "| " + fmt4(r.intra.f1) + " | " + fmt4(r.inter.f1) + " |\n";
  return out;
}

std::string emit_report_json(const EvalReport& r) {
  json cross = json::object();
  for (const auto& [k, g] : r.cross)
    cross[std::to_string(k)] =
        json{{"gold_count", g.gold_count}, {"score", stat_json(g.stat)}};
  json j{{"quad_micro", stat_json(r.quad_micro)},
         {"quad_iden", stat_json(r.quad_iden)},
         {"entity",
          {{"T", stat_json(r.entity[0])},
           {"A", stat_json(r.entity[1])},
           {"O", stat_json(r.entity[2])}}},
         {"pair",
          {{"T-A", stat_json(r.pair[0])},
           {"T-O", stat_json(r.pair[1])},
           {"A-O", stat_json(r.pair[2])}}},
         {"cross", cross},
         {"intra", stat_json(r.intra)},
         {"inter", stat_json(r.inter)},
         {"total_gold", r.total_gold},
         {"total_pred", r.total_pred}};
  return j.dump(2);
}

}  // namespace dmca
