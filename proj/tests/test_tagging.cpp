#include <doctest.h>

#include <algorithm>
#include <set>

#include "dmca/error.hpp"
#include "dmca/structure.hpp"
#include "dmca/tagging.hpp"
#include "oracle.hpp"

using namespace dmca;

namespace {

std::vector<int> full_region(const Dialogue& d) {
  std::vector<int> r(d.token_count());
  for (int i = 0; i < d.token_count(); ++i) r[i] = i;
  return r;
}

std::vector<Quad> roundtrip(const Dialogue& d, const std::vector<int>& region,
                            const TagSchema& schema) {
  auto gold = encode_gold(d, region, schema);
  return decode(one_hot(gold.ent, schema.k(Task::ent)),
                one_hot(gold.pair, schema.k(Task::pair)),
                one_hot(gold.pol, schema.k(Task::pol)), schema, d);
}

}  // namespace

TEST_CASE("worked example produces the documented cells") {
  auto d = oracle::worked_example();
  auto schema = TagSchema::reference();
  // tokens: 0 iPhone, 1 7, 2 any, 3 good | 4 power, 5 consumption, 6 is, 7 high
  auto gold = encode_gold(d, full_region(d), schema);

  CHECK(gold.ent.at(0, 1) == schema.tgt);   // (iPhone, 7)
  CHECK(gold.ent.at(4, 5) == schema.asp);   // (power, consumption)
  CHECK(gold.ent.at(7, 7) == schema.opi);   // (high, high)

  CHECK(gold.pair.at(0, 4) == schema.h2h);  // iPhone-power
  CHECK(gold.pair.at(1, 5) == schema.t2t);  // 7-consumption
  CHECK(gold.pair.at(0, 7) == schema.h2h);  // iPhone-high
  CHECK(gold.pair.at(1, 7) == schema.t2t);  // 7-high
  CHECK(gold.pair.at(4, 7) == schema.h2h);  // power-high
  CHECK(gold.pair.at(5, 7) == schema.t2t);  // consumption-high

  CHECK(gold.pol.at(0, 7) == schema.pol_index[int(Polarity::neg)]);

  // every other cell is NONE
  int nonzero_ent = 0, nonzero_pair = 0, nonzero_pol = 0;
  for (int v : gold.ent.labels) nonzero_ent += v != 0;
  for (int v : gold.pair.labels) nonzero_pair += v != 0;
  for (int v : gold.pol.labels) nonzero_pol += v != 0;
  CHECK(nonzero_ent == 3);
  CHECK(nonzero_pair == 6);
  CHECK(nonzero_pol == 1);
}

TEST_CASE("zero quads encode to all-NONE grids") {
  auto d = oracle::worked_example();
  d.quads.clear();
  auto gold = encode_gold(d, full_region(d), TagSchema::reference());
  for (int v : gold.ent.labels) CHECK(v == 0);
  for (int v : gold.pair.labels) CHECK(v == 0);
  for (int v : gold.pol.labels) CHECK(v == 0);
}

TEST_CASE("regions missing the opinion utterance get no cells") {
  auto d = oracle::worked_example();
  std::vector<int> region{0, 1, 2, 3};  // root utterance only
  auto gold = encode_gold(d, region, TagSchema::reference());
  for (int v : gold.ent.labels) CHECK(v == 0);
  for (int v : gold.pair.labels) CHECK(v == 0);
  for (int v : gold.pol.labels) CHECK(v == 0);
}

TEST_CASE("conflicting cell demands raise label_conflict") {
  auto d = oracle::worked_example();
  // a second quad sharing target and opinion heads but opposite polarity
  Quad q2 = d.quads[0];
  q2.aspect = {2, 3, "any"};
  q2.polarity = Polarity::pos;
  d.quads.push_back(q2);
  try {
    encode_gold(d, full_region(d), TagSchema::reference());
    FAIL("expected label_conflict");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::label_conflict);
    CHECK(std::string(e.what()).find("(") != std::string::npos);
  }
}

TEST_CASE("one-hot gold round-trips to exactly the in-region quads") {
  auto d = oracle::worked_example();
  auto quads = roundtrip(d, full_region(d), TagSchema::reference());
  REQUIRE(quads.size() == 1);
  CHECK(quads[0] == d.quads[0]);
  CHECK(quads[0].target.text == "iPhone 7");
}

TEST_CASE("all-NONE argmax decodes to an empty list") {
  auto d = oracle::worked_example();
  auto schema = TagSchema::reference();
  auto region = full_region(d);
  int n = static_cast<int>(region.size());
  LogitGrid ent{Task::ent, region, Tensor(n * n, schema.k(Task::ent), 0.0)};
  LogitGrid pair{Task::pair, region, Tensor(n * n, schema.k(Task::pair), 0.0)};
  LogitGrid pol{Task::pol, region, Tensor(n * n, schema.k(Task::pol), 0.0)};
  CHECK(decode(ent, pair, pol, schema, d).empty());
}

TEST_CASE("two quads sharing one target are both recovered") {
  Dialogue d;
  d.doc_id = "shared-target";
  d.utterances = {
      {0, 0, kNoReply, {"cam", "era", "lens", "focus", "fast", "dark", "x"}}};
  Quad q1;
  q1.target = {0, 2, "cam era"};
  q1.aspect = {2, 3, "lens"};
  q1.opinion = {4, 5, "fast"};
  q1.polarity = Polarity::pos;
  Quad q2;
  q2.target = {0, 2, "cam era"};
  q2.aspect = {3, 4, "focus"};
  q2.opinion = {5, 6, "dark"};
  q2.polarity = Polarity::neg;
  d.quads = {q1, q2};
  validate_dialogue(d);

  auto quads = roundtrip(d, full_region(d), TagSchema::reference());
  REQUIRE(quads.size() == 2);
  CHECK(std::count(quads.begin(), quads.end(), q1) == 1);
  CHECK(std::count(quads.begin(), quads.end(), q2) == 1);
}

TEST_CASE("region mismatch across grids is rejected") {
  auto d = oracle::worked_example();
  auto schema = TagSchema::reference();
  auto gold = encode_gold(d, full_region(d), schema);
  auto ent = one_hot(gold.ent, schema.k(Task::ent));
  auto pair = one_hot(gold.pair, schema.k(Task::pair));
  auto pol = one_hot(gold.pol, schema.k(Task::pol));
  pol.region.pop_back();
  pol.logits = Tensor(pol.n() * pol.n(), schema.k(Task::pol), 0.0);
  CHECK_THROWS_AS(decode(ent, pair, pol, schema, d), Error);
}

TEST_CASE("decode is invariant under positive scaling of the logits") {
  auto corpus = generate_synthetic(17, 10, 60, 9);
  auto schema = TagSchema::reference();
  for (const auto& d : corpus) {
    for (const auto& t : extract_threads(d)) {
      auto gold = encode_gold(d, t.token_map, schema);
      auto ent = one_hot(gold.ent, schema.k(Task::ent));
      auto pair = one_hot(gold.pair, schema.k(Task::pair));
      auto pol = one_hot(gold.pol, schema.k(Task::pol));
      auto base = decode(ent, pair, pol, schema, d);
      for (auto* g : {&ent, &pair, &pol})
        g->logits = scale(g->logits, 37.5);
      auto scaled = decode(ent, pair, pol, schema, d);
      CHECK(base == scaled);
    }
  }
}

TEST_CASE("synthetic corpora round-trip through every thread region") {
  auto corpus = generate_synthetic(99, 30, 80, 9);
  auto schema = TagSchema::reference();
  for (const auto& d : corpus) {
    std::set<Quad> recovered;
    for (const auto& t : extract_threads(d)) {
      for (const auto& q : roundtrip(d, t.token_map, schema))
        recovered.insert(q);
    }
    std::set<Quad> gold(d.quads.begin(), d.quads.end());
    CHECK(recovered == gold);
  }
}

TEST_CASE("masking a span's entity cell removes exactly its quads") {
  Dialogue d;
  d.doc_id = "masking";
  d.utterances = {
      {0, 0, kNoReply, {"cam", "era", "lens", "focus", "fast", "dark", "x"}}};
  Quad q1;
  q1.target = {0, 2, "cam era"};
  q1.aspect = {2, 3, "lens"};
  q1.opinion = {4, 5, "fast"};
  q1.polarity = Polarity::pos;
  Quad q2;
  q2.target = {0, 2, "cam era"};
  q2.aspect = {3, 4, "focus"};
  q2.opinion = {5, 6, "dark"};
  q2.polarity = Polarity::neg;
  d.quads = {q1, q2};

  auto schema = TagSchema::reference();
  auto gold = encode_gold(d, full_region(d), schema);
  auto ent = one_hot(gold.ent, schema.k(Task::ent));
  auto pair = one_hot(gold.pair, schema.k(Task::pair));
  auto pol = one_hot(gold.pol, schema.k(Task::pol));

  // wipe the aspect span of q2 ("focus" at cell (3,3))
  int n = ent.n();
  for (int k = 0; k < ent.k(); ++k) ent.logits.at(3 * n + 3, k) = 0.0;
  auto quads = decode(ent, pair, pol, schema, d);
  REQUIRE(quads.size() == 1);
  CHECK(quads[0] == q1);
}

TEST_CASE("custom schema with extra padding classes still encodes") {
  auto schema = TagSchema::from_vocabs(
      {"NONE", "TGT", "ASP", "OPI", "X1", "X2"},  // the 6-label shape
      {"NONE", "H2H", "T2T", "X"},                // the 4-label shape
      {"NONE", "POS", "NEG", "OTHER"});
  CHECK(schema.k(Task::ent) == 6);
  CHECK(schema.k(Task::pair) == 4);
  auto d = oracle::worked_example();
  auto quads = roundtrip(d, full_region(d), schema);
  REQUIRE(quads.size() == 1);
  CHECK(quads[0] == d.quads[0]);
}

TEST_CASE("schemas without NONE at index 0 or missing roles are rejected") {
  CHECK_THROWS_AS(
      TagSchema::from_vocabs({"TGT", "NONE"}, {"NONE", "H2H", "T2T"},
                             {"NONE", "POS", "NEG", "OTHER"}),
      Error);
  CHECK_THROWS_AS(
      TagSchema::from_vocabs({"NONE", "TGT", "ASP"}, {"NONE", "H2H", "T2T"},
                             {"NONE", "POS", "NEG", "OTHER"}),
      Error);
}
