#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "dmca/corpus.hpp"
#include "dmca/error.hpp"
#include "dmca/structure.hpp"
#include "oracle.hpp"

using namespace dmca;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path("/tmp/dmca_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("load_corpus ingests a well-formed dialogue") {
  TempFile f("load_ok.jsonl");
  write_lines(
      f.path,
      {R"({"doc_id":"d0","utterances":[)"
       R"({"id":0,"speaker":0,"reply_to":-1,"tokens":["iPhone","7","any","good"]},)"
       R"({"id":1,"speaker":1,"reply_to":0,"tokens":["power","consumption","is","high"]},)"
       R"({"id":2,"speaker":0,"reply_to":1,"tokens":["agree"]}],)"
       R"("quads":[{"target":[0,2],"aspect":[4,6],"opinion":[7,8],"polarity":"neg",)"
       R"("target_text":"iPhone 7","aspect_text":"power consumption","opinion_text":"high"}]})"});
  auto corpus = load_corpus(f.path);
  REQUIRE(corpus.size() == 1);
  const Dialogue& d = corpus[0];
  CHECK(d.doc_id == "d0");
  CHECK(d.utterances.size() == 3);
  CHECK(d.token_count() == 9);
  REQUIRE(d.quads.size() == 1);
  CHECK(d.quads[0].polarity == Polarity::neg);
  CHECK(d.quads[0].target.text == "iPhone 7");
}

TEST_CASE("load_corpus reports malformed JSON with its line number") {
  TempFile f("load_badjson.jsonl");
  write_lines(f.path, {R"({"doc_id":"ok","utterances":[{"id":0,"speaker":0,"reply_to":-1,"tokens":["x"]}],"quads":[]})",
                       "{not json"});
  try {
    load_corpus(f.path);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("reply links that point forward are rejected as cycles") {
  // u1 -> u2, u2 -> u1 cannot be encoded without a forward link
  TempFile f("load_cycle.jsonl");
  write_lines(
      f.path,
      {R"({"doc_id":"cyc","utterances":[)"
       R"({"id":0,"speaker":0,"reply_to":-1,"tokens":["a"]},)"
       R"({"id":1,"speaker":1,"reply_to":2,"tokens":["b"]},)"
       R"({"id":2,"speaker":0,"reply_to":1,"tokens":["c"]}],"quads":[]})"});
  CHECK_THROWS_AS(load_corpus(f.path), Error);
  try {
    load_corpus(f.path);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::reply_graph);
  }
}

TEST_CASE("multiple roots are rejected") {
  Dialogue d = oracle::chain_dialogue(3);
  d.utterances[2].reply_to = kNoReply;
  CHECK_THROWS_AS(validate_dialogue(d), Error);
}

TEST_CASE("span text mismatch names the document") {
  TempFile f("load_spanmismatch.jsonl");
  write_lines(
      f.path,
      {R"({"doc_id":"bad-span","utterances":[)"
       R"({"id":0,"speaker":0,"reply_to":-1,"tokens":["x","y","z","w","v","u"]}],)"
       R"("quads":[{"target":[0,1],"aspect":[2,3],"opinion":[4,5],"polarity":"pos",)"
       R"("target_text":"WRONG","aspect_text":"z","opinion_text":"v"}]})"});
  try {
    load_corpus(f.path);
    FAIL("expected span error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::span);
    CHECK(std::string(e.what()).find("bad-span") != std::string::npos);
  }
}

TEST_CASE("span out of range is a span error") {
  Dialogue d = oracle::worked_example();
  d.quads[0].opinion = {7, 99, ""};
  CHECK_THROWS_AS(validate_dialogue(d), Error);
}

TEST_CASE("save/load round-trip is the identity") {
  auto corpus = generate_synthetic(7, 25, 60, 9);
  TempFile f("roundtrip.jsonl");
  save_corpus(corpus, f.path);
  auto loaded = load_corpus(f.path);
  REQUIRE(loaded.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded[i].doc_id == corpus[i].doc_id);
    REQUIRE(loaded[i].utterances.size() == corpus[i].utterances.size());
    for (size_t u = 0; u < corpus[i].utterances.size(); ++u) {
      CHECK(loaded[i].utterances[u].tokens == corpus[i].utterances[u].tokens);
      CHECK(loaded[i].utterances[u].reply_to ==
            corpus[i].utterances[u].reply_to);
      CHECK(loaded[i].utterances[u].speaker ==
            corpus[i].utterances[u].speaker);
    }
    REQUIRE(loaded[i].quads.size() == corpus[i].quads.size());
    for (size_t q = 0; q < corpus[i].quads.size(); ++q)
      CHECK(loaded[i].quads[q] == corpus[i].quads[q]);
  }
}

TEST_CASE("synthetic generation is deterministic and seed-sensitive") {
  auto a = generate_synthetic(1, 10, 50, 9);
  auto b = generate_synthetic(1, 10, 50, 9);
  auto c = generate_synthetic(2, 10, 50, 9);
  REQUIRE(a.size() == b.size());
  bool identical = true;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].quads != b[i].quads) identical = false;
    for (size_t u = 0; u < a[i].utterances.size(); ++u)
      if (a[i].utterances[u].tokens != b[i].utterances[u].tokens)
        identical = false;
  }
  CHECK(identical);

  bool differs = a.size() != c.size();
  for (size_t i = 0; !differs && i < a.size(); ++i) {
    if (a[i].utterances.size() != c[i].utterances.size() ||
        a[i].quads != c[i].quads)
      differs = true;
    else
      for (size_t u = 0; u < a[i].utterances.size(); ++u)
        if (a[i].utterances[u].tokens != c[i].utterances[u].tokens)
          differs = true;
  }
  CHECK(differs);
}

TEST_CASE("generator rejects out-of-range parameters") {
  CHECK_THROWS_AS(generate_synthetic(1, 10, 29, 9), Error);
  CHECK_THROWS_AS(generate_synthetic(1, 10, 50, 1), Error);
  CHECK_THROWS_AS(generate_synthetic(1, 0, 50, 9), Error);
}

TEST_CASE("cross-utterance quad fraction lands near the dataset statistic") {
  auto corpus = generate_synthetic(42, 200, 100, 9);
  long total = 0, cross = 0;
  for (const auto& d : corpus) {
    for (const auto& q : d.quads) {
      std::set<int> utts{d.utterance_of_token(q.target.start),
                         d.utterance_of_token(q.aspect.start),
                         d.utterance_of_token(q.opinion.start)};
      ++total;
      if (utts.size() > 1) ++cross;
    }
  }
  REQUIRE(total > 0);
  double frac = static_cast<double>(cross) / total;
  CHECK(frac >= 0.15);
  CHECK(frac <= 0.30);
}

TEST_CASE("generated dialogues average about seven utterances") {
  auto corpus = generate_synthetic(11, 200, 100, 9);
  double sum = 0;
  for (const auto& d : corpus) sum += static_cast<double>(d.utterances.size());
  double avg = sum / corpus.size();
  CHECK(avg > 6.0);
  CHECK(avg < 8.0);
}

TEST_CASE("reply graph of every generated dialogue is a tree") {
  auto corpus = generate_synthetic(3, 50, 60, 9);
  for (const auto& d : corpus) {
    int edges = 0;
    std::vector<std::vector<int>> children(d.utterances.size());
    for (const auto& u : d.utterances)
      if (u.reply_to != kNoReply) {
        ++edges;
        children[u.reply_to].push_back(u.id);
      }
    CHECK(edges == static_cast<int>(d.utterances.size()) - 1);
    // all reachable from the root
    std::vector<int> stack{0};
    std::set<int> seen;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      seen.insert(u);
      for (int c : children[u]) stack.push_back(c);
    }
    CHECK(seen.size() == d.utterances.size());
  }
}

TEST_CASE("every synthetic quad lies inside a single thread") {
  auto corpus = generate_synthetic(5, 50, 80, 9);
  for (const auto& d : corpus) {
    auto threads = extract_threads(d);
    for (const auto& q : d.quads) {
      bool reachable = false;
      for (const auto& t : threads) {
        std::set<int> toks(t.token_map.begin(), t.token_map.end());
        bool all = true;
        for (const Span* s : {&q.target, &q.aspect, &q.opinion})
          for (int g = s->start; g < s->end; ++g)
            if (!toks.count(g)) all = false;
        if (all) reachable = true;
      }
      CHECK(reachable);
    }
  }
}
