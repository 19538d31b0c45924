#include <doctest.h>

#include <set>

#include "dmca/error.hpp"
#include "dmca/structure.hpp"
#include "oracle.hpp"

using namespace dmca;

TEST_CASE("root with one branch of two replies forms a single thread") {
  // the three-utterance shape: u0 <- u1 <- u2
  auto d = oracle::chain_dialogue(3);
  auto threads = extract_threads(d);
  REQUIRE(threads.size() == 1);
  CHECK(threads[0].utterance_ids == std::vector<int>{0, 1, 2});
  CHECK(threads[0].length() == 3);
}

TEST_CASE("single-utterance dialogue yields one thread of length 1") {
  auto d = oracle::chain_dialogue(1);
  auto threads = extract_threads(d);
  REQUIRE(threads.size() == 1);
  CHECK(threads[0].utterance_ids == std::vector<int>{0});
}

TEST_CASE("two chains of two under the root overlap only at the root") {
  auto d = oracle::two_branch_dialogue();
  auto threads = extract_threads(d);
  REQUIRE(threads.size() == 2);
  CHECK(threads[0].utterance_ids == std::vector<int>{0, 1, 2});
  CHECK(threads[1].utterance_ids == std::vector<int>{0, 3, 4});
}

TEST_CASE("every non-root utterance appears in exactly one thread") {
  auto corpus = generate_synthetic(13, 40, 60, 9);
  for (const auto& d : corpus) {
    auto threads = extract_threads(d);
    std::vector<int> count(d.utterances.size(), 0);
    for (const auto& t : threads) {
      CHECK(t.utterance_ids[0] == 0);
      for (size_t i = 1; i < t.utterance_ids.size(); ++i) {
        CHECK(t.utterance_ids[i] > t.utterance_ids[i - 1]);
        ++count[t.utterance_ids[i]];
      }
    }
    for (size_t u = 1; u < count.size(); ++u) CHECK(count[u] == 1);
  }
}

TEST_CASE("token coverage: root tokens in all threads, others in one") {
  auto corpus = generate_synthetic(29, 20, 60, 9);
  for (const auto& d : corpus) {
    auto threads = extract_threads(d);
    auto offsets = d.token_offsets();
    std::vector<int> coverage(d.token_count(), 0);
    for (const auto& t : threads)
      for (int g : t.token_map) ++coverage[g];
    for (int g = 0; g < d.token_count(); ++g) {
      bool is_root = g < offsets[1];
      CHECK(coverage[g] == (is_root ? static_cast<int>(threads.size()) : 1));
    }
  }
}

TEST_CASE("length-3 thread produces the six expected windows") {
  auto d = oracle::chain_dialogue(3);
  auto t = extract_threads(d)[0];
  auto ws = generate_windows(t);
  REQUIRE(ws.size() == 6);
  // length-major, then offset
  int expected[6][2] = {{0, 1}, {1, 1}, {2, 1}, {0, 2}, {1, 2}, {0, 3}};
  for (int i = 0; i < 6; ++i) {
    CHECK(ws[i].offset == expected[i][0]);
    CHECK(ws[i].length == expected[i][1]);
  }
}

TEST_CASE("window token maps cover their member utterances") {
  auto d = oracle::chain_dialogue(4, 3);
  auto t = extract_threads(d)[0];
  auto ws = generate_windows(t);
  REQUIRE(ws.size() == 10);  // enumerated by brute force below
  // brute-force: all contiguous subsequences
  std::set<std::pair<int, int>> expect;
  for (int l = 1; l <= 4; ++l)
    for (int off = 0; off + l <= 4; ++off) expect.insert({off, l});
  std::set<std::pair<int, int>> got;
  for (const auto& w : ws) got.insert({w.offset, w.length});
  CHECK(got == expect);
  // token map of (1,2) = utterances 1 and 2 => global tokens 3..8
  for (const auto& w : ws)
    if (w.offset == 1 && w.length == 2)
      CHECK(w.token_map == std::vector<int>{3, 4, 5, 6, 7, 8});
}

TEST_CASE("window count law holds for thread lengths 1 through 20") {
  for (int len = 1; len <= 20; ++len) {
    auto d = oracle::chain_dialogue(len, 1);
    auto t = extract_threads(d)[0];
    CHECK(static_cast<int>(generate_windows(t).size()) ==
          len * (len + 1) / 2);
  }
}

TEST_CASE("length-1 windows union to the thread token map") {
  auto corpus = generate_synthetic(31, 10, 60, 9);
  for (const auto& d : corpus) {
    for (const auto& t : extract_threads(d)) {
      std::vector<int> unioned;
      for (const auto& w : generate_windows(t))
        if (w.length == 1)
          unioned.insert(unioned.end(), w.token_map.begin(),
                         w.token_map.end());
      CHECK(unioned == t.token_map);
    }
  }
}

TEST_CASE("subwindows returns the two maximal contained windows in order") {
  auto d = oracle::chain_dialogue(4);
  auto t = extract_threads(d)[0];
  auto ws = generate_windows(t);

  Window w3;  // (0,3)
  for (const auto& w : ws)
    if (w.offset == 0 && w.length == 3) w3 = w;
  auto subs = subwindows(w3, t);
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].offset == 0);
  CHECK(subs[0].length == 2);
  CHECK(subs[1].offset == 1);
  CHECK(subs[1].length == 2);

  Window w2;  // (1,2)
  for (const auto& w : ws)
    if (w.offset == 1 && w.length == 2) w2 = w;
  auto subs2 = subwindows(w2, t);
  CHECK(subs2[0].offset == 1);
  CHECK(subs2[0].length == 1);
  CHECK(subs2[1].offset == 2);
  CHECK(subs2[1].length == 1);
}

TEST_CASE("subwindows of a length-1 window is an error") {
  auto d = oracle::chain_dialogue(2);
  auto t = extract_threads(d)[0];
  auto ws = generate_windows(t);
  CHECK_THROWS_AS(subwindows(ws[0], t), Error);
}

TEST_CASE("both subwindows exist in the generated set for lengths up to 8") {
  for (int len = 2; len <= 8; ++len) {
    auto d = oracle::chain_dialogue(len, 1);
    auto t = extract_threads(d)[0];
    auto ws = generate_windows(t);
    std::set<std::pair<int, int>> have;
    for (const auto& w : ws) have.insert({w.offset, w.length});
    for (const auto& w : ws) {
      if (w.length < 2) continue;
      for (const auto& s : subwindows(w, t)) {
        CHECK(have.count({s.offset, s.length}) == 1);
        // and the index lookup agrees with the enumeration order
        CHECK(ws[window_index(s.offset, s.length, len)].offset == s.offset);
      }
    }
  }
}
