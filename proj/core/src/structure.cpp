#include "dmca/structure.hpp"

#include <algorithm>

#include "dmca/error.hpp"

namespace dmca {

namespace {

Window make_window(const Thread& t, int offset, int length) {
  Window w;
  w.thread_id = t.thread_id;
  w.offset = offset;
  w.length = length;
  int b = t.utt_token_begin[offset];
  int e = t.utt_token_begin[offset + length];
  w.token_map.assign(t.token_map.begin() + b, t.token_map.begin() + e);
  return w;
}

}  // namespace

std::vector<Thread> extract_threads(const Dialogue& d) {
  validate_dialogue(d);
  auto offsets = d.token_offsets();
  int n_utts = static_cast<int>(d.utterances.size());

  // children lists; reply links point backward so subtrees are well defined
  std::vector<std::vector<int>> children(n_utts);
  for (int i = 1; i < n_utts; ++i)
    children[d.utterances[i].reply_to].push_back(i);

  auto collect_subtree = [&](int root) {
    std::vector<int> ids;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      ids.push_back(u);
      for (int c : children[u]) stack.push_back(c);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  std::vector<Thread> threads;
  auto finish = [&](std::vector<int> ids) {
    Thread t;
    t.thread_id = static_cast<int>(threads.size());
    t.utterance_ids = std::move(ids);
    t.utt_token_begin.push_back(0);
    for (int uid : t.utterance_ids) {
      for (int g = offsets[uid]; g < offsets[uid + 1]; ++g)
        t.token_map.push_back(g);
      t.utt_token_begin.push_back(static_cast<int>(t.token_map.size()));
    }
    threads.push_back(std::move(t));
  };

  if (children[0].empty()) {
    finish({0});
    return threads;
  }
  for (int child : children[0]) {
    std::vector<int> ids{0};
    auto sub = collect_subtree(child);
    ids.insert(ids.end(), sub.begin(), sub.end());
    finish(std::move(ids));
  }
  return threads;
}

std::vector<Window> generate_windows(const Thread& t) {
  std::vector<Window> windows;
  int len = t.length();
  windows.reserve(static_cast<size_t>(len) * (len + 1) / 2);
  for (int l = 1; l <= len; ++l)
    for (int off = 0; off + l <= len; ++off)
      windows.push_back(make_window(t, off, l));
  return windows;
}

std::vector<Window> subwindows(const Window& w, const Thread& t) {
  if (w.length < 2)
    throw Error(ErrorKind::invalid_argument,
                "subwindows: window of length 1 has no sub-windows");
  return {make_window(t, w.offset, w.length - 1),
          make_window(t, w.offset + 1, w.length - 1)};
}

int window_index(int offset, int length, int thread_length) {
  if (length < 1 || offset < 0 || offset + length > thread_length)
    throw Error(ErrorKind::invalid_argument, "window_index: out of range");
  int base = 0;
  for (int l = 1; l < length; ++l) base += thread_length - l + 1;
  return base + offset;
}

}  // namespace dmca
