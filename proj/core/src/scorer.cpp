#include "dmca/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "dmca/error.hpp"
#include "dmca/rng.hpp"

namespace dmca {

using nlohmann::json;

namespace {

const char* task_prefix(Task t) {
  switch (t) {
    case Task::ent: return "ent";
    case Task::pair: return "pair";
    case Task::pol: return "pol";
  }
  return "?";
}

void init_normal(double* p, size_t count, Rng& rng, double stddev) {
  for (size_t i = 0; i < count; ++i) p[i] = rng.next_normal(0.0, stddev);
}

}  // namespace

std::vector<std::string> collect_vocab(const std::vector<Dialogue>& corpus) {
  std::set<std::string> seen;
  for (const auto& d : corpus)
    for (const auto& u : d.utterances)
      for (const auto& t : u.tokens) seen.insert(t);
  return {seen.begin(), seen.end()};
}

Model Model::build(ModelDims dims, TagSchema schema,
                   std::vector<std::string> vocab_tokens, uint64_t seed) {
  Model m;
  m.dims = dims;
  m.dims.vocab = static_cast<int>(vocab_tokens.size());
  m.schema = std::move(schema);
  m.vocab = std::move(vocab_tokens);
  for (size_t i = 0; i < m.vocab.size(); ++i)
    m.token_ids.emplace(m.vocab[i], static_cast<int>(i));

  int d = m.dims.hidden;
  int dp = m.dims.pair_dim;
  m.embed = m.params.add("embed", m.dims.vocab, d);
  m.pos = m.params.add("pos", m.dims.max_window_tokens, d);
  m.wq = m.params.add("attn.wq", d, d);
  m.wk = m.params.add("attn.wk", d, d);
  m.wv = m.params.add("attn.wv", d, d);
  for (int t = 0; t < kNumTasks; ++t) {
    int k = m.schema.k(static_cast<Task>(t));
    std::string p = task_prefix(static_cast<Task>(t));
    m.task[t].head_w = m.params.add(p + ".head_w", d, k * dp);
    m.task[t].head_b = m.params.add(p + ".head_b", 1, k * dp);
    m.task[t].tail_w = m.params.add(p + ".tail_w", d, k * dp);
    m.task[t].tail_b = m.params.add(p + ".tail_b", 1, k * dp);
    m.task[t].cls_b = m.params.add(p + ".cls_b", 1, k);
  }

  Rng rng(seed);
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  init_normal(m.params.values(m.embed), m.params.entry(m.embed).count(), rng, 0.5);
  init_normal(m.params.values(m.pos), m.params.entry(m.pos).count(), rng, 0.5);
  for (int e : {m.wq, m.wk, m.wv})
    init_normal(m.params.values(e), m.params.entry(e).count(), rng, inv_sqrt_d);
  for (int t = 0; t < kNumTasks; ++t) {
    for (int e : {m.task[t].head_w, m.task[t].tail_w})
      init_normal(m.params.values(e), m.params.entry(e).count(), rng,
                  inv_sqrt_d);
    // projection and class biases start at zero
  }
  return m;
}

int Model::token_id(const std::string& tok) const {
  auto it = token_ids.find(tok);
  if (it == token_ids.end())
    throw Error(ErrorKind::vocab, "token '" + tok + "' is not in the vocabulary");
  return it->second;
}

// ---------------------------------------------------------------------------
// checkpoint io
// ---------------------------------------------------------------------------

void Model::save_checkpoint(const std::string& path) const {
  json tensors = json::object();
  for (int i = 0; i < params.entry_count(); ++i) {
    const auto& e = params.entry(i);
    const double* p = params.value().data() + e.offset;
    tensors[e.name] = json{{"rows", e.rows},
                           {"cols", e.cols},
                           {"data", std::vector<double>(p, p + e.count())}};
  }
  json j{{"format", "dmca-checkpoint"},
         {"version", 1},
         {"dims",
          {{"hidden", dims.hidden},
           {"pair_dim", dims.pair_dim},
           {"max_window_tokens", dims.max_window_tokens}}},
         {"schema",
          {{"ent_labels", schema.ent_labels},
           {"pair_labels", schema.pair_labels},
           {"pol_labels", schema.pol_labels}}},
         {"vocab", vocab},
         {"tensors", tensors}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write checkpoint " + path);
  out << j.dump() << '\n';
}

Model Model::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse,
                path + ": malformed checkpoint: " + e.what());
  }
  if (j.value("format", "") != "dmca-checkpoint" || j.value("version", 0) != 1)
    throw Error(ErrorKind::parse, path + ": not a v1 checkpoint");

  ModelDims dims;
  dims.hidden = j.at("dims").at("hidden").get<int>();
  dims.pair_dim = j.at("dims").at("pair_dim").get<int>();
  dims.max_window_tokens = j.at("dims").at("max_window_tokens").get<int>();
  TagSchema schema = TagSchema::from_vocabs(
      j.at("schema").at("ent_labels").get<std::vector<std::string>>(),
      j.at("schema").at("pair_labels").get<std::vector<std::string>>(),
      j.at("schema").at("pol_labels").get<std::vector<std::string>>());
  auto vocab = j.at("vocab").get<std::vector<std::string>>();

  Model m = Model::build(dims, schema, vocab, /*seed=*/0);
  for (int i = 0; i < m.params.entry_count(); ++i) {
    const auto& e = m.params.entry(i);
    const json& t = j.at("tensors").at(e.name);
    if (t.at("rows").get<int>() != e.rows || t.at("cols").get<int>() != e.cols)
      throw Error(ErrorKind::parse,
                  path + ": tensor " + e.name + " has unexpected shape");
    auto data = t.at("data").get<std::vector<double>>();
    if (data.size() != e.count())
      throw Error(ErrorKind::parse,
                  path + ": tensor " + e.name + " has unexpected size");
    std::copy(data.begin(), data.end(), m.params.value().begin() + e.offset);
  }
  return m;
}

// ---------------------------------------------------------------------------
// plain forward
// ---------------------------------------------------------------------------

namespace {

std::vector<int> window_token_ids(const Window& w, const Dialogue& d,
                                  const Model& m) {
  if (static_cast<int>(w.token_map.size()) > m.dims.max_window_tokens)
    throw Error(ErrorKind::invalid_argument,
                "window of " + std::to_string(w.token_map.size()) +
                    " tokens exceeds max_window_tokens=" +
                    std::to_string(m.dims.max_window_tokens));
  std::vector<int> ids;
  ids.reserve(w.token_map.size());
  for (int g : w.token_map) ids.push_back(m.token_id(d.token(g)));
  return ids;
}

std::vector<int> iota(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

Tensor gather(ConstMat table, const std::vector<int>& rows) {
  Tensor out(static_cast<int>(rows.size()), table.cols);
  for (size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < table.cols; ++c)
      out.at(static_cast<int>(r), c) = table.at(rows[r], c);
  return out;
}

}  // namespace

Tensor encode_window(const Window& w, const Dialogue& d, const Model& m) {
  auto ids = window_token_ids(w, d, m);
  int n = static_cast<int>(ids.size());
  Tensor x = add(gather(m.params.view(m.embed), ids),
                 gather(m.params.view(m.pos), iota(n)));
  Tensor q = matmul(x, m.params.view(m.wq));
  Tensor k = matmul(x, m.params.view(m.wk));
  Tensor v = matmul(x, m.params.view(m.wv));
  Tensor att = softmax_rows(
      scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(m.dims.hidden))));
  return add(x, matmul(att, v));
}

LogitGrid score_pairs(ConstMat reps, const Model& m, Task task,
                      std::vector<int> region) {
  if (static_cast<size_t>(reps.rows) != region.size())
    throw Error(ErrorKind::region,
                "score_pairs: representation rows must match region size");
  int ti = static_cast<int>(task);
  int k = m.schema.k(task);
  int dp = m.dims.pair_dim;
  Tensor hh = add_row_broadcast(matmul(reps, m.params.view(m.task[ti].head_w)),
                                m.params.view(m.task[ti].head_b));
  Tensor ht = add_row_broadcast(matmul(reps, m.params.view(m.task[ti].tail_w)),
                                m.params.view(m.task[ti].tail_b));
  ConstMat cb = m.params.view(m.task[ti].cls_b);

  int n = reps.rows;
  LogitGrid out;
  out.task = task;
  out.region = std::move(region);
  out.logits = Tensor(n * n, k);
  for (int kk = 0; kk < k; ++kk) {
    int base = kk * dp;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = cb.at(0, kk);
        for (int dd = 0; dd < dp; ++dd)
          s += hh.at(i, base + dd) * ht.at(j, base + dd);
        out.logits.at(i * n + j, kk) = s;
      }
    }
  }
  return out;
}

double cross_entropy(const LogitGrid& grid, const LabelGrid& labels,
                     bool normalize, const std::vector<uint8_t>* mask) {
  if (grid.region != labels.region)
    throw Error(ErrorKind::region, "cross_entropy: region mismatch");
  const Tensor& g = grid.logits;
  int k = g.cols;
  double total = 0.0;
  for (int r = 0; r < g.rows; ++r) {
    if (mask && !(*mask)[r]) continue;
    int y = labels.labels[r];
    if (y < 0 || y >= k)
      throw Error(ErrorKind::invalid_argument,
                  "cross_entropy: label " + std::to_string(y) +
                      " out of range for K=" + std::to_string(k));
    double mx = g.at(r, 0);
    for (int c = 1; c < k; ++c) mx = std::max(mx, g.at(r, c));
    double lse = 0.0;
    for (int c = 0; c < k; ++c) lse += std::exp(g.at(r, c) - mx);
    total += std::log(lse) + mx - g.at(r, y);
  }
  if (normalize) total /= static_cast<double>(g.rows);
  return total;
}

// ---------------------------------------------------------------------------
// taped forward
// ---------------------------------------------------------------------------

VarId encode_window_taped(Tape& tape, const Window& w, const Dialogue& d,
                          const Model& m) {
  auto ids = window_token_ids(w, d, m);
  int n = static_cast<int>(ids.size());
  VarId x = tape.add(tape.gather_rows(tape.param(m.embed), ids),
                     tape.gather_rows(tape.param(m.pos), iota(n)));
  VarId q = tape.matmul(x, tape.param(m.wq));
  VarId k = tape.matmul(x, tape.param(m.wk));
  VarId v = tape.matmul(x, tape.param(m.wv));
  VarId att = tape.softmax_rows(tape.scale(
      tape.matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(m.dims.hidden))));
  return tape.add(x, tape.matmul(att, v));
}

VarId score_pairs_taped(Tape& tape, VarId reps, const Model& m, Task task) {
  int ti = static_cast<int>(task);
  int k = m.schema.k(task);
  int dp = m.dims.pair_dim;
  VarId hh = tape.add_row(tape.matmul(reps, tape.param(m.task[ti].head_w)),
                          tape.param(m.task[ti].head_b));
  VarId ht = tape.add_row(tape.matmul(reps, tape.param(m.task[ti].tail_w)),
                          tape.param(m.task[ti].tail_b));
  return tape.pair_bilinear(hh, ht, tape.param(m.task[ti].cls_b), k, dp);
}

VarId cross_entropy_taped(Tape& tape, VarId grid, const LabelGrid& labels,
                          bool normalize, const std::vector<uint8_t>* mask) {
  const Tensor& g = tape.value(grid);
  if (g.rows != labels.n() * labels.n())
    throw Error(ErrorKind::region, "cross_entropy_taped: shape mismatch");
  double divisor = normalize ? static_cast<double>(g.rows) : 1.0;
  return tape.cross_entropy(grid, labels.labels, divisor,
                            mask ? *mask : std::vector<uint8_t>{});
}

}  // namespace dmca
