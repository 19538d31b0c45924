#include "dmca/corpus.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dmca/error.hpp"

namespace dmca {

using nlohmann::json;

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::pos: return "pos";
    case Polarity::neg: return "neg";
    case Polarity::other: return "other";
  }
  return "?";
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "pos") return Polarity::pos;
  if (s == "neg") return Polarity::neg;
  if (s == "other") return Polarity::other;
  throw Error(ErrorKind::parse, "unknown polarity '" + s + "'");
}

int Dialogue::token_count() const {
  int n = 0;
  for (const auto& u : utterances) n += static_cast<int>(u.tokens.size());
  return n;
}

std::vector<int> Dialogue::token_offsets() const {
  std::vector<int> off(utterances.size() + 1, 0);
  for (size_t i = 0; i < utterances.size(); ++i)
    off[i + 1] = off[i] + static_cast<int>(utterances[i].tokens.size());
  return off;
}

int Dialogue::utterance_of_token(int token_index) const {
  auto off = token_offsets();
  for (size_t i = 0; i < utterances.size(); ++i)
    if (token_index >= off[i] && token_index < off[i + 1])
      return static_cast<int>(i);
  throw Error(ErrorKind::span, "token index " + std::to_string(token_index) +
                                   " out of range in " + doc_id);
}

std::vector<std::string> Dialogue::all_tokens() const {
  std::vector<std::string> out;
  out.reserve(token_count());
  for (const auto& u : utterances)
    out.insert(out.end(), u.tokens.begin(), u.tokens.end());
  return out;
}

const std::string& Dialogue::token(int global_index) const {
  auto off = token_offsets();
  int u = utterance_of_token(global_index);
  return utterances[u].tokens[global_index - off[u]];
}

namespace {

std::string join_tokens(const Dialogue& d, int start, int end) {
  std::string out;
  for (int i = start; i < end; ++i) {
    if (i > start) out += ' ';
    out += d.token(i);
  }
  return out;
}

void validate_span(const Dialogue& d, const Span& s, const char* role) {
  int n = d.token_count();
  if (s.start < 0 || s.start >= s.end || s.end > n)
    throw Error(ErrorKind::span,
                d.doc_id + ": " + role + " span [" + std::to_string(s.start) +
                    "," + std::to_string(s.end) + ") out of range (N=" +
                    std::to_string(n) + ")");
  if (d.utterance_of_token(s.start) != d.utterance_of_token(s.end - 1))
    throw Error(ErrorKind::span, d.doc_id + ": " + role +
                                     " span crosses an utterance boundary");
  std::string joined = join_tokens(d, s.start, s.end);
  if (!s.text.empty() && s.text != joined)
    throw Error(ErrorKind::span, d.doc_id + ": " + role + " span text '" +
                                     s.text + "' does not match tokens '" +
                                     joined + "'");
}

}  // namespace

void validate_dialogue(const Dialogue& d) {
  if (d.utterances.empty())
    throw Error(ErrorKind::reply_graph, d.doc_id + ": no utterances");
  for (size_t i = 0; i < d.utterances.size(); ++i) {
    const auto& u = d.utterances[i];
    if (u.id != static_cast<int>(i))
      throw Error(ErrorKind::reply_graph,
                  d.doc_id + ": utterance ids must be 0..|D|-1 without gaps");
    if (i == 0) {
      if (u.reply_to != kNoReply)
        throw Error(ErrorKind::reply_graph,
                    d.doc_id + ": utterance 0 must be the root (reply_to=-1)");
    } else {
      if (u.reply_to == kNoReply)
        throw Error(ErrorKind::reply_graph,
                    d.doc_id + ": multiple roots (utterance " +
                        std::to_string(i) + " has reply_to=-1)");
      if (u.reply_to < 0 || u.reply_to >= u.id)
        throw Error(ErrorKind::reply_graph,
                    d.doc_id + ": reply link of utterance " +
                        std::to_string(i) +
                        " must point to an earlier utterance "
                        "(forward links would allow cycles)");
    }
  }
  for (const auto& q : d.quads) {
    validate_span(d, q.target, "target");
    validate_span(d, q.aspect, "aspect");
    validate_span(d, q.opinion, "opinion");
    if (q.target == q.aspect || q.target == q.opinion || q.aspect == q.opinion)
      throw Error(ErrorKind::span,
                  d.doc_id + ": quad spans must be pairwise non-identical");
  }
}

namespace {

Span span_from_json(const json& arr, const json& text) {
  if (!arr.is_array() || arr.size() != 2)
    throw Error(ErrorKind::parse, "span must be a [start,end] pair");
  Span s;
  s.start = arr[0].get<int>();
  s.end = arr[1].get<int>();
  s.text = text.is_string() ? text.get<std::string>() : std::string();
  return s;
}

Quad quad_from_json(const json& j) {
  Quad q;
  q.target = span_from_json(j.at("target"), j.value("target_text", json()));
  q.aspect = span_from_json(j.at("aspect"), j.value("aspect_text", json()));
  q.opinion = span_from_json(j.at("opinion"), j.value("opinion_text", json()));
  q.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  return q;
}

json quad_to_json(const Quad& q) {
  return json{{"target", {q.target.start, q.target.end}},
              {"aspect", {q.aspect.start, q.aspect.end}},
              {"opinion", {q.opinion.start, q.opinion.end}},
              {"polarity", to_string(q.polarity)},
              {"target_text", q.target.text},
              {"aspect_text", q.aspect.text},
              {"opinion_text", q.opinion.text}};
}

Dialogue dialogue_from_json(const json& j) {
  Dialogue d;
  d.doc_id = j.at("doc_id").get<std::string>();
  for (const auto& ju : j.at("utterances")) {
    Utterance u;
    u.id = ju.at("id").get<int>();
    u.speaker = ju.at("speaker").get<int>();
    u.reply_to = ju.at("reply_to").get<int>();
    u.tokens = ju.at("tokens").get<std::vector<std::string>>();
    d.utterances.push_back(std::move(u));
  }
  if (j.contains("quads"))
    for (const auto& jq : j.at("quads")) d.quads.push_back(quad_from_json(jq));
  return d;
}

json dialogue_to_json(const Dialogue& d) {
  json utts = json::array();
  for (const auto& u : d.utterances)
    utts.push_back(json{{"id", u.id},
                        {"speaker", u.speaker},
                        {"reply_to", u.reply_to},
                        {"tokens", u.tokens}});
  json quads = json::array();
  for (const auto& q : d.quads) quads.push_back(quad_to_json(q));
  return json{{"doc_id", d.doc_id}, {"utterances", utts}, {"quads", quads}};
}

}  // namespace

std::vector<Dialogue> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open corpus file " + path);
  std::vector<Dialogue> corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                        ": malformed JSON: " + e.what());
    }
    Dialogue d;
    try {
      d = dialogue_from_json(j);
    } catch (const Error&) {
      throw;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                        ": bad dialogue document: " + e.what());
    }
    validate_dialogue(d);
    // fill derived span text when the file omitted it
    for (auto& q : d.quads) {
      for (Span* s : {&q.target, &q.aspect, &q.opinion})
        if (s->text.empty()) s->text = join_tokens(d, s->start, s->end);
    }
    corpus.push_back(std::move(d));
  }
  return corpus;
}

void save_corpus(const std::vector<Dialogue>& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write corpus file " + path);
  for (const auto& d : corpus) out << dialogue_to_json(d).dump() << '\n';
}

std::vector<DocQuads> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open prediction file " + path);
  std::vector<DocQuads> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                        ": malformed JSON: " + e.what());
    }
    DocQuads p;
    try {
      p.doc_id = j.at("doc_id").get<std::string>();
      if (j.contains("quads"))
        for (const auto& jq : j.at("quads"))
          p.quads.push_back(quad_from_json(jq));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, path + ":" + std::to_string(line_no) +
                                        ": bad prediction document: " +
                                        e.what());
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

void save_predictions(const std::vector<DocQuads>& preds,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write prediction file " + path);
  for (const auto& p : preds) {
    json quads = json::array();
    for (const auto& q : p.quads) quads.push_back(quad_to_json(q));
    out << json{{"doc_id", p.doc_id}, {"quads", quads}}.dump() << '\n';
  }
}

}  // namespace dmca
