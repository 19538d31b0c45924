#include "dmca/run_config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "dmca/error.hpp"

namespace dmca {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw Error(ErrorKind::config,
                  "unknown config key '" + where + key + "'");
}

template <typename T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

RunConfig parse(const json& j) {
  RunConfig c;
  reject_unknown(j, {"seed", "paths", "schema", "encoder", "weights", "train",
                     "generator"},
                 "");
  take(j, "seed", c.seed);

  if (j.contains("paths")) {
    const json& p = j.at("paths");
    reject_unknown(p, {"corpus", "heldout", "checkpoint", "metrics",
                       "predictions", "report"},
                   "paths.");
    take(p, "corpus", c.paths.corpus);
    take(p, "heldout", c.paths.heldout);
    take(p, "checkpoint", c.paths.checkpoint);
    take(p, "metrics", c.paths.metrics);
    take(p, "predictions", c.paths.predictions);
    take(p, "report", c.paths.report);
  }

  if (j.contains("schema")) {
    const json& s = j.at("schema");
    reject_unknown(s, {"ent_labels", "pair_labels", "pol_labels"}, "schema.");
    auto def = TagSchema::reference();
    std::vector<std::string> ent = def.ent_labels, pair = def.pair_labels,
                             pol = def.pol_labels;
    take(s, "ent_labels", ent);
    take(s, "pair_labels", pair);
    take(s, "pol_labels", pol);
    c.schema = TagSchema::from_vocabs(ent, pair, pol);
  }

  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    reject_unknown(e, {"hidden_dim", "pair_dim", "max_window_tokens"},
                   "encoder.");
    take(e, "hidden_dim", c.encoder.hidden);
    take(e, "pair_dim", c.encoder.pair_dim);
    take(e, "max_window_tokens", c.encoder.max_window_tokens);
  }

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    reject_unknown(w, {"alpha", "eta", "zeta"}, "weights.");
    take(w, "alpha", c.weights.alpha);
    take(w, "eta", c.weights.eta);
    take(w, "zeta", c.weights.zeta);
    if (c.weights.alpha < 0 || c.weights.eta < 0 || c.weights.zeta < 0)
      throw Error(ErrorKind::config, "loss weights must be non-negative");
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"epochs", "learning_rate", "adam_beta1", "adam_beta2",
                       "adam_epsilon"},
                   "train.");
    take(t, "epochs", c.train.epochs);
    take(t, "learning_rate", c.train.learning_rate);
    take(t, "adam_beta1", c.train.adam_beta1);
    take(t, "adam_beta2", c.train.adam_beta2);
    take(t, "adam_epsilon", c.train.adam_epsilon);
    if (c.train.epochs < 1)
      throw Error(ErrorKind::config, "train.epochs must be >= 1");
  }

  if (j.contains("generator")) {
    const json& g = j.at("generator");
    reject_unknown(g, {"n_dialogues", "vocab_size", "max_utterances"},
                   "generator.");
    take(g, "n_dialogues", c.generator.n_dialogues);
    take(g, "vocab_size", c.generator.vocab_size);
    take(g, "max_utterances", c.generator.max_utterances);
  }

  c.train.seed = c.seed;
  return c;
}

json to_json(const RunConfig& c) {
  return json{
      {"seed", c.seed},
      {"paths",
       {{"corpus", c.paths.corpus},
        {"heldout", c.paths.heldout},
        {"checkpoint", c.paths.checkpoint},
        {"metrics", c.paths.metrics},
        {"predictions", c.paths.predictions},
        {"report", c.paths.report}}},
      {"schema",
       {{"ent_labels", c.schema.ent_labels},
        {"pair_labels", c.schema.pair_labels},
        {"pol_labels", c.schema.pol_labels}}},
      {"encoder",
       {{"hidden_dim", c.encoder.hidden},
        {"pair_dim", c.encoder.pair_dim},
        {"max_window_tokens", c.encoder.max_window_tokens}}},
      {"weights",
       {{"alpha", c.weights.alpha},
        {"eta", c.weights.eta},
        {"zeta", c.weights.zeta}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"learning_rate", c.train.learning_rate},
        {"adam_beta1", c.train.adam_beta1},
        {"adam_beta2", c.train.adam_beta2},
        {"adam_epsilon", c.train.adam_epsilon}}},
      {"generator",
       {{"n_dialogues", c.generator.n_dialogues},
        {"vocab_size", c.generator.vocab_size},
        {"max_utterances", c.generator.max_utterances}}}};
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("bad config JSON: ") + e.what());
  }
  try {
    return parse(j);
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config,
                std::string("bad config value: ") + e.what());
  }
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

void RunConfig::apply_override(const std::string& key_equals_value) {
  auto eq = key_equals_value.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorKind::config,
                "--set expects key=value, got '" + key_equals_value + "'");
  std::string key = key_equals_value.substr(0, eq);
  std::string value = key_equals_value.substr(eq + 1);

  json doc = json::parse(to_json_text());
  json* cursor = &doc;
  size_t start = 0;
  std::vector<std::string> parts;
  while (true) {
    size_t dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!cursor->contains(parts[i]))
      throw Error(ErrorKind::config, "unknown config key '" + key + "'");
    cursor = &(*cursor)[parts[i]];
  }
  if (!cursor->contains(parts.back()))
    throw Error(ErrorKind::config, "unknown config key '" + key + "'");

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // plain string
  }
  (*cursor)[parts.back()] = parsed;
  *this = from_json_text(doc.dump());
}

std::string RunConfig::to_json_text() const { return to_json(*this).dump(2); }

}  // namespace dmca
