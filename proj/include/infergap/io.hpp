// SPDX-License-Identifier: MIT
//
// File formats: JSON scenario files and plain-text weight bundles.
//
// All parsers are strict: unknown fields are rejected so that a typo in a
// scenario file fails loudly instead of silently changing the experiment.
// Scenario files may reference a knowledge scenario either inline (an
// object) or by path (a string, resolved relative to the referencing file).
//
// Weight bundles are directories: `manifest.json` lists the dimensions and
// the vocabulary file; each matrix lives in its own text file with a
// `rows cols` header line followed by row-major values.  The unembedding is
// never stored -- it is constructed as the transpose of the embedding.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infergap/error.hpp"
#include "infergap/knowledge.hpp"
#include "infergap/mechanism.hpp"
#include "infergap/microtransformer.hpp"
#include "infergap/scoring.hpp"

namespace infergap {

using json = nlohmann::json;

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(errc::parse, "malformed JSON in '" + path.string() + "': " + e.what());
  }
  return j;
}

inline void require_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& what) {
  if (!j.is_object()) fail(errc::parse, what + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const std::string& k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) fail(errc::parse, what + ": unknown field '" + item.key() + "'");
  }
}

inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) fail(errc::parse, what + ": missing field '" + key + "'");
  return *it;
}

inline FactSet parse_fact_list(const KnowledgeSpace& space, const json& j,
                               const std::string& what) {
  if (!j.is_array()) fail(errc::parse, what + ": expected an array of fact names");
  FactSet out = 0;
  for (const json& item : j) {
    if (!item.is_string()) fail(errc::parse, what + ": fact names must be strings");
    const auto idx = space.find(item.get<std::string>());
    if (!idx)
      fail(errc::parse, what + ": unknown fact '" + item.get<std::string>() + "'");
    out |= FactSet{1} << *idx;
  }
  return out;
}

struct KnowledgeScenario {
  KnowledgeSpace space;
  RuleSet rules;
  Context ctx;
};

inline KnowledgeScenario parse_knowledge_scenario(const json& j) {
  require_keys(j, {"facts", "rules", "context"}, "knowledge scenario");
  KnowledgeScenario scenario;
  const json& facts = require_field(j, "facts", "knowledge scenario");
  if (!facts.is_array()) fail(errc::parse, "knowledge scenario: 'facts' must be an array");
  for (const json& f : facts) {
    if (!f.is_string()) fail(errc::parse, "knowledge scenario: fact names must be strings");
    scenario.space.facts.push_back(f.get<std::string>());
  }
  scenario.space.validate();

  const json& rules = require_field(j, "rules", "knowledge scenario");
  if (!rules.is_array()) fail(errc::parse, "knowledge scenario: 'rules' must be an array");
  for (const json& jr : rules) {
    require_keys(jr, {"id", "cost", "entries"}, "rule");
    Rule rule;
    const json& id = require_field(jr, "id", "rule");
    if (!id.is_string()) fail(errc::parse, "rule: 'id' must be a string");
    rule.id = id.get<std::string>();
    const json& cost = require_field(jr, "cost", "rule");
    if (!cost.is_number_integer() || cost.get<int>() < 1)
      fail(errc::parse, "rule '" + rule.id + "': 'cost' must be a positive integer");
    rule.cost = cost.get<int>();
    const json& entries = require_field(jr, "entries", "rule");
    if (!entries.is_array())
      fail(errc::parse, "rule '" + rule.id + "': 'entries' must be an array");
    for (const json& je : entries) {
      require_keys(je, {"premises", "conclusions"}, "rule entry");
      RuleEntry entry;
      entry.premises = parse_fact_list(
          scenario.space, require_field(je, "premises", "rule entry"), "rule entry premises");
      entry.conclusions =
          parse_fact_list(scenario.space, require_field(je, "conclusions", "rule entry"),
                          "rule entry conclusions");
      rule.entries.push_back(entry);
    }
    scenario.rules.rules.push_back(rule);
  }
  scenario.rules.validate(scenario.space);

  const json& ctx = require_field(j, "context", "knowledge scenario");
  require_keys(ctx, {"query", "truth"}, "context");
  scenario.ctx.query =
      parse_fact_list(scenario.space, require_field(ctx, "query", "context"), "context query");
  scenario.ctx.truth =
      parse_fact_list(scenario.space, require_field(ctx, "truth", "context"), "context truth");
  return scenario;
}

inline KnowledgeScenario load_knowledge_scenario(const std::filesystem::path& path) {
  return parse_knowledge_scenario(load_json_file(path));
}

// A `knowledge` field is either an inline scenario object or a path string
// resolved relative to the referencing file.
inline KnowledgeScenario resolve_knowledge_field(const json& j,
                                                 const std::filesystem::path& base_dir) {
  if (j.is_string()) {
    std::filesystem::path ref(j.get<std::string>());
    if (ref.is_relative()) ref = base_dir / ref;
    return load_knowledge_scenario(ref);
  }
  if (j.is_object()) return parse_knowledge_scenario(j);
  fail(errc::parse, "'knowledge' must be a scenario object or a file path string");
}

struct AuctionScenario {
  AuctionInstance instance;
  bool budget_given = false;  // file supplied a budget (CLI flag still wins)
};

inline AuctionScenario parse_auction_scenario(const json& j,
                                              const std::filesystem::path& base_dir) {
  require_keys(j, {"knowledge", "agents", "responses", "budget"}, "auction scenario");
  AuctionScenario scenario;
  const KnowledgeScenario k =
      resolve_knowledge_field(require_field(j, "knowledge", "auction scenario"), base_dir);
  scenario.instance.space = k.space;
  scenario.instance.rules = k.rules;
  scenario.instance.ctx = k.ctx;

  const json& agents = require_field(j, "agents", "auction scenario");
  if (!agents.is_array() || agents.empty())
    fail(errc::parse, "auction scenario: 'agents' must be a nonempty array");
  for (const json& ja : agents) {
    require_keys(ja, {"id", "knowledge"}, "agent");
    AgentSpec agent;
    const json& id = require_field(ja, "id", "agent");
    if (!id.is_string()) fail(errc::parse, "agent: 'id' must be a string");
    agent.id = id.get<std::string>();
    agent.knowledge = parse_fact_list(
        scenario.instance.space, require_field(ja, "knowledge", "agent"), "agent knowledge");
    scenario.instance.agents.push_back(agent);
  }

  if (j.contains("responses")) {
    const json& responses = j["responses"];
    if (!responses.is_array() || responses.empty())
      fail(errc::parse, "auction scenario: 'responses' must be a nonempty array when given");
    for (const json& jr : responses)
      scenario.instance.responses.push_back(
          parse_fact_list(scenario.instance.space, jr, "response"));
  }
  if (j.contains("budget")) {
    if (!j["budget"].is_number_integer() || j["budget"].get<int>() < 0)
      fail(errc::parse, "auction scenario: 'budget' must be a nonnegative integer");
    scenario.instance.budget = j["budget"].get<int>();
    scenario.budget_given = true;
  }
  return scenario;
}

inline AuctionScenario load_auction_scenario(const std::filesystem::path& path) {
  return parse_auction_scenario(load_json_file(path), path.parent_path());
}

struct BeliefScenario {
  BeliefProfile profile;
  ScoringRule rule = ScoringRule::log_loss;
  std::size_t outcome = 0;
};

inline BeliefScenario parse_belief_scenario(const json& j) {
  require_keys(j, {"weights", "beliefs", "rule", "outcome"}, "belief scenario");
  BeliefScenario scenario;
  const json& weights = require_field(j, "weights", "belief scenario");
  if (!weights.is_array()) fail(errc::parse, "belief scenario: 'weights' must be an array");
  for (const json& w : weights) {
    if (!w.is_number()) fail(errc::parse, "belief scenario: weights must be numbers");
    scenario.profile.weights.push_back(w.get<double>());
  }
  const json& beliefs = require_field(j, "beliefs", "belief scenario");
  if (!beliefs.is_array()) fail(errc::parse, "belief scenario: 'beliefs' must be an array");
  for (const json& b : beliefs) {
    if (!b.is_array())
      fail(errc::parse, "belief scenario: each belief must be an array of numbers");
    Vec belief;
    for (const json& e : b) {
      if (!e.is_number()) fail(errc::parse, "belief scenario: belief entries must be numbers");
      belief.push_back(e.get<double>());
    }
    scenario.profile.beliefs.push_back(belief);
  }
  const json& rule = require_field(j, "rule", "belief scenario");
  if (!rule.is_string()) fail(errc::parse, "belief scenario: 'rule' must be a string");
  scenario.rule = scoring_rule_from_string(rule.get<std::string>());
  const json& outcome = require_field(j, "outcome", "belief scenario");
  if (!outcome.is_number_integer() || outcome.get<int>() < 0)
    fail(errc::parse, "belief scenario: 'outcome' must be a nonnegative integer");
  scenario.outcome = outcome.get<std::size_t>();
  validate(scenario.profile);
  if (scenario.outcome >= scenario.profile.beliefs.front().size())
    fail(errc::parse, "belief scenario: outcome index out of range");
  return scenario;
}

inline BeliefScenario load_belief_scenario(const std::filesystem::path& path) {
  return parse_belief_scenario(load_json_file(path));
}

struct TraceScenario {
  KnowledgeScenario knowledge;
  CotTrace trace;
  bool budget_given = false;
  int budget = 1;
};

inline TraceScenario parse_trace_scenario(const json& j,
                                          const std::filesystem::path& base_dir) {
  require_keys(j, {"knowledge", "baseline", "steps", "budget"}, "trace scenario");
  TraceScenario scenario;
  scenario.knowledge =
      resolve_knowledge_field(require_field(j, "knowledge", "trace scenario"), base_dir);
  scenario.trace.baseline =
      parse_fact_list(scenario.knowledge.space,
                      require_field(j, "baseline", "trace scenario"), "trace baseline");
  const json& steps = require_field(j, "steps", "trace scenario");
  if (!steps.is_array()) fail(errc::parse, "trace scenario: 'steps' must be an array");
  for (const json& s : steps)
    scenario.trace.steps.push_back(parse_fact_list(scenario.knowledge.space, s, "trace step"));
  if (j.contains("budget")) {
    if (!j["budget"].is_number_integer() || j["budget"].get<int>() < 0)
      fail(errc::parse, "trace scenario: 'budget' must be a nonnegative integer");
    scenario.budget = j["budget"].get<int>();
    scenario.budget_given = true;
  }
  return scenario;
}

inline TraceScenario load_trace_scenario(const std::filesystem::path& path) {
  return parse_trace_scenario(load_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Weight bundles.

inline Matrix load_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open '" + path.string() + "'");
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(in >> rows >> cols) || rows == 0 || cols == 0)
    fail(errc::parse, "'" + path.string() + "': expected a 'rows cols' header");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i)
    if (!(in >> m.a[i]))
      fail(errc::parse, "'" + path.string() + "': expected " + std::to_string(rows * cols) +
                            " values after the header");
  double extra = 0.0;
  if (in >> extra) fail(errc::parse, "'" + path.string() + "': trailing values after matrix");
  m.require_finite(path.string());
  return m;
}

inline std::vector<std::string> load_vocab_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open '" + path.string() + "'");
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) vocab.push_back(line);
  }
  if (vocab.empty()) fail(errc::parse, "'" + path.string() + "': empty vocabulary");
  return vocab;
}

inline std::size_t manifest_count(const json& j, const std::string& key) {
  const json& v = require_field(j, key, "weight manifest");
  if (!v.is_number_integer() || v.get<int>() < 1)
    fail(errc::parse, "weight manifest: '" + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

inline TransformerSpec load_transformer(const std::filesystem::path& dir) {
  const json manifest = load_json_file(dir / "manifest.json");
  require_keys(manifest,
               {"d_model", "heads", "d_k", "d_v", "d_ff", "vocab_size", "max_seq", "vocab_file"},
               "weight manifest");
  TransformerSpec spec;
  spec.d_model = manifest_count(manifest, "d_model");
  spec.d_k = manifest_count(manifest, "d_k");
  spec.d_v = manifest_count(manifest, "d_v");
  spec.d_ff = manifest_count(manifest, "d_ff");
  spec.max_seq = manifest_count(manifest, "max_seq");
  const std::size_t n_heads = manifest_count(manifest, "heads");
  const std::size_t vocab_size = manifest_count(manifest, "vocab_size");
  const json& vocab_file = require_field(manifest, "vocab_file", "weight manifest");
  if (!vocab_file.is_string())
    fail(errc::parse, "weight manifest: 'vocab_file' must be a string");
  spec.vocab = load_vocab_file(dir / vocab_file.get<std::string>());
  if (spec.vocab.size() != vocab_size)
    fail(errc::parse, "weight manifest: vocab_size does not match the vocabulary file");

  spec.embedding = load_matrix_file(dir / "E.mat");
  spec.unembedding = transpose(spec.embedding);
  for (std::size_t h = 1; h <= n_heads; ++h) {
    const std::string suffix = ".h" + std::to_string(h) + ".mat";
    HeadWeights head;
    head.w_q = load_matrix_file(dir / ("WQ" + suffix));
    head.w_k = load_matrix_file(dir / ("WK" + suffix));
    head.w_v = load_matrix_file(dir / ("WV" + suffix));
    head.w_o = load_matrix_file(dir / ("WO" + suffix));
    spec.heads.push_back(head);
  }
  spec.w1 = load_matrix_file(dir / "W1.mat");
  spec.w2 = load_matrix_file(dir / "W2.mat");
  const Matrix b1 = load_matrix_file(dir / "b1.mat");
  const Matrix b2 = load_matrix_file(dir / "b2.mat");
  if (b1.rows != 1 || b2.rows != 1)
    fail(errc::parse, "weight bundle: biases must be 1-row matrices");
  spec.b1 = b1.a;
  spec.b2 = b2.a;
  spec.validate();
  return spec;
}

// Token sequences arrive either as whitespace-separated vocabulary words or
// as bare indices.
inline std::vector<std::size_t> parse_tokens(const TransformerSpec& spec,
                                             const std::string& text) {
  std::istringstream in(text);
  std::vector<std::size_t> out;
  std::string word;
  bool all_digits = true;
  std::vector<std::string> words;
  while (in >> word) {
    words.push_back(word);
    for (char c : word)
      if (c < '0' || c > '9') all_digits = false;
  }
  if (words.empty()) fail(errc::invalid_argument, "empty token sequence");
  if (all_digits) {
    for (const std::string& w : words) out.push_back(std::stoul(w));
    return out;
  }
  return tokens_from_words(spec, words);
}

}  // namespace infergap
