// SPDX-License-Identifier: MIT
//
// infergap command-line driver.
//
// One subcommand per experiment kind; every run loads its inputs, executes
// the corresponding engine, and emits a structured report (canonical JSON by
// default, CSV or text on request).  Reports carry the scenario echo, the
// result payload, and a set of built-in invariant checks; the process exits
// 0 when all checks hold, 1 when one fails, and a per-error-kind code (2-7)
// on parse/validation/engine errors.  `selftest` needs no input files: it
// re-runs the golden trace checks and the reduced property sweeps against
// values embedded in the binary.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infergap/infergap.hpp"

namespace ig = infergap;
using ig::json;
using ig::Vec;

namespace {

struct CommonOpts {
  std::string format = "json";
  std::string out;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--format", opts.format, "output format: json, csv, or text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_option("--out", opts.out, "write the report to this file instead of stdout");
  sub->add_option("--seed", opts.seed, "seed for randomized scenarios (default 0)");
}

json make_report(const std::string& kind, const json& scenario, const json& result,
                 const json& checks) {
  bool ok = true;
  for (const auto& item : checks.items())
    if (!item.value().get<bool>()) ok = false;
  json report;
  report["tool"] = ig::kToolName;
  report["version"] = ig::kToolVersion;
  report["kind"] = kind;
  report["scenario"] = scenario;
  report["result"] = result;
  report["checks"] = checks;
  report["ok"] = ok;
  return report;
}

// Renders and writes the report; returns the process exit code.
int finalize(const CommonOpts& opts, const json& report, const std::string& csv) {
  std::string payload;
  if (opts.format == "json") {
    payload = ig::canonical_json(report);
  } else if (opts.format == "text") {
    payload = ig::to_text(report);
  } else {
    if (csv.empty())
      ig::fail(ig::errc::invalid_argument,
               "csv output is not defined for this report kind");
    payload = csv;
  }
  if (opts.out.empty()) {
    std::cout << payload;
  } else {
    std::ofstream f(opts.out, std::ios::binary);
    if (!f) ig::fail(ig::errc::io, "cannot open '" + opts.out + "' for writing");
    f << payload;
    if (!f) ig::fail(ig::errc::io, "failed writing '" + opts.out + "'");
  }
  return report["ok"].get<bool>() ? 0 : 1;
}

json facts_json(const ig::KnowledgeSpace& space, ig::FactSet s) {
  json out = json::array();
  for (const std::string& name : space.names_of(s)) out.push_back(name);
  return out;
}

json ragged_json(const std::vector<Vec>& rows) {
  json out = json::array();
  for (const Vec& r : rows) out.push_back(ig::json_vec(r));
  return out;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  return m;
}

// ---------------------------------------------------------------------------
// Shared input plumbing for the transformer-based subcommands.

struct TransformerInput {
  ig::TransformerSpec spec;
  std::vector<std::size_t> tokens;
  json echo;
};

TransformerInput load_transformer_input(const std::string& weights_dir,
                                        const std::string& tokens_text) {
  if (weights_dir.empty())
    ig::fail(ig::errc::invalid_argument, "--weights DIR is required for this subcommand");
  if (tokens_text.empty())
    ig::fail(ig::errc::invalid_argument, "--tokens STR is required for this subcommand");
  TransformerInput in;
  in.spec = ig::load_transformer(weights_dir);
  in.tokens = ig::parse_tokens(in.spec, tokens_text);
  in.echo["weights"] = weights_dir;
  in.echo["tokens"] = tokens_text;
  return in;
}

// Head logits either from a gap scenario file or from a forward trace.
struct HeadLogitsInput {
  std::vector<Vec> head_logits;
  std::vector<std::string> labels;  // vocabulary names when a trace supplied them
  long outcome = -1;                // realized outcome if the file named one
  json echo;
};

HeadLogitsInput load_head_logits(const std::string& scenario_path,
                                 const std::string& weights_dir,
                                 const std::string& tokens_text) {
  HeadLogitsInput in;
  if (!scenario_path.empty()) {
    const json j = ig::load_json_file(scenario_path);
    ig::require_keys(j, {"head_logits", "outcome"}, "gap scenario");
    const json& heads = ig::require_field(j, "head_logits", "gap scenario");
    if (!heads.is_array() || heads.empty())
      ig::fail(ig::errc::parse, "gap scenario: 'head_logits' must be a nonempty array");
    for (const json& h : heads) {
      if (!h.is_array()) ig::fail(ig::errc::parse, "gap scenario: each head must be an array");
      Vec l;
      for (const json& e : h) {
        if (!e.is_number())
          ig::fail(ig::errc::parse, "gap scenario: logits must be numbers");
        l.push_back(e.get<double>());
      }
      in.head_logits.push_back(l);
    }
    if (j.contains("outcome")) {
      if (!j["outcome"].is_number_integer() || j["outcome"].get<int>() < 0 ||
          j["outcome"].get<std::size_t>() >= in.head_logits.front().size())
        ig::fail(ig::errc::parse, "gap scenario: 'outcome' out of range");
      in.outcome = j["outcome"].get<long>();
    }
    in.echo["scenario"] = scenario_path;
    return in;
  }
  TransformerInput t = load_transformer_input(weights_dir, tokens_text);
  const ig::ForwardTrace trace = ig::forward(t.spec, t.tokens);
  for (const ig::HeadTrace& h : trace.block.heads) in.head_logits.push_back(h.logits);
  in.labels = t.spec.vocab;
  in.outcome = static_cast<long>(trace.predicted);
  in.echo = t.echo;
  return in;
}

// ---------------------------------------------------------------------------
// forward

int run_forward(const CommonOpts& opts, const std::string& weights_dir,
                const std::string& tokens_text, const std::string& attention) {
  TransformerInput in = load_transformer_input(weights_dir, tokens_text);
  ig::ForwardTrace trace;
  if (attention == "softmax") {
    trace = ig::forward(in.spec, in.tokens);
  } else {
    trace = ig::linear_attention_forward(in.spec, in.tokens,
                                         ig::feature_map_from_string(attention));
  }

  json heads = json::array();
  for (const ig::HeadTrace& h : trace.block.heads) {
    json jh;
    jh["alpha"] = ragged_json(h.alpha);
    jh["scores"] = ragged_json(h.scores);
    jh["attended"] = ig::json_matrix(h.attended);
    jh["output"] = ig::json_matrix(h.output);
    jh["logits"] = ig::json_vec(h.logits);
    jh["dist"] = ig::json_vec(ig::softmax(h.logits));
    heads.push_back(jh);
  }

  json result;
  result["token_ids"] = in.tokens;
  result["x0"] = ig::json_matrix(trace.x0);
  result["heads"] = heads;
  result["attn"] = ig::json_matrix(trace.block.attn);
  result["ffn"] = ig::json_matrix(trace.block.ffn);
  result["x1"] = ig::json_matrix(trace.block.x_out);
  result["logits_base"] = ig::json_vec(trace.logits_base);
  result["logits_attn"] = ig::json_vec(trace.logits_attn);
  result["logits_ffn"] = ig::json_vec(trace.logits_ffn);
  result["logits"] = ig::json_vec(trace.logits);
  result["dist"] = ig::json_vec(trace.dist);
  result["predicted"] = trace.predicted;
  result["predicted_token"] = in.spec.vocab[trace.predicted];

  json checks;
  checks["distribution_normalized"] = ig::is_probability_vector(trace.dist);
  bool alpha_ok = true;
  for (const ig::HeadTrace& h : trace.block.heads)
    for (const Vec& row : h.alpha)
      if (!ig::is_probability_vector(row)) alpha_ok = false;
  checks["attention_rows_normalized"] = alpha_ok;
  const Vec direct =
      ig::vec_mat(trace.block.x_out.row(trace.tokens.size() - 1), in.spec.unembedding);
  checks["logit_decomposition_consistent"] = max_abs_diff(direct, trace.logits) <= 1e-9;

  json scenario = in.echo;
  scenario["attention"] = attention;
  scenario["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < in.spec.vocab.size(); ++j)
    rows.push_back({in.spec.vocab[j], ig::csv_number(trace.logits_base[j]),
                    ig::csv_number(trace.logits_attn[j]), ig::csv_number(trace.logits_ffn[j]),
                    ig::csv_number(trace.logits[j]), ig::csv_number(trace.dist[j])});
  const std::string csv = ig::to_csv(
      {"token", "logit_base", "logit_attn", "logit_ffn", "logit", "prob"}, rows);

  return finalize(opts, make_report("forward", scenario, result, checks), csv);
}

// ---------------------------------------------------------------------------
// gap / poe

int run_gap(const CommonOpts& opts, const std::string& scenario_path,
            const std::string& weights_dir, const std::string& tokens_text) {
  HeadLogitsInput in = load_head_logits(scenario_path, weights_dir, tokens_text);
  const ig::LseGapReport gap = ig::lse_gap(in.head_logits);
  const Vec product_route = ig::poe_distribution(in.head_logits);
  const std::size_t outcome =
      in.outcome >= 0 ? static_cast<std::size_t>(in.outcome) : ig::argmax_index(gap.poe);

  // Scoring-side restatement of gamma: summed head log-losses at the
  // realized outcome minus the aggregate's log-loss, an exact identity.
  Vec head_losses;
  double loss_sum = 0.0;
  for (const Vec& d : gap.head_dists) {
    head_losses.push_back(ig::loss(ig::ScoringRule::log_loss, d, outcome));
    loss_sum += head_losses.back();
  }
  const double poe_loss = ig::loss(ig::ScoringRule::log_loss, gap.poe, outcome);
  const double identity_residual = std::abs((loss_sum - poe_loss) - gap.gamma);

  json result;
  result["log_z_heads"] = ig::json_vec(gap.log_z_heads);
  result["log_z_joint"] = gap.log_z_joint;
  result["gamma"] = gap.gamma;
  result["head_dists"] = ragged_json(gap.head_dists);
  result["poe"] = ig::json_vec(gap.poe);
  result["outcome"] = outcome;
  result["head_losses"] = ig::json_vec(head_losses);
  result["poe_loss"] = poe_loss;
  result["identity_residual"] = identity_residual;

  json checks;
  checks["gamma_nonnegative"] = gap.gamma >= -1e-12;
  checks["poe_routes_agree"] = max_abs_diff(gap.poe, product_route) < 1e-12;
  checks["loss_identity_exact"] = identity_residual <= 1e-12;

  json scenario = in.echo;
  scenario["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t h = 0; h < gap.log_z_heads.size(); ++h)
    rows.push_back({std::to_string(h + 1), ig::csv_number(gap.log_z_heads[h]),
                    ig::csv_number(head_losses[h])});
  rows.push_back({"joint", ig::csv_number(gap.log_z_joint), ig::csv_number(poe_loss)});
  const std::string csv = ig::to_csv({"head", "logZ", "loss"}, rows);

  return finalize(opts, make_report("gap", scenario, result, checks), csv);
}

int run_poe(const CommonOpts& opts, const std::string& scenario_path,
            const std::string& weights_dir, const std::string& tokens_text) {
  HeadLogitsInput in = load_head_logits(scenario_path, weights_dir, tokens_text);
  Vec summed(in.head_logits.front().size(), 0.0);
  for (const Vec& l : in.head_logits) summed = ig::vec_add(summed, l);
  const Vec softmax_route = ig::softmax(summed);
  const Vec product_route = ig::poe_distribution(in.head_logits);
  const double deviation = max_abs_diff(softmax_route, product_route);

  json result;
  result["poe"] = ig::json_vec(product_route);
  result["softmax_of_sum"] = ig::json_vec(softmax_route);
  result["max_deviation"] = deviation;
  json heads = json::array();
  for (const Vec& l : in.head_logits) heads.push_back(ig::json_vec(ig::softmax(l)));
  result["head_dists"] = heads;

  json checks;
  checks["routes_agree"] = deviation < 1e-12;
  checks["poe_normalized"] = ig::is_probability_vector(product_route);

  json scenario = in.echo;
  scenario["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < product_route.size(); ++j) {
    const std::string label = j < in.labels.size() ? in.labels[j] : std::to_string(j);
    rows.push_back({label, ig::csv_number(product_route[j]),
                    ig::csv_number(softmax_route[j]),
                    ig::csv_number(std::abs(product_route[j] - softmax_route[j]))});
  }
  const std::string csv =
      ig::to_csv({"outcome", "product_route", "softmax_route", "deviation"}, rows);

  return finalize(opts, make_report("poe", scenario, result, checks), csv);
}

// ---------------------------------------------------------------------------
// attribute

int run_attribute(const CommonOpts& opts, const std::string& scenario_path,
                  const std::string& weights_dir, const std::string& tokens_text,
                  double tolerance) {
  std::vector<Vec> heads;
  Vec final_dist;
  std::size_t outcome = 0;
  json scenario;
  if (!scenario_path.empty()) {
    const ig::BeliefScenario belief = ig::load_belief_scenario(scenario_path);
    heads = belief.profile.beliefs;
    final_dist = ig::aggregate_mixture(belief.profile);
    outcome = belief.outcome;
    scenario["scenario"] = scenario_path;
  } else {
    TransformerInput in = load_transformer_input(weights_dir, tokens_text);
    const ig::ForwardTrace trace = ig::forward(in.spec, in.tokens);
    for (const ig::HeadTrace& h : trace.block.heads) heads.push_back(ig::softmax(h.logits));
    final_dist = trace.dist;
    outcome = trace.predicted;
    scenario = in.echo;
  }
  scenario["tolerance"] = tolerance;
  scenario["seed"] = opts.seed;

  const ig::AttributionReport report = ig::attribute(heads, final_dist, tolerance);
  const ig::MixtureVerdict verdict = ig::mixture_bound_check(heads, final_dist, outcome);

  json result;
  result["beta"] = ig::json_vec(report.beta);
  result["reconstructed"] = ig::json_vec(report.reconstructed);
  result["residual"] = ig::json_vec(report.residual);
  result["residual_norm"] = report.residual_norm;
  result["attributable"] = report.attributable;
  result["outcome"] = outcome;
  result["final_at_outcome"] = final_dist[outcome];
  result["reconstructed_at_outcome"] = report.reconstructed[outcome];
  result["mixture_bound_verdict"] = ig::to_string(verdict);

  json checks;
  checks["reconstruction_identity"] =
      max_abs_diff(ig::vec_add(report.reconstructed, report.residual), final_dist) <= 1e-9;
  const Vec pt_d = ig::vec_mat(report.residual, report.head_matrix);
  double ortho = 0.0;
  for (double x : pt_d) ortho = std::max(ortho, std::abs(x));
  checks["residual_orthogonal"] = ortho <= 1e-8;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t h = 0; h < report.beta.size(); ++h)
    rows.push_back({std::to_string(h + 1), ig::csv_number(report.beta[h])});
  const std::string csv = ig::to_csv({"head", "beta_hat"}, rows);

  return finalize(opts, make_report("attribute", scenario, result, checks), csv);
}

// ---------------------------------------------------------------------------
// auction

json audit_json(const ig::AuctionInstance& inst, const ig::PropertyAudit& audit) {
  json out;
  out["truthful"] = audit.truthful;
  out["conserves"] = audit.conserves;
  out["reveals"] = audit.reveals;
  out["optimal"] = audit.optimal;
  out["payments"] = ig::json_vec(audit.truthful_outcome.payments);
  out["utilities"] = ig::json_vec(audit.truthful_outcome.utilities);
  out["sum_payments"] = audit.truthful_outcome.sum_payments;
  out["min_feasible_cost"] = audit.min_feasible_cost;
  json dev;
  dev["agent"] = inst.agents[audit.best_deviation.agent].id;
  dev["report"] = facts_json(inst.space, audit.best_deviation.report);
  dev["gain"] = audit.best_deviation.gain;
  out["best_deviation"] = dev;
  return out;
}

int run_auction(const CommonOpts& opts, const std::string& scenario_path, int budget_flag,
                const std::string& audit_mode) {
  if (scenario_path.empty())
    ig::fail(ig::errc::invalid_argument, "--scenario FILE is required for auction");
  ig::AuctionScenario scenario = ig::load_auction_scenario(scenario_path);
  if (budget_flag >= 0) scenario.instance.budget = budget_flag;  // flag wins over file
  const ig::AuctionInstance& inst = scenario.instance;
  inst.validate();

  const ig::Outcome outcome = ig::run_auction(inst, inst.truthful_reports());
  const ig::FactSet rel = ig::relevant(inst.space, inst.rules, inst.ctx, inst.budget);
  const ig::FactSet env =
      ig::coalition_envelope(inst, inst.truthful_reports(),
                             std::vector<bool>(inst.agents.size(), true));

  json result;
  result["query"] = facts_json(inst.space, inst.ctx.query);
  result["truth"] = facts_json(inst.space, inst.ctx.truth);
  result["relevant"] = facts_json(inst.space, rel);
  result["envelope"] = facts_json(inst.space, env);
  result["budget"] = inst.budget;
  result["response"] = facts_json(inst.space, outcome.response);
  result["welfare"] = outcome.welfare;
  result["nontrivial"] = ig::is_nontrivial(inst);
  json agents = json::array();
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    json a;
    a["id"] = inst.agents[i].id;
    a["knowledge"] = facts_json(inst.space, inst.agents[i].knowledge);
    a["valuation"] = outcome.valuations[i];
    a["payment"] = outcome.payments[i];
    a["utility"] = outcome.utilities[i];
    a["pivotal"] = static_cast<bool>(outcome.pivotal[i]);
    agents.push_back(a);
  }
  result["agents"] = agents;
  result["sum_payments"] = outcome.sum_payments;
  result["conserves"] = outcome.conserves;

  json checks;
  bool nonneg = true;
  for (double p : outcome.payments)
    if (p < -ig::kPivotTolerance) nonneg = false;
  checks["payments_nonnegative"] = nonneg;
  checks["response_within_envelope"] = (outcome.response & ~env) == 0;

  if (audit_mode == "all") {
    if (result["nontrivial"].get<bool>()) {
      const ig::ImpossibilityWitness w = ig::impossibility_witness(inst);
      json impossibility;
      impossibility["unforced"] = audit_json(inst, w.unforced);
      impossibility["forced"] = audit_json(inst, w.forced);
      impossibility["demonstrates"] = w.demonstrates;
      result["impossibility"] = impossibility;
      checks["properties_hold_unforced"] =
          w.unforced.truthful && w.unforced.reveals && w.unforced.optimal;
    } else {
      const ig::PropertyAudit audit = ig::audit_properties(inst);
      result["audit"] = audit_json(inst, audit);
      checks["properties_hold_unforced"] =
          audit.truthful && audit.reveals && audit.optimal;
    }
  }

  json scenario_echo;
  scenario_echo["scenario"] = scenario_path;
  scenario_echo["budget"] = inst.budget;
  scenario_echo["audit"] = audit_mode;
  scenario_echo["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < inst.agents.size(); ++i)
    rows.push_back({inst.agents[i].id, ig::csv_number(outcome.valuations[i]),
                    ig::csv_number(outcome.payments[i]), ig::csv_number(outcome.utilities[i]),
                    outcome.pivotal[i] ? "true" : "false"});
  const std::string csv =
      ig::to_csv({"agent", "valuation", "payment", "utility", "pivotal"}, rows);

  return finalize(opts, make_report("auction", scenario_echo, result, checks), csv);
}

// ---------------------------------------------------------------------------
// scoring

int run_scoring(const CommonOpts& opts, const std::string& scenario_path) {
  if (scenario_path.empty())
    ig::fail(ig::errc::invalid_argument, "--scenario FILE is required for scoring");
  const ig::BeliefScenario belief = ig::load_belief_scenario(scenario_path);
  const ig::GapReport gap = ig::contributions(belief.profile, belief.outcome, belief.rule);
  const Vec mixture = ig::aggregate_mixture(belief.profile);

  json result;
  result["rule"] = ig::to_string(belief.rule);
  result["outcome"] = belief.outcome;
  result["weights"] = ig::json_vec(belief.profile.weights);
  result["holder_losses"] = ig::json_vec(gap.holder_losses);
  result["holder_payments"] = ig::json_vec(gap.holder_payments);
  result["mixture"] = ig::json_vec(mixture);
  result["mixture_loss"] = gap.mixture_loss;
  result["aggregator_payment"] = gap.aggregator_payment;
  result["gamma"] = gap.gamma;

  json checks;
  checks["gamma_nonnegative"] = !(gap.gamma < -1e-12);
  double holder_sum = 0.0;
  for (double p : gap.holder_payments) holder_sum += p;
  const double identity = std::abs(gap.gamma - (gap.aggregator_payment + holder_sum));
  checks["conservation_identity"] = !std::isfinite(gap.gamma) || identity <= 1e-9;

  json scenario;
  scenario["scenario"] = scenario_path;
  scenario["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t h = 0; h < gap.holder_losses.size(); ++h)
    rows.push_back({std::to_string(h + 1), ig::csv_number(belief.profile.weights[h]),
                    ig::csv_number(gap.holder_losses[h]),
                    ig::csv_number(gap.holder_payments[h])});
  const std::string csv = ig::to_csv({"holder", "weight", "loss", "payment"}, rows);

  return finalize(opts, make_report("scoring", scenario, result, checks), csv);
}

// ---------------------------------------------------------------------------
// emerge (knowledge mode and transformer mode)

int run_emerge_knowledge(const CommonOpts& opts, const std::string& scenario_path,
                         int budget) {
  const ig::KnowledgeScenario k = ig::load_knowledge_scenario(scenario_path);
  const ig::FactSet start = k.ctx.query;
  const ig::FactSet rel = ig::relevant(k.space, k.rules, k.ctx, budget);
  const ig::FactSet one_step = ig::emerge(k.space, k.rules, k.ctx, start, budget);
  const ig::FactSet closed = ig::closure(k.space, k.rules, k.ctx, start, budget);
  const double m_start = ig::measure(k.space, k.rules, k.ctx, start, budget);
  const double m_closed = ig::measure(k.space, k.rules, k.ctx, closed, budget);

  json result;
  result["budget"] = budget;
  result["start"] = facts_json(k.space, start);
  result["relevant"] = facts_json(k.space, rel);
  result["emerged"] = facts_json(k.space, one_step);
  result["closure"] = facts_json(k.space, closed);
  result["measure_start"] = m_start;
  result["measure_closure"] = m_closed;
  result["saturation_budget"] = ig::saturation_budget(k.space, k.rules);

  json checks;
  checks["inflationary"] = (start & ~one_step) == 0 && (one_step & ~closed) == 0;
  checks["closure_idempotent"] =
      ig::closure(k.space, k.rules, k.ctx, closed, budget) == closed;
  checks["measure_monotone"] = m_closed >= m_start - 1e-12;

  json scenario;
  scenario["scenario"] = scenario_path;
  scenario["budget"] = budget;
  scenario["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (const std::string& f : k.space.facts) {
    const auto idx = k.space.find(f);
    const ig::FactSet bit = ig::FactSet{1} << *idx;
    rows.push_back({f, (start & bit) ? "true" : "false", (rel & bit) ? "true" : "false",
                    (one_step & bit) ? "true" : "false", (closed & bit) ? "true" : "false"});
  }
  const std::string csv =
      ig::to_csv({"fact", "start", "relevant", "emerged", "closure"}, rows);

  return finalize(opts, make_report("emerge", scenario, result, checks), csv);
}

int run_emerge_transformer(const CommonOpts& opts, const std::string& weights_dir,
                           const std::string& tokens_text, int depth, double discount) {
  TransformerInput in = load_transformer_input(weights_dir, tokens_text);
  if (depth < 0) ig::fail(ig::errc::invalid_argument, "depth (--budget) must be >= 0");
  const ig::Matrix x0 = ig::embed(in.spec, in.tokens);
  const std::vector<ig::Matrix> inputs = {x0};
  const double energy =
      ig::semantic_energy(in.spec, inputs, static_cast<std::size_t>(depth), discount);
  const std::vector<ig::Matrix> states =
      ig::emergence_states(in.spec, inputs, static_cast<std::size_t>(depth));

  json result;
  result["depth"] = depth;
  result["discount"] = discount;
  result["energy"] = energy;
  result["state_count"] = states.size();
  json jstates = json::array();
  for (const ig::Matrix& s : states) jstates.push_back(ig::json_matrix(s));
  result["states"] = jstates;

  json checks;
  bool contains_input = false;
  for (const ig::Matrix& s : states)
    if (s == x0) contains_input = true;
  checks["states_include_input"] = contains_input;
  checks["energy_nonnegative"] = energy >= 0.0;

  json scenario = in.echo;
  scenario["budget"] = depth;
  scenario["gamma"] = discount;
  scenario["seed"] = opts.seed;

  return finalize(opts, make_report("emerge", scenario, result, checks), std::string());
}

// ---------------------------------------------------------------------------
// cot-audit / envelope

int run_cot_audit(const CommonOpts& opts, const std::string& scenario_path, int budget_flag) {
  if (scenario_path.empty())
    ig::fail(ig::errc::invalid_argument, "--scenario FILE is required for cot-audit");
  const ig::TraceScenario t = ig::load_trace_scenario(scenario_path);
  const int budget = budget_flag >= 0 ? budget_flag : t.budget;
  const ig::CotAudit audit =
      ig::cot_audit(t.knowledge.space, t.knowledge.rules, t.knowledge.ctx, t.trace, budget);

  json result;
  result["budget"] = budget;
  result["baseline"] = facts_json(t.knowledge.space, t.trace.baseline);
  json steps = json::array();
  for (const ig::FactSet s : t.trace.steps) steps.push_back(facts_json(t.knowledge.space, s));
  result["steps"] = steps;
  result["step_measures"] = ig::json_vec(audit.step_measures);
  result["derived"] = facts_json(t.knowledge.space, audit.derived_union);
  result["derived_measure"] = audit.derived_measure;
  result["meaningful"] = audit.meaningful;
  result["conserves"] = audit.conserves;
  result["verdict"] = audit.meaningful ? "meaningful" : "vacuous";

  json checks;
  checks["dichotomy_respected"] = !(audit.meaningful && audit.conserves);

  json scenario;
  scenario["scenario"] = scenario_path;
  scenario["budget"] = budget;
  scenario["seed"] = opts.seed;

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < audit.step_measures.size(); ++i)
    rows.push_back({std::to_string(i), ig::csv_number(audit.step_measures[i])});
  const std::string csv = ig::to_csv({"step", "measure"}, rows);

  return finalize(opts, make_report("cot-audit", scenario, result, checks), csv);
}

int run_envelope(const CommonOpts& opts, const std::string& scenario_path, int budget_flag) {
  if (scenario_path.empty())
    ig::fail(ig::errc::invalid_argument, "--scenario FILE is required for envelope");
  const ig::TraceScenario t = ig::load_trace_scenario(scenario_path);
  const int budget = budget_flag >= 0 ? budget_flag : t.budget;
  const ig::FactSet env = ig::safety_envelope(t.knowledge.space, t.knowledge.rules,
                                              t.knowledge.ctx, t.trace.baseline, budget);
  ig::FactSet response = 0;
  for (const ig::FactSet s : t.trace.steps) response |= s;
  const bool bounded = ig::creativity_bounded(t.knowledge.space, t.knowledge.rules,
                                              t.knowledge.ctx, response, t.trace.baseline,
                                              budget);

  json result;
  result["budget"] = budget;
  result["baseline"] = facts_json(t.knowledge.space, t.trace.baseline);
  result["envelope"] = facts_json(t.knowledge.space, env);
  result["response"] = facts_json(t.knowledge.space, response);
  json contained = json::array();
  for (const ig::FactSet s : t.trace.steps) contained.push_back((s & ~env) == 0);
  result["step_contained"] = contained;
  result["creativity_bounded"] = bounded;

  json checks;
  checks["response_within_envelope"] = bounded;

  json scenario;
  scenario["scenario"] = scenario_path;
  scenario["budget"] = budget;
  scenario["seed"] = opts.seed;

  return finalize(opts, make_report("envelope", scenario, result, checks), std::string());
}

// ---------------------------------------------------------------------------
// selftest

struct SelfTest {
  int passed = 0;
  int failed = 0;

  void check(bool ok, const std::string& name, const std::string& detail = "") {
    if (ok) {
      ++passed;
      std::cout << "ok:   " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL: " << name;
      if (!detail.empty()) std::cout << " (" << detail << ")";
      std::cout << "\n";
    }
  }
};

std::string vec_str(const Vec& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += ig::csv_number(v[i]);
  }
  return s + "]";
}

// The two-agent recall instance used by the reduced mechanism sweep: two
// specialists each hold one half of the completion, the query alone derives
// nothing, so both agents are pivotal.
ig::AuctionInstance recall_instance() {
  ig::AuctionInstance inst;
  inst.space.facts = {"pangram_subject", "fox_completion", "dog_completion"};
  ig::Rule fox{"recall_fox", 1, {ig::RuleEntry{2, 2}}};
  ig::Rule dog{"recall_dog", 1, {ig::RuleEntry{4, 4}}};
  inst.rules.rules = {fox, dog};
  inst.ctx.query = 1;      // pangram_subject
  inst.ctx.truth = 2 | 4;  // fox_completion, dog_completion
  inst.agents = {{"head_one", 2}, {"head_two", 4}};
  inst.budget = 1;
  return inst;
}

int run_selftest() {
  SelfTest t;
  const ig::TransformerSpec spec = ig::reference_spec();
  const std::vector<std::size_t> tokens = {1, 2, 3};  // The quick brown

  // 1. Golden forward pass against the recorded trace values.
  const auto t0 = std::chrono::steady_clock::now();
  const ig::ForwardTrace trace = ig::forward(spec, tokens);
  const auto elapsed = std::chrono::duration<double, std::milli>(
      std::chrono::steady_clock::now() - t0);
  {
    const Vec alpha = trace.block.heads[0].alpha[2];
    const Vec alpha_expect = {0.25, 0.25, 0.50};
    t.check(max_abs_diff(alpha, alpha_expect) <= 1e-3, "forward: alpha_3 within 0.001",
            "got " + vec_str(alpha));
    const Vec h1 = trace.block.heads[0].attended.row(2);
    const Vec h2 = trace.block.heads[1].attended.row(2);
    t.check(max_abs_diff(h1, {0.0, 1.5}) <= 1e-12, "forward: h_3 head 1 exact",
            "got " + vec_str(h1));
    t.check(max_abs_diff(h2, {0.6, 0.0}) <= 1e-12, "forward: h_3 head 2 exact",
            "got " + vec_str(h2));
    const Vec logits_expect = {0.0, -0.03, 0.21, 1.13, 1.31, 0.52};
    t.check(max_abs_diff(trace.logits, logits_expect) <= 5e-3,
            "forward: logits within 0.005", "got " + vec_str(trace.logits));
    const Vec dist_expect = {0.086, 0.083, 0.106, 0.265, 0.317, 0.144};
    t.check(max_abs_diff(trace.dist, dist_expect) <= 5e-3,
            "forward: distribution within 0.005", "got " + vec_str(trace.dist));
    t.check(spec.vocab[trace.predicted] == "fox", "forward: argmax is fox",
            "got " + spec.vocab[trace.predicted]);
    t.check(elapsed.count() < 10.0, "forward: runtime under 10 ms");
  }

  // 2. Log-partition gap on the golden head logits.
  {
    const std::vector<Vec> golden_logits = {{0, 0, 0, 0, 1.5, 0}, {0, 0, 0, 0, 0, 0.6}};
    const ig::LseGapReport gap = ig::lse_gap(golden_logits);
    const double oracle = std::log(5.0 + std::exp(1.5)) + std::log(5.0 + std::exp(0.6)) -
                          std::log(4.0 + std::exp(1.5) + std::exp(0.6));
    t.check(std::abs(gap.gamma - oracle) <= 1e-9, "gap: matches closed-form oracle",
            "gamma " + ig::csv_number(gap.gamma));
    t.check(gap.gamma > 0.0, "gap: strictly positive");
    t.check(gap.gamma >= 1.7 && gap.gamma <= 2.0, "gap: within the coarse band [1.7, 2.0]");
  }

  // 3. Product-of-experts equivalence on random logit sets.
  {
    ig::Rng rng(0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n_heads = 2 + rng.below(3);
      const std::size_t dim = 2 + rng.below(9);
      std::vector<Vec> logits(n_heads, Vec(dim, 0.0));
      for (Vec& l : logits)
        for (double& x : l) x = 3.0 * rng.normal();
      Vec summed(dim, 0.0);
      for (const Vec& l : logits) summed = ig::vec_add(summed, l);
      worst = std::max(worst,
                       max_abs_diff(ig::softmax(summed), ig::poe_distribution(logits)));
    }
    t.check(worst < 1e-12, "poe: routes agree on 1000 random instances",
            "max deviation " + ig::csv_number(worst));
  }

  // 4. Attribution on the golden instance plus exact-mixture recovery.
  {
    std::vector<Vec> heads;
    for (const ig::HeadTrace& h : trace.block.heads) heads.push_back(ig::softmax(h.logits));
    const ig::AttributionReport rep = ig::attribute(heads, trace.dist);
    t.check(std::abs(rep.beta[0] - 0.55) <= 0.01 && std::abs(rep.beta[1] - 0.42) <= 0.01,
            "attribution: beta_hat near [0.55, 0.42]", "got " + vec_str(rep.beta));
    t.check(std::abs(rep.reconstructed[4] - 0.325) <= 5e-3,
            "attribution: reconstructed fox entry near 0.325",
            "got " + ig::csv_number(rep.reconstructed[4]));
    t.check(rep.residual_norm > 1e-6, "attribution: residual structurally nonzero",
            "norm " + ig::csv_number(rep.residual_norm));

    ig::Rng rng(1);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const std::size_t n_heads = 2 + rng.below(2);
      const std::size_t dim = n_heads + 2 + rng.below(4);
      std::vector<Vec> hs;
      for (std::size_t h = 0; h < n_heads; ++h) hs.push_back(rng.simplex_point(dim));
      const Vec w = rng.simplex_point(n_heads);
      Vec mix(dim, 0.0);
      for (std::size_t h = 0; h < n_heads; ++h)
        mix = ig::vec_add(mix, ig::vec_scale(hs[h], w[h]));
      worst = std::max(worst, ig::attribute(hs, mix).residual_norm);
    }
    t.check(worst < 1e-10, "attribution: exact mixtures recovered on 500 random instances",
            "max residual " + ig::csv_number(worst));
  }

  // 5. Equal-weight mixture value at the fox entry.
  {
    ig::BeliefProfile profile;
    profile.weights = {0.5, 0.5};
    for (const ig::HeadTrace& h : trace.block.heads)
      profile.beliefs.push_back(ig::softmax(h.logits));
    const Vec mix = ig::aggregate_mixture(profile);
    t.check(std::abs(mix[4] - 0.3105) <= 1e-3, "mixture: fox entry near 0.3105",
            "got " + ig::csv_number(mix[4]));
  }

  // 6. Attention energy and iterated block states.
  {
    const ig::Matrix x0 = ig::embed(spec, tokens);
    const double mu = ig::semantic_energy(spec, {x0}, 1, 0.5);
    t.check(std::abs(mu - 2.61) <= 1e-12, "energy: mu_1 equals 2.61 exactly",
            "got " + ig::csv_number(mu));
    const std::vector<ig::Matrix> states = ig::emergence_states(spec, {x0}, 1);
    t.check(states.size() == 2, "emergence: exactly two states at depth 1",
            "got " + std::to_string(states.size()));
    if (states.size() == 2) {
      const Vec row = states[1].row(2);
      const Vec expect = {-0.03, 0.21, 1.13, 1.31, 0.52};
      t.check(max_abs_diff(row, expect) <= 5e-3,
              "emergence: X_1 final row within 0.005", "got " + vec_str(row));
    }
  }

  // 7. Reduced mechanism sweep: the two-specialist recall instance.
  {
    const ig::AuctionInstance inst = recall_instance();
    const ig::ImpossibilityWitness w = ig::impossibility_witness(inst);
    t.check(w.unforced.truthful && w.unforced.reveals && w.unforced.optimal,
            "mechanism: truthfulness, revelation, optimality hold");
    t.check(!w.unforced.conserves &&
                w.unforced.truthful_outcome.sum_payments > ig::kPivotTolerance,
            "mechanism: payments do not conserve",
            "sum " + ig::csv_number(w.unforced.truthful_outcome.sum_payments));
    t.check(w.forced.conserves && !w.forced.truthful,
            "mechanism: forcing conservation breaks truthfulness",
            "best gain " + ig::csv_number(w.forced.best_deviation.gain));
    t.check(w.demonstrates, "mechanism: impossibility demonstrated on the instance");
  }

  // 8. Reduced scoring sweep: propriety on a coarse grid, positive gap on
  // random profiles.
  {
    bool proper = true;
    const int steps = 10;  // dim-3 simplex, step 0.1
    std::vector<Vec> grid;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j + i <= steps; ++j)
        grid.push_back({i / 10.0, j / 10.0, (steps - i - j) / 10.0});
    for (const Vec& truth : grid)
      for (const Vec& reported : grid) {
        if (reported == truth) continue;
        for (const ig::ScoringRule rule :
             {ig::ScoringRule::log_loss, ig::ScoringRule::brier}) {
          const double at_truth = ig::expected_loss(rule, truth, truth);
          const double elsewhere = ig::expected_loss(rule, reported, truth);
          if (!(elsewhere > at_truth + 1e-12)) proper = false;
        }
      }
    t.check(proper, "scoring: truthful report uniquely optimal on the grid");

    ig::Rng rng(2);
    bool gaps_positive = true;
    for (int i = 0; i < 50; ++i) {
      const ig::BeliefProfile profile = ig::random_profile(rng, 2 + rng.below(2), 3);
      const std::size_t y = rng.below(3);
      if (!(ig::contributions(profile, y, ig::ScoringRule::brier).gamma > 1e-12))
        gaps_positive = false;
    }
    t.check(gaps_positive, "scoring: gap positive on 50 random differing profiles");

    ig::BeliefProfile same;
    same.weights = {0.5, 0.5};
    same.beliefs = {{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}};
    t.check(std::abs(ig::contributions(same, 0, ig::ScoringRule::log_loss).gamma) <= 1e-12,
            "scoring: gap vanishes for identical beliefs");

    ig::BeliefProfile bern;
    bern.weights = {0.5, 0.5};
    bern.beliefs = {{0.9, 0.1}, {0.1, 0.9}};
    const double gamma = ig::contributions(bern, 0, ig::ScoringRule::log_loss).gamma;
    const double oracle = 0.5 * -std::log(0.9) + 0.5 * -std::log(0.1) + std::log(0.5);
    t.check(std::abs(gamma - oracle) <= 1e-12, "scoring: Bernoulli gap closed form",
            "got " + ig::csv_number(gamma));
  }

  // 9. Reduced knowledge sweep: randomized traces respect the dichotomy and
  // stay inside the safety envelope.
  {
    ig::Rng rng(3);
    bool dichotomy = true;
    bool contained = true;
    bool algebra = true;
    for (int i = 0; i < 30; ++i) {
      ig::KnowledgeSpace space;
      const std::size_t n = 4 + rng.below(3);
      for (std::size_t f = 0; f < n; ++f) space.facts.push_back("f" + std::to_string(f));
      ig::RuleSet rules;
      const std::size_t n_rules = 1 + rng.below(3);
      for (std::size_t r = 0; r < n_rules; ++r) {
        ig::Rule rule;
        rule.id = "r" + std::to_string(r);
        rule.cost = 1 + static_cast<int>(rng.below(2));
        const std::size_t n_entries = 1 + rng.below(2);
        for (std::size_t e = 0; e < n_entries; ++e) {
          ig::RuleEntry entry;
          entry.premises = rng.below(ig::FactSet{1} << n);
          entry.conclusions = rng.below(ig::FactSet{1} << n);
          rule.entries.push_back(entry);
        }
        bool duplicate = false;
        for (std::size_t e = 0; e < rule.entries.size(); ++e)
          for (std::size_t g = e + 1; g < rule.entries.size(); ++g)
            if (rule.entries[e].premises == rule.entries[g].premises) duplicate = true;
        if (!duplicate) rules.rules.push_back(rule);
      }
      ig::Context ctx;
      ctx.query = rng.below(ig::FactSet{1} << n);
      ctx.truth = rng.below(ig::FactSet{1} << n);
      const int budget = 1 + static_cast<int>(rng.below(2));

      const ig::FactSet a = rng.below(ig::FactSet{1} << n);
      const ig::FactSet b = a | rng.below(ig::FactSet{1} << n);
      const ig::FactSet ea = ig::emerge(space, rules, ctx, a, budget);
      const ig::FactSet eb = ig::emerge(space, rules, ctx, b, budget);
      if ((a & ~ea) != 0 || (ea & ~eb && (a & ~b) == 0)) algebra = false;
      const ig::FactSet ca = ig::closure(space, rules, ctx, a, budget);
      if (ig::closure(space, rules, ctx, ca, budget) != ca) algebra = false;

      // Grow a valid trace from a random baseline by taking a random slice
      // of each emergence increment.
      ig::CotTrace cot;
      cot.baseline = rng.below(ig::FactSet{1} << n);
      cot.steps.push_back(cot.baseline & rng.below(ig::FactSet{1} << n));
      const ig::FactSet rel = ig::relevant(space, rules, ctx, budget);
      ig::FactSet seen = cot.steps[0];
      for (int s = 0; s < 3; ++s) {
        const ig::FactSet admissible =
            (ig::emerge(space, rules, ctx, seen, budget) & ~seen) & rel;
        const ig::FactSet step = admissible & rng.below(ig::FactSet{1} << n);
        cot.steps.push_back(step);
        seen |= step;
      }
      const ig::CotAudit audit = ig::cot_audit(space, rules, ctx, cot, budget);
      if (audit.meaningful && audit.conserves) dichotomy = false;
      const ig::FactSet env =
          ig::safety_envelope(space, rules, ctx, cot.baseline, budget);
      if ((seen & ~env) != 0) contained = false;
    }
    t.check(algebra, "knowledge: inflation, monotonicity, idempotence on random instances");
    t.check(dichotomy, "knowledge: dichotomy holds on 30 random traces");
    t.check(contained, "knowledge: traces stay inside the safety envelope");
  }

  std::cout << "selftest: " << t.passed << " passed, " << t.failed << " failed\n";
  return t.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic laboratory for inference-as-auction experiments"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string weights_dir;
  std::string tokens_text;
  std::string scenario_path;
  std::string attention = "softmax";
  std::string audit_mode = "none";
  int budget = -1;  // -1: not given; subcommands apply their own default
  double gamma = 0.5;
  double tol = ig::kAttributionTolerance;

  std::function<int()> action;

  auto* forward_cmd = app.add_subcommand("forward", "run the forward pass and trace it");
  forward_cmd->add_option("--weights", weights_dir, "weight bundle directory")->required();
  forward_cmd->add_option("--tokens", tokens_text, "input tokens (words or indices)")
      ->required();
  forward_cmd->add_option("--attention", attention,
                          "attention kind: softmax, elu1p, or relu")
      ->check(CLI::IsMember({"softmax", "elu1p", "relu"}));
  add_common(forward_cmd, opts);
  forward_cmd->callback(
      [&] { action = [&] { return run_forward(opts, weights_dir, tokens_text, attention); }; });

  auto* gap_cmd = app.add_subcommand("gap", "log-partition gap of head aggregation");
  gap_cmd->add_option("--scenario", scenario_path, "gap scenario file (head_logits)");
  gap_cmd->add_option("--weights", weights_dir, "weight bundle directory");
  gap_cmd->add_option("--tokens", tokens_text, "input tokens (words or indices)");
  add_common(gap_cmd, opts);
  gap_cmd->callback(
      [&] { action = [&] { return run_gap(opts, scenario_path, weights_dir, tokens_text); }; });

  auto* poe_cmd = app.add_subcommand("poe", "product-of-experts aggregation check");
  poe_cmd->add_option("--scenario", scenario_path, "gap scenario file (head_logits)");
  poe_cmd->add_option("--weights", weights_dir, "weight bundle directory");
  poe_cmd->add_option("--tokens", tokens_text, "input tokens (words or indices)");
  add_common(poe_cmd, opts);
  poe_cmd->callback(
      [&] { action = [&] { return run_poe(opts, scenario_path, weights_dir, tokens_text); }; });

  auto* attr_cmd = app.add_subcommand("attribute", "mixture attribution of a distribution");
  attr_cmd->add_option("--scenario", scenario_path, "belief profile file");
  attr_cmd->add_option("--weights", weights_dir, "weight bundle directory");
  attr_cmd->add_option("--tokens", tokens_text, "input tokens (words or indices)");
  attr_cmd->add_option("--tol", tol, "attributability tolerance on the residual norm");
  add_common(attr_cmd, opts);
  attr_cmd->callback([&] {
    action = [&] { return run_attribute(opts, scenario_path, weights_dir, tokens_text, tol); };
  });

  auto* auction_cmd = app.add_subcommand("auction", "run the inference auction");
  auction_cmd->add_option("--scenario", scenario_path, "auction scenario file")->required();
  auction_cmd->add_option("--budget", budget, "reasoning budget (overrides the file)");
  auction_cmd->add_option("--audit", audit_mode, "audit mode: none or all")
      ->check(CLI::IsMember({"none", "all"}));
  add_common(auction_cmd, opts);
  auction_cmd->callback(
      [&] { action = [&] { return run_auction(opts, scenario_path, budget, audit_mode); }; });

  auto* scoring_cmd = app.add_subcommand("scoring", "scoring-rule gap of a belief profile");
  scoring_cmd->add_option("--scenario", scenario_path, "belief profile file")->required();
  add_common(scoring_cmd, opts);
  scoring_cmd->callback([&] { action = [&] { return run_scoring(opts, scenario_path); }; });

  auto* emerge_cmd = app.add_subcommand(
      "emerge", "emergence: knowledge closure (--scenario) or block states (--weights)");
  emerge_cmd->add_option("--scenario", scenario_path, "knowledge scenario file");
  emerge_cmd->add_option("--weights", weights_dir, "weight bundle directory");
  emerge_cmd->add_option("--tokens", tokens_text, "input tokens (words or indices)");
  emerge_cmd->add_option("--budget", budget, "reasoning budget / iteration depth");
  emerge_cmd->add_option("--gamma", gamma, "energy discount factor in (0,1)");
  add_common(emerge_cmd, opts);
  emerge_cmd->callback([&] {
    action = [&] {
      if (!scenario_path.empty())
        return run_emerge_knowledge(opts, scenario_path, budget >= 0 ? budget : 1);
      return run_emerge_transformer(opts, weights_dir, tokens_text, budget >= 0 ? budget : 1,
                                    gamma);
    };
  });

  auto* cot_cmd = app.add_subcommand("cot-audit", "audit a stepwise reasoning trace");
  cot_cmd->add_option("--scenario", scenario_path, "trace scenario file")->required();
  cot_cmd->add_option("--budget", budget, "reasoning budget (overrides the file)");
  add_common(cot_cmd, opts);
  cot_cmd->callback(
      [&] { action = [&] { return run_cot_audit(opts, scenario_path, budget); }; });

  auto* env_cmd = app.add_subcommand("envelope", "safety envelope of a trace baseline");
  env_cmd->add_option("--scenario", scenario_path, "trace scenario file")->required();
  env_cmd->add_option("--budget", budget, "reasoning budget (overrides the file)");
  add_common(env_cmd, opts);
  env_cmd->callback(
      [&] { action = [&] { return run_envelope(opts, scenario_path, budget); }; });

  auto* selftest_cmd =
      app.add_subcommand("selftest", "run the embedded golden-value and property suite");
  selftest_cmd->callback([&] { action = [] { return run_selftest(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ig::exit_code_for(ig::errc::invalid_argument);
  }

  try {
    return action();
  } catch (const ig::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ig::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return ig::exit_code_for(ig::errc::internal);
  }
}
