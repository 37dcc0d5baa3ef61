// SPDX-License-Identifier: MIT
//
// Inference auction: a Clarke-style mechanism over the knowledge calculus.
//
// Agents report knowledge sets.  Candidate responses come from a response
// universe (by default: every subset of the context-relevant facts), but a
// coalition can only realize responses contained in its envelope -- the
// closure of the members' reported relevant facts together with the query
// facts.  The mechanism selects the feasible response maximizing reported
// welfare: the sum of agent valuations minus the hallucination cost.  An
// agent's valuation of a response r counts disagreements between r and the
// certified truth over facts the agent claims to know, negated; the
// hallucination cost is the full symmetric difference between r and the
// truth.
//
// Each agent is credited the externality it exerts: the welfare of the
// others under the chosen response, minus the best welfare the others could
// reach from their own envelope alone.  Credits are nonnegative and zero
// for non-pivotal agents, and they make truthful reporting dominant when
// the truth is collectively derivable.  They do not sum to zero;
// `force_conservation` rebalances them to a zero sum, which is exactly
// where truthfulness breaks (see `impossibility_witness`).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "infergap/error.hpp"
#include "infergap/knowledge.hpp"

namespace infergap {

inline constexpr double kPivotTolerance = 1e-9;
inline constexpr std::size_t kMaxAuctionFacts = 12;
inline constexpr std::size_t kMaxAuctionAgents = 5;
inline constexpr std::uint64_t kMaxEnumeratedSets = std::uint64_t{1} << 16;

struct AgentSpec {
  std::string id;
  FactSet knowledge = 0;  // facts the agent actually holds
};

struct AuctionInstance {
  KnowledgeSpace space;
  RuleSet rules;
  Context ctx;
  std::vector<AgentSpec> agents;
  int budget = 1;
  // Response universe; empty means "all subsets of the relevant facts".
  std::vector<FactSet> responses;

  void validate() const {
    space.validate();
    rules.validate(space);
    require_budget(budget);
    if (space.facts.size() > kMaxAuctionFacts)
      fail(errc::resource_limit, "auction: more than 12 facts (exhaustive search infeasible)");
    if (agents.empty()) fail(errc::invalid_argument, "auction: no agents");
    if (agents.size() > kMaxAuctionAgents)
      fail(errc::resource_limit, "auction: more than 5 agents");
    const FactSet universe = space.full();
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].id.empty()) fail(errc::invalid_argument, "auction: agent with empty id");
      for (std::size_t j = i + 1; j < agents.size(); ++j)
        if (agents[i].id == agents[j].id)
          fail(errc::invalid_argument, "auction: duplicate agent id '" + agents[i].id + "'");
      if (agents[i].knowledge & ~universe)
        fail(errc::internal, "auction: agent knowledge outside the knowledge space");
    }
    if ((ctx.query | ctx.truth) & ~universe)
      fail(errc::internal, "auction: context outside the knowledge space");
    for (FactSet r : responses)
      if (r & ~universe) fail(errc::internal, "auction: response outside the knowledge space");
  }

  std::vector<FactSet> truthful_reports() const {
    std::vector<FactSet> out;
    out.reserve(agents.size());
    for (const AgentSpec& a : agents) out.push_back(a.knowledge);
    return out;
  }
};

// The response universe in canonical (ascending bitmask) order.
inline std::vector<FactSet> response_universe(const AuctionInstance& inst) {
  if (!inst.responses.empty()) {
    std::vector<FactSet> out = inst.responses;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  const FactSet rel = relevant(inst.space, inst.rules, inst.ctx, inst.budget);
  std::vector<FactSet> bits;
  for (std::size_t i = 0; i < inst.space.facts.size(); ++i)
    if (rel & (FactSet{1} << i)) bits.push_back(FactSet{1} << i);
  if ((std::uint64_t{1} << bits.size()) > kMaxEnumeratedSets)
    fail(errc::resource_limit, "auction: default response universe too large");
  std::vector<FactSet> out;
  out.reserve(std::size_t{1} << bits.size());
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << bits.size()); ++m) {
    FactSet r = 0;
    for (std::size_t b = 0; b < bits.size(); ++b)
      if (m & (std::uint64_t{1} << b)) r |= bits[b];
    out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Valuation of response r by an agent holding (or claiming) knowledge k:
// each fact in k where r and the truth disagree costs one unit.
inline double valuation(const AuctionInstance& inst, FactSet knowledge, FactSet response) {
  return -static_cast<double>(set_size((response ^ inst.ctx.truth) & knowledge));
}

// System-wide cost of asserting wrong facts or omitting true ones.
inline double hallucination_cost(const AuctionInstance& inst, FactSet response) {
  return static_cast<double>(set_size(response ^ inst.ctx.truth));
}

// Envelope of a coalition: everything derivable from the members' reported
// relevant facts together with the query facts.
inline FactSet coalition_envelope(const AuctionInstance& inst,
                                  const std::vector<FactSet>& reports,
                                  const std::vector<bool>& member) {
  const FactSet rel = relevant(inst.space, inst.rules, inst.ctx, inst.budget);
  FactSet seed = inst.ctx.query;
  for (std::size_t i = 0; i < reports.size(); ++i)
    if (member[i]) seed |= reports[i] & rel;
  return closure(inst.space, inst.rules, inst.ctx, seed, inst.budget);
}

struct WelfareOptimum {
  FactSet response = 0;
  double welfare = 0.0;
};

// Exhaustive argmax of coalition welfare over the responses the coalition
// can realize.  The objective separates over facts, so the maximizer is
// unique up to facts nobody weighs; ties break toward the canonically
// smaller response.
inline WelfareOptimum welfare_optimum(const AuctionInstance& inst,
                                      const std::vector<FactSet>& reports,
                                      const std::vector<bool>& member) {
  const FactSet env = coalition_envelope(inst, reports, member);
  WelfareOptimum best;
  bool found = false;
  for (FactSet r : response_universe(inst)) {
    if (r & ~env) continue;
    double w = -hallucination_cost(inst, r);
    for (std::size_t i = 0; i < reports.size(); ++i)
      if (member[i]) w += valuation(inst, reports[i], r);
    if (!found || w > best.welfare) {
      best = {r, w};
      found = true;
    }
  }
  if (!found)
    fail(errc::degenerate_input, "auction: no response is feasible for the coalition");
  return best;
}

struct Outcome {
  FactSet response = 0;            // welfare-maximizing feasible response
  double welfare = 0.0;            // reported welfare of that response
  std::vector<double> valuations;  // v_i(response) under reported knowledge
  std::vector<double> payments;    // externality credits (>= 0 unless rebalanced)
  std::vector<double> utilities;   // valuation + payment, per agent
  std::vector<bool> pivotal;       // payment exceeds kPivotTolerance
  double sum_payments = 0.0;
  bool conserves = false;          // |sum of payments| within kPivotTolerance
  bool conservation_forced = false;
};

inline Outcome run_auction(const AuctionInstance& inst,
                           const std::vector<FactSet>& reports,
                           bool force_conservation = false) {
  inst.validate();
  if (reports.size() != inst.agents.size())
    fail(errc::invalid_argument, "auction: one report per agent required");
  const FactSet universe = inst.space.full();
  for (FactSet r : reports)
    if (r & ~universe) fail(errc::internal, "auction: report outside the knowledge space");

  const std::size_t n = inst.agents.size();
  std::vector<bool> everyone(n, true);
  const WelfareOptimum grand = welfare_optimum(inst, reports, everyone);

  Outcome out;
  out.response = grand.response;
  out.welfare = grand.welfare;
  out.valuations.resize(n);
  out.payments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.valuations[i] = valuation(inst, reports[i], grand.response);
    std::vector<bool> others = everyone;
    others[i] = false;
    const WelfareOptimum alone = welfare_optimum(inst, reports, others);
    double others_at_grand = -hallucination_cost(inst, grand.response);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others_at_grand += valuation(inst, reports[j], grand.response);
    // Credit: how much better off the others are with agent i's contribution
    // folded into the chosen response than they could be on their own.
    out.payments[i] = others_at_grand - alone.welfare;
  }
  out.sum_payments = 0.0;
  for (double p : out.payments) out.sum_payments += p;
  if (force_conservation) {
    const double rebate = out.sum_payments / static_cast<double>(n);
    for (double& p : out.payments) p -= rebate;
    out.sum_payments = 0.0;
    for (double p : out.payments) out.sum_payments += p;
    out.conservation_forced = true;
  }
  out.utilities.resize(n);
  out.pivotal.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.utilities[i] = out.valuations[i] + out.payments[i];
    out.pivotal[i] = out.payments[i] > kPivotTolerance;
  }
  out.conserves = std::abs(out.sum_payments) <= kPivotTolerance;
  return out;
}

// True-knowledge utility of agent i under an outcome chosen from (possibly
// mis-)reported knowledge: the agent cares about real disagreements only.
inline double realized_utility(const AuctionInstance& inst, const Outcome& out,
                               std::size_t agent) {
  return valuation(inst, inst.agents[agent].knowledge, out.response) + out.payments[agent];
}

struct Deviation {
  std::size_t agent = 0;
  FactSet report = 0;
  double gain = 0.0;
};

struct PropertyAudit {
  Outcome truthful_outcome;
  bool truthful = false;   // no unilateral misreport gains utility
  bool conserves = false;  // payments sum to zero
  bool reveals = false;    // truthful participation never costs an agent
  bool optimal = false;    // response has minimal hallucination cost among feasible
  Deviation best_deviation;  // largest-gain misreport found (gain may be <= 0)
  double min_feasible_cost = 0.0;  // the hallucination-cost floor the audit used
};

// Exhaustively audits the four mechanism properties on an instance.  The
// misreport space for agent i is every subset of what the agent could claim
// with any shred of plausibility: its own derivational reach plus the
// context-relevant facts.
inline PropertyAudit audit_properties(const AuctionInstance& inst,
                                      bool force_conservation = false) {
  inst.validate();
  const std::size_t n = inst.agents.size();
  const std::vector<FactSet> truth_reports = inst.truthful_reports();
  PropertyAudit audit;
  audit.truthful_outcome = run_auction(inst, truth_reports, force_conservation);

  audit.conserves = audit.truthful_outcome.conserves;
  audit.reveals = true;
  for (std::size_t i = 0; i < n; ++i)
    if (realized_utility(inst, audit.truthful_outcome, i) < -kPivotTolerance)
      audit.reveals = false;

  // Optimality: the chosen response must reach the hallucination-cost floor
  // over everything the grand coalition can realize.
  std::vector<bool> everyone(n, true);
  const FactSet env = coalition_envelope(inst, truth_reports, everyone);
  double min_cost = 0.0;
  bool found = false;
  for (FactSet r : response_universe(inst)) {
    if (r & ~env) continue;
    const double c = hallucination_cost(inst, r);
    if (!found || c < min_cost) min_cost = c;
    found = true;
  }
  audit.min_feasible_cost = min_cost;
  audit.optimal = found && hallucination_cost(inst, audit.truthful_outcome.response) <=
                               min_cost + kPivotTolerance;

  const FactSet rel = relevant(inst.space, inst.rules, inst.ctx, inst.budget);
  audit.truthful = true;
  bool have_deviation = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double base = realized_utility(inst, audit.truthful_outcome, i);
    const FactSet claimable =
        closure(inst.space, inst.rules, inst.ctx, inst.agents[i].knowledge, inst.budget) | rel;
    std::vector<FactSet> bits;
    for (std::size_t b = 0; b < inst.space.facts.size(); ++b)
      if (claimable & (FactSet{1} << b)) bits.push_back(FactSet{1} << b);
    if ((std::uint64_t{1} << bits.size()) > kMaxEnumeratedSets)
      fail(errc::resource_limit, "auction audit: misreport space too large");
    std::vector<FactSet> reports = truth_reports;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << bits.size()); ++m) {
      FactSet claim = 0;
      for (std::size_t b = 0; b < bits.size(); ++b)
        if (m & (std::uint64_t{1} << b)) claim |= bits[b];
      if (claim == inst.agents[i].knowledge) continue;
      reports[i] = claim;
      const Outcome dev = run_auction(inst, reports, force_conservation);
      const double gain = realized_utility(inst, dev, i) - base;
      if (!have_deviation || gain > audit.best_deviation.gain) {
        audit.best_deviation = {i, claim, gain};
        have_deviation = true;
      }
      if (gain > kPivotTolerance) audit.truthful = false;
    }
    reports[i] = truth_reports[i];
  }
  return audit;
}

// Non-trivial instance: two agents hold relevant knowledge and disagree on
// at least one relevant fact.
inline bool is_nontrivial(const AuctionInstance& inst) {
  inst.validate();
  const FactSet rel = relevant(inst.space, inst.rules, inst.ctx, inst.budget);
  for (std::size_t i = 0; i < inst.agents.size(); ++i)
    for (std::size_t j = i + 1; j < inst.agents.size(); ++j) {
      const FactSet a = inst.agents[i].knowledge;
      const FactSet b = inst.agents[j].knowledge;
      if ((a & rel) && (b & rel) && ((a ^ b) & rel)) return true;
    }
  return false;
}

struct ImpossibilityWitness {
  PropertyAudit unforced;  // expected: truthful, reveals, optimal; not conserving
  PropertyAudit forced;    // conserving by construction; expected: not truthful
  bool demonstrates = false;
};

// Runs both sides of the impossibility on one non-trivial instance: without
// forcing, payments fail to conserve while the other three properties hold;
// with conservation forced, a profitable misreport appears.
inline ImpossibilityWitness impossibility_witness(const AuctionInstance& inst) {
  if (!is_nontrivial(inst))
    fail(errc::invalid_argument,
         "impossibility witness requires a non-trivial instance "
         "(two agents with relevant, disagreeing knowledge)");
  ImpossibilityWitness w;
  w.unforced = audit_properties(inst, /*force_conservation=*/false);
  w.forced = audit_properties(inst, /*force_conservation=*/true);
  w.demonstrates = w.unforced.truthful && w.unforced.reveals && w.unforced.optimal &&
                   !w.unforced.conserves && w.forced.conserves &&
                   !(w.forced.truthful && w.forced.optimal);
  return w;
}

}  // namespace infergap
