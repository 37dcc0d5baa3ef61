// SPDX-License-Identifier: MIT
//
// Inference auction: envelopes, welfare maximization, externality credits,
// and the conservation impossibility.  The payment rule is cross-checked
// against an independent brute-force mirror written directly from the
// marginal-contribution definition.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "infergap/mechanism.hpp"
#include "infergap/rng.hpp"

using infergap::AgentSpec;
using infergap::AuctionInstance;
using infergap::Context;
using infergap::FactSet;
using infergap::KnowledgeSpace;
using infergap::Outcome;
using infergap::PropertyAudit;
using infergap::Rule;
using infergap::RuleEntry;
using infergap::RuleSet;

namespace {

// Flagship instance: facts subject=1, fox=2, dog=4.  Identity recall rules
// make each completion derivable only when somebody reports it; the query
// alone derives nothing.  Two specialists each hold one completion and the
// truth needs both.
AuctionInstance foxdog() {
  AuctionInstance inst;
  inst.space.facts = {"pangram_subject", "fox_completion", "dog_completion"};
  inst.rules.rules.push_back({"recall_fox", 1, {RuleEntry{2, 2}}});
  inst.rules.rules.push_back({"recall_dog", 1, {RuleEntry{4, 4}}});
  inst.ctx = {1, 2 | 4};
  inst.agents = {{"head_one", 2}, {"head_two", 4}};
  inst.budget = 1;
  return inst;
}

// Independent payment mirror: enumerates subsets of the relevant facts by
// hand and applies the credit definition term by term.
std::vector<double> mirror_payments(const AuctionInstance& inst,
                                    const std::vector<FactSet>& reports) {
  const FactSet rel = relevant(inst.space, inst.rules, inst.ctx, inst.budget);
  const std::size_t n = reports.size();

  auto coalition_env = [&](std::size_t skip) {
    FactSet seed = inst.ctx.query;
    for (std::size_t i = 0; i < n; ++i)
      if (i != skip) seed |= reports[i] & rel;
    return closure(inst.space, inst.rules, inst.ctx, seed, inst.budget);
  };
  auto welfare_of = [&](FactSet r, std::size_t skip) {
    double w = -static_cast<double>(infergap::set_size(r ^ inst.ctx.truth));
    for (std::size_t i = 0; i < n; ++i)
      if (i != skip)
        w -= static_cast<double>(infergap::set_size((r ^ inst.ctx.truth) & reports[i]));
    return w;
  };
  auto best_welfare = [&](std::size_t skip) {
    const FactSet env = coalition_env(skip);
    bool found = false;
    double best = 0.0;
    for (FactSet r = 0; r <= inst.space.full(); ++r) {
      if (r & ~rel) continue;
      if (r & ~env) continue;
      const double w = welfare_of(r, skip);
      if (!found || w > best) best = w, found = true;
    }
    REQUIRE(found);
    return best;
  };

  // Chosen response: maximize welfare over all agents (skip = n skips nobody).
  const FactSet env_all = coalition_env(n);
  FactSet chosen = 0;
  bool found = false;
  double chosen_w = 0.0;
  for (FactSet r = 0; r <= inst.space.full(); ++r) {
    if ((r & ~rel) || (r & ~env_all)) continue;
    const double w = welfare_of(r, n);
    if (!found || w > chosen_w) chosen = r, chosen_w = w, found = true;
  }
  REQUIRE(found);

  std::vector<double> payments(n);
  for (std::size_t i = 0; i < n; ++i)
    payments[i] = welfare_of(chosen, i) - best_welfare(i);
  return payments;
}

// Random recall-style instance: every fact has an identity rule, so the
// envelope is exactly query plus reported relevant facts.
AuctionInstance random_instance(infergap::Rng& rng) {
  AuctionInstance inst;
  const std::size_t n_facts = 2 + rng.below(3);
  for (std::size_t i = 0; i < n_facts; ++i)
    inst.space.facts.push_back("f" + std::to_string(i));
  const FactSet universe = inst.space.full();
  for (std::size_t i = 0; i < n_facts; ++i) {
    const FactSet bit = FactSet{1} << i;
    inst.rules.rules.push_back({"recall_f" + std::to_string(i), 1, {RuleEntry{bit, bit}}});
  }
  inst.ctx.query = rng.below(universe + 1);
  inst.ctx.truth = rng.below(universe + 1);
  const std::size_t n_agents = 1 + rng.below(3);
  for (std::size_t i = 0; i < n_agents; ++i)
    inst.agents.push_back({"agent" + std::to_string(i), rng.below(universe + 1)});
  inst.budget = 1;
  return inst;
}

}  // namespace

TEST_CASE("instance validation rejects malformed auctions", "[mechanism]") {
  AuctionInstance inst = foxdog();
  CHECK_NOTHROW(inst.validate());

  AuctionInstance no_agents = foxdog();
  no_agents.agents.clear();
  CHECK_THROWS_AS(no_agents.validate(), infergap::error);

  AuctionInstance dup = foxdog();
  dup.agents.push_back({"head_one", 2});
  CHECK_THROWS_AS(dup.validate(), infergap::error);

  AuctionInstance crowded = foxdog();
  for (int i = 0; i < 5; ++i) crowded.agents.push_back({"extra" + std::to_string(i), 0});
  CHECK_THROWS_AS(crowded.validate(), infergap::error);

  AuctionInstance wide = foxdog();
  for (int i = 0; i < 11; ++i) wide.space.facts.push_back("pad" + std::to_string(i));
  CHECK_THROWS_AS(wide.validate(), infergap::error);
}

TEST_CASE("default response universe enumerates subsets of the relevant facts",
          "[mechanism]") {
  const AuctionInstance inst = foxdog();
  // relevant = {fox, dog} (bits 2 and 4); canonical ascending order.
  CHECK(response_universe(inst) == std::vector<FactSet>{0, 2, 4, 6});

  AuctionInstance listed = foxdog();
  listed.responses = {6, 2, 2, 0};
  CHECK(response_universe(listed) == std::vector<FactSet>{0, 2, 6});
}

TEST_CASE("valuation and hallucination cost count symmetric differences",
          "[mechanism]") {
  const AuctionInstance inst = foxdog();  // truth = {fox, dog}
  CHECK(valuation(inst, 2, 6) == 0.0);    // response matches truth on {fox}
  CHECK(valuation(inst, 2, 4) == -1.0);   // fox missing and the agent knows it
  CHECK(valuation(inst, 4, 2) == -1.0);
  CHECK(valuation(inst, 2, 2) == 0.0);    // dog missing but outside the agent's scope
  CHECK(hallucination_cost(inst, 6) == 0.0);
  CHECK(hallucination_cost(inst, 2) == 1.0);
  CHECK(hallucination_cost(inst, 0) == 2.0);
  CHECK(hallucination_cost(inst, 1 | 6) == 1.0);  // asserting the subject is spurious
}

TEST_CASE("coalition envelope is the closure of query plus member reports",
          "[mechanism]") {
  const AuctionInstance inst = foxdog();
  const std::vector<FactSet> reports = inst.truthful_reports();
  CHECK(coalition_envelope(inst, reports, {true, true}) == (1 | 2 | 4));
  CHECK(coalition_envelope(inst, reports, {false, true}) == (1 | 4));
  CHECK(coalition_envelope(inst, reports, {true, false}) == (1 | 2));
  CHECK(coalition_envelope(inst, reports, {false, false}) == 1);
}

TEST_CASE("welfare optimum maximizes over feasible responses only", "[mechanism]") {
  const AuctionInstance inst = foxdog();
  const std::vector<FactSet> reports = inst.truthful_reports();

  const auto grand = welfare_optimum(inst, reports, {true, true});
  CHECK(grand.response == 6);
  CHECK(grand.welfare == 0.0);

  // Without head_one, fox is unreachable; best is {dog} at welfare -1.
  const auto solo = welfare_optimum(inst, reports, {false, true});
  CHECK(solo.response == 4);
  CHECK(solo.welfare == -1.0);

  // An explicit universe whose entries are all infeasible is degenerate.
  AuctionInstance stuck = foxdog();
  stuck.responses = {2};
  try {
    welfare_optimum(stuck, reports, {false, false});
    FAIL("expected degenerate_input");
  } catch (const infergap::error& e) {
    CHECK(e.kind() == infergap::errc::degenerate_input);
  }
}

TEST_CASE("welfare ties break toward the canonically smaller response", "[mechanism]") {
  // Both completions derivable from the query; an ignorant agent values
  // nothing, so {fox} and {dog} tie at welfare -1.
  AuctionInstance inst;
  inst.space.facts = {"pangram_subject", "fox_completion", "dog_completion"};
  inst.rules.rules.push_back({"derive_fox", 1, {RuleEntry{1, 2}}});
  inst.rules.rules.push_back({"derive_dog", 1, {RuleEntry{1, 4}}});
  inst.ctx = {1, 2 | 4};
  inst.agents = {{"bystander", 0}};
  inst.responses = {2, 4};
  const auto best = welfare_optimum(inst, inst.truthful_reports(), {true});
  CHECK(best.response == 2);
  CHECK(best.welfare == -1.0);
}

TEST_CASE("flagship auction credits both specialists one unit", "[mechanism]") {
  const AuctionInstance inst = foxdog();
  const Outcome out = run_auction(inst, inst.truthful_reports());

  CHECK(out.response == 6);
  CHECK(out.welfare == 0.0);
  CHECK(out.valuations == std::vector<double>{0.0, 0.0});
  CHECK(out.payments == std::vector<double>{1.0, 1.0});
  CHECK(out.utilities == std::vector<double>{1.0, 1.0});
  CHECK(out.sum_payments == 2.0);
  CHECK(out.pivotal == std::vector<bool>{true, true});
  CHECK_FALSE(out.conserves);
  CHECK_FALSE(out.conservation_forced);
  CHECK(realized_utility(inst, out, 0) == 1.0);
  CHECK(realized_utility(inst, out, 1) == 1.0);
}

TEST_CASE("forcing conservation rebates the mean payment", "[mechanism]") {
  const AuctionInstance inst = foxdog();
  const Outcome out = run_auction(inst, inst.truthful_reports(), true);
  CHECK(out.payments == std::vector<double>{0.0, 0.0});
  CHECK(out.sum_payments == 0.0);
  CHECK(out.conserves);
  CHECK(out.conservation_forced);
  CHECK(out.response == 6);  // the chosen response is unchanged
}

TEST_CASE("a redundant agent is not pivotal and earns no credit", "[mechanism]") {
  AuctionInstance inst = foxdog();
  inst.agents.push_back({"echo", 2});  // duplicates head_one's knowledge
  const Outcome out = run_auction(inst, inst.truthful_reports());
  CHECK(out.response == 6);
  // head_one and echo are interchangeable: removing either leaves fox
  // derivable, so neither is pivotal; head_two remains essential.
  CHECK(out.payments == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(out.pivotal == std::vector<bool>{false, true, false});
}

TEST_CASE("payments match the brute-force mirror on random instances", "[mechanism]") {
  infergap::Rng rng(2024);
  int nontrivial_payments = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const AuctionInstance inst = random_instance(rng);
    const std::vector<FactSet> reports = inst.truthful_reports();
    const Outcome out = run_auction(inst, reports);
    const std::vector<double> expect = mirror_payments(inst, reports);
    REQUIRE(out.payments.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(out.payments[i] == expect[i]);
      CHECK(out.payments[i] >= 0.0);
    }
    if (out.sum_payments > 0.0) ++nontrivial_payments;
  }
  CHECK(nontrivial_payments > 0);  // the sweep exercised pivotal agents
}

TEST_CASE("misreported knowledge changes realized but not reported valuation",
          "[mechanism]") {
  const AuctionInstance inst = foxdog();
  // head_one claims both completions; the mechanism believes the claim.
  const Outcome out = run_auction(inst, {2 | 4, 4});
  CHECK(out.response == 6);
  CHECK(out.valuations[0] == 0.0);
  // head_two's credit collapses: the others now reach the truth without it.
  CHECK(out.payments[1] == 0.0);
  CHECK(realized_utility(inst, out, 0) == out.payments[0]);
}

TEST_CASE("property audit certifies the flagship instance", "[mechanism]") {
  const PropertyAudit audit = audit_properties(foxdog());
  CHECK(audit.truthful);
  CHECK(audit.reveals);
  CHECK(audit.optimal);
  CHECK_FALSE(audit.conserves);
  CHECK(audit.best_deviation.gain <= infergap::kPivotTolerance);
  CHECK(audit.min_feasible_cost == 0.0);
}

TEST_CASE("forced conservation admits a profitable misreport", "[mechanism]") {
  const PropertyAudit audit = audit_properties(foxdog(), true);
  CHECK(audit.conserves);
  CHECK_FALSE(audit.truthful);
  // Witness: a specialist claiming both completions zeroes the other's
  // credit, and the rebate shifts half a unit its way.
  CHECK(audit.best_deviation.gain == 0.5);
  CHECK(audit.best_deviation.report == 6);
}

TEST_CASE("nontriviality needs two disagreeing relevant knowledge sets",
          "[mechanism]") {
  CHECK(is_nontrivial(foxdog()));

  AuctionInstance solo = foxdog();
  solo.agents.pop_back();
  CHECK_FALSE(is_nontrivial(solo));

  AuctionInstance twins = foxdog();
  twins.agents = {{"a", 2}, {"b", 2}};
  CHECK_FALSE(is_nontrivial(twins));

  AuctionInstance offside = foxdog();
  offside.agents = {{"a", 2}, {"b", 1}};  // subject is not a relevant fact
  CHECK_FALSE(is_nontrivial(offside));
}

TEST_CASE("impossibility witness demonstrates on the flagship and rejects trivial",
          "[mechanism]") {
  const auto w = impossibility_witness(foxdog());
  CHECK(w.demonstrates);
  CHECK(w.unforced.truthful);
  CHECK(w.unforced.reveals);
  CHECK(w.unforced.optimal);
  CHECK_FALSE(w.unforced.conserves);
  CHECK(w.forced.conserves);
  CHECK_FALSE((w.forced.truthful && w.forced.optimal));

  AuctionInstance trivial = foxdog();
  trivial.agents.pop_back();
  try {
    impossibility_witness(trivial);
    FAIL("expected invalid_argument");
  } catch (const infergap::error& e) {
    CHECK(e.kind() == infergap::errc::invalid_argument);
  }
}

TEST_CASE("truthfulness holds when the truth is collectively derivable", "[mechanism]") {
  // Instances where some certified fact is neither derivable nor held by
  // anyone reward fabricating it, so the guarantee is scoped to instances
  // whose grand coalition covers the truth.
  infergap::Rng rng(7);
  int audited = 0;
  for (int trial = 0; trial < 400 && audited < 25; ++trial) {
    const AuctionInstance inst = random_instance(rng);
    const FactSet env = coalition_envelope(
        inst, inst.truthful_reports(), std::vector<bool>(inst.agents.size(), true));
    if (inst.ctx.truth & ~env) continue;
    const PropertyAudit audit = audit_properties(inst);
    CHECK(audit.truthful);
    CHECK(audit.reveals);
    CHECK(audit.optimal);
    ++audited;
  }
  CHECK(audited == 25);
}

TEST_CASE("an uncoverable certified fact invites fabrication", "[mechanism]") {
  // truth = {fox, dog} but nobody holds dog and the query cannot derive it:
  // claiming dog expands the envelope and earns an extra unit of credit.
  AuctionInstance inst = foxdog();
  inst.agents = {{"head_one", 2}, {"bystander", 2}};
  const PropertyAudit audit = audit_properties(inst);
  CHECK_FALSE(audit.truthful);
  CHECK(audit.best_deviation.gain == 1.0);
  CHECK((audit.best_deviation.report & 4) != 0);
}
