// SPDX-License-Identifier: MIT
//
// Finite knowledge calculus.
//
// A knowledge space is an ordered set of opaque fact identifiers; subsets
// are bitmasks.  Derivation rules are explicit finite relations: an entry
// (premises -> conclusions) fires on a set A exactly when its premise set is
// contained in A, and a rule maps A to the union of the conclusions of its
// firing entries.  Every operation takes a cost budget; a rule participates
// only when its cost is within the budget.  Composite derivations are
// realized by iterated application (cost model: one budget check per rule
// application), which is what the closure operator iterates to fixpoint.
//
// Relevance of a fact k to a context Q holds when the rule relation links
// them within budget: either k participates (as premise or conclusion) in an
// entry that fires on Q, or some rule maps {k} to a set meeting Q.  With no
// rules nothing is relevant, and under an empty context exactly the
// zero-premise (axiom) conclusions are relevant.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infergap/error.hpp"

namespace infergap {

using FactSet = std::uint64_t;

inline constexpr std::size_t kMaxFacts = 64;

inline int set_size(FactSet s) { return std::popcount(s); }

struct KnowledgeSpace {
  std::vector<std::string> facts;  // unique, nonempty identifiers

  void validate() const {
    if (facts.empty()) fail(errc::invalid_argument, "knowledge space: no facts");
    if (facts.size() > kMaxFacts)
      fail(errc::resource_limit, "knowledge space: more than 64 facts");
    for (std::size_t i = 0; i < facts.size(); ++i) {
      if (facts[i].empty()) fail(errc::invalid_argument, "knowledge space: empty fact name");
      for (std::size_t j = i + 1; j < facts.size(); ++j)
        if (facts[i] == facts[j])
          fail(errc::invalid_argument, "knowledge space: duplicate fact '" + facts[i] + "'");
    }
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < facts.size(); ++i)
      if (facts[i] == name) return i;
    return std::nullopt;
  }

  FactSet full() const {
    return facts.size() == kMaxFacts ? ~FactSet{0} : (FactSet{1} << facts.size()) - 1;
  }

  std::vector<std::string> names_of(FactSet s) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < facts.size(); ++i)
      if (s & (FactSet{1} << i)) out.push_back(facts[i]);
    return out;
  }
};

struct RuleEntry {
  FactSet premises = 0;     // may be empty: an axiom entry fires on anything
  FactSet conclusions = 0;
};

struct Rule {
  std::string id;
  int cost = 1;  // strictly positive
  std::vector<RuleEntry> entries;
};

struct RuleSet {
  std::vector<Rule> rules;

  void validate(const KnowledgeSpace& space) const {
    const FactSet universe = space.full();
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const Rule& r = rules[i];
      if (r.id.empty()) fail(errc::invalid_argument, "rule with empty id");
      for (std::size_t j = i + 1; j < rules.size(); ++j)
        if (rules[j].id == r.id)
          fail(errc::invalid_argument, "duplicate rule id '" + r.id + "'");
      if (r.cost < 1)
        fail(errc::invalid_argument, "rule '" + r.id + "': cost must be >= 1");
      for (std::size_t e = 0; e < r.entries.size(); ++e) {
        if ((r.entries[e].premises | r.entries[e].conclusions) & ~universe)
          fail(errc::internal, "rule '" + r.id + "': entry references unknown facts");
        // Determinism: one conclusion set per premise set.
        for (std::size_t f = e + 1; f < r.entries.size(); ++f)
          if (r.entries[f].premises == r.entries[e].premises)
            fail(errc::invalid_argument,
                 "rule '" + r.id + "': duplicate premise set (relation not deterministic)");
      }
    }
  }
};

struct Context {
  FactSet query = 0;  // facts asserted by the query itself
  FactSet truth = 0;  // facts the ground truth certifies for the query
};

inline FactSet context_facts(const Context& ctx) { return ctx.query | ctx.truth; }

// Image of `a` under one rule: union of conclusions of the firing entries.
inline FactSet apply_rule(const Rule& rule, FactSet a) {
  FactSet out = 0;
  for (const RuleEntry& entry : rule.entries)
    if ((entry.premises & a) == entry.premises) out |= entry.conclusions;
  return out;
}

inline void require_budget(int budget) {
  if (budget < 0) fail(errc::invalid_argument, "budget must be nonnegative");
}

// Facts linked to the context by an affordable rule (see file comment).
inline FactSet relevant(const KnowledgeSpace& space, const RuleSet& rules,
                        const Context& ctx, int budget) {
  require_budget(budget);
  const FactSet q = context_facts(ctx);
  FactSet rel = 0;
  for (const Rule& rule : rules.rules) {
    if (rule.cost > budget) continue;
    for (const RuleEntry& entry : rule.entries)
      if ((entry.premises & q) == entry.premises) rel |= entry.premises | entry.conclusions;
    for (std::size_t i = 0; i < space.facts.size(); ++i) {
      const FactSet single = FactSet{1} << i;
      if (apply_rule(rule, single) & q) rel |= single;
    }
  }
  return rel;
}

// One emergence step: `a` plus everything an affordable rule derives from
// `a` that is relevant to the context.
inline FactSet emerge(const KnowledgeSpace& space, const RuleSet& rules,
                      const Context& ctx, FactSet a, int budget) {
  require_budget(budget);
  const FactSet rel = relevant(space, rules, ctx, budget);
  FactSet out = a;
  for (const Rule& rule : rules.rules) {
    if (rule.cost > budget) continue;
    out |= apply_rule(rule, a) & rel;
  }
  return out;
}

// Least fixed point of the emergence step above `a`.  Each non-final
// iteration adds at least one fact, so at most |facts| + 1 iterations run.
inline FactSet closure(const KnowledgeSpace& space, const RuleSet& rules,
                       const Context& ctx, FactSet a, int budget) {
  FactSet cur = a;
  for (std::size_t iter = 0; iter <= space.facts.size(); ++iter) {
    const FactSet next = emerge(space, rules, ctx, cur, budget);
    if (next == cur) return cur;
    cur = next;
  }
  fail(errc::internal, "closure failed to stabilize within |facts| iterations");
}

// Two sets are computationally independent within budget when no affordable
// rule maps either into contact with the other.
inline bool independent(const KnowledgeSpace& space, const RuleSet& rules,
                        FactSet a, FactSet b, int budget) {
  (void)space;
  require_budget(budget);
  for (const Rule& rule : rules.rules) {
    if (rule.cost > budget) continue;
    if (apply_rule(rule, a) & b) return false;
    if (a & apply_rule(rule, b)) return false;
  }
  return true;
}

// Equivalence: identical closures in the given context and budget.
inline bool equivalent(const KnowledgeSpace& space, const RuleSet& rules,
                       const Context& ctx, FactSet a, FactSet b, int budget) {
  return closure(space, rules, ctx, a, budget) == closure(space, rules, ctx, b, budget);
}

struct MeasureSpec {
  enum class Kind {
    counting,                    // scale * ln|facts| * |closure(a) ^ relevant|
    discounted_energy_external,  // computed by the transformer module, not here
  };
  Kind kind = Kind::counting;
  double scale = 1.0;
};

inline double measure(const KnowledgeSpace& space, const RuleSet& rules,
                      const Context& ctx, FactSet a, int budget,
                      const MeasureSpec& spec = {}) {
  if (spec.kind != MeasureSpec::Kind::counting)
    fail(errc::invalid_argument,
         "measure: discounted-energy measures are computed by the transformer module");
  if (!(spec.scale > 0.0))
    fail(errc::invalid_argument, "measure: scale must be positive");
  const FactSet core =
      closure(space, rules, ctx, a, budget) & relevant(space, rules, ctx, budget);
  return spec.scale * std::log(static_cast<double>(space.facts.size())) *
         static_cast<double>(set_size(core));
}

// Budget large enough that every affordable derivation chain has fired:
// total rule cost times the number of facts bounds any chain's cost.
inline int saturation_budget(const KnowledgeSpace& space, const RuleSet& rules) {
  long long total = 0;
  for (const Rule& rule : rules.rules) total += rule.cost;
  long long sat = total * static_cast<long long>(space.facts.size());
  if (sat > 1'000'000'000LL) sat = 1'000'000'000LL;
  return static_cast<int>(sat);
}

// Measure invariance under saturation: reasoning to closure neither
// creates nor destroys measured information, so a set and its closure carry
// the same measure at the saturation budget.
inline bool information_preserved(const KnowledgeSpace& space, const RuleSet& rules,
                                  const Context& ctx, FactSet a,
                                  const MeasureSpec& spec = {}) {
  const int sat = saturation_budget(space, rules);
  const FactSet closed = closure(space, rules, ctx, a, sat);
  return std::abs(measure(space, rules, ctx, closed, sat, spec) -
                  measure(space, rules, ctx, a, sat, spec)) <= 1e-12;
}

// A stepwise reasoning trace: an initial draw from the baseline followed by
// increments that must come from one emergence step over what is already on
// the trace, filtered to context-relevant facts.
struct CotTrace {
  FactSet baseline = 0;
  std::vector<FactSet> steps;  // steps[0] must be contained in baseline
};

struct CotAudit {
  bool meaningful = false;      // some increment (step >= 1) carries positive measure
  bool conserves = false;       // the union of increments carries zero measure
  std::vector<double> step_measures;
  double derived_measure = 0.0; // measure of the union of increments
  FactSet derived_union = 0;    // all facts introduced after step 0
};

inline CotAudit cot_audit(const KnowledgeSpace& space, const RuleSet& rules,
                          const Context& ctx, const CotTrace& trace, int budget,
                          const MeasureSpec& spec = {}) {
  require_budget(budget);
  const FactSet universe = space.full();
  if ((trace.baseline | context_facts(ctx)) & ~universe)
    fail(errc::trace_invalid, "trace references facts outside the knowledge space");
  const FactSet rel = relevant(space, rules, ctx, budget);

  CotAudit audit;
  FactSet seen = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const FactSet step = trace.steps[i];
    if (step & ~universe)
      fail(errc::trace_invalid, "trace step references facts outside the knowledge space");
    if (i == 0) {
      if (step & ~trace.baseline)
        fail(errc::trace_invalid, "trace step 0 is not contained in the baseline");
    } else {
      const FactSet admissible = (emerge(space, rules, ctx, seen, budget) & ~seen) & rel;
      if (step & ~admissible)
        fail(errc::trace_invalid,
             "trace step " + std::to_string(i) + " is not derivable-and-relevant");
      audit.derived_union |= step;
    }
    audit.step_measures.push_back(measure(space, rules, ctx, step, budget, spec));
    seen |= step;
  }
  audit.meaningful = false;
  for (std::size_t i = 1; i < audit.step_measures.size(); ++i)
    if (audit.step_measures[i] > 0.0) audit.meaningful = true;
  audit.derived_measure = measure(space, rules, ctx, audit.derived_union, budget, spec);
  audit.conserves = audit.derived_measure == 0.0;
  return audit;
}

// Everything reachable from the baseline: the ceiling for any valid trace.
inline FactSet safety_envelope(const KnowledgeSpace& space, const RuleSet& rules,
                               const Context& ctx, FactSet baseline, int budget) {
  return closure(space, rules, ctx, baseline, budget);
}

// A response stays within bounded creativity when every fact it asserts is
// reachable from the baseline.
inline bool creativity_bounded(const KnowledgeSpace& space, const RuleSet& rules,
                               const Context& ctx, FactSet response, FactSet baseline,
                               int budget) {
  return (response & ~safety_envelope(space, rules, ctx, baseline, budget)) == 0;
}

}  // namespace infergap
