// SPDX-License-Identifier: MIT
//
// Proper scoring rules and the mixture-aggregation gap.
//
// A scoring rule assigns a loss to a reported distribution once the outcome
// is realized.  Both rules here are strictly proper: the expected loss under
// any belief is uniquely minimized by reporting that belief.  For a weighted
// profile of beliefs, `contributions` prices each belief holder at its
// weighted realized loss and the aggregator at minus the mixture's realized
// loss; the sum of those prices is the (nonnegative) Jensen gap of the rule,
// which is strictly positive whenever two positively weighted beliefs
// disagree.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "infergap/error.hpp"
#include "infergap/numerics.hpp"
#include "infergap/rng.hpp"

namespace infergap {

enum class ScoringRule { log_loss, brier };

inline const char* to_string(ScoringRule rule) {
  return rule == ScoringRule::log_loss ? "log" : "brier";
}

inline ScoringRule scoring_rule_from_string(const std::string& name) {
  if (name == "log") return ScoringRule::log_loss;
  if (name == "brier") return ScoringRule::brier;
  fail(errc::parse, "unknown scoring rule '" + name + "' (expected 'log' or 'brier')");
}

// Realized loss of `reported` when `outcome` occurs.  The log rule returns
// an explicit +infinity when the reported mass on the outcome is zero.
inline double loss(ScoringRule rule, const Vec& reported, std::size_t outcome) {
  require_probability_vector(reported, "loss: reported");
  if (outcome >= reported.size()) fail(errc::invalid_argument, "loss: outcome out of range");
  if (rule == ScoringRule::log_loss) {
    const double p = reported[outcome];
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(p);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < reported.size(); ++j) {
    const double target = j == outcome ? 1.0 : 0.0;
    const double d = reported[j] - target;
    s += d * d;
  }
  return s;
}

// Expected loss of `reported` when outcomes are drawn from `truth`.
// Zero-probability outcomes contribute zero even when their realized loss is
// infinite (the usual 0 * inf = 0 convention for expectations).
inline double expected_loss(ScoringRule rule, const Vec& reported, const Vec& truth) {
  require_probability_vector(reported, "expected_loss: reported");
  require_probability_vector(truth, "expected_loss: truth");
  if (reported.size() != truth.size())
    fail(errc::invalid_argument, "expected_loss: dimension mismatch");
  double s = 0.0;
  for (std::size_t y = 0; y < truth.size(); ++y) {
    if (truth[y] == 0.0) continue;
    s += truth[y] * loss(rule, reported, y);
  }
  return s;
}

// A weighted collection of beliefs over a common outcome space.
struct BeliefProfile {
  Vec weights;                // strictly positive, sums to one within 1e-12
  std::vector<Vec> beliefs;   // one probability vector per weight
};

inline void validate(const BeliefProfile& profile) {
  if (profile.weights.empty() || profile.weights.size() != profile.beliefs.size())
    fail(errc::invalid_argument, "belief profile: weight/belief count mismatch");
  double mass = 0.0;
  for (double w : profile.weights) {
    if (!std::isfinite(w) || w <= 0.0)
      fail(errc::invalid_argument, "belief profile: weights must be strictly positive");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-12)
    fail(errc::invalid_argument, "belief profile: weights must sum to one");
  const std::size_t dim = profile.beliefs.front().size();
  for (const Vec& b : profile.beliefs) {
    if (b.size() != dim)
      fail(errc::invalid_argument, "belief profile: beliefs must share one dimension");
    require_probability_vector(b, "belief profile: belief");
  }
}

// Convex combination of the profile's beliefs.
inline Vec aggregate_mixture(const BeliefProfile& profile) {
  validate(profile);
  Vec out(profile.beliefs.front().size(), 0.0);
  for (std::size_t h = 0; h < profile.beliefs.size(); ++h)
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] += profile.weights[h] * profile.beliefs[h][j];
  return out;
}

// Priced decomposition of the realized mixture loss.
//   holder_payments[h] = w_h * L(belief_h, outcome)
//   aggregator_payment = -L(mixture, outcome)
//   gamma              = aggregator_payment + sum(holder_payments)
// Convexity of both rules in the reported distribution makes gamma >= 0,
// with equality exactly when all positively weighted beliefs agree.
struct GapReport {
  std::size_t outcome = 0;
  ScoringRule rule = ScoringRule::log_loss;
  Vec holder_losses;      // L(belief_h, outcome)
  Vec holder_payments;    // w_h * holder_losses[h]
  double mixture_loss = 0.0;
  double aggregator_payment = 0.0;
  double gamma = 0.0;
};

inline GapReport contributions(const BeliefProfile& profile, std::size_t outcome,
                               ScoringRule rule) {
  validate(profile);
  if (outcome >= profile.beliefs.front().size())
    fail(errc::invalid_argument, "contributions: outcome out of range");
  GapReport report;
  report.outcome = outcome;
  report.rule = rule;
  report.holder_losses.resize(profile.beliefs.size());
  report.holder_payments.resize(profile.beliefs.size());
  double total = 0.0;
  for (std::size_t h = 0; h < profile.beliefs.size(); ++h) {
    report.holder_losses[h] = loss(rule, profile.beliefs[h], outcome);
    report.holder_payments[h] = profile.weights[h] * report.holder_losses[h];
    total += report.holder_payments[h];
  }
  report.mixture_loss = loss(rule, aggregate_mixture(profile), outcome);
  report.aggregator_payment = -report.mixture_loss;
  report.gamma = report.aggregator_payment + total;
  return report;
}

// Seeded random profile: weights and beliefs are independent simplex points
// (normalized exponentials of unit normals), so every entry is positive.
inline BeliefProfile random_profile(Rng& rng, std::size_t holders, std::size_t dim) {
  if (holders == 0 || dim == 0)
    fail(errc::invalid_argument, "random_profile: empty shape");
  BeliefProfile profile;
  profile.weights = rng.simplex_point(holders);
  profile.beliefs.reserve(holders);
  for (std::size_t h = 0; h < holders; ++h)
    profile.beliefs.push_back(rng.simplex_point(dim));
  return profile;
}

}  // namespace infergap
