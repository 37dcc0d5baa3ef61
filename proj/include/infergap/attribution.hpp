// SPDX-License-Identifier: MIT
//
// Mixture attribution: can a final distribution be explained as a linear
// combination of head distributions?
//
// The head distributions form the columns of a matrix P; the minimum-norm
// least-squares weights are beta = pinv(P) * final, the reconstruction is
// P * beta, and the residual final - P * beta is orthogonal to the column
// space of P.  A distribution counts as attributable when the residual norm
// falls below tolerance.  Weights are deliberately unconstrained: a genuine
// convex mixture is recovered exactly, and anything else shows up in the
// weights or the residual rather than being projected away.
#pragma once

#include <cstddef>
#include <vector>

#include "infergap/error.hpp"
#include "infergap/numerics.hpp"

namespace infergap {

inline constexpr double kAttributionTolerance = 1e-6;

struct AttributionReport {
  Matrix head_matrix;     // |V| x H, column h = head distribution h
  Vec beta;               // minimum-norm least-squares weights
  Vec reconstructed;      // head_matrix * beta
  Vec residual;           // final - reconstructed
  double residual_norm = 0.0;
  bool attributable = false;
};

inline AttributionReport attribute(const std::vector<Vec>& head_dists, const Vec& final_dist,
                                   double tolerance = kAttributionTolerance) {
  if (head_dists.empty()) fail(errc::invalid_argument, "attribute: no head distributions");
  if (!(tolerance > 0.0)) fail(errc::invalid_argument, "attribute: tolerance must be positive");
  const std::size_t dim = final_dist.size();
  require_probability_vector(final_dist, "attribute: final distribution");
  AttributionReport report;
  report.head_matrix = Matrix::zeros(dim, head_dists.size());
  for (std::size_t h = 0; h < head_dists.size(); ++h) {
    if (head_dists[h].size() != dim)
      fail(errc::invalid_argument, "attribute: head dimension mismatch");
    require_probability_vector(head_dists[h], "attribute: head distribution");
    for (std::size_t j = 0; j < dim; ++j) report.head_matrix.at(j, h) = head_dists[h][j];
  }
  const Matrix pinv = pseudoinverse(report.head_matrix);
  report.beta = mat_vec(pinv, final_dist);
  report.reconstructed = mat_vec(report.head_matrix, report.beta);
  report.residual = vec_sub(final_dist, report.reconstructed);
  report.residual_norm = l2_norm(report.residual);
  report.attributable = report.residual_norm < tolerance;
  return report;
}

enum class MixtureVerdict { within_evidence, excess_confidence };

inline const char* to_string(MixtureVerdict v) {
  return v == MixtureVerdict::within_evidence ? "within-evidence" : "excess-confidence";
}

// Coarse convexity bound: no convex mixture can put more mass on an outcome
// than its most confident component does.  Exceeding that bound means the
// aggregate asserts more than any evidence source held.
inline MixtureVerdict mixture_bound_check(const std::vector<Vec>& head_dists,
                                          const Vec& final_dist, std::size_t outcome) {
  if (head_dists.empty()) fail(errc::invalid_argument, "mixture bound: no head distributions");
  if (outcome >= final_dist.size())
    fail(errc::invalid_argument, "mixture bound: outcome out of range");
  double best = 0.0;
  for (const Vec& d : head_dists) {
    if (d.size() != final_dist.size())
      fail(errc::invalid_argument, "mixture bound: head dimension mismatch");
    if (d[outcome] > best) best = d[outcome];
  }
  return final_dist[outcome] > best + 1e-12 ? MixtureVerdict::excess_confidence
                                            : MixtureVerdict::within_evidence;
}

}  // namespace infergap
