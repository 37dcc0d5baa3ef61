// SPDX-License-Identifier: MIT
//
// Deterministic random helpers.  std::mt19937_64 supplies the raw bit
// stream (its output is pinned by the standard), while the uniform and
// normal transforms are spelled out here instead of using the standard
// distributions, whose results are implementation-defined.  Identical
// seeds therefore reproduce identical draws on every platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "infergap/numerics.hpp"

namespace infergap {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform draw in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; caches the second deviate of each pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 1 - uniform() lies in (0, 1], keeping the log argument positive.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound) by rejection, bias-free.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) fail(errc::invalid_argument, "Rng::below: zero bound");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  // Random point in the probability simplex: normalized exponentials of
  // independent unit normals.  Entries are strictly positive.
  Vec simplex_point(std::size_t dim) {
    if (dim == 0) fail(errc::invalid_argument, "Rng::simplex_point: zero dimension");
    Vec w(dim);
    double mass = 0.0;
    for (double& x : w) {
      x = std::exp(normal());
      mass += x;
    }
    for (double& x : w) x /= mass;
    return w;
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace infergap
