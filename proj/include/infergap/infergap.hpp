// SPDX-License-Identifier: MIT
//
// Umbrella header: pulls in the whole library.
#pragma once

#include "infergap/attribution.hpp"
#include "infergap/error.hpp"
#include "infergap/io.hpp"
#include "infergap/knowledge.hpp"
#include "infergap/mechanism.hpp"
#include "infergap/microtransformer.hpp"
#include "infergap/numerics.hpp"
#include "infergap/report.hpp"
#include "infergap/rng.hpp"
#include "infergap/scoring.hpp"
