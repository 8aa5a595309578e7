#pragma once

/** @file
 * Umbrella header for the sender/hub/receiver analysis library.
 *
 * Typical use:
 *
 *     shr::AnalysisConfig cfg;
 *     cfg.global_order = 2;
 *     const shr::ShrResult r = shr::analyze_stationary(series, cfg);
 *     // r.sender_score, r.hub_score, r.receiver_score
 *
 * io.hpp (CSV/epoch files) and document.hpp (JSON results) are separate so
 * the numerical core does not pull in a JSON dependency.
 */

#include "shr/ar.hpp"
#include "shr/decomposition.hpp"
#include "shr/embedding.hpp"
#include "shr/error.hpp"
#include "shr/pipeline.hpp"
#include "shr/series.hpp"
#include "shr/synth.hpp"
