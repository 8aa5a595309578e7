#pragma once

/** @file
 * End-to-end analyses: stationary recordings and event-locked sweeps over
 * target times.
 */

#include "shr/ar.hpp"
#include "shr/decomposition.hpp"
#include "shr/detail/parallel.hpp"
#include "shr/embedding.hpp"
#include "shr/error.hpp"
#include "shr/series.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shr {

enum class SvdMode { Full, Power, Auto };

/// Inclusive range of 1-based target frames.
struct TauRange {
    std::size_t first = 0;
    std::size_t last = 0;

    bool operator==(const TauRange&) const = default;
};

struct AnalysisConfig {
    std::size_t global_order = 2;
    std::optional<std::vector<std::size_t>> per_channel_orders;
    SvdMode svd_mode = SvdMode::Auto;
    PowerOptions power;
    /// Auto picks power iteration when (Q+1)*N_v > auto_ratio * M.
    double auto_ratio = 4.0;
    std::optional<TauRange> tau_range;
    /// Worker threads for per-channel fits and per-tau work; 0 = all cores.
    std::size_t threads = 1;
};

using WarningSink = std::function<void(const std::string&)>;

struct TauGap {
    Errc code = Errc::NumericalFailure;
    std::string message;
};

struct TauEntry {
    std::size_t tau = 0;
    std::optional<ShrResult> result; ///< empty when the tau produced a gap
    std::optional<TauGap> gap;
};

struct LockedShrSweep {
    std::vector<TauEntry> results; ///< strictly increasing tau
    AnalysisConfig config;
    TauRange range;
};

namespace detail {

inline void warn(const WarningSink& sink, const std::string& msg)
{
    if (sink) sink(msg);
}

inline bool prefers_power(const LaggedDataMatrix& z, const AnalysisConfig& cfg)
{
    switch (cfg.svd_mode) {
    case SvdMode::Full: return false;
    case SvdMode::Power: return true;
    case SvdMode::Auto:
        return double(z.values.rows()) > cfg.auto_ratio * double(z.values.cols());
    }
    return false;
}

/// Factorize a normalized lagged matrix and extract the SHR split.
inline ShrResult decompose(const LaggedDataMatrix& z, const AnalysisConfig& cfg,
                           const WarningSink& sink)
{
    const ShrLayout layout{z.global_order, z.n_channels, z.degenerate_channels()};
    if (prefers_power(z, cfg)) {
        try {
            const auto lead = in_stage("svd", [&] { return leading_triplet_power(z, cfg.power); });
            return in_stage("shr", [&] {
                return extract_shr(lead.left, lead.right, lead.sigma, std::nullopt, layout);
            });
        }
        catch (const NotConverged& e) {
            if (cfg.svd_mode != SvdMode::Auto) throw;
            warn(sink, "power iteration did not converge (" + e.message() +
                           "); falling back to full SVD");
        }
    }
    const auto f = in_stage("svd", [&] { return full_svd(z); });
    return in_stage("shr", [&] {
        return extract_shr(f.left.col(0), f.right.col(0), f.singular_values[0],
                           f.singular_values, layout);
    });
}

inline void check_config(const AnalysisConfig& cfg, const WarningSink& sink)
{
    require_order(cfg.global_order);
    if (cfg.global_order == 1) {
        warn(sink, "Q = 1: hub scores are undefined; only senders and receivers are reported");
    }
    if (cfg.svd_mode != SvdMode::Full && !(cfg.power.tol > 0.0)) {
        throw Error(Errc::InvalidArgument, "power iteration tol must be > 0");
    }
}

inline void report_degenerate(const ShrResult& r, const WarningSink& sink, const std::string& where)
{
    for (auto ch : r.degenerate_channels) {
        warn(sink, "channel " + std::to_string(ch) + " has zero-variance innovations" + where +
                       "; its scores are zero");
    }
}

} // namespace detail

/**
 * Stationary analysis: per-channel AR innovations, lag stacking, row
 * normalization, factorization and SHR extraction.  Errors carry the name of
 * the stage that raised them.
 */
inline ShrResult analyze_stationary(const MultichannelSeries& series, const AnalysisConfig& cfg,
                                    const WarningSink& sink = {})
{
    detail::in_stage("config", [&] { detail::check_config(cfg, sink); });
    std::size_t max_order = cfg.global_order;
    if (cfg.per_channel_orders) {
        for (auto o : *cfg.per_channel_orders) max_order = std::max(max_order, o);
    }
    detail::in_stage("validate", [&] { validate_series(series, 2 * max_order + 2); });

    const auto innovations = detail::in_stage("ar-innovations", [&] {
        return compute_innovations(series, cfg.global_order, cfg.per_channel_orders, cfg.threads);
    });
    const auto z = detail::in_stage("lagged-embedding", [&] {
        return normalize_rows(build_stationary_matrix(innovations));
    });
    auto result = detail::decompose(z, cfg, sink);
    detail::report_degenerate(result, sink, "");
    return result;
}

/// Checks a requested tau range against an epoch length; returns the
/// effective range (the full admissible range when none is given).
inline TauRange resolve_tau_range(const std::optional<TauRange>& requested, std::size_t order,
                                  std::size_t n_frames)
{
    const std::size_t lo = 2 * order + 1;
    if (!requested) {
        if (n_frames < lo) {
            throw Error(Errc::TooShort, "epochs have " + std::to_string(n_frames) +
                                            " frames; order " + std::to_string(order) +
                                            " needs at least " + std::to_string(lo));
        }
        return {lo, n_frames};
    }
    if (requested->first > requested->last) {
        throw Error(Errc::InvalidArgument, "tau range " + std::to_string(requested->first) + ":" +
                                               std::to_string(requested->last) + " is empty");
    }
    if (requested->first < lo) {
        throw Error(Errc::TooEarly, "tau must start at >= 2Q+1 = " + std::to_string(lo) +
                                        ", got " + std::to_string(requested->first));
    }
    if (requested->last > n_frames) {
        throw Error(Errc::TooLate, "tau must end at <= N_T = " + std::to_string(n_frames) +
                                       ", got " + std::to_string(requested->last));
    }
    return *requested;
}

/**
 * Event-locked sweep.  Each target time is analyzed independently; a tau
 * whose analysis fails (e.g. every row degenerate) becomes a gap entry.
 */
inline LockedShrSweep analyze_event_locked(const EpochedSeries& epochs, const AnalysisConfig& cfg,
                                           const WarningSink& sink = {})
{
    detail::in_stage("config", [&] { detail::check_config(cfg, sink); });
    if (cfg.per_channel_orders) {
        detail::warn(sink, "per-channel orders are ignored for event-locked analysis");
    }
    const std::size_t q = cfg.global_order;
    detail::in_stage("validate", [&] { validate_epochs(epochs, 2 * q + 1); });

    LockedShrSweep sweep;
    sweep.config = cfg;
    sweep.range = detail::in_stage("validate",
                                   [&] { return resolve_tau_range(cfg.tau_range, q, epochs.n_frames()); });

    const std::size_t n_tau = sweep.range.last - sweep.range.first + 1;
    sweep.results.resize(n_tau);
    std::vector<std::vector<std::string>> warnings(n_tau);
    detail::parallel_for(n_tau, cfg.threads, [&](std::size_t k) {
        TauEntry& entry = sweep.results[k];
        entry.tau = sweep.range.first + k;
        const WarningSink local = [&](const std::string& w) { warnings[k].push_back(w); };
        try {
            const auto models = detail::in_stage("ar-innovations", [&] {
                return fit_local_ar(epochs, entry.tau, q);
            });
            const auto z = detail::in_stage("lagged-embedding", [&] {
                return normalize_rows(build_locked_matrix(models));
            });
            entry.result = detail::decompose(z, cfg, local);
        }
        catch (const Error& e) {
            entry.gap = TauGap{e.code(), e.describe()};
            local("tau " + std::to_string(entry.tau) + " skipped: " + e.describe());
        }
    });

    // Warnings are replayed in tau order so diagnostics are deterministic.
    for (std::size_t k = 0; k < n_tau; ++k) {
        for (const auto& w : warnings[k]) detail::warn(sink, w);
        if (sweep.results[k].result) {
            detail::report_degenerate(*sweep.results[k].result, sink,
                                      " at tau " + std::to_string(sweep.results[k].tau));
        }
    }
    return sweep;
}

} // namespace shr
