#pragma once

/** @file
 * Containers for stationary and event-locked multichannel recordings.
 *
 * Data is held channel-major: row i of a matrix is channel i, column t is
 * frame t.  Channel labels are presentation only; all computation is by
 * 0-based channel index.
 */

#include "shr/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace shr {

/// Exact equality that tolerates differing shapes (Eigen's == asserts on them).
inline bool same_values(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

struct MultichannelSeries {
    Eigen::MatrixXd values; ///< channels x frames
    std::vector<std::string> channel_labels; ///< empty, or one per channel
    std::optional<double> sample_interval; ///< seconds per frame

    std::size_t n_channels() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t n_frames() const { return static_cast<std::size_t>(values.cols()); }

    friend bool operator==(const MultichannelSeries& a, const MultichannelSeries& b)
    {
        return same_values(a.values, b.values) && a.channel_labels == b.channel_labels &&
               a.sample_interval == b.sample_interval;
    }
};

struct EpochedSeries {
    std::vector<Eigen::MatrixXd> epochs; ///< each channels x frames
    std::vector<std::string> channel_labels;

    std::size_t n_epochs() const { return epochs.size(); }
    std::size_t n_channels() const
    {
        return epochs.empty() ? 0 : static_cast<std::size_t>(epochs.front().rows());
    }
    std::size_t n_frames() const
    {
        return epochs.empty() ? 0 : static_cast<std::size_t>(epochs.front().cols());
    }

    friend bool operator==(const EpochedSeries& a, const EpochedSeries& b)
    {
        if (a.epochs.size() != b.epochs.size() || a.channel_labels != b.channel_labels) {
            return false;
        }
        for (std::size_t j = 0; j < a.epochs.size(); ++j) {
            if (!same_values(a.epochs[j], b.epochs[j])) return false;
        }
        return true;
    }
};

namespace detail {

inline void check_labels(const std::vector<std::string>& labels, std::size_t n_channels)
{
    if (labels.empty()) return;
    if (labels.size() != n_channels) {
        throw Error(Errc::LabelMismatch, std::to_string(labels.size()) +
                                             " labels for " + std::to_string(n_channels) +
                                             " channels");
    }
    std::unordered_set<std::string> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) {
            throw Error(Errc::LabelMismatch, "duplicate channel label '" + label + "'");
        }
    }
}

inline void check_finite(const Eigen::MatrixXd& values, const std::string& where)
{
    // Column-major scan so the first offending frame is reported.
    for (Eigen::Index t = 0; t < values.cols(); ++t) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            if (!std::isfinite(values(i, t))) {
                throw Error(Errc::NonFinite,
                            "non-finite sample at channel " + std::to_string(i) + ", frame " +
                                std::to_string(t) + where,
                            static_cast<std::size_t>(i), static_cast<std::size_t>(t));
            }
        }
    }
}

} // namespace detail

/**
 * Checks the series invariants and that it has at least min_length frames.
 * Returns the argument itself; nothing is copied or modified.
 */
inline const MultichannelSeries& validate_series(const MultichannelSeries& series,
                                                 std::size_t min_length)
{
    if (series.n_channels() < 1) {
        throw Error(Errc::ShapeMismatch, "series has no channels");
    }
    detail::check_labels(series.channel_labels, series.n_channels());
    detail::check_finite(series.values, "");
    if (series.n_frames() < std::max<std::size_t>(1, min_length)) {
        throw Error(Errc::TooShort, "series has " + std::to_string(series.n_frames()) +
                                        " frames, at least " + std::to_string(min_length) +
                                        " required");
    }
    if (series.sample_interval && !(*series.sample_interval > 0.0)) {
        throw Error(Errc::InvalidArgument, "sample_interval must be positive");
    }
    return series;
}

/// Epoch counterpart of validate_series; min_length applies to every epoch.
inline const EpochedSeries& validate_epochs(const EpochedSeries& epochs, std::size_t min_length)
{
    if (epochs.n_epochs() < 2) {
        throw Error(Errc::TooFewEpochs, "event-locked analysis needs at least 2 epochs, got " +
                                            std::to_string(epochs.n_epochs()));
    }
    const auto rows = epochs.epochs.front().rows();
    const auto cols = epochs.epochs.front().cols();
    if (rows < 1) throw Error(Errc::ShapeMismatch, "epochs have no channels");
    for (std::size_t j = 0; j < epochs.n_epochs(); ++j) {
        const auto& e = epochs.epochs[j];
        if (e.rows() != rows || e.cols() != cols) {
            throw Error(Errc::RaggedEpochs,
                        "epoch " + std::to_string(j) + " is " + std::to_string(e.rows()) + "x" +
                            std::to_string(e.cols()) + ", expected " + std::to_string(rows) +
                            "x" + std::to_string(cols));
        }
        detail::check_finite(e, " of epoch " + std::to_string(j));
    }
    detail::check_labels(epochs.channel_labels, epochs.n_channels());
    if (epochs.n_frames() < std::max<std::size_t>(1, min_length)) {
        throw Error(Errc::TooShort, "epochs have " + std::to_string(epochs.n_frames()) +
                                        " frames, at least " + std::to_string(min_length) +
                                        " required");
    }
    return epochs;
}

} // namespace shr
