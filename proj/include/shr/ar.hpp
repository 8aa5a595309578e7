#pragma once

/** @file
 * Univariate autoregressive fits per channel and their innovation series.
 *
 * Each channel is modelled as
 *
 *     u_t = a_1 u_{t-1} + ... + a_Q u_{t-Q} + v_t
 *
 * with no intercept, estimated by ordinary least squares on the conditional
 * regression.  The residuals v_t are the innovations that later get stacked
 * into the lagged data matrix.
 */

#include "shr/detail/parallel.hpp"
#include "shr/error.hpp"
#include "shr/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shr {

/// Relative singular-value cutoff for the minimum-norm least-squares solve.
inline constexpr double lstsq_rcond = 1e-10;

struct ArModel {
    std::size_t channel = 0;
    std::size_t order = 0;
    Eigen::VectorXd coefficients; ///< a_1 .. a_order
    double innovation_variance = 0.0; ///< mean squared residual
};

struct InnovationSeries {
    Eigen::MatrixXd values; ///< channels x (N_T - first_frame)
    std::size_t global_order = 0;
    /// 0-based index, in the source series, of column 0.  Equals the largest
    /// per-channel order so every row covers the same frames.
    std::size_t first_frame = 0;
    std::vector<ArModel> models;
};

struct LocalArModel {
    std::size_t channel = 0;
    std::size_t target_time = 0; ///< 1-based frame number tau
    std::size_t order = 0;
    Eigen::VectorXd coefficients;
    /// Row r holds local time tau - r for r = 0..order; one column per epoch.
    Eigen::MatrixXd innovations;
};

namespace detail {

/// Minimum-norm solution of min ||X b - y||, singular values below
/// lstsq_rcond * sigma_max treated as zero.
inline Eigen::VectorXd min_norm_lstsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(lstsq_rcond);
    Eigen::VectorXd b = svd.solve(y);
    if (!b.allFinite()) {
        throw Error(Errc::NumericalFailure, "least-squares solve produced non-finite values");
    }
    return b;
}

/// Lagged design for frames first..n-1 (0-based): row r regresses row[first+r]
/// on row[first+r-1], ..., row[first+r-order].
inline Eigen::MatrixXd lagged_design(std::span<const double> row, std::size_t order,
                                     std::size_t first)
{
    const std::size_t n_eq = row.size() - first;
    Eigen::MatrixXd X(n_eq, order);
    for (std::size_t r = 0; r < n_eq; ++r) {
        for (std::size_t k = 0; k < order; ++k) X(r, k) = row[first + r - 1 - k];
    }
    return X;
}

inline void require_order(std::size_t order)
{
    if (order < 1) {
        throw Error(Errc::InvalidOrder, "autoregressive order must satisfy Q >= 1, got " +
                                            std::to_string(order));
    }
}

} // namespace detail

/**
 * Fits an AR(order) model to one channel by least squares over frames
 * order..N_T-1.  Degenerate designs (constant or zero channels) get the
 * minimum-norm solution.
 */
inline ArModel fit_ar_channel(std::span<const double> row, std::size_t order,
                              std::size_t channel = 0)
{
    detail::require_order(order);
    if (row.size() < 2 * order + 2) {
        throw Error(Errc::TooShort,
                    "channel " + std::to_string(channel) + " has " + std::to_string(row.size()) +
                        " frames; order " + std::to_string(order) + " needs at least " +
                        std::to_string(2 * order + 2),
                    channel);
    }
    for (std::size_t t = 0; t < row.size(); ++t) {
        if (!std::isfinite(row[t])) {
            throw Error(Errc::NonFinite,
                        "non-finite sample at channel " + std::to_string(channel) + ", frame " +
                            std::to_string(t),
                        channel, t);
        }
    }

    const Eigen::MatrixXd X = detail::lagged_design(row, order, order);
    const Eigen::Map<const Eigen::VectorXd> y(row.data() + order,
                                              static_cast<Eigen::Index>(row.size() - order));

    ArModel model;
    model.channel = channel;
    model.order = order;
    model.coefficients = detail::min_norm_lstsq(X, y);
    model.innovation_variance = (y - X * model.coefficients).squaredNorm() / double(y.size());
    return model;
}

/// Residuals of `model` on `row` for frames first..N_T-1 (first >= order).
inline Eigen::VectorXd ar_residuals(std::span<const double> row, const ArModel& model,
                                    std::size_t first)
{
    const std::size_t n = row.size() - first;
    Eigen::VectorXd v(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t t = first + r;
        double pred = 0.0;
        for (std::size_t k = 0; k < model.order; ++k) {
            pred += model.coefficients[k] * row[t - 1 - k];
        }
        v[r] = row[t] - pred;
    }
    return v;
}

/**
 * Fits every channel and returns time-aligned innovations.
 *
 * per_channel_orders, when given, must hold one order per channel, each at
 * least global_order.  Rows start at the largest order in use.
 */
inline InnovationSeries compute_innovations(
    const MultichannelSeries& series, std::size_t global_order,
    const std::optional<std::vector<std::size_t>>& per_channel_orders = std::nullopt,
    std::size_t threads = 1)
{
    detail::require_order(global_order);
    const std::size_t n_channels = series.n_channels();
    std::vector<std::size_t> orders(n_channels, global_order);
    if (per_channel_orders) {
        if (per_channel_orders->size() != n_channels) {
            throw Error(Errc::ShapeMismatch,
                        std::to_string(per_channel_orders->size()) + " per-channel orders for " +
                            std::to_string(n_channels) + " channels");
        }
        for (std::size_t i = 0; i < n_channels; ++i) {
            if ((*per_channel_orders)[i] < global_order) {
                throw Error(Errc::OrderBelowGlobal,
                            "channel " + std::to_string(i) + " order " +
                                std::to_string((*per_channel_orders)[i]) +
                                " is below the global order " + std::to_string(global_order),
                            i);
            }
        }
        orders = *per_channel_orders;
    }
    const std::size_t max_order = *std::max_element(orders.begin(), orders.end());
    const std::size_t n_frames = series.n_frames();
    if (n_frames < 2 * max_order + 2) {
        throw Error(Errc::TooShort, "series has " + std::to_string(n_frames) +
                                        " frames; order " + std::to_string(max_order) +
                                        " needs at least " + std::to_string(2 * max_order + 2));
    }

    InnovationSeries out;
    out.global_order = global_order;
    out.first_frame = max_order;
    out.values.resize(static_cast<Eigen::Index>(n_channels),
                      static_cast<Eigen::Index>(n_frames - max_order));
    out.models.resize(n_channels);

    // Row copies keep each fit on contiguous memory (values is column-major).
    detail::parallel_for(n_channels, threads, [&](std::size_t i) {
        const std::vector<double> row(series.values.row(static_cast<Eigen::Index>(i)).begin(),
                                      series.values.row(static_cast<Eigen::Index>(i)).end());
        out.models[i] = fit_ar_channel(row, orders[i], i);
        out.values.row(static_cast<Eigen::Index>(i)) =
            ar_residuals(row, out.models[i], max_order).transpose();
    });
    return out;
}

/**
 * Local AR fits anchored at target time tau (1-based frame number).
 *
 * For each channel one least-squares system pools (Q+1) * N_s equations:
 * local times tau-Q..tau in every epoch, each regressed on its Q previous
 * frames (reaching back to tau-2Q).  The residuals at those local times
 * form the innovations.
 */
inline std::vector<LocalArModel> fit_local_ar(const EpochedSeries& epochs, std::size_t tau,
                                              std::size_t global_order, std::size_t threads = 1)
{
    detail::require_order(global_order);
    const std::size_t q = global_order;
    const std::size_t n_epochs = epochs.n_epochs();
    if (n_epochs < 2) {
        throw Error(Errc::TooFewEpochs, "local fits need at least 2 epochs");
    }
    if (tau < 2 * q + 1) {
        throw Error(Errc::TooEarly, "target time tau = " + std::to_string(tau) +
                                        " must be >= 2Q+1 = " + std::to_string(2 * q + 1));
    }
    if (tau > epochs.n_frames()) {
        throw Error(Errc::TooLate, "target time tau = " + std::to_string(tau) +
                                       " exceeds the epoch length " +
                                       std::to_string(epochs.n_frames()));
    }

    const std::size_t n_channels = epochs.n_channels();
    const std::size_t n_local = q + 1;
    std::vector<LocalArModel> models(n_channels);

    detail::parallel_for(n_channels, threads, [&](std::size_t i) {
        const auto ch = static_cast<Eigen::Index>(i);
        Eigen::MatrixXd X(n_local * n_epochs, q);
        Eigen::VectorXd y(n_local * n_epochs);
        for (std::size_t j = 0; j < n_epochs; ++j) {
            const auto& e = epochs.epochs[j];
            for (std::size_t r = 0; r < n_local; ++r) {
                const auto t = static_cast<Eigen::Index>(tau - 1 - r);
                const auto eq = static_cast<Eigen::Index>(j * n_local + r);
                y[eq] = e(ch, t);
                for (std::size_t k = 0; k < q; ++k) {
                    X(eq, static_cast<Eigen::Index>(k)) = e(ch, t - 1 - static_cast<Eigen::Index>(k));
                }
            }
        }

        LocalArModel& m = models[i];
        m.channel = i;
        m.target_time = tau;
        m.order = q;
        m.coefficients = detail::min_norm_lstsq(X, y);
        const Eigen::VectorXd resid = y - X * m.coefficients;
        m.innovations.resize(static_cast<Eigen::Index>(n_local),
                             static_cast<Eigen::Index>(n_epochs));
        for (std::size_t j = 0; j < n_epochs; ++j) {
            for (std::size_t r = 0; r < n_local; ++r) {
                m.innovations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                    resid[static_cast<Eigen::Index>(j * n_local + r)];
            }
        }
    });
    return models;
}

} // namespace shr
