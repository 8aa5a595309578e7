#pragma once

/** @file
 * Time-lagged innovation data matrices and their row normalization.
 *
 * Rows are block-major: block b (b = 0..Q) occupies rows b*N_v .. (b+1)*N_v-1
 * and holds the innovations delayed by b frames.  Block 0 is the present,
 * block Q the deepest past.
 */

#include "shr/ar.hpp"
#include "shr/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shr {

enum class RowStatus { Normalized, Degenerate };

struct LaggedDataMatrix {
    Eigen::MatrixXd values; ///< (Q+1)*N_v x M
    std::size_t global_order = 0;
    std::size_t n_channels = 0;
    /// Empty until normalize_rows has run.
    std::vector<RowStatus> row_status;

    std::size_t n_blocks() const { return global_order + 1; }
    std::size_t n_columns() const { return static_cast<std::size_t>(values.cols()); }
    bool normalized() const { return !row_status.empty(); }

    /// Channels whose rows are degenerate in every lag block.
    std::vector<std::size_t> degenerate_channels() const
    {
        std::vector<std::size_t> out;
        if (!normalized()) return out;
        for (std::size_t i = 0; i < n_channels; ++i) {
            bool all = true;
            for (std::size_t b = 0; b < n_blocks() && all; ++b) {
                all = row_status[b * n_channels + i] == RowStatus::Degenerate;
            }
            if (all) out.push_back(i);
        }
        return out;
    }
};

/**
 * Stationary lagged matrix: column m stacks V_t, V_{t-1}, ..., V_{t-Q} for
 * the m-th admissible frame t.  With innovations starting at frame Q this is
 * N_T - 2Q columns.
 */
inline LaggedDataMatrix build_stationary_matrix(const InnovationSeries& innovations)
{
    const std::size_t q = innovations.global_order;
    const std::size_t n_v = static_cast<std::size_t>(innovations.values.rows());
    const std::size_t n_cols = static_cast<std::size_t>(innovations.values.cols());
    if (q < 1) throw Error(Errc::InvalidOrder, "global order must be >= 1");
    if (n_cols < q + 2) {
        throw Error(Errc::TooShort, "innovations have " + std::to_string(n_cols) +
                                        " columns; lag stacking at order " + std::to_string(q) +
                                        " needs at least " + std::to_string(q + 2));
    }

    const std::size_t m_cols = n_cols - q;
    LaggedDataMatrix z;
    z.global_order = q;
    z.n_channels = n_v;
    z.values.resize(static_cast<Eigen::Index>((q + 1) * n_v), static_cast<Eigen::Index>(m_cols));
    for (std::size_t b = 0; b <= q; ++b) {
        z.values.middleRows(static_cast<Eigen::Index>(b * n_v), static_cast<Eigen::Index>(n_v)) =
            innovations.values.middleCols(static_cast<Eigen::Index>(q - b),
                                          static_cast<Eigen::Index>(m_cols));
    }
    return z;
}

/// Event-locked lagged matrix: column j stacks epoch j's innovations at
/// tau, tau-1, ..., tau-Q, channel-major within each block.
inline LaggedDataMatrix build_locked_matrix(std::span<const LocalArModel> models)
{
    if (models.empty()) throw Error(Errc::ShapeMismatch, "no local models supplied");
    const auto& first = models.front();
    const std::size_t q = first.order;
    const std::size_t n_v = models.size();
    const auto n_local = first.innovations.rows();
    const auto n_epochs = first.innovations.cols();
    for (std::size_t i = 0; i < n_v; ++i) {
        const auto& m = models[i];
        if (m.target_time != first.target_time || m.order != q ||
            m.innovations.cols() != n_epochs || m.innovations.rows() != n_local) {
            throw Error(Errc::InconsistentModels,
                        "local model for channel " + std::to_string(m.channel) +
                            " (tau " + std::to_string(m.target_time) + ", Q " +
                            std::to_string(m.order) + ", " + std::to_string(m.innovations.cols()) +
                            " epochs) does not match channel " + std::to_string(first.channel),
                        m.channel);
        }
        if (m.channel != i) {
            throw Error(Errc::InconsistentModels, "local models must be in channel order", i);
        }
    }
    if (n_local != static_cast<Eigen::Index>(q + 1)) {
        throw Error(Errc::InconsistentModels, "local innovations must have Q+1 rows");
    }

    LaggedDataMatrix z;
    z.global_order = q;
    z.n_channels = n_v;
    z.values.resize(static_cast<Eigen::Index>((q + 1) * n_v), n_epochs);
    for (std::size_t b = 0; b <= q; ++b) {
        for (std::size_t i = 0; i < n_v; ++i) {
            z.values.row(static_cast<Eigen::Index>(b * n_v + i)) =
                models[i].innovations.row(static_cast<Eigen::Index>(b));
        }
    }
    return z;
}

/**
 * Centers each row and scales it to unit population variance (denominator
 * M), so Z Z^T / M is the correlation matrix of the rows.  Rows with
 * sigma < 1e-12 * max(1, max |entry|) become zero and are marked Degenerate.
 */
inline LaggedDataMatrix normalize_rows(LaggedDataMatrix matrix)
{
    const auto n_rows = matrix.values.rows();
    const auto m = matrix.values.cols();
    if (m < 2) {
        throw Error(Errc::TooShort, "normalization needs at least 2 columns, got " +
                                        std::to_string(m));
    }

    matrix.row_status.assign(static_cast<std::size_t>(n_rows), RowStatus::Normalized);
    std::size_t n_ok = 0;
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        auto row = matrix.values.row(r);
        const double scale = std::max(1.0, row.cwiseAbs().maxCoeff());
        const double mean = row.mean();
        row.array() -= mean;
        const double sigma = std::sqrt(row.squaredNorm() / double(m));
        if (sigma < 1e-12 * scale) {
            row.setZero();
            matrix.row_status[static_cast<std::size_t>(r)] = RowStatus::Degenerate;
        }
        else {
            row /= sigma;
            ++n_ok;
        }
    }
    if (n_ok == 0) {
        throw Error(Errc::AllRowsDegenerate, "every row of the lagged matrix has zero variance");
    }
    return matrix;
}

} // namespace shr
