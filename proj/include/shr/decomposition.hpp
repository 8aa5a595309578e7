#pragma once

/** @file
 * Singular value decomposition of the lagged matrix and the split of its
 * leading left singular vector into receiver, hub and sender blocks.
 */

#include "shr/embedding.hpp"
#include "shr/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace shr {

struct SvdFactors {
    Eigen::MatrixXd left; ///< rows x K, orthonormal columns
    Eigen::VectorXd singular_values; ///< length K, nonincreasing
    Eigen::MatrixXd right; ///< cols x K, orthonormal columns
};

struct LeadingTriplet {
    double sigma = 0.0;
    Eigen::VectorXd left;
    Eigen::VectorXd right;
    std::size_t iterations = 0;
};

struct PowerOptions {
    double tol = 1e-10;
    std::size_t max_iters = 10000;
};

/**
 * Receiver/hub/sender split of the leading singular triplet.
 *
 * gamma is laid out like the lagged matrix rows: block 0 (present) holds the
 * receiver loadings, blocks 1..Q-1 the hub loadings, block Q the senders.
 */
struct ShrResult {
    std::size_t global_order = 0;
    std::size_t n_channels = 0;
    Eigen::VectorXd gamma;
    Eigen::VectorXd receiver_loadings;
    Eigen::VectorXd sender_loadings;
    Eigen::MatrixXd hub_loadings; ///< (Q-1) x N_v, row k-1 is lag k; empty when Q == 1
    Eigen::VectorXd receiver_score;
    Eigen::VectorXd sender_score;
    std::optional<Eigen::VectorXd> hub_score; ///< absent when Q == 1
    Eigen::VectorXd temporal_mode;
    double leading_singular_value = 0.0;
    std::optional<double> explained_fraction;
    std::vector<std::size_t> degenerate_channels;

    bool has_hub() const { return hub_score.has_value(); }
};

struct ShrLayout {
    std::size_t global_order = 0;
    std::size_t n_channels = 0;
    std::vector<std::size_t> degenerate_channels;
};

namespace detail {

inline void require_normalized(const LaggedDataMatrix& z)
{
    if (!z.normalized()) {
        throw Error(Errc::InvalidArgument, "lagged matrix must be row-normalized before factorizing");
    }
    if (std::none_of(z.row_status.begin(), z.row_status.end(),
                     [](RowStatus s) { return s == RowStatus::Normalized; })) {
        throw Error(Errc::AllRowsDegenerate, "lagged matrix has no informative rows");
    }
}

/// Index of the largest |x_i|, ties to the lowest index.
inline Eigen::Index argmax_abs(const Eigen::VectorXd& x)
{
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.size(); ++i) {
        if (std::abs(x[i]) > std::abs(x[best])) best = i;
    }
    return best;
}

} // namespace detail

/// Thin SVD of an arbitrary dense matrix; K = min(rows, cols).
inline SvdFactors svd_factors(const Eigen::MatrixXd& z)
{
    Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw Error(Errc::NumericalFailure, "SVD did not converge");
    }
    SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    if (!f.left.allFinite() || !f.right.allFinite() || !f.singular_values.allFinite()) {
        throw Error(Errc::NumericalFailure, "SVD produced non-finite factors");
    }
    return f;
}

inline SvdFactors full_svd(const LaggedDataMatrix& z)
{
    detail::require_normalized(z);
    return svd_factors(z.values);
}

/**
 * Leading singular triplet by alternating multiplication with Z^T and Z.
 *
 * The iterate is the left vector.  Convergence is judged on the sine of the
 * angle between successive left vectors, delta_k.  Because that step
 * underestimates the remaining error by a factor (1 - rate) when the
 * contraction rate is close to one, the test is delta_k <= tol * (1 - rate_k)
 * with rate_k = delta_k / delta_{k-1}.  A nearly degenerate leading pair
 * therefore exhausts max_iters and raises NotConverged instead of
 * returning an unresolved direction.
 */
inline LeadingTriplet leading_triplet_power(const Eigen::MatrixXd& z, PowerOptions opts = {})
{
    if (!(opts.tol > 0.0)) throw Error(Errc::InvalidArgument, "power iteration tol must be > 0");
    if (z.size() == 0) throw Error(Errc::ShapeMismatch, "empty matrix");

    // Start from the largest column: it lies in the range of Z and is exact
    // for rank-one input.
    Eigen::Index start = 0;
    const Eigen::VectorXd col_norms = z.colwise().norm().transpose();
    for (Eigen::Index j = 1; j < col_norms.size(); ++j) {
        if (col_norms[j] > col_norms[start]) start = j;
    }
    if (col_norms[start] == 0.0) throw Error(Errc::NumericalFailure, "matrix is identically zero");
    Eigen::VectorXd u = z.col(start) / col_norms[start];

    double prev_delta = 0.0;
    double delta = 0.0;
    for (std::size_t k = 1; k <= opts.max_iters; ++k) {
        Eigen::VectorXd v = z.transpose() * u;
        const double v_norm = v.norm();
        if (v_norm == 0.0) throw Error(Errc::NumericalFailure, "iterate fell into the null space");
        v /= v_norm;
        Eigen::VectorXd w = z * v;
        w /= w.norm();

        delta = (w - w.dot(u) * u).norm();
        const double rate = k == 1 ? 0.0 : std::clamp(delta / prev_delta, 0.0, 1.0);
        u = std::move(w);
        if (delta <= opts.tol * (1.0 - rate)) {
            LeadingTriplet out;
            out.right = z.transpose() * u;
            out.sigma = out.right.norm();
            out.right /= out.sigma;
            out.left = std::move(u);
            out.iterations = k;
            return out;
        }
        prev_delta = delta;
    }
    throw NotConverged(opts.max_iters, delta);
}

inline LeadingTriplet leading_triplet_power(const LaggedDataMatrix& z, PowerOptions opts = {})
{
    detail::require_normalized(z);
    return leading_triplet_power(z.values, opts);
}

/**
 * Sign-fixes the leading pair and slices gamma into role blocks.
 *
 * The largest-magnitude entry of gamma is made positive (lowest index on
 * ties) and rho is flipped with it, so gamma * rho^T is unchanged.  Entries
 * belonging to degenerate channels are set to exactly zero.
 */
inline ShrResult extract_shr(const Eigen::VectorXd& gamma_raw, const Eigen::VectorXd& rho_raw,
                             double sigma_1, const std::optional<Eigen::VectorXd>& all_sigmas,
                             const ShrLayout& layout)
{
    const std::size_t q = layout.global_order;
    const std::size_t n_v = layout.n_channels;
    if (q < 1 || n_v < 1) throw Error(Errc::ShapeMismatch, "layout needs Q >= 1 and N_v >= 1");
    if (static_cast<std::size_t>(gamma_raw.size()) != (q + 1) * n_v) {
        throw Error(Errc::ShapeMismatch, "gamma has " + std::to_string(gamma_raw.size()) +
                                             " entries, expected (Q+1)*N_v = " +
                                             std::to_string((q + 1) * n_v));
    }
    for (auto ch : layout.degenerate_channels) {
        if (ch >= n_v) throw Error(Errc::ShapeMismatch, "degenerate channel index out of range", ch);
    }

    ShrResult res;
    res.global_order = q;
    res.n_channels = n_v;
    res.degenerate_channels = layout.degenerate_channels;
    res.leading_singular_value = sigma_1;

    res.gamma = gamma_raw;
    res.temporal_mode = rho_raw;
    for (auto ch : layout.degenerate_channels) {
        for (std::size_t b = 0; b <= q; ++b) res.gamma[static_cast<Eigen::Index>(b * n_v + ch)] = 0.0;
    }
    if (res.gamma[detail::argmax_abs(res.gamma)] < 0.0) {
        res.gamma = -res.gamma;
        res.temporal_mode = -res.temporal_mode;
    }

    const auto nv = static_cast<Eigen::Index>(n_v);
    res.receiver_loadings = res.gamma.segment(0, nv);
    res.sender_loadings = res.gamma.segment(static_cast<Eigen::Index>(q) * nv, nv);
    res.receiver_score = res.receiver_loadings.cwiseAbs();
    res.sender_score = res.sender_loadings.cwiseAbs();
    if (q >= 2) {
        res.hub_loadings.resize(static_cast<Eigen::Index>(q - 1), nv);
        for (std::size_t k = 1; k < q; ++k) {
            res.hub_loadings.row(static_cast<Eigen::Index>(k - 1)) =
                res.gamma.segment(static_cast<Eigen::Index>(k) * nv, nv).transpose();
        }
        res.hub_score = res.hub_loadings.cwiseAbs().colwise().maxCoeff().transpose();
    }
    else {
        res.hub_loadings.resize(0, nv);
    }

    if (all_sigmas) {
        const double total = all_sigmas->squaredNorm();
        if (total > 0.0) res.explained_fraction = sigma_1 * sigma_1 / total;
    }
    return res;
}

} // namespace shr
