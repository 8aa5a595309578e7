#pragma once

// Independent reference computations for the tests.  Nothing here calls into
// the library's numerical paths: least squares goes through the normal
// equations, correlations and autocorrelations are direct sums, and AR data
// comes from a scalar recursion.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double std = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, std);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

/// x_t = sum_k a_k x_{t-k} + e_t, with a 500-frame burn-in.
inline std::vector<double> simulate_ar(const std::vector<double>& a, std::size_t n,
                                       std::uint64_t seed, double std = 1.0)
{
    const std::size_t burn = 500;
    const auto e = white_noise(n + burn, seed, std);
    std::vector<double> x(n + burn, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double v = e[t];
        for (std::size_t k = 1; k <= a.size() && k <= t; ++k) v += a[k - 1] * x[t - k];
        x[t] = v;
    }
    return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

/// Sample autocorrelation at `lag` (mean removed, biased denominator).
inline double autocorrelation(const Eigen::VectorXd& x, std::size_t lag)
{
    const double mean = x.mean();
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        den += (x[t] - mean) * (x[t] - mean);
        if (t >= static_cast<Eigen::Index>(lag)) {
            num += (x[t] - mean) * (x[t - static_cast<Eigen::Index>(lag)] - mean);
        }
    }
    return num / den;
}

/// Pearson correlation of x[lag:] with y[:n-lag], i.e. corr(y_{t-lag}, x_t).
inline double lagged_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                 std::size_t lag)
{
    const auto n = x.size() - static_cast<Eigen::Index>(lag);
    const Eigen::VectorXd a = x.tail(n);
    const Eigen::VectorXd b = y.head(n);
    const double ma = a.mean(), mb = b.mean();
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Row-wise Pearson correlation matrix computed entry by entry.
inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& rows)
{
    const auto r = rows.rows();
    const auto m = rows.cols();
    Eigen::VectorXd mean(r), sd(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        double s = 0;
        for (Eigen::Index t = 0; t < m; ++t) s += rows(i, t);
        mean[i] = s / double(m);
        double v = 0;
        for (Eigen::Index t = 0; t < m; ++t) v += (rows(i, t) - mean[i]) * (rows(i, t) - mean[i]);
        sd[i] = std::sqrt(v / double(m));
    }
    Eigen::MatrixXd c(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            double s = 0;
            for (Eigen::Index t = 0; t < m; ++t) s += (rows(i, t) - mean[i]) * (rows(j, t) - mean[j]);
            c(i, j) = s / double(m) / (sd[i] * sd[j]);
        }
    }
    return c;
}

/// Least squares through the normal equations (X^T X) b = X^T y.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(rng);
    }
    return m;
}

/// Random matrix with orthonormal columns (Householder QR of a Gaussian).
inline Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rows, cols, seed));
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

/// U diag(sigma) V^T with random orthonormal U, V.
inline Eigen::MatrixXd with_singular_values(Eigen::Index rows, Eigen::Index cols,
                                            const Eigen::VectorXd& sigma, std::uint64_t seed)
{
    const auto k = sigma.size();
    const Eigen::MatrixXd u = random_orthonormal(rows, k, seed);
    const Eigen::MatrixXd v = random_orthonormal(cols, k, seed + 7919);
    return u * sigma.asDiagonal() * v.transpose();
}

/// Distance between two unit vectors up to sign.
inline double sign_aligned_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return std::min((a - b).norm(), (a + b).norm());
}

} // namespace oracle
