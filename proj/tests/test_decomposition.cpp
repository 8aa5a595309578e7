#include "shr/decomposition.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

shr::LaggedDataMatrix normalized(const Eigen::MatrixXd& raw, std::size_t q, std::size_t n_v)
{
    shr::LaggedDataMatrix z;
    z.values = raw;
    z.global_order = q;
    z.n_channels = n_v;
    return shr::normalize_rows(std::move(z));
}

double orthonormality_defect(const Eigen::MatrixXd& a)
{
    return (a.transpose() * a - Eigen::MatrixXd::Identity(a.cols(), a.cols())).norm();
}

} // namespace

TEST(FullSvd, DiagonalMatrix)
{
    const Eigen::MatrixXd d = Eigen::Vector2d(3, 1).asDiagonal();
    const auto f = shr::svd_factors(d);
    EXPECT_NEAR(f.singular_values[0], 3.0, 1e-14);
    EXPECT_NEAR(f.singular_values[1], 1.0, 1e-14);
    EXPECT_TRUE(f.left.cwiseAbs().isApprox(Eigen::Matrix2d::Identity(), 1e-14));
    EXPECT_TRUE(f.right.cwiseAbs().isApprox(Eigen::Matrix2d::Identity(), 1e-14));
}

TEST(FullSvd, RandomReconstruction)
{
    const Eigen::MatrixXd z = oracle::gaussian_matrix(6, 8, 2024);
    const auto f = shr::svd_factors(z);
    EXPECT_EQ(f.singular_values.size(), 6);
    const Eigen::MatrixXd rec = f.left * f.singular_values.asDiagonal() * f.right.transpose();
    EXPECT_LT((z - rec).norm() / z.norm(), 1e-10);
    EXPECT_LT(orthonormality_defect(f.left), 1e-8);
    EXPECT_LT(orthonormality_defect(f.right), 1e-8);
}

TEST(FullSvd, NormalizedMatrixInvariants)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto z = normalized(oracle::gaussian_matrix(9, 30 + static_cast<Eigen::Index>(seed) * 5, seed), 2, 3);
        const auto f = shr::full_svd(z);
        EXPECT_EQ(f.singular_values.size(), 9);
        for (Eigen::Index k = 1; k < f.singular_values.size(); ++k) {
            EXPECT_GE(f.singular_values[k - 1], f.singular_values[k]);
        }
        EXPECT_GE(f.singular_values.minCoeff(), 0.0);
        EXPECT_NEAR(f.singular_values.squaredNorm(), z.values.squaredNorm(),
                    1e-8 * z.values.squaredNorm());
    }
}

TEST(FullSvd, RequiresNormalizedInput)
{
    shr::LaggedDataMatrix z;
    z.values = oracle::gaussian_matrix(2, 5, 1);
    z.global_order = 1;
    z.n_channels = 1;
    EXPECT_THROW(shr::full_svd(z), shr::Error);
}

TEST(PowerIteration, DiagonalMatrix)
{
    const Eigen::MatrixXd d = Eigen::Vector2d(3, 1).asDiagonal();
    const auto t = shr::leading_triplet_power(d, {1e-12, 10000});
    EXPECT_NEAR(t.sigma, 3.0, 1e-14);
    EXPECT_NEAR(std::abs(t.left[0]), 1.0, 1e-14);
    EXPECT_NEAR(t.left[1], 0.0, 1e-14);
    EXPECT_LE(t.iterations, 3u);
}

TEST(PowerIteration, RankOneIsImmediate)
{
    const Eigen::VectorXd u = oracle::random_orthonormal(7, 1, 3).col(0);
    const Eigen::VectorXd v = oracle::random_orthonormal(11, 1, 4).col(0);
    const Eigen::MatrixXd z = u * v.transpose();
    const auto t = shr::leading_triplet_power(z);
    EXPECT_NEAR(t.sigma, 1.0, 1e-14);
    EXPECT_LT(oracle::sign_aligned_distance(t.left, u), 1e-12);
    EXPECT_LT(oracle::sign_aligned_distance(t.right, v), 1e-12);
    EXPECT_EQ(t.iterations, 1u);
}

TEST(PowerIteration, AgreesWithFullSvdOnGappedMatrix)
{
    Eigen::VectorXd sigma(20);
    sigma[0] = 15.0;
    for (Eigen::Index k = 1; k < 20; ++k) sigma[k] = 10.0 - 0.4 * double(k);
    const Eigen::MatrixXd z = oracle::with_singular_values(20, 50, sigma, 99);
    const auto f = shr::svd_factors(z);
    const auto t = shr::leading_triplet_power(z);
    EXPECT_NEAR(t.sigma, f.singular_values[0], 1e-8 * f.singular_values[0]);
    EXPECT_LT(oracle::sign_aligned_distance(t.left, f.left.col(0)), 1e-8);
    EXPECT_LT(oracle::sign_aligned_distance(t.right, f.right.col(0)), 1e-8);
    // The pair keeps its relative sign.
    EXPECT_GT(t.left.dot(f.left.col(0)) * t.right.dot(f.right.col(0)), 0.0);
}

TEST(PowerIteration, NearDegenerateLeadingPairRaises)
{
    Eigen::VectorXd sigma(6);
    sigma << 1.0005, 1.0, 0.5, 0.4, 0.3, 0.2;
    const Eigen::MatrixXd z = oracle::with_singular_values(6, 12, sigma, 5);
    try {
        shr::leading_triplet_power(z);
        FAIL() << "expected NotConverged";
    }
    catch (const shr::NotConverged& e) {
        EXPECT_EQ(e.code(), shr::Errc::NotConverged);
        EXPECT_EQ(e.iterations(), 10000u);
        EXPECT_GT(e.last_delta(), 0.0);
    }
}

TEST(PowerIteration, InvalidArguments)
{
    const Eigen::MatrixXd z = oracle::gaussian_matrix(3, 4, 1);
    EXPECT_THROW(shr::leading_triplet_power(z, {0.0, 10}), shr::Error);
    EXPECT_THROW(shr::leading_triplet_power(Eigen::MatrixXd::Zero(3, 4)), shr::Error);
}

// --- SHR extraction --------------------------------------------------------

TEST(ExtractShr, OrderOneHasNoHub)
{
    Eigen::VectorXd g(4);
    g << 0.1, 0.2, 0.5, -0.2;
    g.normalize();
    const Eigen::VectorXd rho = Eigen::VectorXd::LinSpaced(5, -1, 1).normalized();
    const auto r = shr::extract_shr(g, rho, 2.0, std::nullopt, {1, 2, {}});
    EXPECT_TRUE(r.receiver_loadings.isApprox(g.head(2)));
    EXPECT_TRUE(r.sender_loadings.isApprox(g.tail(2)));
    EXPECT_FALSE(r.has_hub());
    EXPECT_EQ(r.hub_loadings.rows(), 0);
    EXPECT_FALSE(r.explained_fraction.has_value());
    EXPECT_EQ(r.leading_singular_value, 2.0);
}

TEST(ExtractShr, SignFixFlipsBothVectors)
{
    Eigen::VectorXd g(4);
    g << 0.1, -0.9, 0.3, 0.2;
    g.normalize();
    const Eigen::VectorXd rho = Eigen::VectorXd::LinSpaced(6, 0.5, 2).normalized();
    const auto r = shr::extract_shr(g, rho, 1.0, std::nullopt, {1, 2, {}});
    EXPECT_TRUE(shr::same_values(r.gamma, -g));
    EXPECT_TRUE(shr::same_values(r.temporal_mode, -rho));
    const Eigen::MatrixXd before = g * rho.transpose();
    const Eigen::MatrixXd after = r.gamma * r.temporal_mode.transpose();
    EXPECT_TRUE(shr::same_values(before, after));

    // Idempotent: already-fixed vectors pass through.
    const auto again = shr::extract_shr(r.gamma, r.temporal_mode, 1.0, std::nullopt, {1, 2, {}});
    EXPECT_TRUE(shr::same_values(again.gamma, r.gamma));
}

TEST(ExtractShr, SignTieBreaksToLowestIndex)
{
    Eigen::VectorXd g(4);
    g << -0.5, 0.5, 0.5, 0.5;
    const auto r = shr::extract_shr(g, Eigen::VectorXd::Ones(3), 1.0, std::nullopt, {1, 2, {}});
    EXPECT_GT(r.gamma[0], 0.0);
}

TEST(ExtractShr, HubBlocksAndScores)
{
    const std::size_t q = 3, n_v = 4;
    Eigen::VectorXd g = oracle::gaussian_matrix(16, 1, 8).col(0).normalized();
    Eigen::VectorXd sigmas(3);
    sigmas << 3, 2, 1;
    const auto r = shr::extract_shr(g, Eigen::VectorXd::Ones(5).normalized(), 3.0, sigmas, {q, n_v, {}});
    ASSERT_TRUE(r.has_hub());
    EXPECT_EQ(r.hub_loadings.rows(), 2);
    EXPECT_EQ(r.hub_loadings.cols(), 4);
    EXPECT_NEAR(r.gamma.norm(), 1.0, 1e-10);
    for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_EQ((*r.hub_score)[i], std::max(std::abs(r.gamma[4 + i]), std::abs(r.gamma[8 + i])));
        EXPECT_EQ(r.receiver_score[i], std::abs(r.gamma[i]));
        EXPECT_EQ(r.sender_score[i], std::abs(r.gamma[12 + i]));
    }
    // Concatenation in lag order reconstructs gamma.
    Eigen::VectorXd cat(16);
    cat << r.receiver_loadings, r.hub_loadings.row(0).transpose(), r.hub_loadings.row(1).transpose(),
        r.sender_loadings;
    EXPECT_TRUE(shr::same_values(cat, r.gamma));
    // Largest entry positive.
    Eigen::Index imax = 0;
    r.gamma.cwiseAbs().maxCoeff(&imax);
    EXPECT_GT(r.gamma[imax], 0.0);
    ASSERT_TRUE(r.explained_fraction.has_value());
    EXPECT_NEAR(*r.explained_fraction, 9.0 / 14.0, 1e-15);
}

TEST(ExtractShr, ShapeMismatch)
{
    EXPECT_THROW(shr::extract_shr(Eigen::VectorXd::Ones(5), Eigen::VectorXd::Ones(3), 1.0,
                                  std::nullopt, {1, 2, {}}),
                 shr::Error);
    EXPECT_THROW(shr::extract_shr(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(3), 1.0,
                                  std::nullopt, {1, 2, {5}}),
                 shr::Error);
}

TEST(ExtractShr, RankOneExplainsEverything)
{
    const Eigen::VectorXd u = oracle::random_orthonormal(6, 1, 1).col(0);
    const Eigen::VectorXd v = oracle::random_orthonormal(10, 1, 2).col(0);
    const Eigen::MatrixXd z = 2.5 * u * v.transpose();
    const auto f = shr::svd_factors(z);
    const auto r = shr::extract_shr(f.left.col(0), f.right.col(0), f.singular_values[0],
                                    f.singular_values, {2, 2, {}});
    ASSERT_TRUE(r.explained_fraction.has_value());
    EXPECT_NEAR(*r.explained_fraction, 1.0, 1e-15);
}

TEST(ExtractShr, DegenerateChannelsHaveZeroLoadings)
{
    Eigen::MatrixXd raw = oracle::gaussian_matrix(6, 40, 12);
    // Channel 1 occupies rows 1, 3, 5; row 4 alone does not make channel 0 degenerate.
    raw.row(1).setConstant(2.0);
    raw.row(3).setConstant(2.0);
    raw.row(5).setConstant(-1.0);
    raw.row(4).setConstant(-1.0);
    const auto z = normalized(raw, 2, 2);
    const auto dead = z.degenerate_channels();
    ASSERT_EQ(dead, std::vector<std::size_t>{1});
    const auto f = shr::full_svd(z);
    const auto r = shr::extract_shr(f.left.col(0), f.right.col(0), f.singular_values[0],
                                    f.singular_values, {2, 2, dead});
    EXPECT_EQ(r.receiver_loadings[1], 0.0);
    EXPECT_EQ(r.hub_loadings(0, 1), 0.0);
    EXPECT_EQ(r.sender_loadings[1], 0.0);
    EXPECT_EQ(r.degenerate_channels, dead);
}
