#include "shr/embedding.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

shr::InnovationSeries innovations_of(const Eigen::MatrixXd& values, std::size_t q)
{
    shr::InnovationSeries inn;
    inn.values = values;
    inn.global_order = q;
    inn.first_frame = q;
    return inn;
}

shr::LaggedDataMatrix raw_matrix(const Eigen::MatrixXd& values, std::size_t q, std::size_t n_v)
{
    shr::LaggedDataMatrix z;
    z.values = values;
    z.global_order = q;
    z.n_channels = n_v;
    return z;
}

shr::Errc code_of(auto&& fn)
{
    try {
        fn();
    }
    catch (const shr::Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return shr::Errc::Parse;
}

} // namespace

TEST(BuildStationaryMatrix, SingleChannelTranscription)
{
    // Innovations for frames 2..5 (N_T = 5, Q = 1).
    Eigen::MatrixXd v(1, 4);
    v << 2, 3, 4, 5;
    const auto z = shr::build_stationary_matrix(innovations_of(v, 1));
    Eigen::MatrixXd expected(2, 3);
    expected << 3, 4, 5,
                2, 3, 4;
    EXPECT_TRUE(shr::same_values(z.values, expected));
    EXPECT_FALSE(z.normalized());
}

TEST(BuildStationaryMatrix, Shape)
{
    // N_v = 2, Q = 2, N_T = 10 -> innovations have 8 columns.
    const auto z = shr::build_stationary_matrix(innovations_of(oracle::gaussian_matrix(2, 8, 1), 2));
    EXPECT_EQ(z.values.rows(), 6);
    EXPECT_EQ(z.values.cols(), 6);
}

TEST(BuildStationaryMatrix, ExhaustiveIndexCheck)
{
    for (std::size_t q = 1; q <= 4; ++q) {
        for (Eigen::Index n_v = 1; n_v <= 3; ++n_v) {
            const Eigen::MatrixXd v = oracle::gaussian_matrix(n_v, 17, 10 * q + static_cast<std::size_t>(n_v));
            const auto z = shr::build_stationary_matrix(innovations_of(v, q));
            const auto m_cols = v.cols() - static_cast<Eigen::Index>(q);
            ASSERT_EQ(z.values.cols(), m_cols);
            for (std::size_t b = 0; b <= q; ++b) {
                for (Eigen::Index i = 0; i < n_v; ++i) {
                    for (Eigen::Index m = 0; m < m_cols; ++m) {
                        EXPECT_EQ(z.values(static_cast<Eigen::Index>(b) * n_v + i, m),
                                  v(i, m + static_cast<Eigen::Index>(q - b)));
                    }
                }
            }
        }
    }
}

TEST(BuildStationaryMatrix, TooShort)
{
    EXPECT_EQ(code_of([] { shr::build_stationary_matrix(innovations_of(Eigen::MatrixXd::Ones(1, 3), 2)); }),
              shr::Errc::TooShort);
    EXPECT_NO_THROW(shr::build_stationary_matrix(innovations_of(oracle::gaussian_matrix(1, 4, 3), 2)));
}

namespace {

shr::LocalArModel local_model(std::size_t channel, std::size_t tau, std::size_t q, Eigen::MatrixXd innov)
{
    shr::LocalArModel m;
    m.channel = channel;
    m.target_time = tau;
    m.order = q;
    m.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q));
    m.innovations = std::move(innov);
    return m;
}

} // namespace

TEST(BuildLockedMatrix, Transcription)
{
    Eigen::MatrixXd r(2, 2);
    r << 1.5, -2.0,
         0.25, 7.0;
    const std::vector<shr::LocalArModel> models = {local_model(0, 3, 1, r)};
    const auto z = shr::build_locked_matrix(models);
    EXPECT_TRUE(shr::same_values(z.values, r));
}

TEST(BuildLockedMatrix, ShapeAndBlockLayout)
{
    std::vector<shr::LocalArModel> models;
    for (std::size_t i = 0; i < 3; ++i) {
        models.push_back(local_model(i, 7, 2, oracle::gaussian_matrix(3, 50, i)));
    }
    const auto z = shr::build_locked_matrix(models);
    ASSERT_EQ(z.values.rows(), 9);
    ASSERT_EQ(z.values.cols(), 50);
    for (Eigen::Index b = 0; b < 3; ++b) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            EXPECT_TRUE(shr::same_values(z.values.row(b * 3 + i),
                                         models[static_cast<std::size_t>(i)].innovations.row(b)));
        }
    }
}

TEST(BuildLockedMatrix, InconsistentModels)
{
    std::vector<shr::LocalArModel> models = {local_model(0, 5, 1, oracle::gaussian_matrix(2, 4, 1)),
                                             local_model(1, 6, 1, oracle::gaussian_matrix(2, 4, 2))};
    EXPECT_EQ(code_of([&] { shr::build_locked_matrix(models); }), shr::Errc::InconsistentModels);
    models[1].target_time = 5;
    models[1].innovations = oracle::gaussian_matrix(2, 5, 2);
    EXPECT_EQ(code_of([&] { shr::build_locked_matrix(models); }), shr::Errc::InconsistentModels);
    models[1].innovations = oracle::gaussian_matrix(2, 4, 2);
    EXPECT_NO_THROW(shr::build_locked_matrix(models));
}

TEST(NormalizeRows, ArithmeticExample)
{
    Eigen::MatrixXd v(1, 3);
    v << 1, 2, 3;
    const auto z = shr::normalize_rows(raw_matrix(v, 1, 1));
    EXPECT_NEAR(z.values(0, 0), -1.22474487, 1e-8);
    EXPECT_NEAR(z.values(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(z.values(0, 2), 1.22474487, 1e-8);
    EXPECT_EQ(z.row_status[0], shr::RowStatus::Normalized);
}

TEST(NormalizeRows, ConstantRowIsDegenerate)
{
    Eigen::MatrixXd v(2, 4);
    v << 5, 5, 5, 5,
         1, 0, 2, 1;
    const auto z = shr::normalize_rows(raw_matrix(v, 1, 1));
    EXPECT_TRUE(z.values.row(0).isZero(0.0));
    EXPECT_EQ(z.row_status[0], shr::RowStatus::Degenerate);
    EXPECT_EQ(z.row_status[1], shr::RowStatus::Normalized);
}

TEST(NormalizeRows, Errors)
{
    EXPECT_EQ(code_of([] { shr::normalize_rows(raw_matrix(Eigen::MatrixXd::Ones(2, 5), 1, 1)); }),
              shr::Errc::AllRowsDegenerate);
    EXPECT_EQ(code_of([] { shr::normalize_rows(raw_matrix(Eigen::MatrixXd::Ones(2, 1), 1, 1)); }),
              shr::Errc::TooShort);
}

TEST(NormalizeRows, RowInvariantsAndCorrelationIdentity)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Eigen::MatrixXd raw = oracle::gaussian_matrix(6, 40 + static_cast<Eigen::Index>(seed), seed);
        raw.row(1) = raw.row(0) * 0.3 + raw.row(1); // some genuine correlation
        raw.row(2).array() += 10.0; // nonzero mean
        const auto z = shr::normalize_rows(raw_matrix(raw, 2, 2));
        const double m = double(z.values.cols());
        for (Eigen::Index r = 0; r < z.values.rows(); ++r) {
            EXPECT_LT(std::abs(z.values.row(r).mean()), 1e-10);
            EXPECT_NEAR(z.values.row(r).squaredNorm() / m, 1.0, 1e-8);
        }
        const Eigen::MatrixXd zzt = z.values * z.values.transpose() / m;
        EXPECT_LT((zzt - oracle::correlation_matrix(raw)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(NormalizeRows, IdempotentAndScaleFree)
{
    const Eigen::MatrixXd raw = oracle::gaussian_matrix(4, 30, 77);
    const auto once = shr::normalize_rows(raw_matrix(raw, 1, 2));
    const auto twice = shr::normalize_rows(once);
    EXPECT_LT((once.values - twice.values).cwiseAbs().maxCoeff(), 1e-12);

    Eigen::MatrixXd scaled = raw;
    scaled.row(2) *= 123.5;
    scaled.row(3) *= 1e-3;
    const auto z = shr::normalize_rows(raw_matrix(scaled, 1, 2));
    EXPECT_LT((once.values - z.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NormalizeRows, DegenerateRowsContributeNothing)
{
    Eigen::MatrixXd raw = oracle::gaussian_matrix(4, 25, 5);
    raw.row(1).setConstant(3.0);
    raw.row(3).setConstant(3.0);
    const auto z = shr::normalize_rows(raw_matrix(raw, 1, 2));
    const Eigen::MatrixXd zzt = z.values * z.values.transpose();
    EXPECT_TRUE(zzt.row(1).isZero(0.0));
    EXPECT_TRUE(zzt.col(3).isZero(0.0));
    // Channel 1 is degenerate in both lag blocks.
    EXPECT_EQ(z.degenerate_channels(), std::vector<std::size_t>{1});
}
