#pragma once

/** @file
 * Synthetic VAR data with planted directed couplings, and the sender/hub/
 * receiver roles those couplings imply.
 */

#include "shr/error.hpp"
#include "shr/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace shr::synth {

struct Coupling {
    std::size_t source = 0;
    std::size_t target = 0;
    std::size_t lag = 1;
    double coefficient = 0.0;

    bool operator==(const Coupling&) const = default;
};

/// Inclusive range of 1-based frame numbers.
struct FrameWindow {
    std::size_t first = 1;
    std::size_t last = 1;

    bool contains(std::size_t frame) const { return frame >= first && frame <= last; }
    bool operator==(const FrameWindow&) const = default;
};

struct NetworkSpec {
    std::size_t n_channels = 1;
    std::vector<Coupling> couplings;
    /// Empty, or one AR coefficient list per channel (entry k is lag k+1).
    std::vector<std::vector<double>> self_coefficients;
    double noise_std = 1.0;
    std::size_t n_frames = 0;
    std::optional<std::size_t> n_epochs;
    std::uint64_t seed = 0;
    /// Couplings drive only frames inside the window (epoched output).
    std::optional<FrameWindow> activation_window;

    bool operator==(const NetworkSpec&) const = default;
};

enum class Role { Sender, Hub, Receiver, Isolated };

inline constexpr std::string_view to_string(Role r) noexcept
{
    switch (r) {
    case Role::Sender: return "sender";
    case Role::Hub: return "hub";
    case Role::Receiver: return "receiver";
    case Role::Isolated: return "isolated";
    }
    return "unknown";
}

/// Stability margin on the companion-matrix spectral radius.
inline constexpr double stability_margin = 1e-8;

inline std::size_t max_lag(const NetworkSpec& spec)
{
    std::size_t p = 0;
    for (const auto& c : spec.couplings) p = std::max(p, c.lag);
    for (const auto& s : spec.self_coefficients) p = std::max(p, s.size());
    return p;
}

/// Lag matrices A_1..A_p with x_t = sum_k A_k x_{t-k} + noise.
inline std::vector<Eigen::MatrixXd> lag_matrices(const NetworkSpec& spec, bool with_couplings)
{
    const auto n = static_cast<Eigen::Index>(spec.n_channels);
    std::vector<Eigen::MatrixXd> a(max_lag(spec), Eigen::MatrixXd::Zero(n, n));
    for (std::size_t i = 0; i < spec.self_coefficients.size(); ++i) {
        const auto& self = spec.self_coefficients[i];
        for (std::size_t k = 0; k < self.size(); ++k) {
            a[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += self[k];
        }
    }
    if (with_couplings) {
        for (const auto& c : spec.couplings) {
            a[c.lag - 1](static_cast<Eigen::Index>(c.target), static_cast<Eigen::Index>(c.source)) +=
                c.coefficient;
        }
    }
    return a;
}

/// Spectral radius of the VAR companion matrix (0 for pure noise).
inline double spectral_radius(const std::vector<Eigen::MatrixXd>& lags)
{
    if (lags.empty()) return 0.0;
    const Eigen::Index n = lags.front().rows();
    const auto p = static_cast<Eigen::Index>(lags.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * p, n * p);
    for (Eigen::Index k = 0; k < p; ++k) companion.block(0, k * n, n, n) = lags[k];
    if (p > 1) companion.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::NumericalFailure, "eigenvalue solver failed on the companion matrix");
    }
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Throws InvalidCoupling / InvalidArgument / UnstableSpec on a bad spec.
inline void validate_spec(const NetworkSpec& spec)
{
    if (spec.n_channels < 1) throw Error(Errc::InvalidArgument, "spec needs at least one channel");
    if (spec.n_frames < 1) throw Error(Errc::InvalidArgument, "spec needs n_frames >= 1");
    if (!(spec.noise_std > 0.0) || !std::isfinite(spec.noise_std)) {
        throw Error(Errc::InvalidArgument, "noise_std must be a positive finite number");
    }
    if (spec.n_epochs && *spec.n_epochs < 1) {
        throw Error(Errc::InvalidArgument, "n_epochs must be >= 1");
    }
    if (spec.activation_window) {
        const auto& w = *spec.activation_window;
        if (w.first < 1 || w.first > w.last) {
            throw Error(Errc::InvalidArgument, "activation window must satisfy 1 <= first <= last");
        }
    }
    if (!spec.self_coefficients.empty() && spec.self_coefficients.size() != spec.n_channels) {
        throw Error(Errc::InvalidArgument, "self_coefficients must list every channel");
    }
    for (const auto& self : spec.self_coefficients) {
        for (double a : self) {
            if (!std::isfinite(a)) throw Error(Errc::InvalidArgument, "non-finite self coefficient");
        }
    }
    for (const auto& c : spec.couplings) {
        const std::string name =
            "coupling " + std::to_string(c.source) + "->" + std::to_string(c.target);
        if (c.source >= spec.n_channels || c.target >= spec.n_channels) {
            throw Error(Errc::InvalidCoupling, name + " references a missing channel");
        }
        if (c.source == c.target) {
            throw Error(Errc::InvalidCoupling, name + " is a self loop; use self_coefficients");
        }
        if (c.lag < 1) throw Error(Errc::InvalidCoupling, name + " must have lag >= 1");
        if (!std::isfinite(c.coefficient)) {
            throw Error(Errc::InvalidCoupling, name + " has a non-finite coefficient");
        }
    }

    const double radius = spectral_radius(lag_matrices(spec, true));
    if (radius >= 1.0 - stability_margin) {
        throw Error(Errc::UnstableSpec,
                    "VAR companion spectral radius " + std::to_string(radius) + " is not below 1");
    }
    if (spec.activation_window) {
        const double off = spectral_radius(lag_matrices(spec, false));
        if (off >= 1.0 - stability_margin) {
            throw Error(Errc::UnstableSpec, "uncoupled dynamics have spectral radius " +
                                                std::to_string(off) + ", not below 1");
        }
    }
}

namespace detail {

/// Simulates `total` frames; frame numbers (1-based) of the recorded part
/// start after `burn_in`.  `active(frame)` gates the couplings.
template <class Active>
Eigen::MatrixXd simulate(const NetworkSpec& spec, std::size_t burn_in, std::mt19937_64& rng,
                         Active&& active)
{
    const auto coupled = lag_matrices(spec, true);
    const auto uncoupled = lag_matrices(spec, false);
    const auto n = static_cast<Eigen::Index>(spec.n_channels);
    const std::size_t total = burn_in + spec.n_frames;
    std::normal_distribution<double> noise(0.0, 1.0);

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(total));
    for (std::size_t t = 0; t < total; ++t) {
        const bool recorded = t >= burn_in;
        const bool on = recorded ? active(t - burn_in + 1) : active(std::size_t{0});
        const auto& a = on ? coupled : uncoupled;
        const auto col = static_cast<Eigen::Index>(t);
        for (std::size_t k = 1; k <= a.size() && k <= t; ++k) {
            x.col(col) += a[k - 1] * x.col(col - static_cast<Eigen::Index>(k));
        }
        for (Eigen::Index i = 0; i < n; ++i) x(i, col) += spec.noise_std * noise(rng);
    }
    return x.rightCols(static_cast<Eigen::Index>(spec.n_frames));
}

} // namespace detail

/// Burn-in length discarded before recording.
inline std::size_t burn_in_frames(const NetworkSpec& spec) { return 10 * max_lag(spec); }

/**
 * Continuous recording: Gaussian VAR recursion after a burn-in of 10 * max
 * lag frames.  The activation window, if any, is ignored.
 */
inline MultichannelSeries generate_stationary(const NetworkSpec& spec)
{
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);
    MultichannelSeries out;
    out.values = detail::simulate(spec, burn_in_frames(spec), rng, [](std::size_t) { return true; });
    return out;
}

/**
 * Event-locked recording: every epoch gets fresh noise from one seeded
 * stream.  With an activation window, couplings act only on frames inside
 * it (1-based), and the burn-in before each epoch runs uncoupled.
 */
inline EpochedSeries generate_epochs(const NetworkSpec& spec)
{
    validate_spec(spec);
    if (!spec.n_epochs) throw Error(Errc::InvalidArgument, "spec has no n_epochs");
    std::mt19937_64 rng(spec.seed);
    const auto window = spec.activation_window;
    const auto active = [&](std::size_t frame) {
        if (!window) return true;
        return frame > 0 && window->contains(frame);
    };
    EpochedSeries out;
    out.epochs.reserve(*spec.n_epochs);
    for (std::size_t j = 0; j < *spec.n_epochs; ++j) {
        out.epochs.push_back(detail::simulate(spec, burn_in_frames(spec), rng, active));
    }
    return out;
}

/// Stationary or epoched output depending on whether n_epochs is set.
inline std::variant<MultichannelSeries, EpochedSeries> generate(const NetworkSpec& spec)
{
    if (spec.n_epochs) return generate_epochs(spec);
    return generate_stationary(spec);
}

/// Roles implied by the coupling graph alone.
inline std::vector<Role> expected_roles(const NetworkSpec& spec)
{
    std::vector<bool> out_edge(spec.n_channels, false), in_edge(spec.n_channels, false);
    for (const auto& c : spec.couplings) {
        if (c.source < spec.n_channels) out_edge[c.source] = true;
        if (c.target < spec.n_channels) in_edge[c.target] = true;
    }
    std::vector<Role> roles(spec.n_channels, Role::Isolated);
    for (std::size_t i = 0; i < spec.n_channels; ++i) {
        if (out_edge[i] && in_edge[i]) roles[i] = Role::Hub;
        else if (out_edge[i]) roles[i] = Role::Sender;
        else if (in_edge[i]) roles[i] = Role::Receiver;
    }
    return roles;
}

/// Linear chain 0 -> 1 -> ... -> n-1 at the given lag.
inline NetworkSpec chain_spec(std::size_t n_channels, double coefficient, double noise_std,
                              std::size_t n_frames, std::uint64_t seed, std::size_t lag = 1)
{
    NetworkSpec spec;
    spec.n_channels = n_channels;
    for (std::size_t i = 0; i + 1 < n_channels; ++i) {
        spec.couplings.push_back({i, i + 1, lag, coefficient});
    }
    spec.noise_std = noise_std;
    spec.n_frames = n_frames;
    spec.seed = seed;
    return spec;
}

} // namespace shr::synth
