#pragma once

/** @file
 * Error type shared by every stage of the SHR pipeline.
 */

#include <cstddef>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace shr {

enum class Errc {
    NonFinite,
    TooShort,
    LabelMismatch,
    RaggedEpochs,
    TooFewEpochs,
    InvalidOrder,
    OrderBelowGlobal,
    TooEarly,
    TooLate,
    InconsistentModels,
    AllRowsDegenerate,
    NumericalFailure,
    NotConverged,
    ShapeMismatch,
    UnstableSpec,
    InvalidCoupling,
    InvalidArgument,
    Parse,
};

inline constexpr std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::NonFinite: return "NonFinite";
    case Errc::TooShort: return "TooShort";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::RaggedEpochs: return "RaggedEpochs";
    case Errc::TooFewEpochs: return "TooFewEpochs";
    case Errc::InvalidOrder: return "InvalidOrder";
    case Errc::OrderBelowGlobal: return "OrderBelowGlobal";
    case Errc::TooEarly: return "TooEarly";
    case Errc::TooLate: return "TooLate";
    case Errc::InconsistentModels: return "InconsistentModels";
    case Errc::AllRowsDegenerate: return "AllRowsDegenerate";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::NotConverged: return "NotConverged";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::UnstableSpec: return "UnstableSpec";
    case Errc::InvalidCoupling: return "InvalidCoupling";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Parse: return "Parse";
    }
    return "Unknown";
}

inline std::optional<Errc> errc_from_string(std::string_view name) noexcept
{
    for (int i = 0; i <= static_cast<int>(Errc::Parse); ++i) {
        if (to_string(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
    }
    return std::nullopt;
}

/// True for failures of the numerics rather than of the inputs.
inline constexpr bool is_numerical(Errc code) noexcept
{
    return code == Errc::AllRowsDegenerate || code == Errc::NumericalFailure ||
           code == Errc::NotConverged;
}

/**
 * Exception thrown by all library operations.
 *
 * Channel and frame indices, when present, are 0-based array positions.
 * The stage name is filled in by the pipeline as the error propagates.
 */
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message,
          std::optional<std::size_t> channel = std::nullopt,
          std::optional<std::size_t> frame = std::nullopt)
        : std::runtime_error(message), code_(code), message_(std::move(message)),
          channel_(channel), frame_(frame)
    {
    }

    Errc code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }
    const std::string& message() const noexcept { return message_; }
    std::optional<std::size_t> channel() const noexcept { return channel_; }
    std::optional<std::size_t> frame() const noexcept { return frame_; }

    /// "[stage] Code: message", the form printed by the CLI.
    std::string describe() const
    {
        std::string out;
        if (!stage_.empty()) out += "[" + stage_ + "] ";
        out += to_string(code_);
        out += ": ";
        out += message_;
        return out;
    }

    void set_stage(std::string stage)
    {
        if (stage_.empty()) stage_ = std::move(stage);
    }

private:
    Errc code_;
    std::string message_;
    std::string stage_;
    std::optional<std::size_t> channel_;
    std::optional<std::size_t> frame_;
};

inline std::string format_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

/// Raised by power iteration when the leading pair is not resolved.
class NotConverged : public Error {
public:
    NotConverged(std::size_t iterations, double last_delta)
        : Error(Errc::NotConverged,
                "power iteration stopped after " + std::to_string(iterations) +
                    " iterations (last sine delta " + format_g(last_delta) +
                    "); leading singular pair is nearly degenerate"),
          iterations_(iterations), last_delta_(last_delta)
    {
    }

    std::size_t iterations() const noexcept { return iterations_; }
    double last_delta() const noexcept { return last_delta_; }

private:
    std::size_t iterations_;
    double last_delta_;
};

namespace detail {

/// Runs fn, tagging any shr::Error that escapes with the stage name.
template <class Fn>
decltype(auto) in_stage(const char* stage, Fn&& fn)
{
    try {
        return std::forward<Fn>(fn)();
    }
    catch (Error& e) {
        e.set_stage(stage);
        throw;
    }
}

} // namespace detail
} // namespace shr
