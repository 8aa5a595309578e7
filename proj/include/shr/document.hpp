#pragma once

/** @file
 * JSON forms of network specs and analysis results ("shr/1" documents).
 */

#include "shr/decomposition.hpp"
#include "shr/error.hpp"
#include "shr/pipeline.hpp"
#include "shr/synth.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace shr::doc {

using json = nlohmann::ordered_json;

inline constexpr std::string_view schema_version = "shr/1";

inline std::string_view to_string(SvdMode m)
{
    switch (m) {
    case SvdMode::Full: return "full";
    case SvdMode::Power: return "power";
    case SvdMode::Auto: return "auto";
    }
    return "auto";
}

inline SvdMode svd_mode_from_string(std::string_view s)
{
    if (s == "full") return SvdMode::Full;
    if (s == "power") return SvdMode::Power;
    if (s == "auto") return SvdMode::Auto;
    throw Error(Errc::Parse, "unknown svd mode '" + std::string(s) + "'");
}

/// Echo of the run configuration carried in every result document.
struct DocumentConfig {
    std::size_t order = 0;
    std::optional<std::vector<std::size_t>> per_channel_orders;
    std::string svd = "auto";
    double tol = 1e-10;
    std::size_t max_iters = 10000;
    std::optional<TauRange> tau_range;
    std::size_t n_channels = 0;
    std::size_t n_frames = 0;
    std::optional<std::size_t> n_epochs;
};

struct ResultDocument {
    std::string schema_version{doc::schema_version};
    std::string mode; ///< "stationary" or "event_locked"
    DocumentConfig config;
    std::vector<std::string> channel_labels;
    std::optional<ShrResult> result; ///< stationary
    std::vector<TauEntry> sweep; ///< event_locked
    std::vector<std::size_t> degenerate_channels;
    std::optional<double> elapsed_seconds;
};

/// Lowest index of the largest score.
inline std::size_t argmax(const Eigen::VectorXd& score)
{
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < score.size(); ++i) {
        if (score[i] > score[best]) best = i;
    }
    return static_cast<std::size_t>(best);
}

namespace detail {

[[noreturn]] inline void fail(const std::string& what)
{
    throw Error(Errc::Parse, what);
}

inline json to_json(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Eigen::VectorXd vector_from(const json& j, const char* key)
{
    if (!j.is_array()) fail(std::string("'") + key + "' must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(std::string("'") + key + "' must hold numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline const json& at(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T get(const json& j, const char* key)
{
    try {
        return at(j, key).get<T>();
    }
    catch (const nlohmann::json::exception&) {
        fail(std::string("field '") + key + "' has the wrong type");
    }
}

inline json result_to_json(const ShrResult& r)
{
    json j;
    j["gamma"] = to_json(r.gamma);
    j["receiver_loadings"] = to_json(r.receiver_loadings);
    json hubs = json::array();
    for (Eigen::Index k = 0; k < r.hub_loadings.rows(); ++k) {
        hubs.push_back(to_json(r.hub_loadings.row(k).transpose()));
    }
    j["hub_loadings"] = hubs;
    j["sender_loadings"] = to_json(r.sender_loadings);
    j["receiver_score"] = to_json(r.receiver_score);
    j["hub_score"] = r.hub_score ? to_json(*r.hub_score) : json(nullptr);
    j["sender_score"] = to_json(r.sender_score);
    j["temporal_mode"] = to_json(r.temporal_mode);
    j["leading_singular_value"] = r.leading_singular_value;
    j["explained_fraction"] = r.explained_fraction ? json(*r.explained_fraction) : json(nullptr);
    j["degenerate_channels"] = r.degenerate_channels;
    j["argmax"] = {
        {"sender", argmax(r.sender_score)},
        {"hub", r.hub_score ? json(argmax(*r.hub_score)) : json(nullptr)},
        {"receiver", argmax(r.receiver_score)},
    };
    return j;
}

inline ShrResult result_from_json(const json& j, std::size_t order, std::size_t n_channels)
{
    ShrResult r;
    r.global_order = order;
    r.n_channels = n_channels;
    r.gamma = vector_from(at(j, "gamma"), "gamma");
    r.receiver_loadings = vector_from(at(j, "receiver_loadings"), "receiver_loadings");
    r.sender_loadings = vector_from(at(j, "sender_loadings"), "sender_loadings");
    r.receiver_score = vector_from(at(j, "receiver_score"), "receiver_score");
    r.sender_score = vector_from(at(j, "sender_score"), "sender_score");
    r.temporal_mode = vector_from(at(j, "temporal_mode"), "temporal_mode");
    const auto& hubs = at(j, "hub_loadings");
    if (!hubs.is_array()) fail("'hub_loadings' must be an array");
    r.hub_loadings.resize(static_cast<Eigen::Index>(hubs.size()),
                          static_cast<Eigen::Index>(n_channels));
    for (std::size_t k = 0; k < hubs.size(); ++k) {
        const auto row = vector_from(hubs[k], "hub_loadings");
        if (static_cast<std::size_t>(row.size()) != n_channels) fail("hub_loadings row length");
        r.hub_loadings.row(static_cast<Eigen::Index>(k)) = row.transpose();
    }
    if (!at(j, "hub_score").is_null()) r.hub_score = vector_from(j.at("hub_score"), "hub_score");
    r.leading_singular_value = get<double>(j, "leading_singular_value");
    if (!at(j, "explained_fraction").is_null()) {
        r.explained_fraction = get<double>(j, "explained_fraction");
    }
    r.degenerate_channels = get<std::vector<std::size_t>>(j, "degenerate_channels");

    const std::size_t nb = order + 1;
    if (static_cast<std::size_t>(r.gamma.size()) != nb * n_channels ||
        static_cast<std::size_t>(r.receiver_score.size()) != n_channels ||
        static_cast<std::size_t>(r.sender_score.size()) != n_channels ||
        static_cast<std::size_t>(r.hub_loadings.rows()) != (order >= 2 ? order - 1 : 0)) {
        fail("result arrays do not match the declared order and channel count");
    }
    return r;
}

inline json config_to_json(const DocumentConfig& c)
{
    json j;
    j["order"] = c.order;
    j["per_channel_orders"] = c.per_channel_orders ? json(*c.per_channel_orders) : json(nullptr);
    j["svd"] = c.svd;
    j["tol"] = c.tol;
    j["max_iters"] = c.max_iters;
    j["tau_range"] = c.tau_range ? json::array({c.tau_range->first, c.tau_range->last})
                                 : json(nullptr);
    j["n_channels"] = c.n_channels;
    j["n_frames"] = c.n_frames;
    j["n_epochs"] = c.n_epochs ? json(*c.n_epochs) : json(nullptr);
    return j;
}

inline DocumentConfig config_from_json(const json& j)
{
    DocumentConfig c;
    c.order = get<std::size_t>(j, "order");
    if (!at(j, "per_channel_orders").is_null()) {
        c.per_channel_orders = get<std::vector<std::size_t>>(j, "per_channel_orders");
    }
    c.svd = get<std::string>(j, "svd");
    c.tol = get<double>(j, "tol");
    c.max_iters = get<std::size_t>(j, "max_iters");
    if (!at(j, "tau_range").is_null()) {
        const auto r = get<std::vector<std::size_t>>(j, "tau_range");
        if (r.size() != 2) fail("'tau_range' must be [first, last]");
        c.tau_range = TauRange{r[0], r[1]};
    }
    c.n_channels = get<std::size_t>(j, "n_channels");
    c.n_frames = get<std::size_t>(j, "n_frames");
    if (!at(j, "n_epochs").is_null()) c.n_epochs = get<std::size_t>(j, "n_epochs");
    return c;
}

} // namespace detail

inline json to_json(const ResultDocument& d)
{
    json j;
    j["schema_version"] = d.schema_version;
    j["mode"] = d.mode;
    j["config"] = detail::config_to_json(d.config);
    j["channel_labels"] = d.channel_labels;
    if (d.mode == "stationary") {
        j["result"] = d.result ? detail::result_to_json(*d.result) : json(nullptr);
    }
    else {
        json sweep = json::array();
        for (const auto& e : d.sweep) {
            json entry;
            entry["tau"] = e.tau;
            if (e.result) entry["result"] = detail::result_to_json(*e.result);
            else if (e.gap) {
                entry["gap"] = {{"code", std::string(shr::to_string(e.gap->code))},
                                {"message", e.gap->message}};
            }
            sweep.push_back(std::move(entry));
        }
        j["sweep"] = std::move(sweep);
    }
    j["degenerate_channels"] = d.degenerate_channels;
    if (d.elapsed_seconds) j["timing"] = {{"elapsed_seconds", *d.elapsed_seconds}};
    return j;
}

inline ResultDocument from_json(const json& j)
{
    ResultDocument d;
    d.schema_version = detail::get<std::string>(j, "schema_version");
    if (d.schema_version != schema_version) {
        detail::fail("unsupported schema_version '" + d.schema_version + "'");
    }
    d.mode = detail::get<std::string>(j, "mode");
    d.config = detail::config_from_json(detail::at(j, "config"));
    d.channel_labels = detail::get<std::vector<std::string>>(j, "channel_labels");
    const auto order = d.config.order;
    const auto n_ch = d.config.n_channels;
    if (d.mode == "stationary") {
        if (!detail::at(j, "result").is_null()) {
            d.result = detail::result_from_json(j.at("result"), order, n_ch);
        }
    }
    else if (d.mode == "event_locked") {
        const auto& sweep = detail::at(j, "sweep");
        if (!sweep.is_array()) detail::fail("'sweep' must be an array");
        for (const auto& e : sweep) {
            TauEntry entry;
            entry.tau = detail::get<std::size_t>(e, "tau");
            if (e.contains("result")) entry.result = detail::result_from_json(e.at("result"), order, n_ch);
            else {
                const auto& gap = detail::at(e, "gap");
                const auto code = errc_from_string(detail::get<std::string>(gap, "code"));
                if (!code) detail::fail("unknown gap code");
                entry.gap = TauGap{*code, detail::get<std::string>(gap, "message")};
            }
            d.sweep.push_back(std::move(entry));
        }
    }
    else {
        detail::fail("unknown mode '" + d.mode + "'");
    }
    d.degenerate_channels = detail::get<std::vector<std::size_t>>(j, "degenerate_channels");
    if (j.contains("timing")) {
        d.elapsed_seconds = detail::get<double>(j.at("timing"), "elapsed_seconds");
    }
    return d;
}

/// Pretty-printed document text, newline-terminated.
inline std::string render(const ResultDocument& d) { return to_json(d).dump(2) + "\n"; }

inline ResultDocument parse(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e) {
        detail::fail(std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

inline DocumentConfig echo_config(const AnalysisConfig& cfg, std::size_t n_channels,
                                  std::size_t n_frames, std::optional<std::size_t> n_epochs,
                                  std::optional<TauRange> tau_range = std::nullopt)
{
    DocumentConfig c;
    c.order = cfg.global_order;
    c.per_channel_orders = cfg.per_channel_orders;
    c.svd = std::string(to_string(cfg.svd_mode));
    c.tol = cfg.power.tol;
    c.max_iters = cfg.power.max_iters;
    c.tau_range = tau_range ? tau_range : cfg.tau_range;
    c.n_channels = n_channels;
    c.n_frames = n_frames;
    c.n_epochs = n_epochs;
    return c;
}

inline ResultDocument stationary_document(const ShrResult& result, const AnalysisConfig& cfg,
                                          const MultichannelSeries& series)
{
    ResultDocument d;
    d.mode = "stationary";
    d.config = echo_config(cfg, series.n_channels(), series.n_frames(), std::nullopt);
    d.channel_labels = series.channel_labels;
    d.result = result;
    d.degenerate_channels = result.degenerate_channels;
    return d;
}

inline ResultDocument locked_document(const LockedShrSweep& sweep, const EpochedSeries& epochs)
{
    ResultDocument d;
    d.mode = "event_locked";
    d.config = echo_config(sweep.config, epochs.n_channels(), epochs.n_frames(), epochs.n_epochs(),
                           sweep.range);
    d.channel_labels = epochs.channel_labels;
    d.sweep = sweep.results;
    std::set<std::size_t> dead;
    for (const auto& e : sweep.results) {
        if (e.result) dead.insert(e.result->degenerate_channels.begin(), e.result->degenerate_channels.end());
    }
    d.degenerate_channels.assign(dead.begin(), dead.end());
    return d;
}

/// Tidy score table: tau,channel,label,role,score (tau empty when stationary).
inline std::string scores_csv(const ResultDocument& d)
{
    std::string out = "tau,channel,label,role,score\n";
    const auto emit = [&](const std::string& tau, const ShrResult& r) {
        const auto row = [&](const char* role, const Eigen::VectorXd& score) {
            for (Eigen::Index i = 0; i < score.size(); ++i) {
                const auto ch = static_cast<std::size_t>(i);
                out += tau + "," + std::to_string(ch) + "," +
                       (ch < d.channel_labels.size() ? d.channel_labels[ch] : std::string()) + "," +
                       role + "," + json(score[i]).dump() + "\n";
            }
        };
        row("sender", r.sender_score);
        if (r.hub_score) row("hub", *r.hub_score);
        row("receiver", r.receiver_score);
    };
    if (d.result) emit("", *d.result);
    for (const auto& e : d.sweep) {
        if (e.result) emit(std::to_string(e.tau), *e.result);
    }
    return out;
}

// --- network specs -------------------------------------------------------

inline json spec_to_json(const synth::NetworkSpec& s)
{
    json j;
    j["n_channels"] = s.n_channels;
    json couplings = json::array();
    for (const auto& c : s.couplings) {
        couplings.push_back(
            {{"source", c.source}, {"target", c.target}, {"lag", c.lag}, {"coefficient", c.coefficient}});
    }
    j["couplings"] = std::move(couplings);
    j["self_coefficients"] = s.self_coefficients;
    j["noise_std"] = s.noise_std;
    j["n_frames"] = s.n_frames;
    j["n_epochs"] = s.n_epochs ? json(*s.n_epochs) : json(nullptr);
    j["seed"] = s.seed;
    j["activation_window"] = s.activation_window
                                 ? json::array({s.activation_window->first, s.activation_window->last})
                                 : json(nullptr);
    return j;
}

/**
 * Reads a spec.  Required: n_channels, n_frames.  Optional: couplings,
 * self_coefficients, noise_std (default 1), n_epochs, seed (default 0),
 * activation_window as [first, last].
 */
inline synth::NetworkSpec spec_from_json(const json& j)
{
    if (!j.is_object()) detail::fail("network spec must be a JSON object");
    synth::NetworkSpec s;
    s.n_channels = detail::get<std::size_t>(j, "n_channels");
    s.n_frames = detail::get<std::size_t>(j, "n_frames");
    if (j.contains("couplings")) {
        const auto& cs = j.at("couplings");
        if (!cs.is_array()) detail::fail("'couplings' must be an array");
        for (const auto& c : cs) {
            s.couplings.push_back({detail::get<std::size_t>(c, "source"),
                                   detail::get<std::size_t>(c, "target"),
                                   c.contains("lag") ? detail::get<std::size_t>(c, "lag") : 1,
                                   detail::get<double>(c, "coefficient")});
        }
    }
    if (j.contains("self_coefficients") && !j.at("self_coefficients").is_null()) {
        s.self_coefficients = detail::get<std::vector<std::vector<double>>>(j, "self_coefficients");
    }
    if (j.contains("noise_std")) s.noise_std = detail::get<double>(j, "noise_std");
    if (j.contains("n_epochs") && !j.at("n_epochs").is_null()) {
        s.n_epochs = detail::get<std::size_t>(j, "n_epochs");
    }
    if (j.contains("seed")) s.seed = detail::get<std::uint64_t>(j, "seed");
    if (j.contains("activation_window") && !j.at("activation_window").is_null()) {
        const auto w = detail::get<std::vector<std::size_t>>(j, "activation_window");
        if (w.size() != 2) detail::fail("'activation_window' must be [first, last]");
        s.activation_window = synth::FrameWindow{w[0], w[1]};
    }
    return s;
}

inline synth::NetworkSpec parse_spec(std::string_view text)
{
    try {
        return spec_from_json(json::parse(text));
    }
    catch (const nlohmann::json::parse_error& e) {
        detail::fail(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace shr::doc
