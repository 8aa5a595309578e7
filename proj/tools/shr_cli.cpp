// shr: sender/hub/receiver analysis of multichannel recordings.
//
//   shr analyze --input data.csv --order 2 [--mode stationary|event_locked] ...
//   shr synth --spec network.json --output data.csv [--epochs N] [--seed S]
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

#include "shr/document.hpp"
#include "shr/io.hpp"
#include "shr/shr.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_numerical = 3;

struct AnalyzeArgs {
    std::string input;
    std::string mode = "stationary";
    long long order = 0;
    std::string channel_orders;
    std::string svd = "auto";
    double tol = 1e-10;
    long long max_iters = 10000;
    std::string tau;
    std::string output;
    std::string scores_csv;
    bool no_timing = false;
    long long threads = 1;
};

struct SynthArgs {
    std::string spec;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
};

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::size_t parse_count(const std::string& text, const std::string& what)
{
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    }
    catch (const std::exception&) {
        pos = 0;
    }
    if (pos != text.size() || text.empty() || v < 0) {
        throw shr::Error(shr::Errc::InvalidArgument, what + " '" + text + "' is not a count");
    }
    return static_cast<std::size_t>(v);
}

shr::TauRange parse_tau(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw shr::Error(shr::Errc::InvalidArgument, "--tau expects A:B, got '" + text + "'");
    }
    return {parse_count(text.substr(0, colon), "tau start"),
            parse_count(text.substr(colon + 1), "tau end")};
}

std::vector<std::size_t> read_channel_orders(const std::string& path)
{
    std::string text = shr::io::detail::read_file(path);
    for (char& c : text) {
        if (c == ',' || c == ';') c = ' ';
    }
    std::istringstream in(text);
    std::vector<std::size_t> orders;
    std::string tok;
    while (in >> tok) orders.push_back(parse_count(tok, "channel order"));
    if (orders.empty()) throw shr::Error(shr::Errc::Parse, "'" + path + "' lists no orders");
    return orders;
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") std::cout << text << std::flush;
    else shr::io::write_text(path, text);
}

int run_analyze(const AnalyzeArgs& args)
{
    const auto started = std::chrono::steady_clock::now();
    if (args.order < 1) {
        throw shr::Error(shr::Errc::InvalidOrder,
                         "--order must satisfy Q >= 1, got " + std::to_string(args.order));
    }
    if (args.mode != "stationary" && args.mode != "event_locked") {
        throw shr::Error(shr::Errc::InvalidArgument, "--mode must be stationary or event_locked");
    }
    if (!(args.tol > 0.0)) throw shr::Error(shr::Errc::InvalidArgument, "--tol must be > 0");
    if (args.max_iters < 1) throw shr::Error(shr::Errc::InvalidArgument, "--max-iters must be >= 1");
    if (args.threads < 0) throw shr::Error(shr::Errc::InvalidArgument, "--threads must be >= 0");

    shr::AnalysisConfig cfg;
    cfg.global_order = static_cast<std::size_t>(args.order);
    cfg.svd_mode = shr::doc::svd_mode_from_string(args.svd);
    cfg.power.tol = args.tol;
    cfg.power.max_iters = static_cast<std::size_t>(args.max_iters);
    cfg.threads = static_cast<std::size_t>(args.threads);
    if (!args.channel_orders.empty()) cfg.per_channel_orders = read_channel_orders(args.channel_orders);
    if (!args.tau.empty()) {
        if (args.mode != "event_locked") {
            throw shr::Error(shr::Errc::InvalidArgument, "--tau applies only to --mode event_locked");
        }
        cfg.tau_range = parse_tau(args.tau);
    }

    shr::doc::ResultDocument document;
    if (args.mode == "stationary") {
        const auto series = shr::detail::in_stage("read", [&] { return shr::io::read_series_csv(args.input); });
        const auto result = shr::analyze_stationary(series, cfg, warn);
        document = shr::doc::stationary_document(result, cfg, series);
    }
    else {
        const auto epochs = shr::detail::in_stage("read", [&] { return shr::io::read_epochs(args.input); });
        const auto sweep = shr::analyze_event_locked(epochs, cfg, warn);
        document = shr::doc::locked_document(sweep, epochs);
    }

    if (!args.no_timing) {
        document.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    emit(args.output, shr::doc::render(document));
    if (!args.scores_csv.empty()) shr::io::write_text(args.scores_csv, shr::doc::scores_csv(document));
    return exit_ok;
}

int run_synth(const SynthArgs& args)
{
    auto spec = shr::detail::in_stage("read", [&] {
        return shr::doc::parse_spec(shr::io::detail::read_file(args.spec));
    });
    if (args.seed) spec.seed = *args.seed;
    if (args.epochs) spec.n_epochs = *args.epochs;

    const auto roles = shr::synth::expected_roles(spec);
    const auto data = shr::detail::in_stage("synth", [&] { return shr::synth::generate(spec); });
    if (const auto* series = std::get_if<shr::MultichannelSeries>(&data)) {
        shr::io::write_series_csv(args.output, *series);
    }
    else {
        shr::io::write_epochs(args.output, std::get<shr::EpochedSeries>(data));
    }

    std::cerr << "channel\trole\n";
    for (std::size_t i = 0; i < roles.size(); ++i) {
        std::cerr << i << '\t' << shr::synth::to_string(roles[i]) << '\n';
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sender/hub/receiver localization in multichannel time series"};
    app.require_subcommand(1);

    AnalyzeArgs a;
    auto* analyze = app.add_subcommand("analyze", "Run a stationary or event-locked analysis");
    analyze->add_option("--input", a.input, "CSV file (stationary) or epoch directory/manifest/CSV")
        ->required();
    analyze->add_option("--mode", a.mode, "stationary | event_locked")->capture_default_str();
    analyze->add_option("--order", a.order, "Global autoregressive order Q (>= 1)")->required();
    analyze->add_option("--channel-orders", a.channel_orders,
                        "File with one AR order per channel (each >= Q)");
    analyze->add_option("--svd", a.svd, "full | power | auto")->capture_default_str();
    analyze->add_option("--tol", a.tol, "Power iteration tolerance")->capture_default_str();
    analyze->add_option("--max-iters", a.max_iters, "Power iteration limit")->capture_default_str();
    analyze->add_option("--tau", a.tau, "Target frame range A:B (1-based, event_locked only)");
    analyze->add_option("--output", a.output, "Result document path (default: stdout)");
    analyze->add_option("--scores-csv", a.scores_csv, "Also write a tidy per-channel score table");
    analyze->add_flag("--no-timing", a.no_timing, "Omit timing metadata from the document");
    analyze->add_option("--threads", a.threads, "Worker threads (0 = all cores)")->capture_default_str();

    SynthArgs s;
    auto* synth = app.add_subcommand("synth", "Generate synthetic data from a network spec");
    synth->add_option("--spec", s.spec, "Network spec JSON")->required();
    synth->add_option("--output", s.output, "CSV path, or directory for epoched output")->required();
    synth->add_option("--seed", s.seed, "Override the spec seed");
    synth->add_option("--epochs", s.epochs, "Generate this many epochs");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (analyze->parsed()) return run_analyze(a);
        return run_synth(s);
    }
    catch (const shr::Error& e) {
        std::cerr << "error: " << e.describe() << '\n';
        return shr::is_numerical(e.code()) ? exit_numerical : exit_input;
    }
    catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
