#pragma once

/** @file
 * Text formats for recordings.
 *
 * Stationary CSV: one row per frame, one column per channel, optional
 * header row of channel labels, '.' decimal separator.
 *
 * Epoched data, canonical form: a directory holding manifest.txt, which
 * lists one per-epoch CSV per line (relative to the manifest; '#' starts a
 * comment).  Alternative form: a single CSV whose header starts with an
 * "epoch" column; rows are grouped by that column in order of first
 * appearance.
 */

#include "shr/error.hpp"
#include "shr/series.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace shr::io {

inline constexpr std::string_view manifest_name = "manifest.txt";

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s)
{
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Parse, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CsvTable {
    std::vector<std::string> header; ///< empty when the file has none
    std::vector<std::vector<double>> rows;
};

inline CsvTable parse_csv(std::string_view text, const std::string& name)
{
    CsvTable table;
    std::size_t width = 0;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        const auto line = trim(text.substr(start, end == std::string_view::npos ? end : end - start));
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (line.empty()) continue;

        const auto fields = split(line);
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            throw Error(Errc::Parse, name + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(width) + " fields, found " +
                                         std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(width);
        bool numeric = true;
        for (auto f : fields) {
            const auto v = parse_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (table.rows.empty() && table.header.empty()) {
                for (auto f : fields) table.header.emplace_back(f);
                continue;
            }
            throw Error(Errc::Parse, name + ":" + std::to_string(line_no) + ": non-numeric field");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline Eigen::MatrixXd to_channel_major(const std::vector<std::vector<double>>& rows,
                                        std::size_t first_col)
{
    if (rows.empty()) return {};
    const auto n_ch = static_cast<Eigen::Index>(rows.front().size() - first_col);
    Eigen::MatrixXd m(n_ch, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (Eigen::Index i = 0; i < n_ch; ++i) {
            m(i, static_cast<Eigen::Index>(t)) = rows[t][first_col + static_cast<std::size_t>(i)];
        }
    }
    return m;
}

} // namespace detail

/// Shortest text that reads back to exactly the same double (17 significant digits).
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline MultichannelSeries parse_series_csv(std::string_view text, const std::string& name = "<csv>")
{
    auto table = detail::parse_csv(text, name);
    if (table.rows.empty()) throw Error(Errc::Parse, name + ": no data rows");
    MultichannelSeries s;
    s.values = detail::to_channel_major(table.rows, 0);
    s.channel_labels = std::move(table.header);
    return s;
}

inline MultichannelSeries read_series_csv(const std::filesystem::path& path)
{
    return parse_series_csv(detail::read_file(path), path.string());
}

inline std::string format_series_csv(const Eigen::MatrixXd& values,
                                     const std::vector<std::string>& labels)
{
    std::string out;
    const auto n_ch = values.rows();
    if (!labels.empty()) {
        for (Eigen::Index i = 0; i < n_ch; ++i) {
            if (i) out += ',';
            out += labels[static_cast<std::size_t>(i)];
        }
        out += '\n';
    }
    for (Eigen::Index t = 0; t < values.cols(); ++t) {
        for (Eigen::Index i = 0; i < n_ch; ++i) {
            if (i) out += ',';
            out += format_double(values(i, t));
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Parse, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(Errc::Parse, "write to '" + path.string() + "' failed");
}

inline void write_series_csv(const std::filesystem::path& path, const MultichannelSeries& series)
{
    write_text(path, format_series_csv(series.values, series.channel_labels));
}

/// Reads a manifest file, or a directory containing manifest.txt.
inline EpochedSeries read_epoch_manifest(const std::filesystem::path& path)
{
    const auto manifest = std::filesystem::is_directory(path) ? path / manifest_name : path;
    const auto base = manifest.parent_path();
    const auto text = detail::read_file(manifest);

    EpochedSeries out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        auto entry = detail::trim(line);
        if (const auto hash = entry.find('#'); hash != std::string_view::npos) {
            entry = detail::trim(entry.substr(0, hash));
        }
        if (entry.empty()) continue;
        auto s = read_series_csv(base / std::string(entry));
        if (out.epochs.empty()) out.channel_labels = s.channel_labels;
        else if (s.channel_labels != out.channel_labels && !s.channel_labels.empty()) {
            throw Error(Errc::LabelMismatch, "epoch file '" + std::string(entry) +
                                                 "' has different channel labels");
        }
        out.epochs.push_back(std::move(s.values));
    }
    return out;
}

/// Single CSV with a leading "epoch" column.
inline EpochedSeries parse_concatenated_epochs(std::string_view text,
                                               const std::string& name = "<csv>")
{
    auto table = detail::parse_csv(text, name);
    if (table.header.empty() || table.header.front() != "epoch") {
        throw Error(Errc::Parse, name + ": concatenated epochs need a header starting with 'epoch'");
    }
    if (table.header.size() < 2) throw Error(Errc::Parse, name + ": no channel columns");

    std::vector<double> order;
    std::map<double, std::vector<std::vector<double>>> groups;
    for (auto& row : table.rows) {
        auto [it, fresh] = groups.try_emplace(row.front());
        if (fresh) order.push_back(row.front());
        it->second.push_back(std::move(row));
    }
    EpochedSeries out;
    out.channel_labels.assign(table.header.begin() + 1, table.header.end());
    for (double key : order) out.epochs.push_back(detail::to_channel_major(groups[key], 1));
    return out;
}

/// Directory or manifest path -> manifest form; *.csv -> concatenated form.
inline EpochedSeries read_epochs(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) {
        throw Error(Errc::Parse, "input '" + path.string() + "' does not exist");
    }
    if (!std::filesystem::is_directory(path) && path.extension() == ".csv") {
        return parse_concatenated_epochs(detail::read_file(path), path.string());
    }
    return read_epoch_manifest(path);
}

/// Writes epoch_0001.csv ... plus manifest.txt into `dir` (created if needed).
inline void write_epochs(const std::filesystem::path& dir, const EpochedSeries& epochs)
{
    std::filesystem::create_directories(dir);
    std::string manifest = "# epoch files in event order\n";
    for (std::size_t j = 0; j < epochs.n_epochs(); ++j) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%04zu.csv", j + 1);
        write_text(dir / name, format_series_csv(epochs.epochs[j], epochs.channel_labels));
        manifest += name;
        manifest += '\n';
    }
    write_text(dir / manifest_name, manifest);
}

} // namespace shr::io
