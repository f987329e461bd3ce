#include "bctx/series_io.hpp"

#include "bctx/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bctx {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    while (true) {
        const auto comma = line.find(',');
        cells.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return cells;
}

std::optional<double> parse_number(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

}  // namespace

std::vector<double> parse_csv(std::string_view text, const std::optional<std::string>& column) {
    std::vector<double> out;
    std::size_t line_no = 0;
    bool first = true;
    std::optional<std::size_t> index;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);

        if (first) {
            first = false;
            const bool header = std::none_of(cells.begin(), cells.end(), [](std::string_view c) {
                return parse_number(c).has_value();
            });
            if (column) {
                if (header) {
                    const auto it = std::find(cells.begin(), cells.end(), std::string_view(*column));
                    if (it != cells.end()) index = static_cast<std::size_t>(it - cells.begin());
                }
                if (!index) {
                    const auto n = parse_number(*column);
                    if (!n || *n < 0 || *n != std::floor(*n)) {
                        throw IngestError("column '" + *column + "' not found", line_no);
                    }
                    index = static_cast<std::size_t>(*n);
                }
            } else {
                index = cells.size() - 1;
            }
            if (header) continue;
        }

        if (*index >= cells.size()) {
            throw IngestError("line " + std::to_string(line_no) + " has no column " +
                                  std::to_string(*index),
                              line_no);
        }
        const auto value = parse_number(cells[*index]);
        if (!value) {
            throw IngestError("line " + std::to_string(line_no) + ": '" + std::string(cells[*index]) +
                                  "' is not a number",
                              line_no);
        }
        if (!std::isfinite(*value)) {
            throw IngestError("line " + std::to_string(line_no) + ": non-finite value", line_no);
        }
        out.push_back(*value);
    }
    if (out.empty()) throw IngestError("series is empty");
    return out;
}

std::vector<double> ingest_csv(const std::filesystem::path& path,
                               const std::optional<std::string>& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), column);
}

std::string_view to_string(Transform t) noexcept {
    switch (t) {
        case Transform::none: return "none";
        case Transform::diff: return "diff";
        case Transform::logdiff: return "logdiff";
        case Transform::logret10: return "logret10";
    }
    return "none";
}

Transform parse_transform(std::string_view text) {
    for (Transform t : {Transform::none, Transform::diff, Transform::logdiff, Transform::logret10}) {
        if (text == to_string(t)) return t;
    }
    throw std::invalid_argument("unknown transform '" + std::string(text) +
                                "' (expected none, diff, logdiff or logret10)");
}

std::vector<double> apply_transform(std::span<const double> series, Transform t) {
    if (t == Transform::none) return {series.begin(), series.end()};
    if (series.size() < 2) throw std::invalid_argument("differencing needs at least two samples");
    const bool log = t != Transform::diff;
    if (log) {
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (!(series[i] > 0.0)) {
                throw std::invalid_argument("log transform needs positive values; index " +
                                            std::to_string(i) + " is not");
            }
        }
    }
    const double scale = t == Transform::logret10 ? 10.0 : 1.0;
    std::vector<double> out(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i) {
        out[i - 1] = log ? scale * (std::log(series[i]) - std::log(series[i - 1]))
                         : series[i] - series[i - 1];
    }
    return out;
}

void write_series_csv(const std::filesystem::path& path, std::span<const double> values,
                      std::string_view header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << header << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (double v : values) out << v << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace bctx
