#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bctx {

/// Reads one numeric column of a comma-separated file.
///
/// The first row is a header iff none of its cells is numeric. `column` is
/// a header name or a 0-based index; unset selects the last column. Blank
/// lines are skipped. Non-numeric, NaN or infinite cells throw IngestError
/// naming the line.
[[nodiscard]] std::vector<double> ingest_csv(const std::filesystem::path& path,
                                             const std::optional<std::string>& column = {});

/// Same, reading from an in-memory text.
[[nodiscard]] std::vector<double> parse_csv(std::string_view text,
                                            const std::optional<std::string>& column = {});

enum class Transform { none, diff, logdiff, logret10 };

[[nodiscard]] std::string_view to_string(Transform t) noexcept;
[[nodiscard]] Transform parse_transform(std::string_view text);

/// none: identity. diff: x_n - x_{n-1}. logdiff: log x_n - log x_{n-1}.
/// logret10: 10 (log x_n - log x_{n-1}). Differencing shortens by one.
[[nodiscard]] std::vector<double> apply_transform(std::span<const double> series, Transform t);

/// Writes `values` one per line with a header row.
void write_series_csv(const std::filesystem::path& path, std::span<const double> values,
                      std::string_view header = "value");

}  // namespace bctx
