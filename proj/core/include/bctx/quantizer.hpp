#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bctx {

using Symbol = std::uint8_t;

/// Discrete context, most recent symbol first. A node of a context tree is
/// identified by the same kind of string (the root-to-node path).
using Context = std::vector<Symbol>;

/// Piecewise-constant quantiser onto {0, ..., m-1}.
///
/// A value equal to a threshold belongs to the upper cell: Q(x) = i iff
/// c_i <= x < c_{i+1}. The generators use the opposite (open) convention
/// through `quantize_open`, which differs only on the thresholds themselves.
class Quantizer {
public:
    /// Thresholds must be finite, non-empty and strictly increasing.
    explicit Quantizer(std::vector<double> thresholds);

    [[nodiscard]] int alphabet_size() const noexcept {
        return static_cast<int>(thresholds_.size()) + 1;
    }
    [[nodiscard]] std::span<const double> thresholds() const noexcept { return thresholds_; }

    /// Number of thresholds c with c <= x.
    [[nodiscard]] Symbol operator()(double x) const noexcept;

    /// Number of thresholds c with c < x.
    [[nodiscard]] Symbol quantize_open(double x) const noexcept;

    bool operator==(const Quantizer&) const = default;

private:
    std::vector<double> thresholds_;
};

/// Symbols of the `depth` samples preceding `position` (0-based index of the
/// target sample in `series`), most recent first.
///
/// Throws std::out_of_range if fewer than `depth` samples precede `position`
/// or if `position` is past the end of the series.
[[nodiscard]] Context context_at(std::span<const double> series, std::size_t position,
                                 const Quantizer& q, int depth);

/// Renders a context as a digit string ("01"), or dot-separated symbols for
/// alphabets larger than 10. The empty context renders as "".
[[nodiscard]] std::string context_to_string(std::span<const Symbol> context, int alphabet_size);

/// Inverse of `context_to_string`.
[[nodiscard]] Context context_from_string(const std::string& text, int alphabet_size);

}  // namespace bctx
