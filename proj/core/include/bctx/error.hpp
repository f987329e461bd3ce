#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bctx {

/// Raised when a numerical routine cannot produce a finite answer
/// (non-PD matrix, nonpositive variance, overflow).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the MAP search when beta < 1/2: the pruned tree is still
/// computed by callers that opt in, but it is not guaranteed to be the MAP.
class MapNotGuaranteed : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input data problems. `line()` is the 1-based line of the offending row,
/// or 0 when the error is not tied to a particular line.
class IngestError : public std::runtime_error {
public:
    IngestError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace bctx
