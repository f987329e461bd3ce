#pragma once

#include "bctx/sequential_model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bctx {

struct SelectionGrid {
    std::vector<int> orders{1, 2, 3, 4, 5};
    /// Candidate threshold tuples, each strictly increasing.
    std::vector<std::vector<double>> thresholds;

    /// Percentiles lo, lo+step, ..., hi of `train` (linear interpolation);
    /// for alphabet size m, every strictly increasing (m-1)-subset of them.
    [[nodiscard]] static std::vector<std::vector<double>> percentile_thresholds(
        std::span<const double> train, int alphabet_size, double lo = 10.0, double hi = 90.0,
        double step = 5.0);
};

struct SelectionRow {
    std::vector<double> thresholds;
    int order = 0;
    double log_evidence = 0.0;
    bool ok = false;
    std::string error;
};

struct SelectionResult {
    /// One row per candidate, in grid order (thresholds outer, orders inner).
    std::vector<SelectionRow> table;
    std::size_t best = 0;
    /// The base configuration with the winning thresholds and order.
    FitConfig selected;

    [[nodiscard]] const SelectionRow& best_row() const { return table.at(best); }
};

/// Fits every (thresholds, order) candidate on `train` and returns the one of
/// highest evidence; ties go to the smaller order, then the lexicographically
/// smaller thresholds. All candidates share the warmup max(D, max order)
/// unless `base.warmup` is set, so they score the same observations.
/// Candidates run on `threads` workers (0 = hardware concurrency).
/// Throws NumericError if every candidate fails.
[[nodiscard]] SelectionResult select_hyperparams(std::span<const double> train,
                                                 const SelectionGrid& grid, const FitConfig& base,
                                                 unsigned threads = 0);

}  // namespace bctx
