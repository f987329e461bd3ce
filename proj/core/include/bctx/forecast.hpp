#pragma once

#include "bctx/sequential_model.hpp"
#include "bctx/tree_model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bctx {

struct ForecastRecord {
    /// 0-based index of the forecast sample in the series.
    std::size_t time = 0;
    double mean = 0.0;
    double variance = 0.0;
    double realised = 0.0;
    double sq_error = 0.0;
    double log_density = 0.0;
};

struct EvalReport {
    FitConfig config;
    std::size_t train_end = 0;
    std::vector<ForecastRecord> records;
    double mse = 0.0;
    /// -sum of log predictive densities.
    double cumulative_log_loss = 0.0;
    /// Evidence, MAP tree and its posterior at the end of the training set.
    double train_log_evidence = 0.0;
    TreeModel train_map_tree;
    double train_map_posterior = 0.0;
    /// MAP tree and posterior after the last test observation.
    TreeModel final_map_tree;
    double final_map_posterior = 0.0;
};

/// Index of the first test sample for a training fraction in (0, 1).
[[nodiscard]] std::size_t split_by_fraction(std::size_t length, double train_fraction);
/// Index of the first test sample when the last `test_count` samples are held out.
[[nodiscard]] std::size_t split_by_test_count(std::size_t length, std::size_t test_count);

/// Fits on series[0, train_end) and then, for each test index, predicts
/// from the current MAP tree, records the losses and observes the value.
[[nodiscard]] EvalReport rolling_forecast(std::span<const double> series, std::size_t train_end,
                                          const FitConfig& config);

/// Summary statistics over `records`.
void summarize_records(EvalReport& report);

}  // namespace bctx
