#include "bctx/forecast.hpp"

#include <cmath>
#include <stdexcept>

namespace bctx {

std::size_t split_by_fraction(std::size_t length, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("training fraction must lie in (0, 1)");
    }
    return static_cast<std::size_t>(std::floor(static_cast<double>(length) * train_fraction));
}

std::size_t split_by_test_count(std::size_t length, std::size_t test_count) {
    if (test_count == 0 || test_count >= length) {
        throw std::invalid_argument("test size must be positive and smaller than the series");
    }
    return length - test_count;
}

void summarize_records(EvalReport& report) {
    double sq = 0.0;
    double loss = 0.0;
    for (const auto& r : report.records) {
        sq += r.sq_error;
        loss -= r.log_density;
    }
    report.mse = report.records.empty() ? 0.0 : sq / static_cast<double>(report.records.size());
    report.cumulative_log_loss = loss;
}

EvalReport rolling_forecast(std::span<const double> series, std::size_t train_end,
                            const FitConfig& config) {
    const std::size_t warmup = config.warmup_length();
    if (train_end > series.size()) throw std::invalid_argument("split lies beyond the series");
    if (train_end <= warmup) {
        throw std::invalid_argument("training split must leave at least one scored sample after the warmup");
    }
    EvalReport report;
    report.config = config;
    report.train_end = train_end;
    auto model = fit_model(config, series, train_end);
    report.train_log_evidence = model->log_evidence();
    report.train_map_tree = model->map_tree();
    report.train_map_posterior = std::exp(model->map_log_posterior());

    report.records.reserve(series.size() - train_end);
    for (std::size_t t = train_end; t < series.size(); ++t) {
        const GaussianForecast f = model->predict(series, t);
        const double y = series[t];
        const double err = y - f.mean;
        report.records.push_back(
            ForecastRecord{t, f.mean, f.variance, y, err * err, f.log_density(y)});
        model->observe(series, t);
    }
    report.final_map_tree = model->map_tree();
    report.final_map_posterior = std::exp(model->map_log_posterior());
    summarize_records(report);
    return report;
}

}  // namespace bctx
