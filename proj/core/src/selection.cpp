#include "bctx/selection.hpp"

#include "bctx/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace bctx {
namespace {

double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void combinations(const std::vector<double>& values, std::size_t k, std::size_t start,
                  std::vector<double>& current, std::vector<std::vector<double>>& out) {
    if (current.size() == k) {
        out.push_back(current);
        return;
    }
    for (std::size_t i = start; i < values.size(); ++i) {
        current.push_back(values[i]);
        combinations(values, k, i + 1, current, out);
        current.pop_back();
    }
}

// True if candidate a should be preferred over b.
bool better(const SelectionRow& a, const SelectionRow& b) {
    if (!b.ok) return a.ok;
    if (!a.ok) return false;
    if (a.log_evidence != b.log_evidence) return a.log_evidence > b.log_evidence;
    if (a.order != b.order) return a.order < b.order;
    return a.thresholds < b.thresholds;
}

}  // namespace

std::vector<std::vector<double>> SelectionGrid::percentile_thresholds(std::span<const double> train,
                                                                      int alphabet_size, double lo,
                                                                      double hi, double step) {
    if (train.empty()) throw std::invalid_argument("cannot derive thresholds from an empty series");
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be at least 2");
    if (!(lo <= hi) || !(step > 0.0) || lo < 0.0 || hi > 100.0) {
        throw std::invalid_argument("bad percentile range");
    }
    std::vector<double> sorted(train.begin(), train.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> points;
    for (double q = lo; q <= hi + 1e-9; q += step) points.push_back(percentile(sorted, q));
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<std::vector<double>> out;
    std::vector<double> current;
    combinations(points, static_cast<std::size_t>(alphabet_size - 1), 0, current, out);
    return out;
}

SelectionResult select_hyperparams(std::span<const double> train, const SelectionGrid& grid,
                                   const FitConfig& base, unsigned threads) {
    if (grid.orders.empty() || grid.thresholds.empty()) {
        throw std::invalid_argument("selection grid is empty");
    }
    const int max_order = *std::max_element(grid.orders.begin(), grid.orders.end());
    FitConfig common = base;
    if (!common.warmup) {
        common.warmup = static_cast<std::size_t>(std::max(common.depth, max_order));
    }
    if (train.size() <= *common.warmup) {
        throw std::invalid_argument("training series is not longer than the warmup");
    }

    SelectionResult result;
    for (const auto& th : grid.thresholds) {
        for (int p : grid.orders) result.table.push_back(SelectionRow{th, p, 0.0, false, {}});
    }

    auto evaluate = [&](SelectionRow& row) {
        try {
            FitConfig cfg = common;
            cfg.quantizer = Quantizer(row.thresholds);
            cfg.order = row.order;
            const auto model = fit_model(cfg, train, train.size());
            row.log_evidence = model->log_evidence();
            row.ok = std::isfinite(row.log_evidence);
            if (!row.ok) row.error = "non-finite evidence";
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(result.table.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < result.table.size(); i = next++) evaluate(result.table[i]);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 1; i < result.table.size(); ++i) {
        if (better(result.table[i], result.table[result.best])) result.best = i;
    }
    const SelectionRow& best = result.table[result.best];
    if (!best.ok) throw NumericError("every selection candidate failed: " + best.error);
    result.selected = common;
    result.selected.quantizer = Quantizer(best.thresholds);
    result.selected.order = best.order;
    return result;
}

}  // namespace bctx
