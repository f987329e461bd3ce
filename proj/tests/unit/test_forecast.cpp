#include "bctx/forecast.hpp"
#include "bctx/simulate.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace bctx;

TEST_CASE("splits") {
    CHECK(split_by_fraction(600, 0.5) == 300);
    CHECK(split_by_fraction(7, 0.5) == 3);
    CHECK_THROWS((void)split_by_fraction(10, 1.0));
    CHECK_THROWS((void)split_by_fraction(10, 0.0));
    CHECK(split_by_test_count(10, 3) == 7);
    CHECK_THROWS((void)split_by_test_count(10, 10));
    CHECK_THROWS((void)split_by_test_count(10, 0));
}

TEST_CASE("rolling forecast replays predict then observe") {
    const auto x = generate(builtin_spec("sim_1"), 600, 9);
    FitConfig cfg = FitConfig::defaults(ModelKind::ar);
    const auto report = rolling_forecast(x, 300, cfg);
    REQUIRE(report.records.size() == 300);
    auto model = fit_model(cfg, x, 300);
    double sq = 0.0, loss = 0.0;
    for (std::size_t t = 300; t < x.size(); ++t) {
        const auto& r = report.records[t - 300];
        const auto f = model->predict(x, t);
        CHECK(r.time == t);
        CHECK(r.mean == f.mean);
        CHECK(r.variance == f.variance);
        CHECK(r.realised == x[t]);
        CHECK(r.sq_error == (x[t] - f.mean) * (x[t] - f.mean));
        const double ld = -0.5 * std::log(2.0 * std::numbers::pi * f.variance) -
                          0.5 * (x[t] - f.mean) * (x[t] - f.mean) / f.variance;
        CHECK(r.log_density == doctest::Approx(ld).epsilon(1e-12));
        sq += r.sq_error;
        loss -= r.log_density;
        model->observe(x, t);
    }
    CHECK(report.mse == doctest::Approx(sq / 300.0));
    CHECK(report.cumulative_log_loss == doctest::Approx(loss));
    CHECK(report.final_map_tree == model->map_tree());
}

TEST_CASE("rolling forecast rejects splits inside the warmup") {
    const auto x = generate(builtin_spec("sim_1"), 100, 9);
    FitConfig cfg = FitConfig::defaults(ModelKind::ar);
    CHECK_THROWS_AS((void)rolling_forecast(x, 10, cfg), std::invalid_argument);
    CHECK_THROWS_AS((void)rolling_forecast(x, 101, cfg), std::invalid_argument);
    CHECK(rolling_forecast(x, 100, cfg).records.empty());
}
