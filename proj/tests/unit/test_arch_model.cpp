#include "bctx/arch_model.hpp"

#include "oracles.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

using namespace bctx;

namespace {

ArchData simulate_arch(const Eigen::VectorXd& theta, std::size_t n, std::uint64_t seed) {
    const int p = static_cast<int>(theta.size()) - 1;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> x(static_cast<std::size_t>(p), 0.0);
    ArchData d(p);
    std::vector<double> lag;
    for (std::size_t i = 0; i < n + 100; ++i) {
        const std::size_t pos = x.size();
        fill_lagged_squares(x, pos, p, lag);
        double v = theta[0];
        for (int j = 0; j < p; ++j) v += theta[j + 1] * lag[static_cast<std::size_t>(j)];
        x.push_back(std::sqrt(v) * nd(rng));
        if (i >= 100) d.add(x.back(), lag);
    }
    return d;
}

}  // namespace

TEST_CASE("ARCH data layout") {
    const std::vector<double> s{1.0, -2.0, 3.0};
    std::vector<double> lag;
    fill_lagged_squares(s, 3, 2, lag);
    CHECK(lag == std::vector<double>{9.0, 4.0});
    CHECK_THROWS((fill_lagged_squares(s, 1, 2, lag)));
    ArchData d(2);
    d.add(0.5, lag);
    CHECK(d.count() == 1);
    CHECK(d.variance(0, Eigen::Vector3d(0.1, 0.2, 0.3)) == doctest::Approx(0.1 + 1.8 + 1.2));
    CHECK_THROWS_AS(d.add(0.5, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("log-likelihood by hand") {
    ArchData d(1);
    d.add(1.0, std::vector<double>{4.0});
    d.add(-0.5, std::vector<double>{1.0});
    const Eigen::Vector2d th(0.2, 0.3);
    const double v1 = 0.2 + 1.2, v2 = 0.2 + 0.3;
    const double expected = -std::log(2.0 * std::numbers::pi) - 0.5 * (std::log(v1) + 1.0 / v1) -
                            0.5 * (std::log(v2) + 0.25 / v2);
    CHECK(arch_loglik(d, th) == doctest::Approx(expected));
    CHECK_THROWS_AS((void)arch_loglik(d, Eigen::Vector2d(-1.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS((void)arch_loglik(d, Eigen::Vector3d(1.0, 0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("score matches finite differences and information is PD") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 0.4);
    const auto d = simulate_arch(Eigen::Vector4d(0.2, 0.3, 0.1, 0.2), 400, 9);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Vector4d th(0.05 + u(rng), u(rng), u(rng), u(rng));
        const auto sc = arch_score_and_info(d, th);
        const auto f = [&](const Eigen::VectorXd& v) { return arch_loglik(d, v); };
        const Eigen::VectorXd num = oracle::numeric_gradient(f, th, 1e-6);
        CHECK((sc.gradient - num).norm() <= 1e-5 * std::max(1.0, num.norm()));
        CHECK(sc.loglik == doctest::Approx(arch_loglik(d, th)));
        CHECK((sc.info - sc.info.transpose()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sc.info);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
        for (std::size_t i = 0; i < d.count(); ++i) {
            Eigen::Vector4d z;
            z << 1.0, d.lagged_squares(i)[0], d.lagged_squares(i)[1], d.lagged_squares(i)[2];
            const double v = z.dot(th);
            expected += z * z.transpose() / (2.0 * v * v);
        }
        CHECK((sc.info - expected).norm() <= 1e-9 * expected.norm());
    }
}

TEST_CASE("projection and initial values") {
    const Eigen::Vector3d p = project_feasible(Eigen::Vector3d(-1.0, 2.0, -0.3));
    CHECK(p[0] == kArchAlpha0Floor);
    CHECK(p[1] == 1.0);
    CHECK(p[2] == 0.0);
    ArchData d(2);
    d.add(2.0, std::vector<double>{0.0, 0.0});
    d.add(0.0, std::vector<double>{4.0, 0.0});
    const auto init = arch_initial_params(d);
    CHECK(init[0] == doctest::Approx(2.0));
    CHECK(init[1] == 0.05);
    CHECK(arch_initial_params(ArchData(1))[0] == 1.0);
}

TEST_CASE("zero iterations returns the initial point") {
    const auto d = simulate_arch(Eigen::Vector2d(0.3, 0.4), 100, 2);
    const Eigen::Vector2d init(0.5, 0.05);
    const auto r = fisher_scoring(d, init, 0);
    CHECK(r.theta == init);
    CHECK(r.iterations == 0);
    CHECK_THROWS((void)fisher_scoring(d, init, -1));
}

TEST_CASE("Fisher scoring reaches the box-constrained maximum") {
    const std::vector<Eigen::VectorXd> truths{
        Eigen::Vector2d(0.3, 0.4), Eigen::Vector3d(0.1, 0.2, 0.0), Eigen::Vector4d(0.2, 0.1, 0.3, 0.05)};
    std::uint64_t seed = 30;
    for (const auto& truth : truths) {
        const auto d = simulate_arch(truth, 1500, ++seed);
        const auto r = fisher_scoring(d, arch_initial_params(d), 50);
        CHECK(r.converged);
        const auto k = truth.size();
        Eigen::VectorXd lo = Eigen::VectorXd::Zero(k), hi = Eigen::VectorXd::Ones(k);
        lo[0] = kArchAlpha0Floor;
        hi[0] = 1e6;
        const auto nm = oracle::nelder_mead_box(
            [&](const Eigen::VectorXd& v) { return -arch_loglik(d, v); }, arch_initial_params(d),
            lo, hi);
        CHECK(r.loglik >= -nm.value - 1e-7);
        CHECK((r.theta - nm.x).cwiseAbs().maxCoeff() < 1e-3);
        CHECK(r.loglik >= arch_loglik(d, arch_initial_params(d)));
    }
}

TEST_CASE("Laplace evidence on an order-0 node") {
    CHECK(log_pe_arch_laplace(ArchData(0), Eigen::VectorXd::Ones(1)).log_pe == 0.0);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd(0.0, 0.7);
    ArchData d(0);
    double ss = 0.0;
    const int n = 150;
    for (int i = 0; i < n; ++i) {
        const double x = nd(rng);
        d.add(x, std::vector<double>{});
        ss += x * x;
    }
    const auto fit = fisher_scoring(d, arch_initial_params(d), 20);
    CHECK(fit.theta[0] == doctest::Approx(ss / n).epsilon(1e-10));
    const auto lap = log_pe_arch_laplace(d, fit.theta);
    CHECK_FALSE(lap.degenerate);
    // Exact: (2 pi)^{-n/2} Gamma(n/2) (ss/2)^{-n/2}; Laplace error is about 1/(6n).
    const double exact = -0.5 * n * std::log(2.0 * std::numbers::pi) + std::lgamma(0.5 * n) -
                         0.5 * n * std::log(0.5 * ss);
    CHECK(std::abs(std::expm1(lap.log_pe - exact)) < 2.0 / (6.0 * n));
}

TEST_CASE("tiny nodes are flagged degenerate") {
    ArchData d(3);
    d.add(0.4, std::vector<double>{0.1, 0.2, 0.3});
    const auto lap = log_pe_arch_laplace(d, Eigen::Vector4d(0.1, 0.1, 0.1, 0.1));
    CHECK(lap.degenerate);
    CHECK(std::isfinite(lap.log_pe));
}

TEST_CASE("ARCH predictive") {
    const auto f = predict_arch(Eigen::Vector3d(0.1, 0.2, 0.3), std::vector<double>{1.0, 2.0});
    CHECK(f.mean == 0.0);
    CHECK(f.variance == doctest::Approx(0.9));
    CHECK_THROWS((void)predict_arch(Eigen::Vector2d(0.1, 0.2), std::vector<double>{1.0, 2.0}));
}
