#include "bctx/context_tree.hpp"
#include "bctx/error.hpp"
#include "bctx/sequential_model.hpp"
#include "bctx/simulate.hpp"

#include "oracles.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

using namespace bctx;

namespace {

struct Instance {
    std::vector<double> series;
    FitConfig config;
    std::unique_ptr<SequentialModel> model;
};

Instance make_instance(std::uint64_t seed, int m, int d, int p, std::size_t n,
                       std::optional<double> beta = {}) {
    auto rng = make_rng(seed, 99);
    const auto spec = oracle::random_ar_spec(m, d, p, rng);
    Instance in;
    in.series = generate(spec, n, seed);
    in.config = FitConfig::defaults(ModelKind::ar);
    in.config.quantizer = spec.quantizer;
    in.config.depth = d;
    in.config.order = p;
    in.config.beta = beta;
    in.model = fit_model(in.config, in.series, in.series.size());
    return in;
}

}  // namespace

TEST_CASE("insert_path builds the trie and find looks it up") {
    ContextTree t(2, 3);
    std::vector<NodeId> path;
    t.insert_path(Context{1, 0, 1}, path);
    CHECK(path.size() == 4);
    CHECK(t.size() == 4);
    t.insert_path(Context{1, 0, 0, 1}, path);
    CHECK(t.size() == 5);
    for (std::size_t i = 1; i < path.size(); ++i) {
        CHECK(path[i] > path[i - 1]);
        CHECK(t.parent(path[i]) == path[i - 1]);
        CHECK(t.depth(path[i]) == static_cast<int>(i));
    }
    CHECK(t.find(Context{1, 0}) == path[2]);
    CHECK(t.find(Context{0}) == kNoNode);
    CHECK(t.context_of(path[3]) == Context{1, 0, 0});
    CHECK_THROWS_AS(t.insert_path(Context{1, 0}, path), std::invalid_argument);
    CHECK_THROWS_AS(t.insert_path(Context{1, 0, 2}, path), std::invalid_argument);
}

TEST_CASE("empty tree has zero evidence") {
    ContextTree t(3, 4);
    const BctPrior p = BctPrior::with_default_beta(3, 4);
    CHECK(cctw(t, p) == doctest::Approx(0.0));
    const auto r = cbct(t, p);
    CHECK(r.tree.is_root_only());
}

TEST_CASE("cctw rejects a prior for another tree shape") {
    ContextTree t(2, 3);
    CHECK_THROWS_AS(cctw(t, BctPrior{0.5, 2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(cctw(t, BctPrior{0.5, 3, 3}), std::invalid_argument);
}

TEST_CASE("evidence equals the sum over enumerated trees") {
    for (auto [m, d, p] : {std::tuple{2, 2, 1}, {2, 3, 2}, {3, 2, 1}, {2, 1, 0 + 1}}) {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            auto in = make_instance(seed, m, d, p, 40);
            std::vector<double> terms;
            for (const auto& t : oracle::enumerate_trees(m, d)) {
                terms.push_back(oracle::log_joint(t, in.series, in.series.size(), in.config));
            }
            CHECK(in.model->log_evidence() ==
                  doctest::Approx(oracle::log_sum_exp(terms)).epsilon(1e-11));
        }
    }
}

TEST_CASE("cbct finds the enumerated maximiser") {
    for (double beta : {0.5, 0.7, 0.9}) {
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            auto in = make_instance(seed, 2, 3, 1, 60, beta);
            double best = -INFINITY;
            for (const auto& t : oracle::enumerate_trees(2, 3)) {
                best = std::max(best, oracle::log_joint(t, in.series, in.series.size(), in.config));
            }
            ContextTree tree = in.model->tree();
            const auto r = cbct(tree, in.config.prior());
            CHECK(r.log_pm_root == doctest::Approx(best).epsilon(1e-11));
            CHECK(oracle::log_joint(r.tree, in.series, in.series.size(), in.config) ==
                  doctest::Approx(best).epsilon(1e-11));
            CHECK(r.tree == in.model->map_tree());
        }
    }
}

TEST_CASE("cbct below beta one half needs an explicit opt in") {
    auto in = make_instance(3, 2, 2, 1, 50, 0.3);
    ContextTree tree = in.model->tree();
    CHECK_THROWS_AS(cbct(tree, in.config.prior()), MapNotGuaranteed);
    CHECK_NOTHROW((void)cbct(tree, in.config.prior(), MapPolicy::allow_unguaranteed));
}

TEST_CASE("tree posterior sums to one") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto in = make_instance(seed, 2, 3, 2, 80);
        double total = 0.0;
        for (const auto& t : oracle::enumerate_trees(2, 3)) {
            const double post = posterior_of_tree(t, in.model->tree(), in.config.prior());
            const double direct =
                std::exp(oracle::log_joint(t, in.series, in.series.size(), in.config) -
                         in.model->log_evidence());
            CHECK(post == doctest::Approx(direct).epsilon(1e-9));
            total += post;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("refresh_path matches a full sweep") {
    auto in = make_instance(4, 2, 3, 1, 100);
    ContextTree incremental = in.model->tree();
    ContextTree full = incremental;
    std::vector<NodeId> path;
    incremental.insert_path(Context{0, 1, 1}, path);
    full.insert_path(Context{0, 1, 1}, path);
    for (NodeId id : path) {
        incremental.set_log_pe(id, incremental.log_pe(id) - 0.25);
        full.set_log_pe(id, full.log_pe(id) - 0.25);
    }
    refresh_path(incremental, in.config.prior(), path);
    cctw(full, in.config.prior());
    for (NodeId id = 0; id < full.size(); ++id) {
        CHECK(incremental.log_pw(id) == full.log_pw(id));
        CHECK(incremental.log_pm(id) == full.log_pm(id));
        CHECK(incremental.map_leaf(id) == full.map_leaf(id));
    }
}

TEST_CASE("sampled trees follow the posterior") {
    auto in = make_instance(2, 2, 2, 1, 30);
    const auto trees = oracle::enumerate_trees(2, 2);
    std::mt19937_64 rng(17);
    std::map<std::string, int> counts;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        ++counts[sample_posterior_tree(in.model->tree(), in.config.prior(), rng).to_string()];
    }
    int seen = 0;
    for (const auto& t : trees) {
        const double post = posterior_of_tree(t, in.model->tree(), in.config.prior());
        const double freq = static_cast<double>(counts[t.to_string()]) / draws;
        const double se = std::sqrt(post * (1.0 - post) / draws);
        CHECK(std::abs(freq - post) <= 4.0 * se + 1e-12);
        seen += counts[t.to_string()];
    }
    CHECK(seen == draws);
}

TEST_CASE("log_leaf_evidence treats unseen leaves as empty") {
    auto in = make_instance(5, 2, 3, 1, 60);
    const auto& tree = in.model->tree();
    const auto t = TreeModel::parse("{1,01,00}", 2);
    double expected = 0.0;
    for (const auto& leaf : t.leaves()) {
        const NodeId id = tree.find(leaf);
        if (id != kNoNode) expected += tree.log_pe(id);
    }
    CHECK(log_leaf_evidence(t, tree) == expected);
}
