#include "bctx/tree_model.hpp"

#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <utility>

using namespace bctx;

TEST_CASE("tree parsing and printing") {
    const auto t = TreeModel::parse("{1,01,00}", 2);
    CHECK(t.leaf_count() == 3);
    CHECK(t.depth() == 2);
    CHECK(t.leaves_at_depth(2) == 2);
    CHECK(t.to_string() == "{1,00,01}");
    CHECK(TreeModel::parse(t.to_string(), 2) == t);
    CHECK(TreeModel::parse("{}", 2).is_root_only());
    CHECK(TreeModel::parse("{λ}", 2).is_root_only());
    CHECK(TreeModel(2).to_string() == "{λ}");
}

TEST_CASE("improper trees are rejected") {
    CHECK_THROWS_AS((void)TreeModel::parse("{1,01}", 2), std::invalid_argument);
    CHECK_THROWS_AS((void)TreeModel::parse("{0,1,01}", 2), std::invalid_argument);
    CHECK_THROWS_AS((void)TreeModel::parse("{0,1,1}", 2), std::invalid_argument);
    CHECK_THROWS_AS((void)TreeModel::parse("{0,2}", 2), std::invalid_argument);
    CHECK_NOTHROW((void)TreeModel::parse("{0,1,2}", 3));
}

TEST_CASE("find_state returns the leaf that prefixes the context") {
    const auto t = TreeModel::parse("{1,01,00}", 2);
    const auto idx = t.find_state(Context{0, 1, 1});
    REQUIRE(idx.has_value());
    CHECK(t.leaves()[*idx] == Context{0, 1});
    CHECK(t.leaves()[*t.find_state(Context{1})] == Context{1});
    CHECK_FALSE(t.find_state(Context{0}).has_value());
}

TEST_CASE("check_depth") {
    const auto t = TreeModel::parse("{1,01,00}", 2);
    CHECK_NOTHROW(t.check_depth(2));
    CHECK_THROWS_AS(t.check_depth(1), std::invalid_argument);
}

TEST_CASE("default beta and alpha") {
    CHECK(BctPrior::default_beta(2) == doctest::Approx(0.5));
    CHECK(BctPrior::default_beta(3) == doctest::Approx(0.75));
    const auto p = BctPrior::with_default_beta(3, 4);
    CHECK(std::exp(p.log_alpha()) == doctest::Approx(std::sqrt(0.25)));
    CHECK_THROWS((BctPrior{1.0, 2, 3}).validate());
    CHECK_THROWS((BctPrior{0.0, 2, 3}).validate());
}

TEST_CASE("log_prior of known trees") {
    const BctPrior p{0.5, 2, 2};
    // {1,01,00}: |T| = 3, two leaves at depth D.
    const double expected = 2.0 * std::log(0.5) + 1.0 * std::log(0.5);
    CHECK(log_prior(TreeModel::parse("{1,01,00}", 2), p) == doctest::Approx(expected));
    CHECK(log_prior(TreeModel(2), p) == doctest::Approx(std::log(0.5)));
    CHECK(log_prior(TreeModel(2), BctPrior{0.5, 2, 0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)log_prior(TreeModel::parse("{1,01,00}", 2), BctPrior{0.5, 2, 1}),
                    std::invalid_argument);
}

TEST_CASE("prior sums to one over all trees") {
    for (auto [m, d] : {std::pair{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}, {4, 1}}) {
        for (double beta : {0.2, 0.5, BctPrior::default_beta(m), 0.9}) {
            const BctPrior p{beta, m, d};
            double total = 0.0;
            for (const auto& t : oracle::enumerate_trees(m, d)) total += std::exp(log_prior(t, p));
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("tree enumeration counts") {
    CHECK(oracle::enumerate_trees(2, 1).size() == 2);
    CHECK(oracle::enumerate_trees(2, 2).size() == 5);
    CHECK(oracle::enumerate_trees(2, 3).size() == 26);
    CHECK(oracle::enumerate_trees(3, 2).size() == 9);
}
