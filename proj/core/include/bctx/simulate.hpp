#pragma once

#include "bctx/quantizer.hpp"
#include "bctx/sequential_model.hpp"
#include "bctx/tree_model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace bctx {

/// Parameters of one state of a generative model.
///   AR:   coefficients = (intercept?, phi_1, ..., phi_p), noise variance sigma2.
///   ARCH: coefficients = (alpha_0, ..., alpha_p); sigma2 unused.
struct LeafSpec {
    Context context;
    Eigen::VectorXd coefficients;
    double sigma2 = 0.0;
};

struct GenerativeSpec {
    std::string name;
    ModelKind kind = ModelKind::ar;
    TreeModel tree;
    Quantizer quantizer{std::vector<double>{0.0}};
    int order = 1;
    bool intercept = false;
    std::vector<LeafSpec> leaves;
    std::size_t burn_in = 200;
    std::size_t default_length = 0;

    /// Samples needed before the first generated value: max(tree depth, order).
    [[nodiscard]] std::size_t lookback() const;
    /// Throws std::invalid_argument if leaves and tree disagree or a
    /// parameter is out of range.
    void validate() const;
    /// Index into leaves of the state selected by the samples before `position`.
    [[nodiscard]] std::size_t state_at(std::span<const double> series, std::size_t position) const;
};

struct GeneratedSeries {
    std::vector<double> values;
    /// Index into spec.leaves of the state that produced each value.
    std::vector<std::size_t> states;
};

/// Draws lookback() initial values i.i.d. N(0, s^2) with s^2 the mean leaf
/// noise level, runs burn_in discarded steps, then returns n values.
/// Context symbols use the open convention (x > c moves up a cell).
/// Throws NumericError if the recursion diverges.
[[nodiscard]] GeneratedSeries generate_with_states(const GenerativeSpec& spec, std::size_t n,
                                                   std::uint64_t seed);
[[nodiscard]] std::vector<double> generate(const GenerativeSpec& spec, std::size_t n,
                                           std::uint64_t seed);

/// sim_1, sim_2, sim_3 and arch_sim.
[[nodiscard]] const std::vector<GenerativeSpec>& builtin_specs();
/// Throws std::invalid_argument for unknown names.
[[nodiscard]] const GenerativeSpec& builtin_spec(std::string_view name);

/// Engine for stream `stream` of the run seeded with `seed`.
[[nodiscard]] std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace bctx
