#include "bctx/simulate.hpp"

#include "bctx/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bctx {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

GenerativeSpec make_ar(std::string name, std::string_view tree, std::vector<double> thresholds,
                       int order, bool intercept, std::vector<LeafSpec> leaves,
                       std::size_t length) {
    const auto m = static_cast<int>(thresholds.size()) + 1;
    GenerativeSpec s;
    s.name = std::move(name);
    s.kind = ModelKind::ar;
    s.tree = TreeModel::parse(tree, m);
    s.quantizer = Quantizer(std::move(thresholds));
    s.order = order;
    s.intercept = intercept;
    s.leaves = std::move(leaves);
    s.default_length = length;
    s.validate();
    return s;
}

std::vector<GenerativeSpec> make_builtins() {
    std::vector<GenerativeSpec> out;
    auto ctx = [](const char* text, int m) { return context_from_string(text, m); };

    out.push_back(make_ar("sim_1", "{1,01,00}", {0.0}, 2, false,
                          {{ctx("1", 2), vec({0.7, -0.3}), 0.15},
                           {ctx("01", 2), vec({-0.3, -0.2}), 0.10},
                           {ctx("00", 2), vec({0.5, 0.0}), 0.05}},
                          600));

    const double quiet = 0.005 * 0.005;
    out.push_back(make_ar("sim_2", "{1,00,01,02,20,21,22}", {-0.5, 0.5}, 1, false,
                          {{ctx("1", 3), vec({0.0}), 0.25},
                           {ctx("01", 3), vec({0.0}), 0.25},
                           {ctx("02", 3), vec({0.0}), 0.25},
                           {ctx("20", 3), vec({0.0}), 0.25},
                           {ctx("21", 3), vec({0.0}), 0.25},
                           {ctx("00", 3), vec({0.99}), quiet},
                           {ctx("22", 3), vec({0.99}), quiet}},
                          500));

    out.push_back(make_ar("sim_3", "{0,1}", {-0.2}, 5, true,
                          {{ctx("1", 2), vec({-0.1, 0.9, 0.9, 0.0, 0.0, -0.2}), 1.0},
                           {ctx("0", 2), vec({0.2, 0.1, 0.0, 0.0, 0.0, 0.9}), 1.0}},
                          200));

    GenerativeSpec arch;
    arch.name = "arch_sim";
    arch.kind = ModelKind::arch;
    arch.tree = TreeModel::parse("{0,1}", 2);
    arch.quantizer = Quantizer({0.0});
    arch.order = 2;
    arch.leaves = {{ctx("0", 2), vec({0.10, 0.20, 0.20}), 0.0},
                   {ctx("1", 2), vec({0.10, 0.20, 0.0}), 0.0}};
    arch.default_length = 5000;
    arch.validate();
    out.push_back(std::move(arch));
    return out;
}

}  // namespace

std::size_t GenerativeSpec::lookback() const {
    return static_cast<std::size_t>(std::max(tree.depth(), order));
}

void GenerativeSpec::validate() const {
    if (tree.alphabet_size() != quantizer.alphabet_size()) {
        throw std::invalid_argument("spec tree and quantizer use different alphabets");
    }
    if (order < 0) throw std::invalid_argument("spec order must be nonnegative");
    if (kind == ModelKind::arch && intercept) {
        throw std::invalid_argument("ARCH specs have no intercept");
    }
    if (leaves.size() != tree.leaf_count()) {
        throw std::invalid_argument("spec needs exactly one parameter set per leaf");
    }
    const auto dim = static_cast<Eigen::Index>(order + (kind == ModelKind::arch || intercept ? 1 : 0));
    std::vector<Context> seen;
    for (const auto& leaf : leaves) {
        const auto& tl = tree.leaves();
        if (std::find(tl.begin(), tl.end(), leaf.context) == tl.end()) {
            throw std::invalid_argument("spec leaf '" + context_to_string(leaf.context, tree.alphabet_size()) +
                                        "' is not a leaf of the tree");
        }
        if (std::find(seen.begin(), seen.end(), leaf.context) != seen.end()) {
            throw std::invalid_argument("spec leaf listed twice");
        }
        seen.push_back(leaf.context);
        if (leaf.coefficients.size() != dim || !leaf.coefficients.allFinite()) {
            throw std::invalid_argument("spec leaf has the wrong number of coefficients");
        }
        if (kind == ModelKind::ar && !(leaf.sigma2 > 0.0)) {
            throw std::invalid_argument("AR noise variances must be positive");
        }
        if (kind == ModelKind::arch) {
            if (!(leaf.coefficients[0] > 0.0)) throw std::invalid_argument("ARCH alpha_0 must be positive");
            if ((leaf.coefficients.tail(dim - 1).array() < 0.0).any()) {
                throw std::invalid_argument("ARCH coefficients must be nonnegative");
            }
        }
    }
}

std::size_t GenerativeSpec::state_at(std::span<const double> series, std::size_t position) const {
    const auto depth = static_cast<std::size_t>(tree.depth());
    Context ctx(depth);
    for (std::size_t k = 0; k < depth; ++k) ctx[k] = quantizer.quantize_open(series[position - 1 - k]);
    const auto leaf = tree.find_state(ctx);
    const auto& tl = tree.leaves();
    for (std::size_t j = 0; j < leaves.size(); ++j) {
        if (leaves[j].context == tl[*leaf]) return j;
    }
    throw std::logic_error("spec leaf lookup failed");
}

GeneratedSeries generate_with_states(const GenerativeSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    double level = 0.0;
    for (const auto& leaf : spec.leaves) {
        level += spec.kind == ModelKind::ar ? leaf.sigma2 : leaf.coefficients[0];
    }
    const double init_scale = std::sqrt(level / static_cast<double>(spec.leaves.size()));

    const std::size_t lookback = spec.lookback();
    const std::size_t total = lookback + spec.burn_in + n;
    std::vector<double> x;
    x.reserve(total);
    std::vector<std::size_t> states;
    states.reserve(total);
    for (std::size_t i = 0; i < lookback; ++i) {
        x.push_back(init_scale * normal(rng));
        states.push_back(0);
    }
    const auto p = static_cast<std::size_t>(spec.order);
    for (std::size_t i = lookback; i < total; ++i) {
        const std::size_t state = spec.state_at(x, i);
        const Eigen::VectorXd& c = spec.leaves[state].coefficients;
        double value = 0.0;
        if (spec.kind == ModelKind::ar) {
            Eigen::Index k = 0;
            if (spec.intercept) value += c[k++];
            for (std::size_t j = 0; j < p; ++j) value += c[k++] * x[i - 1 - j];
            value += std::sqrt(spec.leaves[state].sigma2) * normal(rng);
        } else {
            double var = c[0];
            for (std::size_t j = 0; j < p; ++j) var += c[static_cast<Eigen::Index>(j) + 1] * x[i - 1 - j] * x[i - 1 - j];
            value = std::sqrt(var) * normal(rng);
        }
        if (!std::isfinite(value)) {
            throw NumericError("simulation of '" + spec.name + "' diverged at step " +
                               std::to_string(i - lookback));
        }
        x.push_back(value);
        states.push_back(state);
    }
    GeneratedSeries out;
    const auto first = static_cast<std::ptrdiff_t>(total - n);
    out.values.assign(x.begin() + first, x.end());
    out.states.assign(states.begin() + first, states.end());
    return out;
}

std::vector<double> generate(const GenerativeSpec& spec, std::size_t n, std::uint64_t seed) {
    return generate_with_states(spec, n, seed).values;
}

const std::vector<GenerativeSpec>& builtin_specs() {
    static const std::vector<GenerativeSpec> specs = make_builtins();
    return specs;
}

const GenerativeSpec& builtin_spec(std::string_view name) {
    for (const auto& s : builtin_specs()) {
        if (s.name == name) return s;
    }
    throw std::invalid_argument("unknown simulation spec '" + std::string(name) +
                                "' (known: sim_1, sim_2, sim_3, arch_sim)");
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace bctx
