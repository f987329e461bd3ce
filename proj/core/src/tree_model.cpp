#include "bctx/tree_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bctx {
namespace {

bool is_prefix(std::span<const Symbol> prefix, std::span<const Symbol> full) {
    return prefix.size() <= full.size() && std::equal(prefix.begin(), prefix.end(), full.begin());
}

// Checks that the sorted range [first, last) of leaves, all extending `prefix`
// of length `len`, forms a proper subtree rooted at that prefix.
void check_proper(std::vector<Context>::const_iterator first,
                  std::vector<Context>::const_iterator last, std::size_t len, int m) {
    if (first == last) {
        throw std::invalid_argument("tree is not proper: a branch has no leaves");
    }
    if (first->size() == len) {
        if (std::next(first) != last) {
            throw std::invalid_argument("tree is not proper: a leaf has descendants");
        }
        return;
    }
    auto it = first;
    for (int symbol = 0; symbol < m; ++symbol) {
        auto end = std::find_if(it, last, [&](const Context& c) {
            return c.size() <= len || c[len] != static_cast<Symbol>(symbol);
        });
        check_proper(it, end, len + 1, m);
        it = end;
    }
    if (it != last) {
        throw std::invalid_argument("tree is not proper: unexpected leaves");
    }
}

}  // namespace

TreeModel::TreeModel(int alphabet_size) : alphabet_size_(alphabet_size), leaves_{Context{}} {
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be at least 2");
}

TreeModel::TreeModel(int alphabet_size, std::vector<Context> leaves)
    : alphabet_size_(alphabet_size), leaves_(std::move(leaves)) {
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be at least 2");
    for (const auto& leaf : leaves_) {
        for (Symbol s : leaf) {
            if (s >= alphabet_size) {
                throw std::invalid_argument("leaf symbol outside the alphabet");
            }
        }
    }
    std::sort(leaves_.begin(), leaves_.end());
    if (std::adjacent_find(leaves_.begin(), leaves_.end()) != leaves_.end()) {
        throw std::invalid_argument("tree has duplicate leaves");
    }
    check_proper(leaves_.begin(), leaves_.end(), 0, alphabet_size_);
}

TreeModel TreeModel::parse(std::string_view text, int alphabet_size) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
        throw std::invalid_argument("tree must be written as {leaf,leaf,...}");
    }
    text = trim(text.substr(1, text.size() - 2));
    if (text.empty() || text == "λ") return TreeModel(alphabet_size);
    std::vector<Context> leaves;
    while (true) {
        auto comma = text.find(',');
        auto piece = trim(text.substr(0, comma));
        leaves.push_back(context_from_string(std::string(piece), alphabet_size));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return TreeModel(alphabet_size, std::move(leaves));
}

int TreeModel::depth() const noexcept {
    std::size_t d = 0;
    for (const auto& leaf : leaves_) d = std::max(d, leaf.size());
    return static_cast<int>(d);
}

std::size_t TreeModel::leaves_at_depth(int d) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        leaves_.begin(), leaves_.end(),
        [d](const Context& c) { return c.size() == static_cast<std::size_t>(d); }));
}

std::optional<std::size_t> TreeModel::find_state(std::span<const Symbol> context) const {
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        if (is_prefix(leaves_[i], context)) return i;
    }
    return std::nullopt;
}

void TreeModel::check_depth(int max_depth) const {
    if (depth() > max_depth) {
        throw std::invalid_argument("tree " + to_string() + " is deeper than D=" +
                                    std::to_string(max_depth));
    }
}

std::string TreeModel::to_string() const {
    if (is_root_only()) return "{λ}";
    // Shallow leaves first, then lexicographic: {1,00,01}.
    auto sorted = leaves_;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Context& a, const Context& b) {
        return a.size() < b.size();
    });
    std::string out = "{";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += context_to_string(sorted[i], alphabet_size_);
    }
    out.push_back('}');
    return out;
}

double BctPrior::default_beta(int alphabet_size) {
    return 1.0 - std::pow(2.0, -alphabet_size + 1);
}

BctPrior BctPrior::with_default_beta(int alphabet_size, int max_depth) {
    return BctPrior{default_beta(alphabet_size), alphabet_size, max_depth};
}

void BctPrior::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be at least 2");
    if (max_depth < 0) throw std::invalid_argument("maximum depth must be nonnegative");
}

double BctPrior::log_beta() const { return std::log(beta); }

double BctPrior::log_one_minus_beta() const { return std::log1p(-beta); }

double BctPrior::log_alpha() const {
    return std::log1p(-beta) / static_cast<double>(alphabet_size - 1);
}

double log_prior(const TreeModel& tree, const BctPrior& prior) {
    prior.validate();
    if (tree.alphabet_size() != prior.alphabet_size) {
        throw std::invalid_argument("tree and prior use different alphabets");
    }
    tree.check_depth(prior.max_depth);
    const auto leaves = static_cast<double>(tree.leaf_count());
    const auto at_depth = static_cast<double>(tree.leaves_at_depth(prior.max_depth));
    return (leaves - 1.0) * prior.log_alpha() + (leaves - at_depth) * prior.log_beta();
}

}  // namespace bctx
