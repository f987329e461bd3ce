#pragma once

#include "bctx/quantizer.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bctx {

/// A proper m-ary context-tree model, stored as its sorted set of leaves.
/// Every internal node has exactly m children; the root-only tree has the
/// single empty leaf.
class TreeModel {
public:
    /// Root-only tree over a binary alphabet.
    TreeModel() : TreeModel(2) {}
    explicit TreeModel(int alphabet_size);

    /// Throws std::invalid_argument if the leaves do not form a proper tree.
    TreeModel(int alphabet_size, std::vector<Context> leaves);

    /// Parses "{1,01,00}" (or "{}" / "{λ}" for the root-only tree).
    [[nodiscard]] static TreeModel parse(std::string_view text, int alphabet_size);

    [[nodiscard]] int alphabet_size() const noexcept { return alphabet_size_; }
    [[nodiscard]] const std::vector<Context>& leaves() const noexcept { return leaves_; }
    [[nodiscard]] std::size_t leaf_count() const noexcept { return leaves_.size(); }
    [[nodiscard]] int depth() const noexcept;
    [[nodiscard]] std::size_t leaves_at_depth(int d) const noexcept;
    [[nodiscard]] bool is_root_only() const noexcept {
        return leaves_.size() == 1 && leaves_.front().empty();
    }

    /// Index into leaves() of the unique leaf that is a prefix of `context`,
    /// or nullopt if `context` is too short to reach a leaf.
    [[nodiscard]] std::optional<std::size_t> find_state(std::span<const Symbol> context) const;

    /// Throws std::invalid_argument if any leaf is deeper than `max_depth`.
    void check_depth(int max_depth) const;

    [[nodiscard]] std::string to_string() const;

    bool operator==(const TreeModel&) const = default;

private:
    int alphabet_size_;
    std::vector<Context> leaves_;
};

/// Parameters of the BCT prior pi_D(T) = alpha^{|T|-1} beta^{|T|-L_D(T)}.
/// alpha = (1-beta)^{1/(m-1)} is always derived, never stored.
struct BctPrior {
    double beta;
    int alphabet_size;
    int max_depth;

    /// beta = 1 - 2^{-m+1}.
    [[nodiscard]] static double default_beta(int alphabet_size);
    [[nodiscard]] static BctPrior with_default_beta(int alphabet_size, int max_depth);

    void validate() const;

    [[nodiscard]] double log_beta() const;
    [[nodiscard]] double log_one_minus_beta() const;
    [[nodiscard]] double log_alpha() const;
};

/// log pi_D(T). Throws std::invalid_argument for trees deeper than D or over
/// a different alphabet.
[[nodiscard]] double log_prior(const TreeModel& tree, const BctPrior& prior);

}  // namespace bctx
