#pragma once

#include "bctx/quantizer.hpp"
#include "bctx/tree_model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace bctx {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// T_MAX: the m-ary trie of every context observed so far, with the
/// log-domain quantities of the weighting and maximising recursions.
///
/// Nodes are created lazily along context paths and never removed. A node id
/// is always greater than its parent's, so a reverse id sweep is a post-order
/// traversal. Base-model statistics live outside the tree, indexed by NodeId.
///
/// A child that was never created stands for a context with no data: its
/// estimated probability is 1, so it contributes log P_w = 0, and log P_m =
/// log beta below depth D (0 at depth D).
class ContextTree {
public:
    ContextTree(int alphabet_size, int max_depth);

    [[nodiscard]] int alphabet_size() const noexcept { return alphabet_size_; }
    [[nodiscard]] int max_depth() const noexcept { return max_depth_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] static constexpr NodeId root() noexcept { return 0; }

    /// Creates the missing nodes on the path of `context` (length >= D) and
    /// writes the ids for depths 0..D into `path`, root first.
    void insert_path(std::span<const Symbol> context, std::vector<NodeId>& path);

    /// Lookup without creating nodes: the id of the node for
    /// `context` exactly, or kNoNode.
    [[nodiscard]] NodeId find(std::span<const Symbol> context) const noexcept;

    [[nodiscard]] NodeId child(NodeId id, Symbol s) const noexcept {
        return children_[static_cast<std::size_t>(id) * alphabet_size_ + s];
    }
    [[nodiscard]] NodeId parent(NodeId id) const noexcept { return nodes_[id].parent; }
    [[nodiscard]] int depth(NodeId id) const noexcept { return nodes_[id].depth; }
    [[nodiscard]] Context context_of(NodeId id) const;

    [[nodiscard]] double log_pe(NodeId id) const noexcept { return nodes_[id].log_pe; }
    void set_log_pe(NodeId id, double value) noexcept { nodes_[id].log_pe = value; }

    [[nodiscard]] double log_pw(NodeId id) const noexcept { return nodes_[id].log_pw; }
    [[nodiscard]] double log_pm(NodeId id) const noexcept { return nodes_[id].log_pm; }
    /// True if the maximising recursion prefers stopping at this node.
    [[nodiscard]] bool map_leaf(NodeId id) const noexcept { return nodes_[id].map_leaf; }

    /// Recomputes log_pw, log_pm and the MAP decision of one node from its
    /// own log_pe and its children's current values.
    void recompute_node(NodeId id, const BctPrior& prior) noexcept;

private:
    struct Node {
        NodeId parent;
        Symbol symbol;
        int depth;
        bool map_leaf = true;
        double log_pe = 0.0;
        double log_pw = 0.0;
        double log_pm = 0.0;
    };

    NodeId add_node(NodeId parent, Symbol symbol, int depth);

    int alphabet_size_;
    int max_depth_;
    std::vector<Node> nodes_;
    std::vector<NodeId> children_;
};

/// Full weighting sweep over T_MAX; returns log P_w at the root, i.e. the
/// log evidence. Also refreshes the maximising quantities.
double cctw(ContextTree& tree, const BctPrior& prior);

struct CbctResult {
    TreeModel tree;
    /// log P_m at the root = max_T log[pi(T) prod_{s in T} P_e(s,x)].
    double log_pm_root;
};

enum class MapPolicy { require_guarantee, allow_unguaranteed };

/// Full maximising sweep followed by top-down pruning. Ties between the two
/// terms prune (the smaller tree wins). With beta < 1/2 the result is not
/// guaranteed to be the MAP tree: throws MapNotGuaranteed unless the policy
/// allows it.
CbctResult cbct(ContextTree& tree, const BctPrior& prior,
                MapPolicy policy = MapPolicy::require_guarantee);

/// Recomputes both recursions along an updated context path (deepest node
/// first). Equivalent to a full sweep when only the nodes in `path` changed.
void refresh_path(ContextTree& tree, const BctPrior& prior, std::span<const NodeId> path);

/// Reads the MAP tree off the current pruning decisions without re-sweeping.
[[nodiscard]] TreeModel extract_map_tree(const ContextTree& tree);

/// Sum of log P_e over the leaves of `model`; leaves absent from T_MAX
/// contribute 0.
[[nodiscard]] double log_leaf_evidence(const TreeModel& model, const ContextTree& tree);

/// log pi(T|x) = log pi(T) + sum log P_e(s) - log P_w(root). Requires a sweep.
[[nodiscard]] double log_posterior_of_tree(const TreeModel& model, const ContextTree& tree,
                                           const BctPrior& prior);

[[nodiscard]] double posterior_of_tree(const TreeModel& model, const ContextTree& tree,
                                       const BctPrior& prior);

/// Independent draw from pi(T|x) by top-down branching with
/// P_b(s) = beta P_e(s) / P_w(s). Requires a sweep.
[[nodiscard]] TreeModel sample_posterior_tree(const ContextTree& tree, const BctPrior& prior,
                                              std::mt19937_64& rng);

}  // namespace bctx
