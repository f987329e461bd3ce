#include "bctx/context_tree.hpp"

#include "bctx/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace bctx {
namespace {

double log_add_exp(double a, double b) noexcept {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

}  // namespace

ContextTree::ContextTree(int alphabet_size, int max_depth)
    : alphabet_size_(alphabet_size), max_depth_(max_depth) {
    if (alphabet_size < 2 || alphabet_size > 256) {
        throw std::invalid_argument("alphabet size must be in [2, 256]");
    }
    if (max_depth < 0 || max_depth > 255) {
        throw std::invalid_argument("maximum depth must be in [0, 255]");
    }
    add_node(kNoNode, 0, 0);
}

NodeId ContextTree::add_node(NodeId parent, Symbol symbol, int depth) {
    if (nodes_.size() >= static_cast<std::size_t>(kNoNode)) {
        throw std::length_error("context tree is full");
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{parent, symbol, depth});
    children_.resize(children_.size() + static_cast<std::size_t>(alphabet_size_), kNoNode);
    return id;
}

void ContextTree::insert_path(std::span<const Symbol> context, std::vector<NodeId>& path) {
    if (context.size() < static_cast<std::size_t>(max_depth_)) {
        throw std::invalid_argument("context shorter than the maximum depth");
    }
    path.clear();
    NodeId node = root();
    path.push_back(node);
    for (int d = 0; d < max_depth_; ++d) {
        const Symbol s = context[static_cast<std::size_t>(d)];
        if (s >= alphabet_size_) throw std::invalid_argument("context symbol outside the alphabet");
        NodeId next = child(node, s);
        if (next == kNoNode) {
            next = add_node(node, s, d + 1);
            children_[static_cast<std::size_t>(node) * alphabet_size_ + s] = next;
        }
        node = next;
        path.push_back(node);
    }
}

NodeId ContextTree::find(std::span<const Symbol> context) const noexcept {
    if (context.size() > static_cast<std::size_t>(max_depth_)) return kNoNode;
    NodeId node = root();
    for (Symbol s : context) {
        if (s >= alphabet_size_) return kNoNode;
        node = child(node, s);
        if (node == kNoNode) return kNoNode;
    }
    return node;
}

Context ContextTree::context_of(NodeId id) const {
    Context ctx(static_cast<std::size_t>(nodes_[id].depth));
    for (NodeId n = id; n != root(); n = nodes_[n].parent) {
        ctx[static_cast<std::size_t>(nodes_[n].depth - 1)] = nodes_[n].symbol;
    }
    return ctx;
}

void ContextTree::recompute_node(NodeId id, const BctPrior& prior) noexcept {
    Node& node = nodes_[id];
    if (node.depth == max_depth_) {
        node.log_pw = node.log_pe;
        node.log_pm = node.log_pe;
        node.map_leaf = true;
        return;
    }
    const double log_beta = prior.log_beta();
    const double missing_pm = (node.depth + 1 < max_depth_) ? log_beta : 0.0;
    double sum_w = 0.0;
    double sum_m = 0.0;
    for (int j = 0; j < alphabet_size_; ++j) {
        const NodeId c = child(id, static_cast<Symbol>(j));
        if (c == kNoNode) {
            sum_m += missing_pm;
        } else {
            sum_w += nodes_[c].log_pw;
            sum_m += nodes_[c].log_pm;
        }
    }
    const double stop = log_beta + node.log_pe;
    const double log_branch = prior.log_one_minus_beta();
    node.log_pw = log_add_exp(stop, log_branch + sum_w);
    const double branch_m = log_branch + sum_m;
    node.map_leaf = stop >= branch_m;
    node.log_pm = node.map_leaf ? stop : branch_m;
}

namespace {

void full_sweep(ContextTree& tree, const BctPrior& prior) {
    prior.validate();
    if (prior.alphabet_size != tree.alphabet_size() || prior.max_depth != tree.max_depth()) {
        throw std::invalid_argument("prior does not match the context tree's alphabet/depth");
    }
    for (auto id = static_cast<std::int64_t>(tree.size()) - 1; id >= 0; --id) {
        tree.recompute_node(static_cast<NodeId>(id), prior);
    }
    if (!std::isfinite(tree.log_pw(ContextTree::root()))) {
        throw NumericError("weighted probability at the root is not finite");
    }
}

}  // namespace

double cctw(ContextTree& tree, const BctPrior& prior) {
    full_sweep(tree, prior);
    return tree.log_pw(ContextTree::root());
}

CbctResult cbct(ContextTree& tree, const BctPrior& prior, MapPolicy policy) {
    if (prior.beta < 0.5 && policy == MapPolicy::require_guarantee) {
        throw MapNotGuaranteed("beta < 1/2: the pruned tree is not guaranteed to be the MAP model");
    }
    full_sweep(tree, prior);
    return CbctResult{extract_map_tree(tree), tree.log_pm(ContextTree::root())};
}

void refresh_path(ContextTree& tree, const BctPrior& prior, std::span<const NodeId> path) {
    std::vector<NodeId> order(path.begin(), path.end());
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return tree.depth(a) > tree.depth(b);
    });
    for (NodeId id : order) tree.recompute_node(id, prior);
}

TreeModel extract_map_tree(const ContextTree& tree) {
    const int m = tree.alphabet_size();
    std::vector<Context> leaves;
    // (node id or kNoNode, context) pairs still to expand.
    std::vector<std::pair<NodeId, Context>> stack;
    stack.emplace_back(ContextTree::root(), Context{});
    while (!stack.empty()) {
        auto [id, ctx] = std::move(stack.back());
        stack.pop_back();
        // A node missing from T_MAX has no data: stopping there is optimal.
        if (id == kNoNode || tree.map_leaf(id)) {
            leaves.push_back(std::move(ctx));
            continue;
        }
        for (int j = 0; j < m; ++j) {
            Context next = ctx;
            next.push_back(static_cast<Symbol>(j));
            stack.emplace_back(tree.child(id, static_cast<Symbol>(j)), std::move(next));
        }
    }
    return TreeModel(m, std::move(leaves));
}

double log_leaf_evidence(const TreeModel& model, const ContextTree& tree) {
    if (model.alphabet_size() != tree.alphabet_size()) {
        throw std::invalid_argument("tree model and context tree use different alphabets");
    }
    double total = 0.0;
    for (const auto& leaf : model.leaves()) {
        const NodeId id = tree.find(leaf);
        if (id != kNoNode) total += tree.log_pe(id);
    }
    return total;
}

double log_posterior_of_tree(const TreeModel& model, const ContextTree& tree,
                             const BctPrior& prior) {
    return log_prior(model, prior) + log_leaf_evidence(model, tree) -
           tree.log_pw(ContextTree::root());
}

double posterior_of_tree(const TreeModel& model, const ContextTree& tree, const BctPrior& prior) {
    return std::exp(log_posterior_of_tree(model, tree, prior));
}

TreeModel sample_posterior_tree(const ContextTree& tree, const BctPrior& prior,
                                std::mt19937_64& rng) {
    const int m = tree.alphabet_size();
    const int max_depth = tree.max_depth();
    const double log_beta = prior.log_beta();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Context> leaves;
    std::vector<std::pair<NodeId, Context>> stack;
    stack.emplace_back(ContextTree::root(), Context{});
    while (!stack.empty()) {
        auto [id, ctx] = std::move(stack.back());
        stack.pop_back();
        bool stop = static_cast<int>(ctx.size()) == max_depth;
        if (!stop) {
            // Empty contexts have P_e = P_w = 1, hence P_b = beta.
            const double p_stop = id == kNoNode
                                      ? prior.beta
                                      : std::exp(log_beta + tree.log_pe(id) - tree.log_pw(id));
            stop = unif(rng) < p_stop;
        }
        if (stop) {
            leaves.push_back(std::move(ctx));
            continue;
        }
        for (int j = m - 1; j >= 0; --j) {
            Context next = ctx;
            next.push_back(static_cast<Symbol>(j));
            const NodeId c = id == kNoNode ? kNoNode : tree.child(id, static_cast<Symbol>(j));
            stack.emplace_back(c, std::move(next));
        }
    }
    return TreeModel(m, std::move(leaves));
}

}  // namespace bctx
