#include "bctx/sequential_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace bctx {

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::ar ? "ar" : "arch";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "ar") return ModelKind::ar;
    if (text == "arch") return ModelKind::arch;
    throw std::invalid_argument("unknown model kind '" + std::string(text) + "' (expected ar or arch)");
}

FitConfig FitConfig::defaults(ModelKind kind) {
    FitConfig c;
    c.kind = kind;
    if (kind == ModelKind::arch) {
        c.depth = 5;
        c.order = 5;
    }
    return c;
}

BctPrior FitConfig::prior() const {
    const int m = alphabet_size();
    return BctPrior{beta.value_or(BctPrior::default_beta(m)), m, depth};
}

std::size_t FitConfig::warmup_length() const {
    return warmup.value_or(static_cast<std::size_t>(std::max(depth, order)));
}

ArHyperParams FitConfig::ar_hyper() const {
    ArHyperParams hp;
    hp.order = order;
    hp.intercept = intercept;
    hp.tau = tau;
    hp.lambda = lambda;
    return hp.resolved();
}

void FitConfig::validate() const {
    if (depth < 0 || depth > 64) throw std::invalid_argument("depth must be in [0, 64]");
    if (order < 0) throw std::invalid_argument("order must be nonnegative");
    if (kind == ModelKind::ar && order == 0 && !intercept) {
        throw std::invalid_argument("an AR model needs order >= 1 or an intercept");
    }
    if (kind == ModelKind::arch && intercept) {
        throw std::invalid_argument("the intercept flag applies to AR models only");
    }
    prior().validate();
    if (!(tau > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("tau and lambda must be positive");
    if (fisher_iters < 0 || warm_iters < 0) {
        throw std::invalid_argument("Fisher iteration counts must be nonnegative");
    }
    if (refresh_every < 1) throw std::invalid_argument("refresh interval must be positive");
    if (warmup_length() < static_cast<std::size_t>(std::max(depth, order))) {
        throw std::invalid_argument("warmup must cover max(depth, order) samples");
    }
}

SequentialModel::SequentialModel(FitConfig config)
    : config_((config.validate(), std::move(config))),
      prior_(config_.prior()),
      tree_(config_.alphabet_size(), config_.depth) {}

void SequentialModel::fit(std::span<const double> series, std::size_t end) {
    if (fitted_) throw std::logic_error("model has already been fitted");
    if (end > series.size()) throw std::out_of_range("fit end lies beyond the series");
    const std::size_t start = config_.warmup_length();
    for (std::size_t pos = start; pos < end; ++pos) {
        const Context ctx = context_at(series, pos, config_.quantizer, config_.depth);
        tree_.insert_path(ctx, path_);
        add_observation(series, pos, path_);
        ++observed_;
    }
    finish_batch();
    cctw(tree_, prior_);
    next_position_ = std::max(start, end);
    fitted_ = true;
}

void SequentialModel::observe(std::span<const double> series, std::size_t position) {
    if (!fitted_) throw std::logic_error("observe() called before fit()");
    if (position != next_position_) {
        throw std::invalid_argument("observations must be added in order");
    }
    if (position >= series.size()) throw std::out_of_range("position lies beyond the series");
    const Context ctx = context_at(series, position, config_.quantizer, config_.depth);
    tree_.insert_path(ctx, path_);
    add_observation(series, position, path_);
    ++observed_;
    ++next_position_;
    if (finish_step(path_)) {
        cctw(tree_, prior_);
    } else {
        refresh_path(tree_, prior_, path_);
    }
}

NodeId SequentialModel::map_state(std::span<const double> series, std::size_t position) const {
    const Context ctx = context_at(series, position, config_.quantizer, config_.depth);
    NodeId node = ContextTree::root();
    for (int d = 0; d < config_.depth && !tree_.map_leaf(node); ++d) {
        node = tree_.child(node, ctx[static_cast<std::size_t>(d)]);
        if (node == kNoNode) break;
    }
    return node;
}

GaussianForecast SequentialModel::predict(std::span<const double> series,
                                          std::size_t position) const {
    if (position > series.size()) throw std::out_of_range("position lies beyond the series");
    return predict_at(map_state(series, position), series, position);
}

double SequentialModel::map_log_posterior() const {
    return tree_.log_pm(ContextTree::root()) - tree_.log_pw(ContextTree::root());
}

std::vector<LeafSummary> SequentialModel::map_leaves() const {
    const TreeModel model = map_tree();
    std::vector<LeafSummary> out;
    out.reserve(model.leaf_count());
    for (const auto& leaf : model.leaves()) {
        LeafSummary s = summarize(tree_.find(leaf));
        s.context = leaf;
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------- BCT-AR

BctAr::BctAr(FitConfig config) : SequentialModel(std::move(config)), conj_(config_.ar_hyper()) {}

void BctAr::add_observation(std::span<const double> series, std::size_t position,
                            std::span<const NodeId> path) {
    if (stats_.size() < tree_.size()) stats_.resize(tree_.size(), ArStats(conj_.dimension()));
    fill_regressors(series, position, config_.order, config_.intercept, regressors_);
    const double x = series[position];
    for (NodeId id : path) stats_[id].add(x, regressors_);
}

void BctAr::finish_batch() {
    stats_.resize(tree_.size(), ArStats(conj_.dimension()));
    for (NodeId id = 0; id < tree_.size(); ++id) tree_.set_log_pe(id, conj_.log_pe(stats_[id]));
}

bool BctAr::finish_step(std::span<const NodeId> path) {
    for (NodeId id : path) tree_.set_log_pe(id, conj_.log_pe(stats_[id]));
    return false;
}

GaussianForecast BctAr::predict_at(NodeId node, std::span<const double> series,
                                   std::size_t position) const {
    Eigen::VectorXd reg;
    fill_regressors(series, position, config_.order, config_.intercept, reg);
    const ArPosterior post = node == kNoNode || node >= stats_.size()
                                 ? conj_.posterior(ArStats(conj_.dimension()))
                                 : conj_.posterior(stats_[node]);
    return conj_.predict(post, reg);
}

LeafSummary BctAr::summarize(NodeId node) const {
    const bool empty = node == kNoNode || node >= stats_.size();
    const ArStats blank(conj_.dimension());
    const ArStats& st = empty ? blank : stats_[node];
    const ArPosterior post = conj_.posterior(st);
    return LeafSummary{{}, st.count, post.location, post.sigma2_map};
}

// -------------------------------------------------------------- BCT-ARCH

BctArch::BctArch(FitConfig config) : SequentialModel(std::move(config)) {}

void BctArch::add_observation(std::span<const double> series, std::size_t position,
                              std::span<const NodeId> path) {
    if (nodes_.size() < tree_.size()) nodes_.resize(tree_.size(), Node{ArchData(config_.order), {}});
    fill_lagged_squares(series, position, config_.order, lag_sq_);
    const double x = series[position];
    for (NodeId id : path) nodes_[id].data.add(x, lag_sq_);
}

void BctArch::refit(NodeId id, const Eigen::VectorXd& init, int iterations) {
    Node& node = nodes_[id];
    if (node.data.count() == 0) {
        tree_.set_log_pe(id, 0.0);
        return;
    }
    const FisherResult fr = fisher_scoring(node.data, init, iterations);
    node.theta = fr.theta;
    node.converged = fr.converged;
    const LaplaceEvidence ev = log_pe_arch_laplace(node.data, node.theta);
    node.degenerate = ev.degenerate;
    tree_.set_log_pe(id, ev.log_pe);
}

void BctArch::finish_batch() {
    nodes_.resize(tree_.size(), Node{ArchData(config_.order), {}});
    for (NodeId id = 0; id < tree_.size(); ++id) {
        refit(id, arch_initial_params(nodes_[id].data), config_.fisher_iters);
    }
    steps_since_refresh_ = 0;
}

bool BctArch::finish_step(std::span<const NodeId> path) {
    if (++steps_since_refresh_ >= static_cast<std::size_t>(config_.refresh_every)) {
        finish_batch();
        return true;
    }
    for (NodeId id : path) {
        Node& node = nodes_[id];
        if (node.theta.size() == 0) {
            refit(id, arch_initial_params(node.data), config_.fisher_iters);
        } else {
            refit(id, node.theta, config_.warm_iters);
        }
    }
    return false;
}

GaussianForecast BctArch::predict_at(NodeId node, std::span<const double> series,
                                     std::size_t position) const {
    std::vector<double> lag_sq;
    fill_lagged_squares(series, position, config_.order, lag_sq);
    const auto fitted = [&](NodeId id) {
        return id != kNoNode && id < nodes_.size() && nodes_[id].theta.size() > 0;
    };
    if (!fitted(node)) node = ContextTree::root();
    if (!fitted(node)) {
        return predict_arch(arch_initial_params(ArchData(config_.order)), lag_sq);
    }
    return predict_arch(nodes_[node].theta, lag_sq);
}

LeafSummary BctArch::summarize(NodeId node) const {
    const bool fitted = node != kNoNode && node < nodes_.size() && nodes_[node].theta.size() > 0;
    if (fitted) {
        return LeafSummary{{}, static_cast<std::int64_t>(nodes_[node].data.count()),
                           nodes_[node].theta, 0.0};
    }
    const NodeId root = ContextTree::root();
    Eigen::VectorXd theta = root < nodes_.size() && nodes_[root].theta.size() > 0
                                ? nodes_[root].theta
                                : arch_initial_params(ArchData(config_.order));
    return LeafSummary{{}, 0, std::move(theta), 0.0};
}

FitDiagnostics BctArch::diagnostics() const {
    FitDiagnostics d;
    for (const auto& node : nodes_) {
        if (node.data.count() == 0) continue;
        d.degenerate_nodes += node.degenerate ? 1 : 0;
        d.nonconverged_nodes += node.converged ? 0 : 1;
    }
    return d;
}

std::unique_ptr<SequentialModel> make_model(const FitConfig& config) {
    if (config.kind == ModelKind::ar) return std::make_unique<BctAr>(config);
    return std::make_unique<BctArch>(config);
}

std::unique_ptr<SequentialModel> fit_model(const FitConfig& config, std::span<const double> series,
                                           std::size_t end) {
    auto model = make_model(config);
    model->fit(series, end);
    return model;
}

}  // namespace bctx
