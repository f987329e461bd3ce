#pragma once

#include "bctx/ar_model.hpp"
#include "bctx/arch_model.hpp"
#include "bctx/context_tree.hpp"
#include "bctx/quantizer.hpp"
#include "bctx/tree_model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bctx {

enum class ModelKind { ar, arch };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);

struct FitConfig {
    ModelKind kind = ModelKind::ar;
    Quantizer quantizer{std::vector<double>{0.0}};
    int depth = 10;
    /// Unset means 1 - 2^{-m+1}.
    std::optional<double> beta;
    int order = 2;
    bool intercept = false;
    double tau = 1.0;
    double lambda = 1.0;
    int fisher_iters = 10;
    int warm_iters = 2;
    int refresh_every = 50;
    /// Number of leading samples reserved as initial context. Unset means
    /// max(depth, order).
    std::optional<std::size_t> warmup;

    /// AR: D = 10, p = 2. ARCH: D = 5, p = 5.
    [[nodiscard]] static FitConfig defaults(ModelKind kind);

    [[nodiscard]] int alphabet_size() const noexcept { return quantizer.alphabet_size(); }
    [[nodiscard]] BctPrior prior() const;
    [[nodiscard]] std::size_t warmup_length() const;
    [[nodiscard]] ArHyperParams ar_hyper() const;
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

/// MAP parameters of one leaf of the MAP tree. For AR, `coefficients` is
/// phi (with the intercept first) and `sigma2` the MAP noise variance; for
/// ARCH, `coefficients` is (alpha_0, ..., alpha_p) and `sigma2` is unused.
struct LeafSummary {
    Context context;
    std::int64_t count = 0;
    Eigen::VectorXd coefficients;
    double sigma2 = 0.0;
};

struct FitDiagnostics {
    std::size_t degenerate_nodes = 0;
    std::size_t nonconverged_nodes = 0;
};

/// A BCT-X model over T_MAX that can be fitted on a prefix of a series and
/// then updated one observation at a time.
///
/// Positions are 0-based indices into the series. The first warmup_length()
/// samples only serve as initial context; position i is scored with context
/// x[i-1], ..., x[i-D].
class SequentialModel {
public:
    virtual ~SequentialModel() = default;

    [[nodiscard]] const FitConfig& config() const noexcept { return config_; }
    [[nodiscard]] const ContextTree& tree() const noexcept { return tree_; }
    [[nodiscard]] const BctPrior& prior() const noexcept { return prior_; }
    /// Number of scored observations so far.
    [[nodiscard]] std::size_t observed() const noexcept { return observed_; }

    /// Scores positions warmup_length() .. end-1 and runs a full sweep.
    /// Must be called once, before any observe().
    void fit(std::span<const double> series, std::size_t end);

    /// Adds position `position` (which must be the next unscored one) and
    /// refreshes the recursions along its context path.
    void observe(std::span<const double> series, std::size_t position);

    /// One-step predictive for x[position] from the current MAP tree.
    [[nodiscard]] GaussianForecast predict(std::span<const double> series,
                                           std::size_t position) const;

    /// log P_w at the root.
    [[nodiscard]] double log_evidence() const { return tree_.log_pw(ContextTree::root()); }
    /// log P_m at the root minus log P_w at the root.
    [[nodiscard]] double map_log_posterior() const;
    [[nodiscard]] TreeModel map_tree() const { return extract_map_tree(tree_); }
    [[nodiscard]] std::vector<LeafSummary> map_leaves() const;
    [[nodiscard]] virtual FitDiagnostics diagnostics() const { return {}; }

protected:
    explicit SequentialModel(FitConfig config);

    /// Adds the observation at `position` to every node of `path`.
    virtual void add_observation(std::span<const double> series, std::size_t position,
                                 std::span<const NodeId> path) = 0;
    /// Recomputes log P_e at every node after a batch of observations.
    virtual void finish_batch() = 0;
    /// Recomputes log P_e on `path` after one observation. Returns true if
    /// every node was refreshed and a full sweep is needed.
    virtual bool finish_step(std::span<const NodeId> path) = 0;

    [[nodiscard]] virtual GaussianForecast predict_at(NodeId node, std::span<const double> series,
                                                      std::size_t position) const = 0;
    [[nodiscard]] virtual LeafSummary summarize(NodeId node) const = 0;

    [[nodiscard]] NodeId map_state(std::span<const double> series, std::size_t position) const;

    FitConfig config_;
    BctPrior prior_;
    ContextTree tree_;
    std::size_t observed_ = 0;
    std::size_t next_position_ = 0;
    bool fitted_ = false;
    std::vector<NodeId> path_;
};

/// BCT-AR: conjugate sufficient statistics per node.
class BctAr final : public SequentialModel {
public:
    explicit BctAr(FitConfig config);

    [[nodiscard]] const ArConjugate& conjugate() const noexcept { return conj_; }
    [[nodiscard]] const ArStats& stats(NodeId node) const { return stats_.at(node); }

protected:
    void add_observation(std::span<const double> series, std::size_t position,
                         std::span<const NodeId> path) override;
    void finish_batch() override;
    bool finish_step(std::span<const NodeId> path) override;
    [[nodiscard]] GaussianForecast predict_at(NodeId node, std::span<const double> series,
                                              std::size_t position) const override;
    [[nodiscard]] LeafSummary summarize(NodeId node) const override;

private:
    ArConjugate conj_;
    std::vector<ArStats> stats_;
    Eigen::VectorXd regressors_;
};

/// BCT-ARCH: per-node observation lists, Fisher scoring and Laplace evidence.
class BctArch final : public SequentialModel {
public:
    explicit BctArch(FitConfig config);

    [[nodiscard]] const ArchData& data(NodeId node) const { return nodes_.at(node).data; }
    [[nodiscard]] const Eigen::VectorXd& theta(NodeId node) const { return nodes_.at(node).theta; }
    [[nodiscard]] FitDiagnostics diagnostics() const override;

protected:
    void add_observation(std::span<const double> series, std::size_t position,
                         std::span<const NodeId> path) override;
    void finish_batch() override;
    bool finish_step(std::span<const NodeId> path) override;
    [[nodiscard]] GaussianForecast predict_at(NodeId node, std::span<const double> series,
                                              std::size_t position) const override;
    [[nodiscard]] LeafSummary summarize(NodeId node) const override;

private:
    struct Node {
        ArchData data;
        Eigen::VectorXd theta;
        bool degenerate = false;
        bool converged = true;
    };

    void refit(NodeId node, const Eigen::VectorXd& init, int iterations);

    std::vector<Node> nodes_;
    std::vector<double> lag_sq_;
    std::size_t steps_since_refresh_ = 0;
};

[[nodiscard]] std::unique_ptr<SequentialModel> make_model(const FitConfig& config);

/// Fits a fresh model on positions warmup .. end-1 of `series`.
[[nodiscard]] std::unique_ptr<SequentialModel> fit_model(const FitConfig& config,
                                                         std::span<const double> series,
                                                         std::size_t end);

}  // namespace bctx
