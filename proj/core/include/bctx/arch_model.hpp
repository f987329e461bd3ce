#pragma once

#include "bctx/ar_model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace bctx {

/// Observations assigned to one context, kept so that Fisher scoring can
/// revisit them: targets x_i and the lagged squares x_{i-1}^2..x_{i-p}^2.
/// The leading 1 of z_{i-1} is implicit.
class ArchData {
public:
    explicit ArchData(int order = 0) : order_(order) {}

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int dimension() const noexcept { return order_ + 1; }
    [[nodiscard]] std::size_t count() const noexcept { return x_.size(); }

    void add(double x, std::span<const double> lagged_squares);

    [[nodiscard]] double x(std::size_t i) const noexcept { return x_[i]; }
    [[nodiscard]] std::span<const double> lagged_squares(std::size_t i) const noexcept {
        return {lag_sq_.data() + i * static_cast<std::size_t>(order_),
                static_cast<std::size_t>(order_)};
    }
    /// theta^T z_{i-1}.
    [[nodiscard]] double variance(std::size_t i, const Eigen::VectorXd& theta) const noexcept;

private:
    int order_;
    std::vector<double> x_;
    std::vector<double> lag_sq_;
};

/// Writes (x_{pos-1}^2, ..., x_{pos-order}^2) into `out`.
void fill_lagged_squares(std::span<const double> series, std::size_t position, int order,
                         std::vector<double>& out);

/// L_s(theta). Throws std::domain_error if some sigma_i^2 <= 0.
[[nodiscard]] double arch_loglik(const ArchData& data, const Eigen::VectorXd& theta);

struct ArchScore {
    double loglik = 0.0;
    Eigen::VectorXd gradient;
    /// Expected information I_s.
    Eigen::MatrixXd info;
};

[[nodiscard]] ArchScore arch_score_and_info(const ArchData& data, const Eigen::VectorXd& theta);

/// Bounds of the feasible box: alpha_0 >= kArchAlpha0Floor, alpha_j in [0, 1].
inline constexpr double kArchAlpha0Floor = 1e-8;

[[nodiscard]] Eigen::VectorXd project_feasible(Eigen::VectorXd theta);

/// alpha_0 = mean of x_i^2 (floored), alpha_j = 0.05.
[[nodiscard]] Eigen::VectorXd arch_initial_params(const ArchData& data);

struct FisherResult {
    Eigen::VectorXd theta;
    double loglik = 0.0;
    int iterations = 0;
    /// False if the projected gradient norm failed to decrease over the last
    /// three iterations while still above tolerance.
    bool converged = true;
};

/// Runs `iterations` projected Fisher-scoring steps from `init`. A singular
/// information matrix is damped; a step that lowers L_s is halved until it
/// does not.
[[nodiscard]] FisherResult fisher_scoring(const ArchData& data, const Eigen::VectorXd& init,
                                          int iterations);

struct LaplaceEvidence {
    double log_pe = 0.0;
    /// Too few observations (< p + 2) or a singular information matrix.
    bool degenerate = false;
};

/// Laplace approximation of log P_e(s,x) at the maximiser theta_hat, with the
/// priors pi(alpha_0) = 1/alpha_0 and alpha_j ~ U(0,1). Exactly 0 when empty.
[[nodiscard]] LaplaceEvidence log_pe_arch_laplace(const ArchData& data,
                                                  const Eigen::VectorXd& theta_hat);

/// Zero-mean Gaussian with variance theta^T (1, lagged squares).
[[nodiscard]] GaussianForecast predict_arch(const Eigen::VectorXd& theta,
                                            std::span<const double> lagged_squares);

}  // namespace bctx
