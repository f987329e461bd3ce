#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>

namespace bctx {

/// Conjugate prior of the AR(p) base model:
/// sigma^2 ~ Inv-Gamma(tau, lambda), phi | sigma^2 ~ N(mu_o, sigma^2 Sigma_o).
struct ArHyperParams {
    int order = 1;
    bool intercept = false;
    double tau = 1.0;
    double lambda = 1.0;
    /// Length dimension(); empty means zero.
    Eigen::VectorXd mu_o;
    /// dimension() x dimension(); empty means the identity.
    Eigen::MatrixXd sigma_o;

    /// Number of regression coefficients: order, plus one with an intercept.
    [[nodiscard]] int dimension() const noexcept { return order + (intercept ? 1 : 0); }

    /// mu_o = 0, Sigma_o = I, tau = lambda = 1.
    [[nodiscard]] static ArHyperParams defaults(int order, bool intercept = false);

    /// Fills in empty mu_o / sigma_o and throws std::invalid_argument on bad values.
    [[nodiscard]] ArHyperParams resolved() const;
};

/// Writes (1?, x_{pos-1}, ..., x_{pos-order}) into `out`.
void fill_regressors(std::span<const double> series, std::size_t position, int order,
                     bool intercept, Eigen::VectorXd& out);

/// Running sums over the observations assigned to one context.
struct ArStats {
    std::int64_t count = 0;
    double s1 = 0.0;
    Eigen::VectorXd s2;
    Eigen::MatrixXd S3;

    ArStats() = default;
    explicit ArStats(int dimension)
        : s2(Eigen::VectorXd::Zero(dimension)), S3(Eigen::MatrixXd::Zero(dimension, dimension)) {}

    void add(double x, const Eigen::VectorXd& regressors);

    bool operator==(const ArStats& other) const;
};

struct ArPosterior {
    /// m_s, also the MAP estimate of phi.
    Eigen::VectorXd location;
    /// P_s, the scale matrix of the multivariate t posterior of phi.
    Eigen::MatrixXd scale;
    double dof = 0.0;
    double ig_shape = 0.0;
    double ig_scale = 0.0;
    /// (2 lambda + D_s) / (2 tau + |B_s| + 2).
    double sigma2_map = 0.0;
};

struct GaussianForecast {
    double mean = 0.0;
    double variance = 1.0;

    [[nodiscard]] double log_density(double y) const;
};

/// Closed-form marginal likelihood and posterior of the conjugate AR model.
/// Caches Sigma_o^{-1} and the other prior-only terms.
class ArConjugate {
public:
    explicit ArConjugate(const ArHyperParams& hp);

    [[nodiscard]] const ArHyperParams& hyper() const noexcept { return hp_; }
    [[nodiscard]] int dimension() const noexcept { return hp_.dimension(); }

    /// log P_e(s,x); exactly 0 for an empty context.
    [[nodiscard]] double log_pe(const ArStats& stats) const;

    /// Known-variance marginal with prior phi ~ N(mu_o, Sigma_o).
    [[nodiscard]] double log_pe_known_variance(const ArStats& stats, double sigma2) const;

    [[nodiscard]] ArPosterior posterior(const ArStats& stats) const;

    /// MAP plug-in predictive. An empty context predicts with the prior mode.
    [[nodiscard]] GaussianForecast predict(const ArPosterior& post,
                                           const Eigen::VectorXd& regressors) const;

private:
    struct Solved {
        Eigen::LLT<Eigen::MatrixXd> a;  // S3 + Sigma_o^{-1}
        Eigen::VectorXd b;              // s2 + Sigma_o^{-1} mu_o
        double d_s;
    };
    [[nodiscard]] Solved solve(const ArStats& stats) const;

    ArHyperParams hp_;
    Eigen::MatrixXd sigma_o_inv_;
    Eigen::VectorXd sigma_o_inv_mu_;
    double mu_quad_ = 0.0;
    double log_det_sigma_o_ = 0.0;
    double log_gamma_tau_ = 0.0;
};

}  // namespace bctx
