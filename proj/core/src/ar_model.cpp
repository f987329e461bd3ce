#include "bctx/ar_model.hpp"

#include "bctx/error.hpp"

#include <cmath>
#include <stdexcept>

namespace bctx {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

ArHyperParams ArHyperParams::defaults(int order, bool intercept) {
    ArHyperParams hp;
    hp.order = order;
    hp.intercept = intercept;
    return hp.resolved();
}

ArHyperParams ArHyperParams::resolved() const {
    if (order < 0) throw std::invalid_argument("AR order must be nonnegative");
    if (dimension() < 1) throw std::invalid_argument("AR model needs at least one coefficient");
    if (!(tau > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("tau and lambda must be positive");
    ArHyperParams out = *this;
    const int k = dimension();
    if (out.mu_o.size() == 0) out.mu_o = Eigen::VectorXd::Zero(k);
    if (out.sigma_o.size() == 0) out.sigma_o = Eigen::MatrixXd::Identity(k, k);
    if (out.mu_o.size() != k) throw std::invalid_argument("mu_o has the wrong length");
    if (out.sigma_o.rows() != k || out.sigma_o.cols() != k) {
        throw std::invalid_argument("sigma_o has the wrong shape");
    }
    if (!out.sigma_o.isApprox(out.sigma_o.transpose())) {
        throw std::invalid_argument("sigma_o must be symmetric");
    }
    return out;
}

void fill_regressors(std::span<const double> series, std::size_t position, int order,
                     bool intercept, Eigen::VectorXd& out) {
    const auto p = static_cast<std::size_t>(order);
    if (position < p || position > series.size()) {
        throw std::out_of_range("not enough samples before position for the AR order");
    }
    const Eigen::Index offset = intercept ? 1 : 0;
    out.resize(static_cast<Eigen::Index>(p) + offset);
    if (intercept) out[0] = 1.0;
    for (std::size_t k = 0; k < p; ++k) {
        out[static_cast<Eigen::Index>(k) + offset] = series[position - 1 - k];
    }
}

void ArStats::add(double x, const Eigen::VectorXd& regressors) {
    ++count;
    s1 += x * x;
    s2.noalias() += x * regressors;
    S3.noalias() += regressors * regressors.transpose();
}

bool ArStats::operator==(const ArStats& other) const {
    return count == other.count && s1 == other.s1 && s2 == other.s2 && S3 == other.S3;
}

double GaussianForecast::log_density(double y) const {
    const double r = y - mean;
    return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

ArConjugate::ArConjugate(const ArHyperParams& hp) : hp_(hp.resolved()) {
    Eigen::LLT<Eigen::MatrixXd> llt(hp_.sigma_o);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("sigma_o must be positive definite");
    }
    const int k = hp_.dimension();
    sigma_o_inv_ = llt.solve(Eigen::MatrixXd::Identity(k, k));
    sigma_o_inv_mu_ = sigma_o_inv_ * hp_.mu_o;
    mu_quad_ = hp_.mu_o.dot(sigma_o_inv_mu_);
    log_det_sigma_o_ = log_det(llt);
    log_gamma_tau_ = std::lgamma(hp_.tau);
}

ArConjugate::Solved ArConjugate::solve(const ArStats& stats) const {
    Eigen::MatrixXd a = sigma_o_inv_ + stats.S3;
    Solved out{Eigen::LLT<Eigen::MatrixXd>(a), stats.s2 + sigma_o_inv_mu_, 0.0};
    if (out.a.info() != Eigen::Success) {
        throw NumericError("S3 + Sigma_o^{-1} is not positive definite");
    }
    out.d_s = stats.s1 + mu_quad_ - out.b.dot(out.a.solve(out.b));
    return out;
}

double ArConjugate::log_pe(const ArStats& stats) const {
    if (stats.count == 0) return 0.0;
    const Solved sv = solve(stats);
    const double n = static_cast<double>(stats.count);
    const double shape = hp_.tau + 0.5 * n;
    const double rate = hp_.lambda + 0.5 * sv.d_s;
    if (!(rate > 0.0)) throw NumericError("nonpositive posterior inverse-gamma scale");
    // det(I + Sigma_o S3) = det(Sigma_o) det(S3 + Sigma_o^{-1}).
    const double log_c = 0.5 * (n * kLog2Pi + log_det_sigma_o_ + log_det(sv.a));
    return -log_c + std::lgamma(shape) + hp_.tau * std::log(hp_.lambda) - log_gamma_tau_ -
           shape * std::log(rate);
}

double ArConjugate::log_pe_known_variance(const ArStats& stats, double sigma2) const {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
    if (stats.count == 0) return 0.0;
    const double n = static_cast<double>(stats.count);
    Eigen::MatrixXd a = sigma2 * sigma_o_inv_ + stats.S3;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError("S3 + sigma2 Sigma_o^{-1} is singular");
    const Eigen::VectorXd b = stats.s2 + sigma2 * sigma_o_inv_mu_;
    const double e_s = stats.s1 + sigma2 * mu_quad_ - b.dot(llt.solve(b));
    // det(I + Sigma_o S3 / sigma2) = det(Sigma_o) det(S3 + sigma2 Sigma_o^{-1}) / sigma2^k.
    const double log_det_term =
        log_det_sigma_o_ + log_det(llt) - hp_.dimension() * std::log(sigma2);
    return -0.5 * n * (kLog2Pi + std::log(sigma2)) - 0.5 * log_det_term - e_s / (2.0 * sigma2);
}

ArPosterior ArConjugate::posterior(const ArStats& stats) const {
    ArPosterior post;
    const double n = static_cast<double>(stats.count);
    const int k = hp_.dimension();
    if (stats.count == 0) {
        post.location = hp_.mu_o;
        post.dof = 2.0 * hp_.tau;
        post.ig_shape = hp_.tau;
        post.ig_scale = hp_.lambda;
        post.scale = (hp_.lambda / hp_.tau) * hp_.sigma_o;
        post.sigma2_map = hp_.lambda / (hp_.tau + 1.0);
        return post;
    }
    const Solved sv = solve(stats);
    post.location = sv.a.solve(sv.b);
    post.dof = 2.0 * hp_.tau + n;
    post.ig_shape = hp_.tau + 0.5 * n;
    post.ig_scale = hp_.lambda + 0.5 * sv.d_s;
    post.scale = ((2.0 * hp_.lambda + sv.d_s) / post.dof) *
                 sv.a.solve(Eigen::MatrixXd::Identity(k, k));
    post.sigma2_map = (2.0 * hp_.lambda + sv.d_s) / (2.0 * hp_.tau + n + 2.0);
    return post;
}

GaussianForecast ArConjugate::predict(const ArPosterior& post,
                                      const Eigen::VectorXd& regressors) const {
    return GaussianForecast{post.location.dot(regressors), post.sigma2_map};
}

}  // namespace bctx
