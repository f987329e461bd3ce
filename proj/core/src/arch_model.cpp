#include "bctx/arch_model.hpp"

#include "bctx/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bctx {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr int kMaxHalvings = 30;

void check_theta(const ArchData& data, const Eigen::VectorXd& theta) {
    if (theta.size() != data.dimension()) {
        throw std::invalid_argument("ARCH parameter vector has the wrong length");
    }
}

// Gradient with the components that push against an active bound removed.
double projected_gradient_norm(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double lower = j == 0 ? kArchAlpha0Floor : 0.0;
        double g = grad[j];
        if (theta[j] <= lower && g < 0.0) g = 0.0;
        if (j > 0 && theta[j] >= 1.0 && g > 0.0) g = 0.0;
        sq += g * g;
    }
    return std::sqrt(sq);
}

Eigen::VectorXd newton_direction(const ArchScore& sc) {
    const Eigen::Index k = sc.info.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(sc.info);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd step = llt.solve(sc.gradient);
        if (step.allFinite()) return step;
    }
    const double scale = std::max(sc.info.diagonal().cwiseAbs().maxCoeff(), 1.0);
    for (double delta = 1e-10 * scale; delta < 1e10 * scale; delta *= 10.0) {
        Eigen::MatrixXd damped = sc.info + delta * Eigen::MatrixXd::Identity(k, k);
        Eigen::LLT<Eigen::MatrixXd> dl(damped);
        if (dl.info() != Eigen::Success) continue;
        Eigen::VectorXd step = dl.solve(sc.gradient);
        if (step.allFinite()) return step;
    }
    return Eigen::VectorXd::Zero(k);
}

// Newton step on the coordinates that are not held at a bound by the
// gradient; the held coordinates do not move.
Eigen::VectorXd active_set_direction(const Eigen::VectorXd& theta, const ArchScore& sc) {
    const Eigen::Index k = theta.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double lower = j == 0 ? kArchAlpha0Floor : 0.0;
        const bool held = (theta[j] <= lower && sc.gradient[j] < 0.0) ||
                          (j > 0 && theta[j] >= 1.0 && sc.gradient[j] > 0.0);
        if (!held) free.push_back(j);
    }
    Eigen::VectorXd step = Eigen::VectorXd::Zero(k);
    if (free.empty()) return step;
    const auto f = static_cast<Eigen::Index>(free.size());
    ArchScore sub{sc.loglik, Eigen::VectorXd(f), Eigen::MatrixXd(f, f)};
    for (Eigen::Index a = 0; a < f; ++a) {
        sub.gradient[a] = sc.gradient[free[a]];
        for (Eigen::Index b = 0; b < f; ++b) sub.info(a, b) = sc.info(free[a], free[b]);
    }
    const Eigen::VectorXd d = newton_direction(sub);
    for (Eigen::Index a = 0; a < f; ++a) step[free[a]] = d[a];
    return step;
}

// Halves t until project(theta + t step) does not lower the log-likelihood.
bool line_search(const ArchData& data, const Eigen::VectorXd& theta, const Eigen::VectorXd& step,
                 double current, Eigen::VectorXd& next, double& next_ll) {
    double t = 1.0;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
        next = project_feasible(theta + t * step);
        const Eigen::VectorXd diff = next - theta;
        if (diff.isZero(0.0)) return false;
        next_ll = arch_loglik(data, next);
        if (next_ll >= current) return true;
    }
    return false;
}

}  // namespace

void ArchData::add(double x, std::span<const double> lagged_squares) {
    if (lagged_squares.size() != static_cast<std::size_t>(order_)) {
        throw std::invalid_argument("lagged squares do not match the ARCH order");
    }
    x_.push_back(x);
    lag_sq_.insert(lag_sq_.end(), lagged_squares.begin(), lagged_squares.end());
}

double ArchData::variance(std::size_t i, const Eigen::VectorXd& theta) const noexcept {
    double v = theta[0];
    const double* z = lag_sq_.data() + i * static_cast<std::size_t>(order_);
    for (int j = 0; j < order_; ++j) v += theta[j + 1] * z[j];
    return v;
}

void fill_lagged_squares(std::span<const double> series, std::size_t position, int order,
                         std::vector<double>& out) {
    const auto p = static_cast<std::size_t>(order);
    if (position < p || position > series.size()) {
        throw std::out_of_range("not enough samples before position for the ARCH order");
    }
    out.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        const double v = series[position - 1 - k];
        out[k] = v * v;
    }
}

double arch_loglik(const ArchData& data, const Eigen::VectorXd& theta) {
    check_theta(data, theta);
    const std::size_t n = data.count();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = data.variance(i, theta);
        if (!(v > 0.0)) throw std::domain_error("ARCH variance is not positive");
        const double x = data.x(i);
        sum += std::log(v) + x * x / v;
    }
    return -0.5 * static_cast<double>(n) * kLog2Pi - 0.5 * sum;
}

ArchScore arch_score_and_info(const ArchData& data, const Eigen::VectorXd& theta) {
    check_theta(data, theta);
    const int k = data.dimension();
    ArchScore out{0.0, Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(k, k)};
    Eigen::VectorXd z(k);
    z[0] = 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        const auto lag = data.lagged_squares(i);
        std::copy(lag.begin(), lag.end(), z.data() + 1);
        const double v = z.dot(theta);
        if (!(v > 0.0)) throw std::domain_error("ARCH variance is not positive");
        const double x2 = data.x(i) * data.x(i);
        sum += std::log(v) + x2 / v;
        out.gradient.noalias() += (0.5 / v) * (x2 / v - 1.0) * z;
        out.info.selfadjointView<Eigen::Lower>().rankUpdate(z, 0.5 / (v * v));
    }
    out.info.triangularView<Eigen::StrictlyUpper>() = out.info.transpose();
    out.loglik = -0.5 * static_cast<double>(data.count()) * kLog2Pi - 0.5 * sum;
    return out;
}

Eigen::VectorXd project_feasible(Eigen::VectorXd theta) {
    if (theta.size() == 0) return theta;
    if (!(theta[0] >= kArchAlpha0Floor)) theta[0] = kArchAlpha0Floor;
    for (Eigen::Index j = 1; j < theta.size(); ++j) {
        theta[j] = std::isnan(theta[j]) ? 0.0 : std::clamp(theta[j], 0.0, 1.0);
    }
    return theta;
}

Eigen::VectorXd arch_initial_params(const ArchData& data) {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(data.dimension(), 0.05);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) sum += data.x(i) * data.x(i);
    const double var = data.count() > 0 ? sum / static_cast<double>(data.count()) : 1.0;
    theta[0] = std::max(var, kArchAlpha0Floor);
    return theta;
}

FisherResult fisher_scoring(const ArchData& data, const Eigen::VectorXd& init, int iterations) {
    if (iterations < 0) throw std::invalid_argument("iteration count must be nonnegative");
    check_theta(data, init);
    FisherResult res{init, 0.0, 0, true};
    if (iterations == 0) {
        res.loglik = arch_loglik(data, init);
        return res;
    }
    Eigen::VectorXd theta = project_feasible(init);
    ArchScore sc = arch_score_and_info(data, theta);
    std::vector<double> grad_norms{projected_gradient_norm(theta, sc.gradient)};
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd next;
        double next_ll = 0.0;
        bool improved =
            line_search(data, theta, active_set_direction(theta, sc), sc.loglik, next, next_ll);
        if (!improved) {
            // A projected Newton step need not ascend at a bound; fall back to
            // a diagonally scaled gradient step.
            const Eigen::VectorXd diag = sc.info.diagonal().cwiseMax(1e-12);
            improved = line_search(data, theta, sc.gradient.cwiseQuotient(diag), sc.loglik, next,
                                   next_ll);
        }
        if (improved) theta = next;
        sc = arch_score_and_info(data, theta);
        grad_norms.push_back(projected_gradient_norm(theta, sc.gradient));
        res.iterations = it + 1;
    }
    res.theta = theta;
    res.loglik = sc.loglik;
    const std::size_t k = grad_norms.size();
    const double tol = 1e-5 * std::max<double>(1.0, static_cast<double>(data.count()));
    if (k >= 4 && grad_norms[k - 1] > tol) {
        const bool decreasing = grad_norms[k - 1] < grad_norms[k - 2] ||
                                grad_norms[k - 2] < grad_norms[k - 3] ||
                                grad_norms[k - 3] < grad_norms[k - 4];
        res.converged = decreasing;
    }
    return res;
}

LaplaceEvidence log_pe_arch_laplace(const ArchData& data, const Eigen::VectorXd& theta_hat) {
    LaplaceEvidence out;
    if (data.count() == 0) return out;
    const int k = data.dimension();
    const ArchScore sc = arch_score_and_info(data, theta_hat);
    out.degenerate = data.count() < static_cast<std::size_t>(data.order() + 2);
    Eigen::LLT<Eigen::MatrixXd> llt(sc.info);
    if (llt.info() != Eigen::Success ||
        !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
        out.degenerate = true;
        const double scale = std::max(sc.info.diagonal().cwiseAbs().maxCoeff(), 1.0);
        for (double delta = 1e-10 * scale;; delta *= 10.0) {
            llt.compute(sc.info + delta * Eigen::MatrixXd::Identity(k, k));
            if (llt.info() == Eigen::Success) break;
            if (delta > 1e10 * scale) throw NumericError("information matrix cannot be damped");
        }
    }
    const double log_det_info = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    out.log_pe = 0.5 * k * kLog2Pi - 0.5 * log_det_info + sc.loglik - std::log(theta_hat[0]);
    if (!std::isfinite(out.log_pe)) throw NumericError("Laplace evidence is not finite");
    return out;
}

GaussianForecast predict_arch(const Eigen::VectorXd& theta, std::span<const double> lagged_squares) {
    if (static_cast<std::size_t>(theta.size()) != lagged_squares.size() + 1) {
        throw std::invalid_argument("lagged squares do not match the ARCH order");
    }
    double v = theta[0];
    for (std::size_t j = 0; j < lagged_squares.size(); ++j) {
        v += theta[static_cast<Eigen::Index>(j) + 1] * lagged_squares[j];
    }
    return GaussianForecast{0.0, v};
}

}  // namespace bctx
