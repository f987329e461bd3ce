#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bctx::oracle {
namespace {

constexpr double kPi = 3.14159265358979323846;

void extend(const Context& prefix, int m, int remaining, std::vector<std::vector<Context>>& out) {
    // Every tree rooted at `prefix`: either the prefix itself is a leaf, or
    // one tree is chosen under each of its m children.
    out.push_back({prefix});
    if (remaining == 0) return;
    std::vector<std::vector<std::vector<Context>>> per_child(static_cast<std::size_t>(m));
    for (int s = 0; s < m; ++s) {
        Context c = prefix;
        c.push_back(static_cast<Symbol>(s));
        extend(c, m, remaining - 1, per_child[static_cast<std::size_t>(s)]);
    }
    std::vector<std::vector<Context>> partial{{}};
    for (const auto& options : per_child) {
        std::vector<std::vector<Context>> next;
        for (const auto& p : partial) {
            for (const auto& o : options) {
                auto joined = p;
                joined.insert(joined.end(), o.begin(), o.end());
                next.push_back(std::move(joined));
            }
        }
        partial = std::move(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
}

int symbol_of(double x, std::span<const double> thresholds) {
    int s = 0;
    for (double c : thresholds) s += x >= c ? 1 : 0;
    return s;
}

}  // namespace

std::vector<TreeModel> enumerate_trees(int alphabet_size, int max_depth) {
    std::vector<std::vector<Context>> sets;
    extend(Context{}, alphabet_size, max_depth, sets);
    std::vector<TreeModel> out;
    out.reserve(sets.size());
    for (auto& s : sets) out.emplace_back(alphabet_size, std::move(s));
    return out;
}

std::vector<LeafData> split_by_tree(std::span<const double> series, std::size_t end,
                                    const TreeModel& tree, const FitConfig& config) {
    std::vector<LeafData> out(tree.leaf_count());
    const std::size_t w = config.warmup_length();
    const auto th = config.quantizer.thresholds();
    for (std::size_t i = w; i < end; ++i) {
        std::size_t leaf = tree.leaf_count();
        for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
            const Context& ctx = tree.leaves()[l];
            bool match = true;
            for (std::size_t k = 0; k < ctx.size() && match; ++k) {
                match = symbol_of(series[i - 1 - k], th) == ctx[k];
            }
            if (match) {
                leaf = l;
                break;
            }
        }
        if (leaf == tree.leaf_count()) throw std::logic_error("no leaf matches");
        const int k = config.order + (config.intercept ? 1 : 0);
        Eigen::VectorXd z(k);
        int j = 0;
        if (config.intercept) z[j++] = 1.0;
        for (int lag = 1; lag <= config.order; ++lag) z[j++] = series[i - static_cast<std::size_t>(lag)];
        out[leaf].y.push_back(series[i]);
        out[leaf].x.push_back(z);
    }
    return out;
}

double log_marginal_t(const LeafData& leaf, const ArHyperParams& hp) {
    const auto n = static_cast<Eigen::Index>(leaf.y.size());
    if (n == 0) return 0.0;
    const Eigen::Index k = hp.dimension();
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = leaf.x[static_cast<std::size_t>(i)].transpose();
        y[i] = leaf.y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd mu = hp.mu_o.size() ? hp.mu_o : Eigen::VectorXd::Zero(k);
    const Eigen::MatrixXd sig = hp.sigma_o.size() ? hp.sigma_o : Eigen::MatrixXd::Identity(k, k);
    const double nu = 2.0 * hp.tau;
    const Eigen::MatrixXd scale =
        (hp.lambda / hp.tau) * (Eigen::MatrixXd::Identity(n, n) + x * sig * x.transpose());
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(scale);
    const Eigen::VectorXd r = y - x * mu;
    const double quad = r.dot(ldlt.solve(r));
    const double log_det = ldlt.vectorD().array().log().sum();
    const double dn = static_cast<double>(n);
    return std::lgamma(0.5 * (nu + dn)) - std::lgamma(0.5 * nu) - 0.5 * dn * std::log(nu * kPi) -
           0.5 * log_det - 0.5 * (nu + dn) * std::log1p(quad / nu);
}

double log_joint(const TreeModel& tree, std::span<const double> series, std::size_t end,
                 const FitConfig& config) {
    const BctPrior prior = config.prior();
    const int m = tree.alphabet_size();
    const double internal = static_cast<double>(tree.leaf_count() - 1) / (m - 1);
    double above_d = 0.0;
    for (const auto& leaf : tree.leaves()) {
        above_d += static_cast<int>(leaf.size()) < config.depth ? 1.0 : 0.0;
    }
    double out = internal * std::log1p(-prior.beta) + above_d * std::log(prior.beta);
    const ArHyperParams hp = config.ar_hyper();
    for (const auto& leaf : split_by_tree(series, end, tree, config)) out += log_marginal_t(leaf, hp);
    return out;
}

double log_sum_exp(std::span<const double> v) {
    const double top = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double a : v) s += std::exp(a - top);
    return top + std::log(s);
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double step = h * std::max(1.0, std::abs(x[j]));
        Eigen::VectorXd hi = x, lo = x;
        hi[j] += step;
        lo[j] -= step;
        g[j] = (f(hi) - f(lo)) / (2.0 * step);
    }
    return g;
}

BoxMinimum nelder_mead_box(const std::function<double(const Eigen::VectorXd&)>& f,
                           Eigen::VectorXd start, const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper, double step, double tol,
                           int max_evals) {
    const Eigen::Index k = start.size();
    auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(lower).cwiseMin(upper).eval(); };
    auto eval = [&](const Eigen::VectorXd& v) { return f(clamp(v)); };
    int evals = 0;
    BoxMinimum best{clamp(start), eval(start)};
    for (int restart = 0; restart < 20 && evals < max_evals; ++restart) {
        std::vector<Eigen::VectorXd> pts{best.x};
        for (Eigen::Index j = 0; j < k; ++j) {
            Eigen::VectorXd p = best.x;
            p[j] += p[j] + step <= upper[j] ? step : -step;
            pts.push_back(p);
        }
        std::vector<double> vals;
        for (const auto& p : pts) vals.push_back(eval(p));
        evals += static_cast<int>(pts.size());
        for (; evals < max_evals; ++evals) {
            std::vector<std::size_t> idx(pts.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
            std::vector<Eigen::VectorXd> p2;
            std::vector<double> v2;
            for (auto i : idx) {
                p2.push_back(pts[i]);
                v2.push_back(vals[i]);
            }
            pts = std::move(p2);
            vals = std::move(v2);
            double spread = 0.0;
            for (std::size_t i = 1; i < pts.size(); ++i) {
                spread = std::max(spread, (clamp(pts[i]) - clamp(pts[0])).cwiseAbs().maxCoeff());
            }
            if (std::abs(vals.back() - vals.front()) <= tol * (1.0 + std::abs(vals.front())) &&
                spread < 1e-9) {
                break;
            }
            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(k);
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
            centroid /= static_cast<double>(k);
            const Eigen::VectorXd& worst = pts.back();
            const Eigen::VectorXd refl = centroid + (centroid - worst);
            const double fr = eval(refl);
            if (fr < vals.front()) {
                const Eigen::VectorXd exp = centroid + 2.0 * (centroid - worst);
                const double fe = eval(exp);
                if (fe < fr) {
                    pts.back() = exp;
                    vals.back() = fe;
                } else {
                    pts.back() = refl;
                    vals.back() = fr;
                }
            } else if (fr < vals[vals.size() - 2]) {
                pts.back() = refl;
                vals.back() = fr;
            } else {
                const bool outside = fr < vals.back();
                const Eigen::VectorXd con =
                    outside ? centroid + 0.5 * (refl - centroid) : centroid + 0.5 * (worst - centroid);
                const double fc = eval(con);
                if (fc < std::min(fr, vals.back())) {
                    pts.back() = con;
                    vals.back() = fc;
                } else {
                    for (std::size_t i = 1; i < pts.size(); ++i) {
                        pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                        vals[i] = eval(pts[i]);
                    }
                    evals += static_cast<int>(k);
                }
            }
        }
        const double improvement = best.value - vals.front();
        best = {clamp(pts.front()), vals.front()};
        if (restart > 0 && improvement <= tol * (1.0 + std::abs(best.value))) break;
        step *= 0.5;
    }
    return best;
}

double ar1_evidence_quadrature(const LeafData& leaf, const ArHyperParams& hp, double shift) {
    using boost::math::quadrature::gauss_kronrod;
    const double mu = hp.mu_o.size() ? hp.mu_o[0] : 0.0;
    const double s0 = hp.sigma_o.size() ? hp.sigma_o(0, 0) : 1.0;
    const double inf = std::numeric_limits<double>::infinity();
    auto inner = [&](double sigma2) {
        auto f = [&](double phi) {
            double ll = 0.0;
            for (std::size_t i = 0; i < leaf.y.size(); ++i) {
                const double r = leaf.y[i] - phi * leaf.x[i][0];
                ll += -0.5 * std::log(2.0 * kPi * sigma2) - 0.5 * r * r / sigma2;
            }
            const double v = sigma2 * s0;
            const double lp = -0.5 * std::log(2.0 * kPi * v) - 0.5 * (phi - mu) * (phi - mu) / v;
            return std::exp(ll + lp - shift);
        };
        return gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-12);
    };
    auto outer = [&](double sigma2) {
        if (!(sigma2 > 0.0)) return 0.0;
        const double ig = hp.tau * std::log(hp.lambda) - std::lgamma(hp.tau) -
                          (hp.tau + 1.0) * std::log(sigma2) - hp.lambda / sigma2;
        return inner(sigma2) * std::exp(ig);
    };
    return gauss_kronrod<double, 61>::integrate(outer, 0.0, inf, 15, 1e-11);
}

GenerativeSpec random_ar_spec(int alphabet_size, int max_depth, int order, std::mt19937_64& rng) {
    const auto trees = enumerate_trees(alphabet_size, max_depth);
    std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
    std::uniform_real_distribution<double> coef(-0.6, 0.6);
    std::uniform_real_distribution<double> var(0.1, 1.0);
    GenerativeSpec spec;
    spec.name = "random";
    spec.tree = trees[pick(rng)];
    std::vector<double> th;
    for (int i = 1; i < alphabet_size; ++i) {
        th.push_back(-0.5 + static_cast<double>(i) / alphabet_size);
    }
    spec.quantizer = Quantizer(th);
    spec.order = order;
    spec.burn_in = 50;
    for (const auto& leaf : spec.tree.leaves()) {
        LeafSpec ls;
        ls.context = leaf;
        ls.coefficients = Eigen::VectorXd(order);
        // Keep each regime stationary on its own: sum |phi| < 1.
        for (int j = 0; j < order; ++j) ls.coefficients[j] = coef(rng) / order;
        ls.sigma2 = var(rng);
        spec.leaves.push_back(std::move(ls));
    }
    spec.validate();
    return spec;
}

}  // namespace bctx::oracle
