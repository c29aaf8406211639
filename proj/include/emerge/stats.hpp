#pragma once

// Conjugate-statistics kernels shared by the perception, game and oracle code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emerge/error.hpp"
#include "emerge/rng.hpp"

namespace emerge {

inline constexpr double kSimplexTol = 1e-9;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Nonnegative entries summing to one. Construction validates.
class ProbVector {
public:
    ProbVector() = default;

    explicit ProbVector(std::vector<double> entries) : p_(std::move(entries)) {
        require(!p_.empty(), "ProbVector: empty");
        double sum = 0.0;
        for (double x : p_) {
            require(std::isfinite(x) && x >= 0.0, "ProbVector: negative or non-finite entry");
            sum += x;
        }
        require(std::abs(sum - 1.0) <= kSimplexTol,
                "ProbVector: entries sum to " + std::to_string(sum));
    }

    // Normalize nonnegative weights; at least one must be positive.
    static ProbVector from_weights(std::vector<double> w) {
        double sum = 0.0;
        for (double x : w) {
            require(std::isfinite(x) && x >= 0.0, "ProbVector: bad weight");
            sum += x;
        }
        require(sum > 0.0, "ProbVector: all weights zero");
        for (double& x : w) x /= sum;
        return ProbVector(std::move(w));
    }

    static ProbVector from_log_weights(std::span<const double> lw);

    static ProbVector uniform(std::size_t n) {
        require(n >= 1, "ProbVector: empty");
        return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& values() const { return p_; }
    auto begin() const { return p_.begin(); }
    auto end() const { return p_.end(); }

    friend bool operator==(const ProbVector&, const ProbVector&) = default;

private:
    std::vector<double> p_;
};

// ln sum exp(x_i) without overflow. -inf entries are allowed.
inline double log_sum_exp(std::span<const double> xs) {
    require(!xs.empty(), "log_sum_exp: empty input");
    const double m = *std::max_element(xs.begin(), xs.end());
    if (m == kNegInf) return kNegInf;
    if (m == std::numeric_limits<double>::infinity()) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

inline ProbVector ProbVector::from_log_weights(std::span<const double> lw) {
    const double lse = log_sum_exp(lw);
    require(std::isfinite(lse), "ProbVector: log weights have no finite mass");
    std::vector<double> p(lw.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) {
        p[i] = std::exp(lw[i] - lse);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return ProbVector(std::move(p));
}

inline std::size_t sample_categorical(const ProbVector& p, Stream& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        cum += p[i];
        last_positive = i;
        if (u < cum) return i;
    }
    return last_positive;
}

inline std::size_t sample_uniform_index(std::size_t n, Stream& rng) {
    require(n >= 1, "sample_uniform_index: n must be >= 1");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double sample_normal(double mean, double sd, Stream& rng) {
    if (sd == 0.0) return mean;
    return std::normal_distribution<double>(mean, sd)(rng);
}

inline ProbVector sample_dirichlet(std::span<const double> alpha, Stream& rng) {
    require(!alpha.empty(), "sample_dirichlet: empty alpha");
    for (double a : alpha)
        require(std::isfinite(a) && a > 0.0, "sample_dirichlet: alpha must be positive");
    std::vector<double> g(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        g[i] = std::gamma_distribution<double>(alpha[i], 1.0)(rng);
        sum += g[i];
    }
    if (!(sum > 0.0)) {
        // Every gamma draw underflowed (tiny alphas): collapse onto one vertex.
        std::vector<double> w(alpha.begin(), alpha.end());
        const auto k = sample_categorical(ProbVector::from_weights(w), rng);
        std::fill(g.begin(), g.end(), 0.0);
        g[k] = 1.0;
        return ProbVector(std::move(g));
    }
    for (double& x : g) x /= sum;
    return ProbVector::from_weights(std::move(g));
}

inline ProbVector sample_dirichlet_symmetric(double alpha, std::size_t n, Stream& rng) {
    const std::vector<double> a(n, alpha);
    return sample_dirichlet(a, rng);
}

struct NormalPosterior {
    std::vector<double> mean;
    double variance = 0.0;
};

// Normal-Normal update for an isotropic mean with known observation variance.
inline NormalPosterior normal_mean_posterior(std::span<const double> prior_mean, double prior_var,
                                             std::span<const double> obs_sum, std::size_t obs_count,
                                             double obs_var) {
    require(prior_var > 0.0 && obs_var > 0.0, "normal_mean_posterior: variances must be positive");
    require(prior_mean.size() == obs_sum.size(), "normal_mean_posterior: dimension mismatch");
    const double n = static_cast<double>(obs_count);
    const double precision = n / obs_var + 1.0 / prior_var;
    NormalPosterior post;
    post.variance = 1.0 / precision;
    post.mean.resize(prior_mean.size());
    for (std::size_t d = 0; d < prior_mean.size(); ++d)
        post.mean[d] = (obs_sum[d] / obs_var + prior_mean[d] / prior_var) / precision;
    return post;
}

// log N(x; mean, var * I)
inline double log_normal_isotropic(std::span<const double> x, std::span<const double> mean,
                                   double var) {
    double sq = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double r = x[d] - mean[d];
        sq += r * r;
    }
    const double dim = static_cast<double>(x.size());
    return -0.5 * dim * std::log(2.0 * std::numbers::pi * var) - 0.5 * sq / var;
}

// log Dir(p; alpha * 1)
inline double log_dirichlet_symmetric(const ProbVector& p, double alpha) {
    const double n = static_cast<double>(p.size());
    double lp = std::lgamma(alpha * n) - n * std::lgamma(alpha);
    for (double x : p) {
        if (alpha == 1.0) continue;
        lp += (alpha - 1.0) * std::log(x);
    }
    return lp;
}

}  // namespace emerge
