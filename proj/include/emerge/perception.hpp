#pragma once

// One agent's private generative model: a Gaussian mixture over its own
// observations (known isotropic variance per modality) coupled to a
// categorical sign table phi[k][w] = p(w | z = k).

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/dataset.hpp"
#include "emerge/error.hpp"
#include "emerge/rng.hpp"
#include "emerge/stats.hpp"

namespace emerge {

struct Hyper {
    double alpha_pi = 1.0;
    double alpha_phi = 0.5;
    double mu0 = 0.0;           // prior mean, broadcast over every coordinate
    double tau2 = 25.0;         // prior variance of component means
    std::vector<double> sigma2;  // per-modality observation variance; empty means 1.0

    double sigma2_of(std::size_t m) const { return sigma2.empty() ? 1.0 : sigma2.at(m); }

    friend bool operator==(const Hyper&, const Hyper&) = default;
};

struct InternalState {
    std::size_t agent_id = 0;
    std::size_t K = 1;
    std::size_t W = 1;
    std::vector<int> z;
    ProbVector pi;
    std::vector<std::vector<std::vector<double>>> mu;  // [k][m][d]
    std::vector<ProbVector> phi;                       // K rows over W signs
    Hyper hyper;

    friend bool operator==(const InternalState&, const InternalState&) = default;

    void validate(const Dataset& ds) const {
        require(K >= 1 && W >= 1, "state: K and W must be >= 1");
        require(pi.size() == K, "state: pi length != K");
        require(phi.size() == K, "state: phi row count != K");
        for (const auto& row : phi) {
            require(row.size() == W, "state: phi row length != W");
            double s = 0.0;
            for (double x : row) s += x;
            require(std::abs(s - 1.0) <= kSimplexTol, "state: phi row off the simplex");
        }
        require(z.size() == ds.num_objects(), "state: z length != N");
        for (int zi : z) require(zi >= 0 && static_cast<std::size_t>(zi) < K, "state: z out of range");
        require(mu.size() == K, "state: mu count != K");
        for (const auto& per_k : mu) {
            require(per_k.size() == ds.num_modalities(), "state: mu modality count mismatch");
            for (std::size_t m = 0; m < per_k.size(); ++m)
                require(per_k[m].size() == ds.dims[m], "state: mu dimension mismatch");
        }
        require(hyper.sigma2.empty() || hyper.sigma2.size() == ds.num_modalities(),
                "state: sigma2 length != modality count");
    }
};

inline InternalState init_state(const Dataset& ds, std::size_t agent_id, std::size_t K, std::size_t W,
                                const Hyper& hyper, Stream& rng) {
    require(K >= 1 && W >= 1, "init_state: K and W must be >= 1");
    require(agent_id < ds.num_agents(), "init_state: agent id out of range");
    require(hyper.alpha_pi > 0.0 && hyper.alpha_phi > 0.0 && hyper.tau2 > 0.0,
            "init_state: hyperparameters must be positive");
    for (double s : hyper.sigma2) require(s > 0.0, "init_state: sigma2 must be positive");

    InternalState st;
    st.agent_id = agent_id;
    st.K = K;
    st.W = W;
    st.hyper = hyper;
    st.pi = sample_dirichlet_symmetric(hyper.alpha_pi, K, rng);
    for (std::size_t k = 0; k < K; ++k) st.phi.push_back(sample_dirichlet_symmetric(hyper.alpha_phi, W, rng));
    const double sd = std::sqrt(hyper.tau2);
    st.mu.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        st.mu[k].resize(ds.num_modalities());
        for (std::size_t m = 0; m < ds.num_modalities(); ++m) {
            st.mu[k][m].resize(ds.dims[m]);
            for (double& x : st.mu[k][m]) x = sample_normal(hyper.mu0, sd, rng);
        }
    }
    st.z.resize(ds.num_objects());
    for (int& zi : st.z) zi = static_cast<int>(sample_categorical(st.pi, rng));
    st.validate(ds);
    return st;
}

inline InternalState init_state(const Dataset& ds, std::size_t agent_id, std::size_t K, std::size_t W,
                                const Hyper& hyper, Seed seed) {
    Stream rng(seed, stream_id({0x1417, agent_id}));
    return init_state(ds, agent_id, K, W, hyper, rng);
}

// sum_m log N(o_{i,m}; mu[k][m], sigma2_m I)
inline double loglik_obs_at(const InternalState& st, const Dataset& ds, std::size_t i, std::size_t k) {
    double ll = 0.0;
    for (std::size_t m = 0; m < ds.num_modalities(); ++m)
        ll += log_normal_isotropic(ds.obs(st.agent_id, i, m), st.mu[k][m], st.hyper.sigma2_of(m));
    return ll;
}

inline double loglik_obs(const InternalState& st, const Dataset& ds, std::size_t i) {
    return loglik_obs_at(st, ds, i, static_cast<std::size_t>(st.z[i]));
}

// Normalized log p(z_i = k | o_i, w_i, pi, mu, phi) for every k.
inline std::vector<double> z_log_conditional(const InternalState& st, const Dataset& ds, std::size_t i,
                                             int w) {
    require(w >= 0 && static_cast<std::size_t>(w) < st.W, "z_log_conditional: sign out of range");
    std::vector<double> lw(st.K);
    for (std::size_t k = 0; k < st.K; ++k)
        lw[k] = std::log(st.pi[k]) + loglik_obs_at(st, ds, i, k) + std::log(st.phi[k][static_cast<std::size_t>(w)]);
    const double lse = log_sum_exp(lw);
    for (double& x : lw) x -= lse;
    return lw;
}

inline int gibbs_update_z(InternalState& st, const Dataset& ds, std::size_t i, int w, Stream& rng) {
    if (st.K == 1) {
        st.z[i] = 0;
        return 0;
    }
    const auto lp = z_log_conditional(st, ds, i, w);
    st.z[i] = static_cast<int>(sample_categorical(ProbVector::from_log_weights(lp), rng));
    return st.z[i];
}

// Full conditionals of pi, phi and mu given z and the signs: Dirichlet
// concentrations and Normal means/variances (isotropic).
struct ParameterPosterior {
    std::vector<double> pi_alpha;                  // K
    std::vector<std::vector<double>> phi_alpha;    // K x W
    std::vector<std::vector<NormalPosterior>> mu;  // [k][m]
};

inline ParameterPosterior parameter_posterior(const InternalState& st, const Dataset& ds,
                                              std::span<const int> signs) {
    require(signs.size() == ds.num_objects(), "resample_parameters: signs length != N");
    const auto& h = st.hyper;
    ParameterPosterior post;
    post.pi_alpha.assign(st.K, h.alpha_pi);
    post.phi_alpha.assign(st.K, std::vector<double>(st.W, h.alpha_phi));
    for (std::size_t i = 0; i < ds.num_objects(); ++i) {
        const auto k = static_cast<std::size_t>(st.z[i]);
        require(signs[i] >= 0 && static_cast<std::size_t>(signs[i]) < st.W,
                "resample_parameters: sign out of range");
        post.pi_alpha[k] += 1.0;
        post.phi_alpha[k][static_cast<std::size_t>(signs[i])] += 1.0;
    }
    post.mu.resize(st.K);
    for (std::size_t k = 0; k < st.K; ++k) {
        for (std::size_t m = 0; m < ds.num_modalities(); ++m) {
            const std::size_t dim = ds.dims[m];
            std::vector<double> sum(dim, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < ds.num_objects(); ++i) {
                if (static_cast<std::size_t>(st.z[i]) != k) continue;
                const auto o = ds.obs(st.agent_id, i, m);
                for (std::size_t d = 0; d < dim; ++d) sum[d] += o[d];
                ++count;
            }
            const std::vector<double> prior(dim, h.mu0);
            post.mu[k].push_back(normal_mean_posterior(prior, h.tau2, sum, count, h.sigma2_of(m)));
        }
    }
    return post;
}

inline void resample_parameters(InternalState& st, const Dataset& ds, std::span<const int> signs,
                                Stream& rng) {
    const auto post = parameter_posterior(st, ds, signs);
    st.pi = sample_dirichlet(post.pi_alpha, rng);
    for (std::size_t k = 0; k < st.K; ++k) st.phi[k] = sample_dirichlet(post.phi_alpha[k], rng);
    for (std::size_t k = 0; k < st.K; ++k)
        for (std::size_t m = 0; m < ds.num_modalities(); ++m) {
            const auto& nm = post.mu[k][m];
            const double sd = std::sqrt(nm.variance);
            for (std::size_t d = 0; d < nm.mean.size(); ++d) st.mu[k][m][d] = sample_normal(nm.mean[d], sd, rng);
        }
}

inline int sample_sign(const InternalState& st, std::size_t i, Stream& rng) {
    return static_cast<int>(sample_categorical(st.phi[static_cast<std::size_t>(st.z[i])], rng));
}

// Listener-side MH acceptance: min(1, phi[z_i][proposed] / phi[z_i][current]).
inline double acceptance_probability(const InternalState& st, std::size_t i, int proposed, int current) {
    require(proposed >= 0 && static_cast<std::size_t>(proposed) < st.W && current >= 0 &&
                static_cast<std::size_t>(current) < st.W,
            "acceptance_probability: sign out of range");
    const auto& row = st.phi[static_cast<std::size_t>(st.z[i])];
    const double den = row[static_cast<std::size_t>(current)];
    if (den == 0.0) return 1.0;
    return std::min(1.0, row[static_cast<std::size_t>(proposed)] / den);
}

// log p(pi) + log p(phi) + log p(mu)
inline double log_prior(const InternalState& st) {
    const auto& h = st.hyper;
    double lp = log_dirichlet_symmetric(st.pi, h.alpha_pi);
    for (const auto& row : st.phi) lp += log_dirichlet_symmetric(row, h.alpha_phi);
    for (const auto& per_k : st.mu)
        for (const auto& v : per_k) {
            const std::vector<double> prior(v.size(), h.mu0);
            lp += log_normal_isotropic(v, prior, h.tau2);
        }
    return lp;
}

// Sign the agent would name object i with: argmax of its phi row at z_i.
inline int map_sign(const InternalState& st, std::size_t i) {
    const auto& row = st.phi[static_cast<std::size_t>(st.z[i])];
    std::size_t best = 0;
    for (std::size_t w = 1; w < row.size(); ++w)
        if (row[w] > row[best]) best = w;
    return static_cast<int>(best);
}

inline nlohmann::json to_json(const Hyper& h) {
    return {{"alpha_pi", h.alpha_pi}, {"alpha_phi", h.alpha_phi}, {"mu0", h.mu0},
            {"tau2", h.tau2},         {"sigma2", h.sigma2}};
}

inline Hyper hyper_from_json(const nlohmann::json& j) {
    Hyper h;
    h.alpha_pi = j.value("alpha_pi", h.alpha_pi);
    h.alpha_phi = j.value("alpha_phi", h.alpha_phi);
    h.mu0 = j.value("mu0", h.mu0);
    h.tau2 = j.value("tau2", h.tau2);
    h.sigma2 = j.value("sigma2", h.sigma2);
    return h;
}

inline nlohmann::json to_json(const InternalState& st) {
    nlohmann::json phi = nlohmann::json::array();
    for (const auto& row : st.phi) phi.push_back(row.values());
    return {{"agent_id", st.agent_id}, {"K", st.K},   {"W", st.W},   {"z", st.z},
            {"pi", st.pi.values()},   {"mu", st.mu}, {"phi", phi}, {"hyper", to_json(st.hyper)}};
}

inline InternalState state_from_json(const nlohmann::json& j) {
    try {
        InternalState st;
        st.agent_id = j.at("agent_id").get<std::size_t>();
        st.K = j.at("K").get<std::size_t>();
        st.W = j.at("W").get<std::size_t>();
        st.z = j.at("z").get<std::vector<int>>();
        st.pi = ProbVector(j.at("pi").get<std::vector<double>>());
        st.mu = j.at("mu").get<std::vector<std::vector<std::vector<double>>>>();
        for (const auto& row : j.at("phi")) st.phi.emplace_back(row.get<std::vector<double>>());
        st.hyper = hyper_from_json(j.at("hyper"));
        return st;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("state JSON: ") + e.what());
    }
}

}  // namespace emerge
