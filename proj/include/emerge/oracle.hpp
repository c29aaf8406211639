#pragma once

// Reference inference on the coupled two-agent model: exhaustive enumeration
// for tiny instances and a centralized systematic-scan Gibbs sampler that
// treats all agents as one brain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/dataset.hpp"
#include "emerge/error.hpp"
#include "emerge/game.hpp"
#include "emerge/perception.hpp"
#include "emerge/stats.hpp"

namespace emerge {

inline constexpr double kDefaultMaxSupport = 1e7;

enum class Marginal {
    w_only,      // w given every agent's current z
    w_and_z,     // joint over w and all z
    w_marginal,  // w with every z summed out
};

inline std::string to_string(Marginal m) {
    switch (m) {
        case Marginal::w_only: return "w-only";
        case Marginal::w_and_z: return "w-and-z";
        case Marginal::w_marginal: return "w-marginal";
    }
    return "?";
}

inline Marginal marginal_from_string(const std::string& s) {
    if (s == "w-only") return Marginal::w_only;
    if (s == "w-and-z") return Marginal::w_and_z;
    if (s == "w-marginal") return Marginal::w_marginal;
    throw InvalidParameter("unknown marginal '" + s + "'");
}

struct Configuration {
    std::vector<int> w;
    std::vector<std::vector<int>> z;  // per agent; empty unless the support includes z

    friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

struct ExactPosterior {
    Marginal marginal = Marginal::w_only;
    std::vector<Configuration> support;
    ProbVector probs;
};

// Mixed-radix index of a sign configuration: sum_i w_i W^i.
inline std::size_t w_index(std::span<const int> w, std::size_t W) {
    std::size_t idx = 0, base = 1;
    for (int v : w) {
        idx += static_cast<std::size_t>(v) * base;
        base *= W;
    }
    return idx;
}

inline std::vector<int> w_from_index(std::size_t idx, std::size_t N, std::size_t W) {
    std::vector<int> w(N);
    for (std::size_t i = 0; i < N; ++i) {
        w[i] = static_cast<int>(idx % W);
        idx /= W;
    }
    return w;
}

namespace detail {

inline double checked_power(std::size_t base, std::size_t exp, double limit) {
    double v = 1.0;
    for (std::size_t e = 0; e < exp; ++e) {
        v *= static_cast<double>(base);
        if (v > limit) return v;
    }
    return v;
}

}  // namespace detail

inline ExactPosterior enumerate_posterior(const Dataset& ds, std::span<const InternalState> states, Marginal marginal,
                                          double max_support = kDefaultMaxSupport) {
    require(!states.empty(), "enumerate_posterior: no agents");
    const std::size_t N = ds.num_objects();
    const std::size_t W = states.front().W;
    for (const auto& st : states) require(st.W == W, "enumerate_posterior: agents disagree on W");

    double size = detail::checked_power(W, N, max_support);
    if (marginal != Marginal::w_only)
        for (const auto& st : states) size *= detail::checked_power(st.K, N, max_support);
    if (size > max_support)
        throw InstanceTooLarge("enumerate_posterior: support of size " + std::to_string(size) + " exceeds " +
                               std::to_string(max_support));

    const std::size_t num_w = static_cast<std::size_t>(detail::checked_power(W, N, max_support));
    std::vector<InternalState> work(states.begin(), states.end());
    ExactPosterior post;
    post.marginal = marginal;
    std::vector<double> logp;

    if (marginal == Marginal::w_only) {
        for (std::size_t wi = 0; wi < num_w; ++wi) {
            SharedSigns s{w_from_index(wi, N, W)};
            post.support.push_back({s.w, {}});
            logp.push_back(target_log_score(work, s, ds));
        }
        post.probs = ProbVector::from_log_weights(logp);
        return post;
    }

    // Odometer over every agent's z vector.
    std::vector<std::size_t> z_counts;
    std::size_t num_z = 1;
    for (const auto& st : states) {
        const auto c = static_cast<std::size_t>(detail::checked_power(st.K, N, max_support));
        z_counts.push_back(c);
        num_z *= c;
    }
    std::vector<double> w_mass(num_w);
    std::vector<std::vector<double>> per_w(num_w);
    for (std::size_t wi = 0; wi < num_w; ++wi) {
        SharedSigns s{w_from_index(wi, N, W)};
        for (std::size_t zi = 0; zi < num_z; ++zi) {
            std::size_t rest = zi;
            Configuration cfg{s.w, {}};
            for (std::size_t a = 0; a < work.size(); ++a) {
                work[a].z = w_from_index(rest % z_counts[a], N, work[a].K);
                rest /= z_counts[a];
                cfg.z.push_back(work[a].z);
            }
            const double lp = target_log_score(work, s, ds);
            if (marginal == Marginal::w_and_z) {
                post.support.push_back(std::move(cfg));
                logp.push_back(lp);
            } else {
                per_w[wi].push_back(lp);
            }
        }
    }
    if (marginal == Marginal::w_marginal) {
        for (std::size_t wi = 0; wi < num_w; ++wi) {
            post.support.push_back({w_from_index(wi, N, W), {}});
            logp.push_back(log_sum_exp(per_w[wi]));
        }
    }
    post.probs = ProbVector::from_log_weights(logp);
    return post;
}

inline double tv_distance(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), "tv_distance: support sizes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

inline double tv_distance(const ExactPosterior& p, const ExactPosterior& q) {
    require(p.support == q.support, "tv_distance: supports differ");
    return tv_distance(p.probs.values(), q.probs.values());
}

inline std::vector<double> normalize_counts(std::span<const std::uint64_t> counts) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    require(total > 0.0, "normalize_counts: no samples");
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / total;
    return p;
}

// Systematic-scan Gibbs over (w, z for every agent, and optionally the
// parameters) using exact full conditionals.
class CentralizedGibbs {
public:
    CentralizedGibbs(const Dataset& ds, std::vector<InternalState> states, SharedSigns signs, Seed seed,
                     bool update_parameters)
        : ds_(ds), states_(std::move(states)), signs_(std::move(signs)), update_parameters_(update_parameters),
          rng_(seed, stream_id({0xCE47, 0})) {
        require(states_.size() >= 1, "centralized_gibbs: no agents");
        require(signs_.size() == ds_.num_objects(), "centralized_gibbs: signs length != N");
        for (const auto& st : states_) require(st.W == states_.front().W, "centralized_gibbs: agents disagree on W");
    }

    void sweep() {
        const std::size_t N = ds_.num_objects();
        const std::size_t W = states_.front().W;
        for (std::size_t i = 0; i < N; ++i) {
            std::vector<double> lw(W, 0.0);
            for (const auto& st : states_)
                for (std::size_t w = 0; w < W; ++w)
                    lw[w] += std::log(st.phi[static_cast<std::size_t>(st.z[i])][w]);
            signs_.w[i] = static_cast<int>(sample_categorical(ProbVector::from_log_weights(lw), rng_));
        }
        for (auto& st : states_)
            for (std::size_t i = 0; i < N; ++i) gibbs_update_z(st, ds_, i, signs_.w[i], rng_);
        if (update_parameters_)
            for (auto& st : states_) resample_parameters(st, ds_, signs_.w, rng_);
    }

    const SharedSigns& signs() const { return signs_; }
    const std::vector<InternalState>& states() const { return states_; }

private:
    const Dataset& ds_;
    std::vector<InternalState> states_;
    SharedSigns signs_;
    bool update_parameters_;
    Stream rng_;
};

using SweepObserver = std::function<void(const SharedSigns&, const std::vector<InternalState>&)>;

inline void centralized_gibbs(const Dataset& ds, std::vector<InternalState> states, SharedSigns signs,
                              std::size_t sweeps, Seed seed, bool update_parameters, const SweepObserver& observe) {
    require(sweeps >= 1, "centralized_gibbs: sweeps must be >= 1");
    CentralizedGibbs chain(ds, std::move(states), std::move(signs), seed, update_parameters);
    for (std::size_t s = 0; s < sweeps; ++s) {
        chain.sweep();
        observe(chain.signs(), chain.states());
    }
}

// Empirical law of the w configuration under a chain, as a histogram indexed
// by w_index.
struct ChainLaw {
    std::vector<std::uint64_t> counts;
    std::size_t accepted = 0;
    std::size_t proposals = 0;

    std::vector<double> probs() const { return normalize_counts(counts); }
};

inline ChainLaw centralized_w_law(const Dataset& ds, std::span<const InternalState> states, const SharedSigns& init,
                                  std::size_t burn_in, std::size_t sweeps, Seed seed) {
    const std::size_t W = states.front().W;
    ChainLaw law;
    law.counts.assign(static_cast<std::size_t>(detail::checked_power(W, ds.num_objects(), kDefaultMaxSupport)), 0);
    std::size_t seen = 0;
    centralized_gibbs(ds, {states.begin(), states.end()}, init, burn_in + sweeps, seed, false,
                      [&](const SharedSigns& s, const std::vector<InternalState>&) {
                          if (seen++ >= burn_in) ++law.counts[w_index(s.w, W)];
                      });
    return law;
}

// Same law under the decentralized naming game with parameters held fixed.
// One sweep = every agent speaks once about every object.
inline ChainLaw naming_game_w_law(const Dataset& ds, std::span<const InternalState> states, const SharedSigns& init,
                                  std::size_t burn_in, std::size_t sweeps, Seed seed, AcceptanceMode mode,
                                  const SignChannel& channel = {}) {
    require(states.size() >= 2, "naming_game_w_law: at least two agents are required");
    const std::size_t W = states.front().W;
    GameConfig cfg;
    cfg.seed = seed;
    cfg.mode = mode;
    cfg.update_parameters = false;
    GameSetup g;
    g.game_rng = Stream(seed, stream_id({streams::kGame}));
    g.channel_rng = Stream(seed, stream_id({streams::kChannel}));
    g.signs = init;
    for (std::size_t a = 0; a < states.size(); ++a)
        g.agents.push_back({states[a], Stream(seed, stream_id({streams::kAgent, a})), init.w, init.w});
    ChainLaw law;
    law.counts.assign(static_cast<std::size_t>(detail::checked_power(W, ds.num_objects(), kDefaultMaxSupport)), 0);
    for (std::size_t s = 0; s < burn_in + sweeps; ++s) {
        const auto [acc, prop] = play_iteration(g, ds, cfg, channel, s);
        if (s < burn_in) continue;
        law.accepted += acc;
        law.proposals += prop;
        ++law.counts[w_index(g.signs.w, W)];
    }
    return law;
}

inline nlohmann::json to_json(const ExactPosterior& p) {
    nlohmann::json support = nlohmann::json::array();
    for (const auto& c : p.support) {
        nlohmann::json e = {{"w", c.w}};
        if (!c.z.empty()) e["z"] = c.z;
        support.push_back(std::move(e));
    }
    return {{"marginal", to_string(p.marginal)}, {"support", support}, {"probs", p.probs.values()}};
}

inline ExactPosterior exact_posterior_from_json(const nlohmann::json& j) {
    try {
        ExactPosterior p;
        p.marginal = marginal_from_string(j.at("marginal").get<std::string>());
        for (const auto& e : j.at("support")) {
            Configuration c;
            c.w = e.at("w").get<std::vector<int>>();
            if (e.contains("z")) c.z = e.at("z").get<std::vector<std::vector<int>>>();
            p.support.push_back(std::move(c));
        }
        p.probs = ProbVector(j.at("probs").get<std::vector<double>>());
        require(p.probs.size() == p.support.size(), "posterior JSON: probs length != support length");
        std::vector<Configuration> sorted = p.support;
        std::sort(sorted.begin(), sorted.end());
        require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                "posterior JSON: duplicate support entries");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("posterior JSON: ") + e.what());
    }
}

}  // namespace emerge
