#pragma once

// Metropolis-Hastings naming game.
//
// Each agent keeps a private InternalState; the only shared variable is the
// sign w_i per object. The coupled target is
//
//   prod_a p(theta_a) prod_i pi_a[z_a,i] N(o_a,i; mu_a[z_a,i]) phi_a[z_a,i][w_i]
//
// A turn is an independence MH step on w_i whose proposal is the speaker's
// phi row, so the acceptance ratio only involves the listeners' phi rows.
// Listeners then Gibbs-update their own z_i.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/artic.hpp"
#include "emerge/dataset.hpp"
#include "emerge/error.hpp"
#include "emerge/metrics.hpp"
#include "emerge/perception.hpp"
#include "emerge/rng.hpp"
#include "emerge/stats.hpp"

namespace emerge {

enum class AcceptanceMode { mh, always, none };
enum class ObjectOrder { fixed, shuffled };
enum class ChannelKind { plain, articulated, melodic };

inline std::string to_string(AcceptanceMode m) {
    switch (m) {
        case AcceptanceMode::mh: return "mh";
        case AcceptanceMode::always: return "always";
        case AcceptanceMode::none: return "none";
    }
    return "?";
}

inline AcceptanceMode acceptance_mode_from_string(const std::string& s) {
    if (s == "mh") return AcceptanceMode::mh;
    if (s == "always") return AcceptanceMode::always;
    if (s == "none") return AcceptanceMode::none;
    throw InvalidParameter("unknown acceptance mode '" + s + "'");
}

inline std::string to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::plain: return "plain";
        case ChannelKind::articulated: return "articulated";
        case ChannelKind::melodic: return "melodic";
    }
    return "?";
}

inline ChannelKind channel_kind_from_string(const std::string& s) {
    if (s == "plain") return ChannelKind::plain;
    if (s == "articulated") return ChannelKind::articulated;
    if (s == "melodic") return ChannelKind::melodic;
    throw InvalidParameter("unknown channel '" + s + "'");
}

struct SharedSigns {
    std::vector<int> w;

    std::size_t size() const { return w.size(); }
    friend bool operator==(const SharedSigns&, const SharedSigns&) = default;
};

// How a proposed sign reaches the listener. Plain passes the index through;
// articulated and melodic channels send lexicon.words[w] (phoneme word or note
// motif) through a substitution channel with rate epsilon, and the listener
// reads back argmax_w p(y | w) * phi_listener[z][w].
struct SignChannel {
    ChannelKind kind = ChannelKind::plain;
    Lexicon lexicon;
    double epsilon = 0.0;

    void validate(std::size_t num_signs) const {
        if (kind == ChannelKind::plain) return;
        lexicon.validate();
        require(lexicon.size() == num_signs, "channel: lexicon size != sign inventory size");
        require(epsilon >= 0.0 && epsilon < 1.0, "channel: epsilon must be in [0,1)");
    }
};

struct GameConfig {
    std::size_t iterations = 200;
    Seed seed{};
    AcceptanceMode mode = AcceptanceMode::mh;
    std::size_t resample_params_every = 1;
    bool update_parameters = true;  // false keeps pi, mu, phi fixed (oracle comparisons)
    ObjectOrder order = ObjectOrder::fixed;
};

struct AgentSpec {
    std::size_t K = 3;
    std::size_t W = 3;
    Hyper hyper;
};

struct Agent {
    InternalState state;
    Stream rng;
    std::vector<int> private_signs;  // own record of w; mirrors the shared signs unless mode == none
    std::vector<int> last_proposal;
};

struct TurnResult {
    bool accepted = false;
    int proposed = 0;  // speaker's sample
    int heard = 0;     // listener's reading after the channel
    int new_w = 0;
};

struct IterationRecord {
    MetricsReport report;
    std::vector<int> signs;
};

struct GameTrace {
    std::vector<IterationRecord> records;
    std::vector<InternalState> initial_states;
    std::vector<InternalState> final_states;
    SharedSigns initial_signs;
    SharedSigns final_signs;
    std::vector<std::vector<int>> final_private_signs;
};

namespace streams {
inline constexpr std::uint64_t kInit = 0x1417;
inline constexpr std::uint64_t kAgent = 0xA6E7;
inline constexpr std::uint64_t kChannel = 0xC4A7;
inline constexpr std::uint64_t kGame = 0x6A3E;
}  // namespace streams

// Log of the unnormalized coupled joint over all agents.
inline double target_log_score(std::span<const InternalState> states, const SharedSigns& signs,
                               const Dataset& ds) {
    require(signs.size() == ds.num_objects(), "target_log_score: signs length != N");
    double total = 0.0;
    for (const auto& st : states) {
        total += log_prior(st);
        for (std::size_t i = 0; i < ds.num_objects(); ++i) {
            const auto k = static_cast<std::size_t>(st.z[i]);
            total += std::log(st.pi[k]) + loglik_obs(st, ds, i) +
                     std::log(st.phi[k][static_cast<std::size_t>(signs.w[i])]);
        }
    }
    return total;
}

// Signs an agent conditions on: its private record when agents do not
// communicate, the shared signs otherwise.
inline std::span<const int> signs_seen_by(const Agent& agent, const SharedSigns& shared, AcceptanceMode mode) {
    return mode == AcceptanceMode::none ? std::span<const int>(agent.private_signs)
                                        : std::span<const int>(shared.w);
}

namespace detail {

inline int interpret(const SignChannel& channel, const InternalState& listener, std::size_t i, int proposed,
                     Stream& channel_rng) {
    if (channel.kind == ChannelKind::plain) return proposed;
    const auto y = utter(channel.lexicon, proposed, channel.epsilon, channel_rng);
    const auto& row = listener.phi[static_cast<std::size_t>(listener.z[i])];
    int best = -1;
    double best_score = kNegInf;
    for (std::size_t w = 0; w < channel.lexicon.size(); ++w) {
        if (row[w] <= 0.0) continue;
        const double s = word_log_likelihood(channel.lexicon, y.symbols, w, channel.epsilon) + std::log(row[w]);
        if (s > best_score) {
            best_score = s;
            best = static_cast<int>(w);
        }
    }
    if (best < 0) throw NoHypothesis("channel: listener cannot read utterance '" + y.symbols + "'");
    return best;
}

}  // namespace detail

// One speaker addresses one or more listeners about object i. The first
// listener reads the utterance; the MH ratio is the product of every
// listener's phi ratio.
inline TurnResult turn(Agent& speaker, std::span<Agent* const> listeners, const Dataset& ds, SharedSigns& signs,
                       std::size_t i, AcceptanceMode mode, const SignChannel& channel, Stream& channel_rng) {
    require(i < signs.size(), "turn: object index out of range");
    require(!listeners.empty(), "turn: no listener");
    TurnResult r;
    r.proposed = sample_sign(speaker.state, i, speaker.rng);
    speaker.last_proposal[i] = r.proposed;
    Agent& first = *listeners.front();
    r.heard = detail::interpret(channel, first.state, i, r.proposed, channel_rng);

    switch (mode) {
        case AcceptanceMode::always:
            r.accepted = true;
            break;
        case AcceptanceMode::none:
            r.accepted = false;
            speaker.private_signs[i] = r.proposed;
            break;
        case AcceptanceMode::mh: {
            const int current = signs.w[i];
            double ratio = 1.0;
            if (listeners.size() == 1) {
                ratio = acceptance_probability(first.state, i, r.heard, current);
            } else {
                // Unclipped product over listeners, clipped once.
                for (const Agent* l : listeners) {
                    const auto& row = l->state.phi[static_cast<std::size_t>(l->state.z[i])];
                    const double den = row[static_cast<std::size_t>(current)];
                    ratio *= den == 0.0 ? std::numeric_limits<double>::infinity()
                                        : row[static_cast<std::size_t>(r.heard)] / den;
                }
                ratio = std::min(1.0, ratio);
            }
            r.accepted = ratio >= 1.0 || first.rng.uniform() < ratio;
            break;
        }
    }
    if (r.accepted) {
        signs.w[i] = r.heard;
        for (Agent* l : listeners) l->private_signs[i] = r.heard;
        speaker.private_signs[i] = r.heard;
    }
    r.new_w = signs.w[i];
    for (Agent* l : listeners) {
        const int w = mode == AcceptanceMode::none ? l->private_signs[i] : signs.w[i];
        gibbs_update_z(l->state, ds, i, w, l->rng);
    }
    return r;
}

inline TurnResult turn(Agent& speaker, Agent& listener, const Dataset& ds, SharedSigns& signs, std::size_t i,
                       AcceptanceMode mode, const SignChannel& channel, Stream& channel_rng) {
    Agent* const ls[] = {&listener};
    return turn(speaker, std::span<Agent* const>(ls), ds, signs, i, mode, channel, channel_rng);
}

// Metrics of one snapshot: kappa over MAP signs (mean over agent pairs),
// ARI of each agent's z against the truth, joint score of the shared signs.
inline MetricsReport compute_report(std::span<const InternalState> states, const SharedSigns& signs,
                                    const Dataset& ds, double acceptance_rate, std::size_t iteration,
                                    std::span<const std::vector<int>> sampled = {}) {
    MetricsReport r;
    r.iteration = iteration;
    r.acceptance_rate = acceptance_rate;
    std::vector<std::vector<int>> maps(states.size());
    for (std::size_t a = 0; a < states.size(); ++a) {
        for (std::size_t i = 0; i < ds.num_objects(); ++i) maps[a].push_back(map_sign(states[a], i));
        r.ari.push_back(ari(states[a].z, ds.truth));
    }
    double ksum = 0.0, ssum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = a + 1; b < states.size(); ++b) {
            ksum += kappa(maps[a], maps[b]);
            if (sampled.size() == states.size()) ssum += kappa(sampled[a], sampled[b]);
            ++pairs;
        }
    r.kappa = pairs ? ksum / static_cast<double>(pairs) : 1.0;
    r.kappa_sampled = pairs ? ssum / static_cast<double>(pairs) : 1.0;
    r.joint_log_score = target_log_score(states, signs, ds);
    return r;
}

// Agents and shared signs at iteration zero, before any turn.
struct GameSetup {
    std::vector<Agent> agents;
    SharedSigns signs;
    Stream game_rng;
    Stream channel_rng;
};

inline GameSetup setup_game(const Dataset& ds, std::span<const AgentSpec> specs, const GameConfig& cfg) {
    require(specs.size() >= 2, "naming game: at least two agents are required");
    require(specs.size() <= ds.num_agents(), "naming game: more agents than the dataset provides");
    require(cfg.resample_params_every >= 1, "naming game: resample_params_every must be >= 1");
    for (const auto& s : specs) require(s.W == specs.front().W, "naming game: agents must share the sign inventory");
    GameSetup g;
    g.game_rng = Stream(cfg.seed, stream_id({streams::kGame}));
    g.channel_rng = Stream(cfg.seed, stream_id({streams::kChannel}));
    for (std::size_t a = 0; a < specs.size(); ++a) {
        Stream init_rng(cfg.seed, stream_id({streams::kInit, a}));
        Agent agent{init_state(ds, a, specs[a].K, specs[a].W, specs[a].hyper, init_rng),
                    Stream(cfg.seed, stream_id({streams::kAgent, a})), {}, {}};
        g.agents.push_back(std::move(agent));
    }
    const std::size_t N = ds.num_objects();
    g.signs.w.resize(N);
    for (std::size_t i = 0; i < N; ++i) g.signs.w[i] = sample_sign(g.agents[0].state, i, g.game_rng);
    for (auto& agent : g.agents) {
        agent.private_signs = g.signs.w;
        if (cfg.mode == AcceptanceMode::none)
            for (std::size_t i = 0; i < N; ++i) agent.private_signs[i] = sample_sign(agent.state, i, g.game_rng);
        agent.last_proposal = agent.private_signs;
    }
    return g;
}

inline std::vector<InternalState> states_of(const std::vector<Agent>& agents) {
    std::vector<InternalState> out;
    for (const auto& a : agents) out.push_back(a.state);
    return out;
}

// One full iteration: every agent speaks once per object (speaker s addresses
// everyone else, roles rotating), then optional parameter resampling plus a
// z sweep. Returns (accepted, proposals).
inline std::pair<std::size_t, std::size_t> play_iteration(GameSetup& g, const Dataset& ds, const GameConfig& cfg,
                                                          const SignChannel& channel, std::size_t iteration) {
    const std::size_t N = ds.num_objects();
    const std::size_t A = g.agents.size();
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::size_t accepted = 0, proposals = 0;
    for (std::size_t s = 0; s < A; ++s) {
        if (cfg.order == ObjectOrder::shuffled) std::shuffle(order.begin(), order.end(), g.game_rng);
        std::vector<Agent*> listeners;
        for (std::size_t k = 1; k < A; ++k) listeners.push_back(&g.agents[(s + k) % A]);
        for (std::size_t i : order) {
            const auto r = turn(g.agents[s], listeners, ds, g.signs, i, cfg.mode, channel, g.channel_rng);
            accepted += r.accepted ? 1 : 0;
            ++proposals;
        }
    }
    if (cfg.update_parameters && (iteration + 1) % cfg.resample_params_every == 0) {
        for (auto& agent : g.agents) {
            const auto view = signs_seen_by(agent, g.signs, cfg.mode);
            const std::vector<int> seen(view.begin(), view.end());
            resample_parameters(agent.state, ds, seen, agent.rng);
            for (std::size_t i = 0; i < N; ++i) gibbs_update_z(agent.state, ds, i, seen[i], agent.rng);
        }
    }
    return {accepted, proposals};
}

inline GameTrace run_naming_game(const Dataset& ds, std::span<const AgentSpec> specs, const GameConfig& cfg,
                                 const SignChannel& channel = {}) {
    auto g = setup_game(ds, specs, cfg);
    channel.validate(specs.front().W);
    GameTrace trace;
    trace.initial_states = states_of(g.agents);
    trace.initial_signs = g.signs;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const auto [accepted, proposals] = play_iteration(g, ds, cfg, channel, it);
        const auto states = states_of(g.agents);
        std::vector<std::vector<int>> sampled;
        for (const auto& a : g.agents) sampled.push_back(a.last_proposal);
        IterationRecord rec;
        rec.report = compute_report(states, g.signs, ds,
                                    static_cast<double>(accepted) / static_cast<double>(proposals), it + 1, sampled);
        rec.signs = g.signs.w;
        trace.records.push_back(std::move(rec));
    }
    trace.final_states = states_of(g.agents);
    trace.final_signs = g.signs;
    for (const auto& a : g.agents) trace.final_private_signs.push_back(a.private_signs);
    return trace;
}

inline nlohmann::json to_json(const IterationRecord& rec) {
    const auto& r = rec.report;
    return {{"iteration", r.iteration},         {"acceptance_rate", r.acceptance_rate},
            {"kappa", r.kappa},                 {"kappa_sampled", r.kappa_sampled},
            {"ari_per_agent", r.ari},           {"joint_log_score", r.joint_log_score},
            {"signs", rec.signs}};
}

inline nlohmann::json checkpoint_json(const GameTrace& trace) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& s : trace.final_states) states.push_back(to_json(s));
    return {{"states", states}, {"signs", trace.final_signs.w}, {"private_signs", trace.final_private_signs}};
}

}  // namespace emerge
