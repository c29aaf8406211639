#pragma once

// Experiment configuration for the batch driver. A config is a JSON document
// with sections dataset, agents, game, channel, oracle and output; every key
// is checked against the published schema (schema/experiment.schema.json)
// before anything runs, and unknown keys are rejected.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/artic.hpp"
#include "emerge/dataset.hpp"
#include "emerge/error.hpp"
#include "emerge/game.hpp"
#include "emerge/melody.hpp"
#include "emerge/oracle.hpp"

namespace emerge {

struct ChannelSettings {
    ChannelKind kind = ChannelKind::plain;
    double epsilon = 0.0;
    std::optional<std::filesystem::path> lexicon;  // articulated; default_lexicon(W) when absent
    std::string alphabet = "CDEFGAB";              // melodic note alphabet
};

struct OracleSettings {
    std::size_t burn_in = 1000;
    std::size_t sweeps = 100000;
    double threshold = 0.05;
    Marginal marginal = Marginal::w_marginal;
    double max_support = kDefaultMaxSupport;
};

struct OutputPaths {
    std::filesystem::path data;
    std::filesystem::path trace;
    std::filesystem::path checkpoint;
    std::filesystem::path metrics;
    std::filesystem::path plot;
    std::filesystem::path tv_report;
    std::filesystem::path posterior;

    // Fill unset paths with default names under dir.
    void default_into(const std::filesystem::path& dir) {
        auto fill = [&](std::filesystem::path& p, const char* name) {
            if (p.empty()) p = dir / name;
        };
        fill(data, "dataset.json");
        fill(trace, "trace.jsonl");
        fill(checkpoint, "checkpoint.json");
        fill(metrics, "metrics.csv");
        fill(plot, "plot.svg");
        fill(tv_report, "tv.csv");
        fill(posterior, "posterior.json");
    }
};

struct ExperimentConfig {
    DatasetConfig dataset;
    std::vector<AgentSpec> agents;
    GameConfig game;
    ChannelSettings channel;
    OracleSettings oracle;
    OutputPaths output;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& section, std::initializer_list<const char*> keys) {
    require(j.is_object(), "config: '" + section + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items())
        require(allowed.count(key) > 0, "config: unknown key '" + key + "' in '" + section + "'");
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline std::size_t get_count(const nlohmann::json& j, const char* key, std::size_t fallback,
                             const std::string& section) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
            "config: '" + section + "." + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

inline Hyper parse_hyper(const nlohmann::json& j) {
    check_keys(j, "agents[].hyper", {"alpha_pi", "alpha_phi", "mu0", "tau2", "sigma2"});
    const Hyper h = hyper_from_json(j);
    require(h.alpha_pi > 0.0 && h.alpha_phi > 0.0, "config: Dirichlet concentrations must be positive");
    require(h.tau2 > 0.0, "config: tau2 must be positive");
    for (double s : h.sigma2) require(s > 0.0, "config: sigma2 entries must be positive");
    return h;
}

inline AgentTransform parse_transform(const nlohmann::json& j) {
    require(j.is_array(), "config: dataset.transforms entries must be arrays (one block per modality)");
    AgentTransform out;
    for (const auto& block : j) {
        check_keys(block, "dataset.transforms[][]", {"rotation", "offset"});
        out.push_back({block.at("rotation").get<std::vector<double>>(), block.at("offset").get<std::vector<double>>()});
    }
    return out;
}

}  // namespace detail

// Parse and validate a config document. Relative lexicon paths resolve
// against base_dir; output paths stay relative to the working directory.
inline ExperimentConfig parse_experiment(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using detail::check_keys;
    using detail::get_count;
    using detail::get_or;
    try {
        check_keys(j, "config", {"dataset", "agents", "game", "channel", "oracle", "output"});
        ExperimentConfig cfg;

        const auto d = j.value("dataset", nlohmann::json::object());
        check_keys(d, "dataset", {"k_true", "num_objects", "num_agents", "dims", "cluster_sep", "noise_sd",
                                  "scenario", "seed", "transforms"});
        auto& dc = cfg.dataset;
        dc.k_true = get_count(d, "k_true", dc.k_true, "dataset");
        dc.num_objects = get_count(d, "num_objects", dc.num_objects, "dataset");
        dc.num_agents = get_count(d, "num_agents", dc.num_agents, "dataset");
        dc.dims = get_or(d, "dims", dc.dims);
        dc.cluster_sep = get_or(d, "cluster_sep", dc.cluster_sep);
        dc.noise_sd = get_or(d, "noise_sd", dc.noise_sd);
        dc.scenario = scenario_from_string(get_or<std::string>(d, "scenario", to_string(dc.scenario)));
        dc.seed = Seed{get_or<std::uint64_t>(d, "seed", 0)};
        if (d.contains("transforms"))
            for (const auto& t : d.at("transforms")) dc.transforms.push_back(detail::parse_transform(t));
        require(dc.k_true >= 1 && dc.k_true <= dc.num_objects, "config: need 1 <= dataset.k_true <= num_objects");
        require(dc.num_agents >= 1, "config: dataset.num_agents must be >= 1");
        require(!dc.dims.empty() && std::all_of(dc.dims.begin(), dc.dims.end(), [](auto x) { return x >= 1; }),
                "config: dataset.dims must be a non-empty list of positive integers");
        require(dc.cluster_sep >= 0.0 && dc.noise_sd >= 0.0, "config: cluster_sep and noise_sd must be >= 0");

        if (j.contains("agents")) {
            require(j.at("agents").is_array(), "config: 'agents' must be an array");
            for (const auto& a : j.at("agents")) {
                check_keys(a, "agents[]", {"K", "W", "hyper"});
                AgentSpec s;
                s.K = get_count(a, "K", s.K, "agents[]");
                s.W = get_count(a, "W", s.W, "agents[]");
                if (a.contains("hyper")) s.hyper = detail::parse_hyper(a.at("hyper"));
                require(s.K >= 1 && s.W >= 1, "config: agents[].K and W must be >= 1");
                if (!s.hyper.sigma2.empty())
                    require(s.hyper.sigma2.size() == dc.dims.size(), "config: sigma2 needs one entry per modality");
                cfg.agents.push_back(std::move(s));
            }
        } else {
            cfg.agents.assign(dc.num_agents, AgentSpec{});
        }
        require(cfg.agents.size() >= 2, "config: at least two agents are required");
        require(cfg.agents.size() <= dc.num_agents, "config: more agents than dataset.num_agents");

        const auto g = j.value("game", nlohmann::json::object());
        check_keys(g, "game", {"iterations", "seed", "mode", "resample_params_every", "update_parameters", "order"});
        auto& gc = cfg.game;
        gc.iterations = get_count(g, "iterations", gc.iterations, "game");
        gc.seed = Seed{get_or<std::uint64_t>(g, "seed", 0)};
        gc.mode = acceptance_mode_from_string(get_or<std::string>(g, "mode", to_string(gc.mode)));
        gc.resample_params_every = get_count(g, "resample_params_every", gc.resample_params_every, "game");
        gc.update_parameters = get_or(g, "update_parameters", gc.update_parameters);
        const auto order = get_or<std::string>(g, "order", "fixed");
        require(order == "fixed" || order == "shuffled", "config: game.order must be 'fixed' or 'shuffled'");
        gc.order = order == "fixed" ? ObjectOrder::fixed : ObjectOrder::shuffled;
        require(gc.resample_params_every >= 1, "config: game.resample_params_every must be >= 1");

        const auto c = j.value("channel", nlohmann::json::object());
        check_keys(c, "channel", {"kind", "epsilon", "lexicon", "alphabet"});
        auto& cc = cfg.channel;
        cc.kind = channel_kind_from_string(get_or<std::string>(c, "kind", "plain"));
        cc.epsilon = get_or(c, "epsilon", 0.0);
        if (c.contains("lexicon")) cc.lexicon = base_dir / c.at("lexicon").get<std::string>();
        cc.alphabet = get_or(c, "alphabet", cc.alphabet);
        require(cc.epsilon >= 0.0 && cc.epsilon < 1.0, "config: channel.epsilon must be in [0,1)");
        require(cc.alphabet.size() >= 2, "config: channel.alphabet needs at least two notes");

        const auto o = j.value("oracle", nlohmann::json::object());
        check_keys(o, "oracle", {"burn_in", "sweeps", "threshold", "marginal", "max_support"});
        auto& oc = cfg.oracle;
        oc.burn_in = get_count(o, "burn_in", oc.burn_in, "oracle");
        oc.sweeps = get_count(o, "sweeps", oc.sweeps, "oracle");
        oc.threshold = get_or(o, "threshold", oc.threshold);
        oc.marginal = marginal_from_string(get_or<std::string>(o, "marginal", to_string(oc.marginal)));
        oc.max_support = get_or(o, "max_support", oc.max_support);
        require(oc.sweeps >= 1, "config: oracle.sweeps must be >= 1");
        require(oc.threshold >= 0.0 && oc.threshold <= 1.0, "config: oracle.threshold must be in [0,1]");

        const auto p = j.value("output", nlohmann::json::object());
        check_keys(p, "output", {"data", "trace", "checkpoint", "metrics", "plot", "tv_report", "posterior"});
        auto path = [&](const char* key) { return std::filesystem::path(get_or<std::string>(p, key, "")); };
        cfg.output = {path("data"),  path("trace"),     path("checkpoint"), path("metrics"),
                      path("plot"),  path("tv_report"), path("posterior")};
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_experiment(const std::filesystem::path& file) {
    std::ifstream in(file);
    require(static_cast<bool>(in), "config: cannot read '" + file.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter("config: '" + file.string() + "' is not valid JSON: " + e.what());
    }
    return parse_experiment(j, file.parent_path());
}

// The sign channel a config describes, for a sign inventory of size W.
inline SignChannel make_channel(const ChannelSettings& s, std::size_t W) {
    SignChannel ch;
    ch.kind = s.kind;
    ch.epsilon = s.epsilon;
    if (s.kind == ChannelKind::articulated) {
        if (s.lexicon) {
            std::ifstream in(*s.lexicon);
            require(static_cast<bool>(in), "channel: cannot read lexicon '" + s.lexicon->string() + "'");
            try {
                ch.lexicon = lexicon_from_json(nlohmann::json::parse(in));
            } catch (const nlohmann::json::exception& e) {
                throw InvalidParameter(std::string("channel: lexicon is not valid JSON: ") + e.what());
            }
        } else {
            ch.lexicon = default_lexicon(W);
        }
    } else if (s.kind == ChannelKind::melodic) {
        ch.lexicon = motif_lexicon(default_motifs(W, s.alphabet), s.alphabet);
    }
    ch.validate(W);
    return ch;
}

}  // namespace emerge
