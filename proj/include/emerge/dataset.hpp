#pragma once

// Synthetic multimodal datasets: every agent observes the same objects through
// its own private orthogonal transform plus offset.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/error.hpp"
#include "emerge/rng.hpp"
#include "emerge/stats.hpp"

namespace emerge {

enum class Scenario { perceptual, interoceptive };

inline std::string to_string(Scenario s) {
    return s == Scenario::perceptual ? "perceptual" : "interoceptive";
}

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "perceptual") return Scenario::perceptual;
    if (s == "interoceptive") return Scenario::interoceptive;
    throw InvalidParameter("unknown scenario '" + s + "'");
}

// x -> rotation * x + offset, one block per modality.
struct ModalityTransform {
    std::vector<double> rotation;  // row-major D x D
    std::vector<double> offset;    // D
};

using AgentTransform = std::vector<ModalityTransform>;

struct DatasetConfig {
    std::size_t k_true = 3;
    std::size_t num_objects = 30;
    std::size_t num_agents = 2;
    std::vector<std::size_t> dims{2};
    double cluster_sep = 6.0;
    double noise_sd = 1.0;
    std::vector<AgentTransform> transforms;  // empty: default_transforms()
    Scenario scenario = Scenario::perceptual;
    Seed seed{};
};

struct Dataset {
    std::size_t k_true = 0;
    std::vector<std::size_t> dims;
    std::vector<std::string> modality_labels;
    std::vector<int> truth;
    // observations[agent][object][modality][d]
    std::vector<std::vector<std::vector<std::vector<double>>>> observations;
    nlohmann::json meta = nlohmann::json::object();

    std::size_t num_agents() const { return observations.size(); }
    std::size_t num_objects() const { return truth.size(); }
    std::size_t num_modalities() const { return dims.size(); }

    std::span<const double> obs(std::size_t agent, std::size_t object, std::size_t modality) const {
        return observations[agent][object][modality];
    }

    void validate() const {
        require(num_objects() >= 1, "dataset: no objects");
        require(num_agents() >= 1, "dataset: no agents");
        require(num_modalities() >= 1, "dataset: no modalities");
        require(modality_labels.size() == dims.size(), "dataset: label count != modality count");
        for (const auto& per_agent : observations) {
            require(per_agent.size() == num_objects(), "dataset: object count mismatch");
            for (const auto& per_object : per_agent) {
                require(per_object.size() == dims.size(), "dataset: modality count mismatch");
                for (std::size_t m = 0; m < dims.size(); ++m)
                    require(per_object[m].size() == dims[m], "dataset: dimension mismatch");
            }
        }
    }
};

inline std::vector<std::string> modality_labels_for(Scenario s, std::size_t count) {
    static const char* perceptual[] = {"visual", "haptic", "auditory"};
    static const char* interoceptive[] = {"interoceptive-cardiac", "interoceptive-respiratory",
                                          "interoceptive-gastric"};
    std::vector<std::string> out;
    for (std::size_t m = 0; m < count; ++m) {
        if (m < 3)
            out.emplace_back(s == Scenario::perceptual ? perceptual[m] : interoceptive[m]);
        else
            out.push_back(to_string(s) + "-" + std::to_string(m));
    }
    return out;
}

inline ModalityTransform identity_transform(std::size_t dim) {
    ModalityTransform t;
    t.rotation.assign(dim * dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) t.rotation[d * dim + d] = 1.0;
    t.offset.assign(dim, 0.0);
    return t;
}

// Agent 0 sees the identity; agent a > 0 sees a rotation by 0.7a radians in
// the first coordinate plane and an offset of 1.5a on every coordinate.
inline std::vector<AgentTransform> default_transforms(std::size_t num_agents,
                                                      const std::vector<std::size_t>& dims) {
    std::vector<AgentTransform> out(num_agents);
    for (std::size_t a = 0; a < num_agents; ++a) {
        for (std::size_t dim : dims) {
            ModalityTransform t = identity_transform(dim);
            if (a > 0) {
                if (dim >= 2) {
                    const double th = 0.7 * static_cast<double>(a);
                    t.rotation[0] = std::cos(th);
                    t.rotation[1] = -std::sin(th);
                    t.rotation[dim] = std::sin(th);
                    t.rotation[dim + 1] = std::cos(th);
                }
                t.offset.assign(dim, 1.5 * static_cast<double>(a));
            }
            out[a].push_back(std::move(t));
        }
    }
    return out;
}

namespace detail {

inline void check_orthogonal(const ModalityTransform& t, std::size_t dim) {
    require(t.rotation.size() == dim * dim && t.offset.size() == dim,
            "transform dimension mismatch");
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k)
                dot += t.rotation[k * dim + r] * t.rotation[k * dim + c];
            require(std::abs(dot - (r == c ? 1.0 : 0.0)) <= 1e-9, "transform is not orthogonal");
        }
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(s);
}

// K points with pairwise distance >= min_dist; rejection sampling in a box,
// falling back to an evenly spaced line along the first axis.
inline std::vector<std::vector<double>> place_means(std::size_t k, std::size_t dim,
                                                    double min_dist, Stream& rng) {
    const double unit = min_dist > 0.0 ? min_dist : 1.0;
    const double per_axis = std::ceil(std::pow(static_cast<double>(k), 1.0 / static_cast<double>(dim)));
    const double side = 2.0 * unit * per_axis;
    std::vector<std::vector<double>> means;
    for (int attempt = 0; attempt < 10000 && means.size() < k; ++attempt) {
        std::vector<double> p(dim);
        for (double& x : p) x = (rng.uniform() - 0.5) * side;
        bool ok = true;
        for (const auto& q : means)
            if (distance(p, q) < min_dist) ok = false;
        if (ok) means.push_back(std::move(p));
    }
    if (means.size() < k) {
        means.assign(k, std::vector<double>(dim, 0.0));
        for (std::size_t j = 0; j < k; ++j)
            means[j][0] = (static_cast<double>(j) - 0.5 * static_cast<double>(k - 1)) * unit;
    }
    return means;
}

}  // namespace detail

inline nlohmann::json config_to_json(const DatasetConfig& c) {
    return {{"k_true", c.k_true},       {"num_objects", c.num_objects},
            {"num_agents", c.num_agents}, {"dims", c.dims},
            {"cluster_sep", c.cluster_sep}, {"noise_sd", c.noise_sd},
            {"scenario", to_string(c.scenario)}, {"seed", c.seed.value}};
}

inline Dataset generate_dataset(const DatasetConfig& cfg) {
    require(cfg.k_true >= 1 && cfg.num_objects >= 1 && cfg.num_agents >= 1 && !cfg.dims.empty(),
            "generate_dataset: K_true, N, A, M must be >= 1");
    require(cfg.k_true <= cfg.num_objects, "generate_dataset: K_true > N");
    require(cfg.noise_sd >= 0.0, "generate_dataset: noise_sd < 0");
    require(cfg.cluster_sep >= 0.0, "generate_dataset: cluster_sep < 0");
    for (std::size_t d : cfg.dims) require(d >= 1, "generate_dataset: zero dimension");

    const auto transforms =
        cfg.transforms.empty() ? default_transforms(cfg.num_agents, cfg.dims) : cfg.transforms;
    require(transforms.size() == cfg.num_agents, "generate_dataset: one transform per agent required");
    for (const auto& at : transforms) {
        require(at.size() == cfg.dims.size(), "generate_dataset: one transform per modality required");
        for (std::size_t m = 0; m < cfg.dims.size(); ++m) detail::check_orthogonal(at[m], cfg.dims[m]);
    }

    Dataset ds;
    ds.k_true = cfg.k_true;
    ds.dims = cfg.dims;
    ds.modality_labels = modality_labels_for(cfg.scenario, cfg.dims.size());
    ds.truth.resize(cfg.num_objects);
    for (std::size_t i = 0; i < cfg.num_objects; ++i) ds.truth[i] = static_cast<int>(i % cfg.k_true);

    Stream mean_rng(cfg.seed, stream_id({0xDA7A, 0}));
    std::vector<std::vector<std::vector<double>>> means(cfg.dims.size());  // [m][k][d]
    for (std::size_t m = 0; m < cfg.dims.size(); ++m)
        means[m] = detail::place_means(cfg.k_true, cfg.dims[m], cfg.cluster_sep * cfg.noise_sd, mean_rng);

    ds.observations.resize(cfg.num_agents);
    for (std::size_t a = 0; a < cfg.num_agents; ++a) {
        Stream noise_rng(cfg.seed, stream_id({0xDA7A, 1, a}));
        auto& per_agent = ds.observations[a];
        per_agent.resize(cfg.num_objects);
        for (std::size_t i = 0; i < cfg.num_objects; ++i) {
            per_agent[i].resize(cfg.dims.size());
            for (std::size_t m = 0; m < cfg.dims.size(); ++m) {
                const std::size_t dim = cfg.dims[m];
                const auto& mu = means[m][static_cast<std::size_t>(ds.truth[i])];
                const auto& t = transforms[a][m];
                auto& o = per_agent[i][m];
                o.assign(dim, 0.0);
                for (std::size_t r = 0; r < dim; ++r) {
                    double v = t.offset[r];
                    for (std::size_t c = 0; c < dim; ++c) v += t.rotation[r * dim + c] * mu[c];
                    o[r] = v + sample_normal(0.0, cfg.noise_sd, noise_rng);
                }
            }
        }
    }
    ds.meta = config_to_json(cfg);
    ds.meta["modality_labels"] = ds.modality_labels;
    ds.meta["cluster_means"] = means;
    return ds;
}

inline nlohmann::json to_json(const Dataset& ds) {
    return {{"meta", ds.meta}, {"truth", ds.truth}, {"observations", ds.observations}};
}

inline Dataset dataset_from_json(const nlohmann::json& j) {
    try {
        Dataset ds;
        ds.meta = j.at("meta");
        ds.truth = j.at("truth").get<std::vector<int>>();
        ds.observations =
            j.at("observations").get<std::vector<std::vector<std::vector<std::vector<double>>>>>();
        ds.modality_labels = ds.meta.at("modality_labels").get<std::vector<std::string>>();
        ds.k_true = ds.meta.value("k_true", std::size_t{0});
        require(!ds.observations.empty() && !ds.observations[0].empty(), "dataset: empty observations");
        for (const auto& o : ds.observations[0][0]) ds.dims.push_back(o.size());
        ds.validate();
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("dataset JSON: ") + e.what());
    }
}

}  // namespace emerge
