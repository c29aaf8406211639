#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "emerge/dataset.hpp"

using namespace emerge;

namespace {

DatasetConfig easy_config(std::uint64_t seed) {
    DatasetConfig c;
    c.k_true = 3;
    c.num_objects = 30;
    c.num_agents = 2;
    c.dims = {2, 3};
    c.cluster_sep = 6.0;
    c.noise_sd = 1.0;
    c.seed = Seed{seed};
    return c;
}

}  // namespace

TEST(GenerateDataset, ShapeAndTruth) {
    const auto ds = generate_dataset(easy_config(1));
    EXPECT_NO_THROW(ds.validate());
    EXPECT_EQ(ds.num_agents(), 2u);
    EXPECT_EQ(ds.num_objects(), 30u);
    EXPECT_EQ(ds.num_modalities(), 2u);
    for (int t : ds.truth) {
        EXPECT_GE(t, 0);
        EXPECT_LT(t, 3);
    }
}

TEST(GenerateDataset, RoundRobinBalance) {
    auto c = easy_config(2);
    c.num_objects = 300;
    const auto ds = generate_dataset(c);
    std::map<int, int> counts;
    for (int t : ds.truth) ++counts[t];
    ASSERT_EQ(counts.size(), 3u);
    for (const auto& [k, n] : counts) EXPECT_EQ(n, 100);
}

TEST(GenerateDataset, ZeroNoiseGivesTransformedMeans) {
    auto c = easy_config(3);
    c.noise_sd = 0.0;
    const auto ds = generate_dataset(c);
    const auto transforms = default_transforms(2, c.dims);
    const auto means = ds.meta.at("cluster_means").get<std::vector<std::vector<std::vector<double>>>>();
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t i = 0; i < ds.num_objects(); ++i)
            for (std::size_t m = 0; m < c.dims.size(); ++m) {
                const auto& mu = means[m][static_cast<std::size_t>(ds.truth[i])];
                const auto& t = transforms[a][m];
                const std::size_t D = c.dims[m];
                for (std::size_t r = 0; r < D; ++r) {
                    double expect = t.offset[r];
                    for (std::size_t k = 0; k < D; ++k) expect += t.rotation[r * D + k] * mu[k];
                    EXPECT_EQ(ds.observations[a][i][m][r], expect);
                }
            }
}

TEST(GenerateDataset, ScenarioOnlyChangesLabels) {
    auto p = easy_config(4);
    auto q = p;
    q.scenario = Scenario::interoceptive;
    const auto a = generate_dataset(p);
    const auto b = generate_dataset(q);
    EXPECT_EQ(a.observations, b.observations);
    EXPECT_EQ(a.truth, b.truth);
    EXPECT_NE(a.modality_labels, b.modality_labels);
    EXPECT_EQ(b.modality_labels[0], "interoceptive-cardiac");
}

TEST(GenerateDataset, SameSeedByteIdenticalSerialization) {
    const auto a = to_json(generate_dataset(easy_config(5))).dump();
    const auto b = to_json(generate_dataset(easy_config(5))).dump();
    EXPECT_EQ(a, b);
    const auto c = to_json(generate_dataset(easy_config(6))).dump();
    EXPECT_NE(a, c);
}

TEST(GenerateDataset, ClusterSeparation) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto c = easy_config(seed);
        c.noise_sd = 1.5;
        const auto ds = generate_dataset(c);
        const auto means = ds.meta.at("cluster_means").get<std::vector<std::vector<std::vector<double>>>>();
        for (const auto& per_m : means)
            for (std::size_t j = 0; j < per_m.size(); ++j)
                for (std::size_t k = j + 1; k < per_m.size(); ++k) {
                    double d2 = 0.0;
                    for (std::size_t d = 0; d < per_m[j].size(); ++d)
                        d2 += (per_m[j][d] - per_m[k][d]) * (per_m[j][d] - per_m[k][d]);
                    EXPECT_GE(std::sqrt(d2), c.cluster_sep * c.noise_sd);
                }
    }
}

TEST(GenerateDataset, NearestMeanRecoversTruthWhenNoiseless) {
    auto c = easy_config(7);
    c.noise_sd = 0.0;
    c.cluster_sep = 6.0;
    const auto ds = generate_dataset(c);
    const auto means = ds.meta.at("cluster_means").get<std::vector<std::vector<std::vector<double>>>>();
    // Agent 0 sees the identity transform.
    int correct = 0;
    for (std::size_t i = 0; i < ds.num_objects(); ++i) {
        double best = 1e300;
        int arg = -1;
        for (std::size_t k = 0; k < c.k_true; ++k) {
            double d2 = 0.0;
            for (std::size_t m = 0; m < c.dims.size(); ++m)
                for (std::size_t d = 0; d < c.dims[m]; ++d) {
                    const double r = ds.observations[0][i][m][d] - means[m][k][d];
                    d2 += r * r;
                }
            if (d2 < best) {
                best = d2;
                arg = static_cast<int>(k);
            }
        }
        correct += arg == ds.truth[i] ? 1 : 0;
    }
    EXPECT_EQ(correct, static_cast<int>(ds.num_objects()));
}

TEST(GenerateDataset, RejectsBadTransforms) {
    auto c = easy_config(8);
    c.transforms = default_transforms(2, c.dims);
    c.transforms[1][0].rotation.pop_back();
    EXPECT_THROW(generate_dataset(c), InvalidParameter);

    c.transforms = default_transforms(2, c.dims);
    c.transforms[1][0].rotation[0] = 2.0;  // not orthogonal
    EXPECT_THROW(generate_dataset(c), InvalidParameter);
}

TEST(GenerateDataset, RejectsBadSizes) {
    auto c = easy_config(9);
    c.k_true = 31;
    EXPECT_THROW(generate_dataset(c), InvalidParameter);
    c = easy_config(9);
    c.noise_sd = -1.0;
    EXPECT_THROW(generate_dataset(c), InvalidParameter);
}

TEST(DatasetJson, RoundTrip) {
    const auto ds = generate_dataset(easy_config(10));
    const auto back = dataset_from_json(nlohmann::json::parse(to_json(ds).dump()));
    EXPECT_EQ(back.observations, ds.observations);
    EXPECT_EQ(back.truth, ds.truth);
    EXPECT_EQ(back.dims, ds.dims);
    EXPECT_EQ(back.modality_labels, ds.modality_labels);
}
