#pragma once

// Agreement measures between sign systems and category assignments.

#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "emerge/error.hpp"
#include "emerge/format.hpp"

namespace emerge {

// Cohen's kappa between two label vectors.
inline double kappa(std::span<const int> a, std::span<const int> b) {
    require(a.size() == b.size(), "kappa: length mismatch");
    require(!a.empty(), "kappa: empty input");
    const double n = static_cast<double>(a.size());
    std::map<int, double> ca, cb;
    double agree = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
        if (a[i] == b[i]) agree += 1.0;
    }
    const double p_o = agree / n;
    double p_e = 0.0;
    for (const auto& [label, count] : ca) {
        auto it = cb.find(label);
        if (it != cb.end()) p_e += (count / n) * (it->second / n);
    }
    if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

// Adjusted Rand index (Hubert & Arabie) from the contingency table.
inline double ari(std::span<const int> labels, std::span<const int> truth) {
    require(labels.size() == truth.size(), "ari: length mismatch");
    const std::size_t n = labels.size();
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{labels[i], truth[i]}] += 1.0;
        rows[labels[i]] += 1.0;
        cols[truth[i]] += 1.0;
    }
    auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_joint = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, c] : joint) sum_joint += comb2(c);
    for (const auto& [key, c] : rows) sum_rows += comb2(c);
    for (const auto& [key, c] : cols) sum_cols += comb2(c);
    const double total = comb2(static_cast<double>(n));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    // Both partitions trivial (all-in-one or all-singletons) and identical.
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

struct MetricsReport {
    std::size_t iteration = 0;
    double kappa = 0.0;
    double kappa_sampled = 0.0;
    std::vector<double> ari;  // per agent
    double acceptance_rate = 0.0;
    double joint_log_score = 0.0;
};

inline void write_csv_header(std::ostream& os, std::size_t num_agents) {
    os << "iteration,kappa";
    for (std::size_t a = 0; a < num_agents; ++a) os << ",ari_" << static_cast<char>('A' + a);
    os << ",acceptance_rate,joint_log_score\n";
}

inline void write_csv_row(std::ostream& os, const MetricsReport& r) {
    os << r.iteration << ',' << format_double(r.kappa);
    for (double x : r.ari) os << ',' << format_double(x);
    os << ',' << format_double(r.acceptance_rate) << ',' << format_double(r.joint_log_score) << '\n';
}

}  // namespace emerge
