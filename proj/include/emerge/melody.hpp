#pragma once

// Fixed-order n-gram note model with additive smoothing; composition under
// hard chord masks is single-site Gibbs sampling from the masked posterior.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/artic.hpp"
#include "emerge/error.hpp"
#include "emerge/rng.hpp"
#include "emerge/stats.hpp"

namespace emerge {

// Rendering of the sentence-start pad in serialized contexts.
inline constexpr char kStartSymbol = '^';

struct NgramModel {
    std::size_t order = 2;
    std::string alphabet;
    double delta = 1.0;
    std::map<std::vector<int>, std::vector<double>> counts;  // context -> per-note counts

    std::size_t vocab() const { return alphabet.size(); }
    int start_index() const { return static_cast<int>(alphabet.size()); }

    int index_of(char note) const {
        const auto at = alphabet.find(note);
        require(at != std::string::npos, std::string("melody: unknown note '") + note + "'");
        return static_cast<int>(at);
    }

    std::vector<int> encode(std::string_view seq) const {
        std::vector<int> out;
        out.reserve(seq.size());
        for (char c : seq) out.push_back(index_of(c));
        return out;
    }

    // The n-1 notes preceding position t, padded with the start index.
    std::vector<int> context(const std::vector<int>& seq, std::size_t t) const {
        std::vector<int> ctx(order - 1, start_index());
        for (std::size_t j = 0; j + 1 < order; ++j) {
            const std::size_t back = order - 1 - j;  // distance from t
            if (t >= back) ctx[j] = seq[t - back];
        }
        return ctx;
    }

    double count(const std::vector<int>& ctx, int note) const {
        auto it = counts.find(ctx);
        return it == counts.end() ? 0.0 : it->second[static_cast<std::size_t>(note)];
    }

    double context_total(const std::vector<int>& ctx) const {
        auto it = counts.find(ctx);
        if (it == counts.end()) return 0.0;
        double s = 0.0;
        for (double c : it->second) s += c;
        return s;
    }

    double prob(const std::vector<int>& ctx, int note) const {
        const double V = static_cast<double>(vocab());
        return (count(ctx, note) + delta) / (context_total(ctx) + delta * V);
    }
};

inline NgramModel fit_ngram(const std::vector<std::string>& corpus, const std::string& alphabet, std::size_t order,
                      double delta) {
    require(order >= 1, "melody fit: order must be >= 1");
    require(delta > 0.0, "melody fit: delta must be positive");
    require(!alphabet.empty(), "melody fit: empty alphabet");
    NgramModel model;
    model.order = order;
    model.alphabet = alphabet;
    model.delta = delta;
    for (const auto& line : corpus) {
        const auto seq = model.encode(line);
        for (std::size_t t = 0; t < seq.size(); ++t) {
            auto& row = model.counts[model.context(seq, t)];
            if (row.empty()) row.assign(model.vocab(), 0.0);
            row[static_cast<std::size_t>(seq[t])] += 1.0;
        }
    }
    return model;
}

inline double log_prob(const NgramModel& model, std::string_view sequence) {
    const auto seq = model.encode(sequence);
    double lp = 0.0;
    for (std::size_t t = 0; t < seq.size(); ++t) lp += std::log(model.prob(model.context(seq, t), seq[t]));
    return lp;
}

inline ProbVector next_note_distribution(const NgramModel& model, const std::vector<int>& ctx) {
    std::vector<double> p(model.vocab());
    for (std::size_t v = 0; v < p.size(); ++v) p[v] = model.prob(ctx, static_cast<int>(v));
    return ProbVector::from_weights(std::move(p));
}

inline std::string sample_forward(const NgramModel& model, std::size_t length, Stream& rng) {
    std::vector<int> seq;
    for (std::size_t t = 0; t < length; ++t) {
        seq.push_back(-1);
        seq[t] = static_cast<int>(sample_categorical(next_note_distribution(model, model.context(seq, t)), rng));
    }
    std::string out;
    for (int v : seq) out += model.alphabet[static_cast<std::size_t>(v)];
    return out;
}

inline double perplexity(const NgramModel& model, const std::vector<std::string>& heldout) {
    require(!heldout.empty(), "perplexity: empty held-out set");
    double lp = 0.0;
    std::size_t len = 0;
    for (const auto& s : heldout) {
        lp += log_prob(model, s);
        len += s.size();
    }
    require(len > 0, "perplexity: held-out set has no notes");
    return std::exp(-lp / static_cast<double>(len));
}

// allowed[t] lists the notes permitted at position t.
struct MelodyConstraint {
    std::vector<std::string> allowed;

    std::size_t length() const { return allowed.size(); }

    static MelodyConstraint unconstrained(const std::string& alphabet, std::size_t length) {
        return {std::vector<std::string>(length, alphabet)};
    }

    bool satisfied_by(std::string_view seq) const {
        if (seq.size() != allowed.size()) return false;
        for (std::size_t t = 0; t < seq.size(); ++t)
            if (allowed[t].find(seq[t]) == std::string::npos) return false;
        return true;
    }
};

// Single-site Gibbs chain over note strings restricted to a MelodyConstraint.
class ConstrainedGibbs {
public:
    ConstrainedGibbs(const NgramModel& model, MelodyConstraint constraint, std::optional<std::string> init)
        : model_(model), constraint_(std::move(constraint)) {
        for (std::size_t t = 0; t < constraint_.length(); ++t) {
            require(!constraint_.allowed[t].empty(),
                    "constraint: position " + std::to_string(t) + " has no allowed note");
            for (char c : constraint_.allowed[t]) (void)model_.index_of(c);
        }
        std::string start;
        if (init) {
            require(constraint_.satisfied_by(*init), "constrained gibbs: init violates the constraint");
            start = *init;
        } else {
            for (const auto& a : constraint_.allowed) start += a.front();
        }
        seq_ = model_.encode(start);
    }

    // Resample every position once, left to right.
    void sweep(Stream& rng) {
        for (std::size_t t = 0; t < seq_.size(); ++t) resample_site(t, rng);
    }

    std::string current() const {
        std::string out;
        for (int v : seq_) out += model_.alphabet[static_cast<std::size_t>(v)];
        return out;
    }

private:
    void resample_site(std::size_t t, Stream& rng) {
        const auto& allowed = constraint_.allowed[t];
        if (allowed.size() == 1) {
            seq_[t] = model_.index_of(allowed.front());
            return;
        }
        const std::size_t last = std::min(seq_.size(), t + model_.order);
        std::vector<double> lw;
        std::vector<int> cand;
        for (char c : allowed) {
            seq_[t] = model_.index_of(c);
            double l = 0.0;
            for (std::size_t s = t; s < last; ++s) l += std::log(model_.prob(model_.context(seq_, s), seq_[s]));
            lw.push_back(l);
            cand.push_back(seq_[t]);
        }
        seq_[t] = cand[sample_categorical(ProbVector::from_log_weights(lw), rng)];
    }

    const NgramModel& model_;
    MelodyConstraint constraint_;
    std::vector<int> seq_;
};

inline std::string gibbs_sample_constrained(const NgramModel& model, const MelodyConstraint& constraint,
                                            std::size_t sweeps, Stream& rng,
                                            std::optional<std::string> init = std::nullopt) {
    ConstrainedGibbs chain(model, constraint, std::move(init));
    for (std::size_t s = 0; s < sweeps; ++s) chain.sweep(rng);
    return chain.current();
}

// One fixed motif per sign: base-V digits of the sign id, at least three notes.
inline std::vector<std::string> default_motifs(std::size_t num_signs, const std::string& alphabet) {
    require(alphabet.size() >= 2, "default_motifs: need at least two notes");
    std::size_t len = 3;
    double capacity = std::pow(static_cast<double>(alphabet.size()), 3.0);
    while (capacity < static_cast<double>(num_signs)) {
        ++len;
        capacity *= static_cast<double>(alphabet.size());
    }
    std::vector<std::string> motifs;
    for (std::size_t w = 0; w < num_signs; ++w) {
        std::string m(len, alphabet[0]);
        std::size_t x = w * 7 + 1;  // spread ids so neighboring signs differ early
        for (std::size_t j = 0; j < len; ++j) {
            m[j] = alphabet[x % alphabet.size()];
            x /= alphabet.size();
        }
        motifs.push_back(std::move(m));
    }
    // Distinctness is required for noiseless decoding; fall back to plain digits.
    for (std::size_t a = 0; a < motifs.size(); ++a)
        for (std::size_t b = a + 1; b < motifs.size(); ++b)
            if (motifs[a] == motifs[b]) {
                for (std::size_t w = 0; w < num_signs; ++w) {
                    std::size_t x = w;
                    for (std::size_t j = 0; j < len; ++j) {
                        motifs[w][j] = alphabet[x % alphabet.size()];
                        x /= alphabet.size();
                    }
                }
                return motifs;
            }
    return motifs;
}

// Motifs as a single-variant lexicon over the note alphabet.
inline Lexicon motif_lexicon(const std::vector<std::string>& motifs, const std::string& alphabet) {
    Lexicon lex;
    lex.alphabet = alphabet;
    for (const auto& m : motifs) lex.words.push_back({{m, 1.0}});
    lex.validate();
    return lex;
}

inline nlohmann::json to_json(const NgramModel& model) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [ctx, c] : model.counts) {
        std::string key;
        for (int v : ctx) key += v == model.start_index() ? kStartSymbol : model.alphabet[static_cast<std::size_t>(v)];
        rows.push_back({{"context", key}, {"counts", c}});
    }
    return {{"order", model.order}, {"alphabet", model.alphabet}, {"delta", model.delta}, {"counts", rows}};
}

inline NgramModel ngram_from_json(const nlohmann::json& j) {
    try {
        NgramModel model;
        model.order = j.at("order").get<std::size_t>();
        model.alphabet = j.at("alphabet").get<std::string>();
        model.delta = j.at("delta").get<double>();
        require(model.order >= 1 && model.delta > 0.0 && !model.alphabet.empty(), "ngram JSON: bad header");
        for (const auto& row : j.at("counts")) {
            const auto key = row.at("context").get<std::string>();
            require(key.size() + 1 == model.order, "ngram JSON: context length != order - 1");
            std::vector<int> ctx;
            for (char c : key) ctx.push_back(c == kStartSymbol ? model.start_index() : model.index_of(c));
            auto c = row.at("counts").get<std::vector<double>>();
            require(c.size() == model.vocab(), "ngram JSON: count row length != alphabet size");
            model.counts[ctx] = std::move(c);
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("ngram JSON: ") + e.what());
    }
}

}  // namespace emerge
