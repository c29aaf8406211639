#pragma once

// Double-articulation sign channel. A word is pronounced as one of its
// phoneme-string variants; the string then passes through a substitution-only
// noisy channel. Decoding marginalizes over variants, and streams of words are
// segmented on a lattice over symbol positions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emerge/error.hpp"
#include "emerge/rng.hpp"
#include "emerge/stats.hpp"

namespace emerge {

struct Variant {
    std::string pron;
    double prob = 1.0;
};

struct Lexicon {
    std::string alphabet;                     // one char per phoneme symbol
    std::vector<std::vector<Variant>> words;  // words[w] = pronunciation variants

    std::size_t size() const { return words.size(); }
    std::size_t word_length(std::size_t w) const { return words[w].front().pron.size(); }
    bool in_alphabet(char c) const { return alphabet.find(c) != std::string::npos; }

    void validate() const {
        require(!words.empty(), "lexicon: no words");
        require(!alphabet.empty(), "lexicon: empty alphabet");
        for (std::size_t w = 0; w < words.size(); ++w) {
            const auto& vs = words[w];
            require(!vs.empty(), "lexicon: word " + std::to_string(w) + " has no variants");
            double total = 0.0;
            for (const auto& v : vs) {
                require(v.prob >= 0.0, "lexicon: negative variant probability");
                require(!v.pron.empty(), "lexicon: empty pronunciation");
                require(v.pron.size() == vs.front().pron.size(),
                        "lexicon: variants of word " + std::to_string(w) + " differ in length");
                for (char c : v.pron)
                    require(in_alphabet(c), std::string("lexicon: symbol '") + c + "' not in alphabet");
                total += v.prob;
            }
            require(std::abs(total - 1.0) <= kSimplexTol,
                    "lexicon: variant probabilities of word " + std::to_string(w) + " do not sum to 1");
        }
    }
};

struct Utterance {
    std::string symbols;
    std::optional<int> source_word;
    std::optional<std::string> source_pron;
};

// Built-in lexicon: CVC words over "kmpst" x "aeiou"; word 0 carries a second
// pronunciation variant.
inline Lexicon default_lexicon(std::size_t num_words) {
    const std::string cons = "kmpst";
    const std::string vows = "aeiou";
    const std::size_t total = cons.size() * vows.size() * cons.size();
    require(num_words >= 1 && num_words < total, "default_lexicon: unsupported word count");
    std::vector<std::string> pool;
    for (std::size_t j = 0; j < total; ++j) {
        const std::size_t c = (j * 37) % total;
        pool.push_back({cons[c / 25], vows[(c / 5) % 5], cons[c % 5]});
    }
    Lexicon lex;
    lex.alphabet = cons + vows;
    for (std::size_t w = 0; w < num_words; ++w) lex.words.push_back({{pool[w], 1.0}});
    lex.words[0] = {{pool[0], 0.7}, {pool[num_words], 0.3}};
    return lex;
}

// log p(y | pron) under per-symbol substitution with rate epsilon.
inline double channel_log_likelihood(std::string_view y, std::string_view pron, double epsilon,
                                     std::size_t alphabet_size) {
    if (y.size() != pron.size()) return kNegInf;
    const double keep = std::log1p(-epsilon);
    const double swap = (epsilon > 0.0 && alphabet_size > 1)
                            ? std::log(epsilon / static_cast<double>(alphabet_size - 1))
                            : kNegInf;
    double ll = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) ll += (y[t] == pron[t]) ? keep : swap;
    return ll;
}

// log sum_l p(l | w) p(y | l); symbols outside the alphabet have zero probability.
inline double word_log_likelihood(const Lexicon& lex, std::string_view y, std::size_t w, double epsilon) {
    for (char c : y)
        if (!lex.in_alphabet(c)) return kNegInf;
    std::vector<double> terms;
    for (const auto& v : lex.words[w]) {
        if (v.prob <= 0.0) continue;
        terms.push_back(std::log(v.prob) + channel_log_likelihood(y, v.pron, epsilon, lex.alphabet.size()));
    }
    return terms.empty() ? kNegInf : log_sum_exp(terms);
}

inline Utterance utter(const Lexicon& lex, int w, double epsilon, Stream& rng) {
    require(w >= 0 && static_cast<std::size_t>(w) < lex.size(), "utter: word id out of range");
    require(epsilon >= 0.0 && epsilon < 1.0, "utter: epsilon must be in [0,1)");
    const auto& vs = lex.words[static_cast<std::size_t>(w)];
    std::vector<double> probs;
    for (const auto& v : vs) probs.push_back(v.prob);
    const auto& pron = vs[sample_categorical(ProbVector::from_weights(probs), rng)].pron;
    Utterance u;
    u.source_word = w;
    u.source_pron = pron;
    u.symbols = pron;
    const std::size_t S = lex.alphabet.size();
    if (epsilon > 0.0 && S > 1) {
        for (char& c : u.symbols) {
            if (rng.uniform() >= epsilon) continue;
            const std::size_t at = lex.alphabet.find(c);
            std::size_t r = sample_uniform_index(S - 1, rng);
            if (r >= at) ++r;
            c = lex.alphabet[r];
        }
    }
    return u;
}

inline ProbVector decode_word(const Lexicon& lex, std::string_view y, const ProbVector& prior, double epsilon) {
    require(prior.size() == lex.size(), "decode_word: prior length != word count");
    std::vector<double> lw(lex.size());
    for (std::size_t w = 0; w < lex.size(); ++w)
        lw[w] = prior[w] > 0.0 ? std::log(prior[w]) + word_log_likelihood(lex, y, w, epsilon) : kNegInf;
    if (!std::isfinite(log_sum_exp(lw)))
        throw NoHypothesis("decode_word: no word is compatible with '" + std::string(y) + "'");
    return ProbVector::from_log_weights(lw);
}

enum class SegmentMode { viterbi, ffbs };

struct Segmentation {
    std::vector<int> words;
    std::vector<std::size_t> boundaries;  // end position of each word
    double log_prob = 0.0;                // joint log-probability of this parse and the stream
};

namespace detail {

// Lattice over positions 0..T: edge (t - len_w -> t, w) scored with
// log prior[w] + log p(y[t-len_w, t) | w).
struct SegmentLattice {
    std::vector<std::size_t> lengths;
    std::vector<std::vector<double>> edge;  // edge[t][w]
    std::vector<double> alpha;              // forward log-sums

    SegmentLattice(const Lexicon& lex, std::string_view stream, const ProbVector& prior, double epsilon) {
        require(prior.size() == lex.size(), "segment: prior length != word count");
        const std::size_t T = stream.size();
        for (std::size_t w = 0; w < lex.size(); ++w) lengths.push_back(lex.word_length(w));
        edge.assign(T + 1, std::vector<double>(lex.size(), kNegInf));
        alpha.assign(T + 1, kNegInf);
        alpha[0] = 0.0;
        for (std::size_t t = 1; t <= T; ++t) {
            std::vector<double> terms;
            for (std::size_t w = 0; w < lex.size(); ++w) {
                const std::size_t L = lengths[w];
                if (L > t || prior[w] <= 0.0) continue;
                edge[t][w] = std::log(prior[w]) + word_log_likelihood(lex, stream.substr(t - L, L), w, epsilon);
                terms.push_back(alpha[t - L] + edge[t][w]);
            }
            if (!terms.empty()) alpha[t] = log_sum_exp(terms);
        }
    }
};

}  // namespace detail

inline double stream_log_evidence(const Lexicon& lex, std::string_view stream, const ProbVector& prior,
                                  double epsilon) {
    return detail::SegmentLattice(lex, stream, prior, epsilon).alpha.back();
}

inline Segmentation segment(const Lexicon& lex, std::string_view stream, const ProbVector& prior,
                            double epsilon, SegmentMode mode, Stream& rng) {
    const detail::SegmentLattice lat(lex, stream, prior, epsilon);
    const std::size_t T = stream.size();
    Segmentation seg;
    if (T == 0) return seg;
    if (!std::isfinite(lat.alpha[T])) throw NoHypothesis("segment: no valid segmentation");

    std::vector<std::pair<std::size_t, int>> rev;  // (end, word)
    if (mode == SegmentMode::viterbi) {
        std::vector<double> best(T + 1, kNegInf);
        std::vector<int> back(T + 1, -1);
        best[0] = 0.0;
        for (std::size_t t = 1; t <= T; ++t)
            for (std::size_t w = 0; w < lex.size(); ++w) {
                const std::size_t L = lat.lengths[w];
                if (L > t || !std::isfinite(lat.edge[t][w])) continue;
                const double s = best[t - L] + lat.edge[t][w];
                if (s > best[t]) {
                    best[t] = s;
                    back[t] = static_cast<int>(w);
                }
            }
        for (std::size_t t = T; t > 0; t -= lat.lengths[static_cast<std::size_t>(back[t])])
            rev.emplace_back(t, back[t]);
        seg.log_prob = best[T];
    } else {
        double lp = 0.0;
        for (std::size_t t = T; t > 0;) {
            std::vector<double> lw(lex.size(), kNegInf);
            for (std::size_t w = 0; w < lex.size(); ++w) {
                const std::size_t L = lat.lengths[w];
                if (L <= t) lw[w] = lat.alpha[t - L] + lat.edge[t][w];
            }
            const auto w = sample_categorical(ProbVector::from_log_weights(lw), rng);
            lp += lat.edge[t][w];
            rev.emplace_back(t, static_cast<int>(w));
            t -= lat.lengths[w];
        }
        seg.log_prob = lp;
    }
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
        seg.boundaries.push_back(it->first);
        seg.words.push_back(it->second);
    }
    return seg;
}

inline nlohmann::json to_json(const Lexicon& lex) {
    nlohmann::json alphabet = nlohmann::json::array();
    for (char c : lex.alphabet) alphabet.push_back(std::string(1, c));
    nlohmann::json words = nlohmann::json::array();
    for (std::size_t w = 0; w < lex.size(); ++w) {
        nlohmann::json vs = nlohmann::json::array();
        for (const auto& v : lex.words[w]) vs.push_back({{"pron", v.pron}, {"prob", v.prob}});
        words.push_back({{"id", w}, {"variants", vs}});
    }
    return {{"alphabet", alphabet}, {"words", words}};
}

inline Lexicon lexicon_from_json(const nlohmann::json& j) {
    try {
        Lexicon lex;
        for (const auto& s : j.at("alphabet")) {
            const auto sym = s.get<std::string>();
            require(sym.size() == 1, "lexicon: alphabet symbols must be single characters");
            lex.alphabet += sym;
        }
        const auto& words = j.at("words");
        lex.words.resize(words.size());
        std::vector<bool> seen(words.size(), false);
        for (const auto& wj : words) {
            const auto id = wj.at("id").get<std::size_t>();
            require(id < words.size() && !seen[id], "lexicon: word ids must be 0..W-1 and unique");
            seen[id] = true;
            for (const auto& vj : wj.at("variants"))
                lex.words[id].push_back({vj.at("pron").get<std::string>(), vj.value("prob", 1.0)});
        }
        lex.validate();
        return lex;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("lexicon JSON: ") + e.what());
    }
}

}  // namespace emerge
