// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference values come from the brute-force routines in brute.hpp
// and from exhaustive enumeration.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "brute.hpp"
#include "emerge/emerge.hpp"

namespace fs = std::filesystem;
using namespace emerge;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome r;
    try {
        r = check();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failures;
    std::printf("%s [%d] %s: %s\n", r.pass ? "PASS" : "FAIL", id, name.c_str(), r.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::vector<InternalState> two_states(const Dataset& ds, std::size_t K, std::size_t W, std::uint64_t seed) {
    return {init_state(ds, 0, K, W, Hyper{}, Seed{seed}), init_state(ds, 1, K, W, Hyper{}, Seed{seed + 1})};
}

// ---------------------------------------------------------------- 1

Outcome decentralized_equals_centralized() {
    Stream pick(Seed{2024}, 1);
    double worst_exact = 0.0, worst_central = 0.0, worst_time = 0.0;
    for (int inst = 0; inst < 10; ++inst) {
        DatasetConfig dc;
        dc.num_objects = 1 + sample_uniform_index(3, pick);
        dc.k_true = std::min<std::size_t>(2, dc.num_objects);
        dc.dims = {1};
        dc.cluster_sep = 2.0;
        dc.seed = Seed{100 + static_cast<std::uint64_t>(inst)};
        const auto ds = generate_dataset(dc);
        const std::size_t K = 1 + sample_uniform_index(2, pick);
        const std::size_t W = 2 + sample_uniform_index(2, pick);
        const auto states = two_states(ds, K, W, 500 + static_cast<std::uint64_t>(inst) * 10);
        SharedSigns init{std::vector<int>(ds.num_objects(), 0)};

        const auto t0 = Clock::now();
        const auto exact = enumerate_posterior(ds, states, Marginal::w_marginal);
        const auto game = naming_game_w_law(ds, states, init, 1000, 100000, Seed{7 + static_cast<std::uint64_t>(inst)},
                                            AcceptanceMode::mh);
        const auto central = centralized_w_law(ds, states, init, 1000, 100000, Seed{9 + static_cast<std::uint64_t>(inst)});
        worst_time = std::max(worst_time, seconds_since(t0));
        worst_exact = std::max(worst_exact, tv_distance(game.probs(), exact.probs.values()));
        worst_central = std::max(worst_central, tv_distance(game.probs(), central.probs()));
    }
    const bool ok = worst_exact <= 0.05 && worst_central <= 0.05 && worst_time <= 60.0;
    return {ok, "max TV(game, exact) = " + fmt(worst_exact) + ", max TV(game, centralized) = " + fmt(worst_central) +
                    ", max instance time " + fmt(worst_time) + " s"};
}

// ---------------------------------------------------------------- 2

Outcome mh_detailed_balance() {
    double worst_tv = 0.0, worst_balance = 0.0;
    for (std::size_t W = 2; W <= 4; ++W) {
        DatasetConfig dc;
        dc.k_true = 1;
        dc.num_objects = 1;
        dc.dims = {1};
        dc.seed = Seed{W};
        const auto ds = generate_dataset(dc);
        Stream rows(Seed{W}, 77);
        auto sp = init_state(ds, 0, 1, W, Hyper{}, Seed{1});
        auto li = init_state(ds, 1, 1, W, Hyper{}, Seed{2});
        sp.phi[0] = sample_dirichlet_symmetric(1.0, W, rows);
        li.phi[0] = sample_dirichlet_symmetric(1.0, W, rows);

        // Exact conditional and algebraic balance of the turn kernel.
        std::vector<double> target(W);
        for (std::size_t w = 0; w < W; ++w) target[w] = sp.phi[0][w] * li.phi[0][w];
        const auto pi = ProbVector::from_weights(target);
        auto kernel = [&](std::size_t a, std::size_t b) {
            return sp.phi[0][b] * acceptance_probability(li, 0, static_cast<int>(b), static_cast<int>(a));
        };
        for (std::size_t a = 0; a < W; ++a)
            for (std::size_t b = 0; b < W; ++b)
                if (a != b) worst_balance = std::max(worst_balance, std::abs(pi[a] * kernel(a, b) - pi[b] * kernel(b, a)));

        Agent speaker{sp, Stream(Seed{W}, 1), {0}, {0}};
        Agent listener{li, Stream(Seed{W}, 2), {0}, {0}};
        SharedSigns s{{0}};
        Stream ch(Seed{W}, 3);
        for (int t = 0; t < 1000; ++t) turn(speaker, listener, ds, s, 0, AcceptanceMode::mh, SignChannel{}, ch);
        std::vector<double> freq(W, 0.0);
        const int n = 100000;
        for (int t = 0; t < n; ++t) {
            turn(speaker, listener, ds, s, 0, AcceptanceMode::mh, SignChannel{}, ch);
            freq[static_cast<std::size_t>(s.w[0])] += 1.0 / n;
        }
        worst_tv = std::max(worst_tv, tv_distance(freq, pi.values()));
    }
    return {worst_tv <= 0.05 && worst_balance <= 1e-12,
            "max TV(turn chain, phi_sp*phi_li) = " + fmt(worst_tv) + " over W = 2..4, max balance residual " +
                fmt(worst_balance)};
}

// ---------------------------------------------------------------- 3

Outcome emergence() {
    const auto t0 = Clock::now();
    const std::vector<AgentSpec> specs(2, AgentSpec{3, 3, Hyper{}});
    int agreed = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        DatasetConfig dc;
        dc.seed = Seed{seed};
        GameConfig gc;
        gc.seed = Seed{seed * 1000 + 7};
        const auto t = run_naming_game(generate_dataset(dc), specs, gc);
        const auto& r = t.records.back().report;
        const bool ok = r.kappa >= 0.9 && r.ari[0] >= 0.9 && r.ari[1] >= 0.9;
        agreed += ok ? 1 : 0;
    }
    double kappa_sum = 0.0, kappa_abs_max = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DatasetConfig dc;
        dc.seed = Seed{seed};
        GameConfig gc;
        gc.seed = Seed{seed * 1000 + 7};
        gc.mode = AcceptanceMode::none;
        const double k = run_naming_game(generate_dataset(dc), specs, gc).records.back().report.kappa;
        kappa_sum += k;
        kappa_abs_max = std::max(kappa_abs_max, std::abs(k));
    }
    const double mean_none = kappa_sum / 20.0;
    const double elapsed = seconds_since(t0);
    const bool ok = agreed >= 9 && std::abs(mean_none) <= 0.15 && elapsed <= 120.0;
    return {ok, "mh agreement in " + std::to_string(agreed) + "/10 seeds; none-mode mean kappa " + fmt(mean_none) +
                    " (max |kappa| " + fmt(kappa_abs_max) + ") over 20 seeds; " + fmt(elapsed) + " s"};
}

// ---------------------------------------------------------------- 4

struct RandomCase {
    Dataset ds;
    std::vector<InternalState> states;
    std::vector<int> w;
};

RandomCase random_case(std::uint64_t c) {
    Stream r(Seed{c}, 0xACCE);
    DatasetConfig dc;
    dc.num_objects = 1 + sample_uniform_index(6, r);
    dc.k_true = 1 + sample_uniform_index(std::min<std::size_t>(3, dc.num_objects), r);
    dc.dims.clear();
    for (std::size_t m = 0, M = 1 + sample_uniform_index(2, r); m < M; ++m) dc.dims.push_back(1 + sample_uniform_index(3, r));
    dc.cluster_sep = 3.0;
    dc.seed = Seed{c};
    RandomCase rc;
    rc.ds = generate_dataset(dc);
    const std::size_t W = 1 + sample_uniform_index(4, r);
    for (std::size_t a = 0; a < 2; ++a) {
        Hyper h;
        h.alpha_pi = 0.5 + 2.0 * r.uniform();
        h.alpha_phi = 0.5 + 2.0 * r.uniform();
        h.mu0 = r.uniform() - 0.5;
        h.tau2 = 5.0 + 20.0 * r.uniform();
        for (std::size_t m = 0; m < dc.dims.size(); ++m) h.sigma2.push_back(0.5 + 2.0 * r.uniform());
        const std::size_t K = 1 + sample_uniform_index(3, r);
        rc.states.push_back(init_state(rc.ds, a, K, W, h, Seed{c * 7 + a}));
    }
    for (std::size_t i = 0; i < rc.ds.num_objects(); ++i) rc.w.push_back(static_cast<int>(sample_uniform_index(W, r)));
    return rc;
}

double log_density_lib(const InternalState& st, const ParameterPosterior& p) {
    double lp = brute::log_dirichlet(st.pi.values(), p.pi_alpha);
    for (std::size_t k = 0; k < st.K; ++k) {
        lp += brute::log_dirichlet(st.phi[k].values(), p.phi_alpha[k]);
        for (std::size_t m = 0; m < st.mu[k].size(); ++m)
            for (std::size_t d = 0; d < st.mu[k][m].size(); ++d)
                lp += std::log(brute::gaussian_density(st.mu[k][m][d], p.mu[k][m].mean[d], p.mu[k][m].variance));
    }
    return lp;
}

Outcome conditional_correctness() {
    double err_z = 0.0, err_params = 0.0, err_score = 0.0;
    for (std::uint64_t c = 0; c < 100; ++c) {
        auto rc = random_case(c);
        Stream rng(Seed{c}, 1);
        // z conditionals for every object.
        auto& st = rc.states[c % 2];
        for (std::size_t i = 0; i < rc.ds.num_objects(); ++i) {
            const auto lib = z_log_conditional(st, rc.ds, i, rc.w[i]);
            const auto ref = brute::z_conditional(st, rc.ds, i, rc.w[i]);
            for (std::size_t k = 0; k < st.K; ++k) err_z = std::max(err_z, std::abs(lib[k] - std::log(ref[k])));
            gibbs_update_z(st, rc.ds, i, rc.w[i], rng);
        }
        // Parameter posterior, evaluated at the point resample_parameters draws.
        const auto lib_post = parameter_posterior(st, rc.ds, rc.w);
        const auto ref_post = brute::parameter_posterior(st, rc.ds, rc.w);
        resample_parameters(st, rc.ds, rc.w, rng);
        st.validate(rc.ds);
        err_params = std::max(err_params, std::abs(log_density_lib(st, lib_post) - brute::log_density(st, ref_post)));
        // Joint score.
        const double lib = target_log_score(rc.states, SharedSigns{rc.w}, rc.ds);
        err_score = std::max(err_score, std::abs(lib - brute::target_log_score(rc.states, rc.w, rc.ds)));
    }
    const bool ok = err_z <= 1e-9 && err_params <= 1e-9 && err_score <= 1e-9;
    return {ok, "max log error: z conditional " + fmt(err_z) + ", parameter posterior " + fmt(err_params) +
                    ", target score " + fmt(err_score) + " (100 random cases each)"};
}

// ---------------------------------------------------------------- 5

Lexicon mixed_lexicon() {
    Lexicon lex;
    lex.alphabet = "kmpstaeiou";
    lex.words = {{{"ka", 1.0}},      {{"mipo", 1.0}},          {{"sut", 1.0}},  {{"tomesi", 1.0}},
                 {{"pe", 1.0}},      {{"kimu", 0.6}, {"kima", 0.4}}, {{"osa", 1.0}},  {{"tikpu", 1.0}}};
    return lex;
}

struct Generated {
    std::string stream;
    std::vector<std::size_t> ends;
};

Generated generate_stream(const Lexicon& lex, std::size_t words, double eps, Stream& rng) {
    Generated g;
    for (std::size_t n = 0; n < words; ++n) {
        const int w = static_cast<int>(sample_uniform_index(lex.size(), rng));
        g.stream += utter(lex, w, eps, rng).symbols;
        g.ends.push_back(g.stream.size());
    }
    return g;
}

double boundary_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred) {
    // Interior boundaries only; the stream end is always a boundary.
    const std::set<std::size_t> t(truth.begin(), truth.end() - 1), p(pred.begin(), pred.end() - 1);
    std::size_t hit = 0;
    for (auto b : p) hit += t.count(b);
    if (t.empty() && p.empty()) return 1.0;
    const double prec = p.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(p.size());
    const double rec = t.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(t.size());
    return prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
}

Outcome articulation() {
    // decode_word against explicit variant summation.
    double err_decode = 0.0;
    Stream rng(Seed{55}, 0);
    for (const auto& lex : {default_lexicon(6), mixed_lexicon()}) {
        for (int t = 0; t < 200; ++t) {
            const auto w = static_cast<int>(sample_uniform_index(lex.size(), rng));
            const double eps = 0.3 * rng.uniform();
            const auto y = utter(lex, w, eps, rng).symbols;
            const auto prior = sample_dirichlet_symmetric(1.0, lex.size(), rng);
            const auto post = decode_word(lex, y, prior, eps);
            std::vector<double> p(lex.size(), 0.0);
            double total = 0.0;
            for (std::size_t v = 0; v < lex.size(); ++v) {
                for (const auto& var : lex.words[v])
                    p[v] += var.prob * brute::channel_prob(y, var.pron, eps, lex.alphabet.size());
                p[v] *= prior[v];
                total += p[v];
            }
            for (std::size_t v = 0; v < lex.size(); ++v) err_decode = std::max(err_decode, std::abs(post[v] - p[v] / total));
        }
    }

    // Noiseless prefix-free stream.
    const auto cvc = default_lexicon(8);
    const auto clean = generate_stream(cvc, 500, 0.0, rng);
    const auto seg0 = segment(cvc, clean.stream, ProbVector::uniform(cvc.size()), 0.0, SegmentMode::viterbi, rng);
    const bool exact0 = seg0.boundaries == clean.ends;

    // Noisy mixed-length stream.
    const auto mixed = mixed_lexicon();
    const auto noisy = generate_stream(mixed, 500, 0.05, rng);
    const auto seg1 = segment(mixed, noisy.stream, ProbVector::uniform(mixed.size()), 0.05, SegmentMode::viterbi, rng);
    const double f1 = boundary_f1(noisy.ends, seg1.boundaries);

    // FFBS law against enumerated parses.
    Lexicon ab;
    ab.alphabet = "ab";
    ab.words = {{{"a", 1.0}}, {{"ab", 1.0}}, {{"ba", 0.5}, {"bb", 0.5}}};
    const std::vector<double> prior{0.4, 0.35, 0.25};
    const std::string stream = "aababba";
    const auto parses = brute::all_parses({{{"a", 1.0}}, {{"ab", 1.0}}, {{"ba", 0.5}, {"bb", 0.5}}}, ab.alphabet,
                                          stream, prior, 0.1);
    double total = 0.0;
    for (const auto& p : parses) total += p.prob;
    std::map<std::vector<int>, double> freq;
    const int n = 10000;
    for (int t = 0; t < n; ++t) freq[segment(ab, stream, ProbVector(prior), 0.1, SegmentMode::ffbs, rng).words] += 1.0 / n;
    double tv = 0.0;
    for (const auto& p : parses) {
        tv += std::abs(p.prob / total - freq[p.words]);
        freq.erase(p.words);
    }
    for (const auto& [words, f] : freq) tv += f;
    tv *= 0.5;

    const bool ok = err_decode <= 1e-12 && exact0 && f1 >= 0.9 && tv <= 0.02;
    return {ok, "decode max error " + fmt(err_decode) + "; noiseless boundaries " + (exact0 ? "100%" : "not exact") +
                    "; boundary F1 at epsilon 0.05 = " + fmt(f1) + "; TV(FFBS, enumeration) = " + fmt(tv)};
}

// ---------------------------------------------------------------- 6

Outcome melody() {
    const std::vector<std::string> corpus{"ABAB", "AAB", "BBA", "ABBA", "B", "CDEFG", "GFEDC", "CEGEC"};
    Stream rng(Seed{66}, 0);

    // Violations under a mask.
    const auto model7 = fit_ngram({"CDEFGAB", "CEGCEG", "GFEDC", "ABCABC"}, "ABCDEFG", 2, 0.5);
    const MelodyConstraint mask{{"CEG", "ABCDEFG", "DF", "ABCDEFG", "GBD", "C"}};
    ConstrainedGibbs masked(model7, mask, std::nullopt);
    std::size_t violations = 0;
    for (int s = 0; s < 100000; ++s) {
        masked.sweep(rng);
        violations += mask.satisfied_by(masked.current()) ? 0 : 1;
    }

    // Unconstrained chain law on V = 2, T = 3.
    const std::vector<std::string> ab{"ABAB", "AAB", "BBA", "ABBA", "B"};
    const auto model2 = fit_ngram(ab, "AB", 2, 1.0);
    std::map<std::string, double> exact;
    double total = 0.0;
    for (const auto& s : brute::all_strings("AB", 3)) total += exact[s] = brute::bigram_prob(ab, "AB", 1.0, s);
    ConstrainedGibbs chain(model2, MelodyConstraint::unconstrained("AB", 3), std::nullopt);
    for (int s = 0; s < 100; ++s) chain.sweep(rng);
    std::map<std::string, double> freq;
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
        chain.sweep(rng);
        freq[chain.current()] += 1.0 / n;
    }
    double tv = 0.0;
    for (const auto& [s, p] : exact) tv += std::abs(p / total - freq[s]);
    tv *= 0.5;

    // Uniform model perplexity.
    double worst_ppl = 0.0;
    for (const std::string alphabet : {"AB", "ABCDE", "CDEFGAB"}) {
        const auto uniform = fit_ngram({}, alphabet, 2, 1.0);
        const double ppl = perplexity(uniform, {alphabet + alphabet, std::string(5, alphabet[0])});
        worst_ppl = std::max(worst_ppl, std::abs(ppl - static_cast<double>(alphabet.size())));
    }
    const bool ok = violations == 0 && tv <= 0.02 && worst_ppl <= 1e-12;
    return {ok, std::to_string(violations) + " violations in 1e5 sweeps; TV(chain, model) = " + fmt(tv) +
                    "; max |perplexity - V| = " + fmt(worst_ppl)};
}

// ---------------------------------------------------------------- 7

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome reproducibility() {
    const fs::path root = fs::temp_directory_path() / "emerge_acceptance_repro";
    fs::remove_all(root);
    const std::string cli = EMERGE_CLI, configs = EMERGE_CONFIGS;
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"gen-data --config " + configs + "/easy.json --out d.json", {"d.json"}},
        {"run-game --config " + configs + "/easy.json --out g", {"g/trace.jsonl", "g/metrics.csv", "g/checkpoint.json", "g/plot.svg"}},
        {"run-game --config " + configs + "/easy.json --seeds 1..3 --out s", {"s/trace-seed2.jsonl", "s/metrics-seed3.csv"}},
        {"run-game --config " + configs + "/articulated.json --out a", {"a/trace.jsonl", "a/metrics.csv"}},
        {"metrics --config " + configs + "/easy.json --checkpoint g/checkpoint.json --trace g/trace.jsonl --out m.csv", {"m.csv"}},
        {"oracle-compare --config " + configs + "/tiny.json --out o", {"o/tv.csv", "o/posterior.json"}},
        {"artic-decode --lexicon " + configs + "/lexicon.json --utterance kem --epsilon 0.1 --out dec.json", {"dec.json"}},
        {"artic-segment --lexicon " + configs + "/lexicon.json --stream kampistoukem --method ffbs --seed 4 --out seg.json", {"seg.json"}},
        {"melody-fit --corpus " + configs + "/corpus.txt --out model.json", {"model.json"}},
        {"melody-sample --model model.json --count 10 --seed 3 --out mel.txt", {"mel.txt"}},
        {"melody-sample --model model.json --constraints " + configs + "/constraints.json --count 10 --seed 3 --out cmel.txt", {"cmel.txt"}},
        {"report --metrics s/metrics-seed1.csv s/metrics-seed2.csv --out rep.svg", {"rep.svg", "report.txt"}},
    };
    std::vector<std::map<std::string, std::string>> runs(2);
    for (int r = 0; r < 2; ++r) {
        const fs::path dir = root / ("run" + std::to_string(r));
        fs::create_directories(dir);
        for (const auto& [args, files] : commands) {
            const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " > report.txt 2>/dev/null";
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "command failed: " + args};
            for (const auto& f : files) {
                if (!fs::exists(dir / f)) return {false, "missing output " + f};
                runs[static_cast<std::size_t>(r)][args + " :: " + f] = slurp(dir / f);
            }
        }
    }
    std::size_t differing = 0;
    for (const auto& [key, content] : runs[0]) differing += runs[1][key] == content ? 0 : 1;
    fs::remove_all(root);
    return {differing == 0, std::to_string(runs[0].size()) + " outputs from " + std::to_string(commands.size()) +
                                " commands compared, " + std::to_string(differing) + " differ"};
}

// ---------------------------------------------------------------- 8

Outcome channel_reduction() {
    const std::vector<AgentSpec> specs(2, AgentSpec{3, 3, Hyper{}});
    const SignChannel art{ChannelKind::articulated, default_lexicon(3), 0.0};
    const SignChannel mel{ChannelKind::melodic, motif_lexicon(default_motifs(3, "CDEFGAB"), "CDEFGAB"), 0.0};
    std::size_t compared = 0, mismatched = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        DatasetConfig dc;
        dc.seed = Seed{seed};
        const auto ds = generate_dataset(dc);
        GameConfig gc;
        gc.iterations = 100;
        gc.seed = Seed{seed * 31};
        gc.order = seed % 2 ? ObjectOrder::fixed : ObjectOrder::shuffled;
        const auto plain = run_naming_game(ds, specs, gc);
        for (const auto& ch : {art, mel}) {
            const auto other = run_naming_game(ds, specs, gc, ch);
            for (std::size_t k = 0; k < plain.records.size(); ++k) {
                ++compared;
                mismatched += other.records[k].signs == plain.records[k].signs ? 0 : 1;
            }
            mismatched += other.final_states == plain.final_states ? 0 : 1;
        }
    }
    return {mismatched == 0, std::to_string(compared) + " iteration sign vectors compared, " +
                                 std::to_string(mismatched) + " mismatches"};
}

}  // namespace

int main() {
    report(1, "decentralized game matches centralized inference", decentralized_equals_centralized);
    report(2, "MH turn kernel detailed balance", mh_detailed_balance);
    report(3, "emergence at desk scale", emergence);
    report(4, "conditionals match brute force", conditional_correctness);
    report(5, "articulation channel", articulation);
    report(6, "melody sampler", melody);
    report(7, "byte-identical reruns", reproducibility);
    report(8, "noiseless channels reduce to the plain game", channel_reduction);
    std::printf("%s: %d failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
