// emerge: batch driver for naming-game experiments.
//
// Exit codes: 0 success, 1 usage, 2 invalid config or data, 3 internal
// invariant breach, 4 acceptance threshold exceeded.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "emerge/emerge.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace emerge;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInvalid = 2, kInvariant = 3, kThreshold = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantBreach : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ThresholdExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void setup_logging() {
    auto logger = spdlog::stderr_logger_mt("emerge");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("EMERGE_LOG_LEVEL")) {
        const std::string v = env;
        if (v == "error" || v == "warn" || v == "info" || v == "debug")
            spdlog::set_level(spdlog::level::from_str(v));
        else
            spdlog::warn("ignoring EMERGE_LOG_LEVEL='{}' (expected error, warn, info or debug)", v);
    }
}

// Shared flags; each subcommand registers the subset it uses.
struct Options {
    std::string config;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string seeds;
    std::string mode;
    std::string checkpoint;
    std::string trace;
    std::string lexicon;
    std::size_t words = 3;
    std::optional<double> epsilon;
    std::string utterance;
    std::string stream;
    std::string method = "viterbi";
    std::string posterior;
    std::string corpus;
    std::string alphabet = "CDEFGAB";
    std::size_t order = 2;
    double delta = 1.0;
    std::string model;
    std::size_t length = 8;
    std::size_t count = 1;
    std::size_t sweeps = 100;
    std::string constraints;
    std::vector<std::string> metrics;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(static_cast<bool>(in), "cannot read '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json read_json(const fs::path& p) {
    const auto text = read_text(p);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + p.string() + "'");
    out << content;
    spdlog::debug("wrote {}", p.string());
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty())
        std::cout << content;
    else
        write_text(out, content);
}

ExperimentConfig load_config(const Options& o) {
    auto cfg = o.config.empty() ? parse_experiment(nlohmann::json::object()) : load_experiment(o.config);
    if (!o.mode.empty()) cfg.game.mode = acceptance_mode_from_string(o.mode);
    if (o.seed) cfg.game.seed = Seed{*o.seed};
    if (o.epsilon) cfg.channel.epsilon = *o.epsilon;
    return cfg;
}

Dataset load_dataset(const Options& o, const ExperimentConfig& cfg) {
    if (!o.data.empty()) return dataset_from_json(read_json(o.data));
    return generate_dataset(cfg.dataset);
}

std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) throw UsageError("--seeds expects a range a..b, got '" + s + "'");
    try {
        const auto a = std::stoull(s.substr(0, dots));
        const auto b = std::stoull(s.substr(dots + 2));
        if (b < a) throw UsageError("--seeds range is empty: '" + s + "'");
        std::vector<std::uint64_t> out;
        for (auto v = a; v <= b; ++v) out.push_back(v);
        return out;
    } catch (const std::logic_error&) {
        throw UsageError("--seeds expects a range a..b, got '" + s + "'");
    }
}

fs::path with_seed_suffix(const fs::path& p, std::uint64_t seed) {
    return p.parent_path() / (p.stem().string() + "-seed" + std::to_string(seed) + p.extension().string());
}

Lexicon load_lexicon(const Options& o) {
    if (!o.lexicon.empty()) return lexicon_from_json(read_json(o.lexicon));
    return default_lexicon(o.words);
}

// Run jobs on worker threads; each job owns its outputs. The first failure in
// job order is rethrown after all workers finish.
template <typename Job>
void fan_out(std::size_t n, const Job& job) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                job(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void check_trace(const GameTrace& t, const Dataset& ds, std::size_t W) {
    try {
        for (const auto& st : t.final_states) st.validate(ds);
    } catch (const InvalidParameter& e) {
        throw InvariantBreach(std::string("final state invalid: ") + e.what());
    }
    for (int w : t.final_signs.w)
        if (w < 0 || static_cast<std::size_t>(w) >= W) throw InvariantBreach("shared sign out of range");
    for (const auto& r : t.records) {
        const auto& m = r.report;
        if (!(m.acceptance_rate >= 0.0 && m.acceptance_rate <= 1.0))
            throw InvariantBreach("acceptance rate outside [0,1]");
        if (!std::isfinite(m.joint_log_score)) throw InvariantBreach("non-finite joint log score");
        if (m.kappa > 1.0 + 1e-12) throw InvariantBreach("kappa above 1");
    }
}

std::string metrics_csv(const GameTrace& t, std::size_t num_agents) {
    std::ostringstream os;
    write_csv_header(os, num_agents);
    for (const auto& r : t.records) write_csv_row(os, r.report);
    return os.str();
}

std::string trace_plot(const GameTrace& t) {
    tools::Series kappa_s{"kappa", {}, {}}, acc_s{"acceptance", {}, {}};
    for (const auto& r : t.records) {
        const auto x = static_cast<double>(r.report.iteration);
        kappa_s.x.push_back(x);
        kappa_s.y.push_back(r.report.kappa);
        acc_s.x.push_back(x);
        acc_s.y.push_back(r.report.acceptance_rate);
    }
    return tools::svg_line_plot({kappa_s, acc_s}, "kappa and acceptance rate", -0.2, 1.0);
}

// ---------------------------------------------------------------- commands

int cmd_gen_data(const Options& o) {
    auto cfg = load_config(o);
    if (o.seed) cfg.dataset.seed = Seed{*o.seed};
    const fs::path out = o.out.empty() ? cfg.output.data : fs::path(o.out);
    if (out.empty()) throw UsageError("gen-data: --out is required (or set output.data in the config)");
    const auto ds = generate_dataset(cfg.dataset);
    write_text(out, to_json(ds).dump() + "\n");
    spdlog::info("gen-data: {} objects, {} agents -> {}", ds.num_objects(), ds.num_agents(), out.string());
    return kOk;
}

int cmd_run_game(const Options& o) {
    auto cfg = load_config(o);
    if (!o.out.empty()) {
        cfg.output = OutputPaths{};
        cfg.output.default_into(o.out);
    }
    if (cfg.output.trace.empty() || cfg.output.checkpoint.empty() || cfg.output.metrics.empty())
        throw UsageError("run-game: --out is required (or set output.trace, checkpoint and metrics in the config)");
    const auto ds = load_dataset(o, cfg);
    const std::size_t W = cfg.agents.front().W;
    const auto channel = make_channel(cfg.channel, W);

    std::vector<std::uint64_t> seeds{cfg.game.seed.value};
    const bool many = !o.seeds.empty();
    if (many) seeds = parse_seed_range(o.seeds);
    std::mutex log_mu;
    fan_out(seeds.size(), [&](std::size_t k) {
        GameConfig gc = cfg.game;
        gc.seed = Seed{seeds[k]};
        auto paths = cfg.output;
        if (many)
            for (auto* p : {&paths.trace, &paths.checkpoint, &paths.metrics, &paths.plot})
                if (!p->empty()) *p = with_seed_suffix(*p, seeds[k]);
        const auto trace = run_naming_game(ds, cfg.agents, gc, channel);
        check_trace(trace, ds, W);

        std::string jsonl;
        for (const auto& r : trace.records) jsonl += to_json(r).dump() + "\n";
        write_text(paths.trace, jsonl);
        auto cp = checkpoint_json(trace);
        cp["seed"] = seeds[k];
        cp["mode"] = to_string(gc.mode);
        cp["iterations"] = gc.iterations;
        write_text(paths.checkpoint, cp.dump(2) + "\n");
        write_text(paths.metrics, metrics_csv(trace, cfg.agents.size()));
        if (!paths.plot.empty()) write_text(paths.plot, trace_plot(trace));

        const std::lock_guard lock(log_mu);
        if (trace.records.empty())
            spdlog::info("run-game seed {}: zero iterations", seeds[k]);
        else
            spdlog::info("run-game seed {}: final kappa {}, acceptance {}", seeds[k],
                         format_double(trace.records.back().report.kappa),
                         format_double(trace.records.back().report.acceptance_rate));
    });
    return kOk;
}

int cmd_oracle_compare(const Options& o) {
    auto cfg = load_config(o);
    if (!o.out.empty()) {
        cfg.output = OutputPaths{};
        cfg.output.default_into(o.out);
    }
    if (cfg.output.tv_report.empty())
        throw UsageError("oracle-compare: --out is required (or set output.tv_report in the config)");
    const auto& oc = cfg.oracle;
    require(oc.marginal != Marginal::w_and_z, "oracle-compare: chain laws are over w; use w-marginal or w-only");
    const auto ds = load_dataset(o, cfg);
    const std::size_t W = cfg.agents.front().W;
    const auto channel = make_channel(cfg.channel, W);

    const auto setup = setup_game(ds, cfg.agents, cfg.game);
    const auto states = states_of(setup.agents);
    const auto exact = enumerate_posterior(ds, states, oc.marginal, oc.max_support);
    std::vector<double> reference = exact.probs.values();
    if (!o.posterior.empty()) {
        const auto given = exact_posterior_from_json(read_json(o.posterior));
        require(given.support == exact.support, "oracle-compare: posterior support does not match the instance");
        reference = given.probs.values();
    }
    if (!cfg.output.posterior.empty() && o.posterior.empty())
        write_text(cfg.output.posterior, to_json(exact).dump(2) + "\n");

    const auto game = naming_game_w_law(ds, states, setup.signs, oc.burn_in, oc.sweeps, cfg.game.seed,
                                        cfg.game.mode, channel);
    const auto central = centralized_w_law(ds, states, setup.signs, oc.burn_in, oc.sweeps, cfg.game.seed);
    const std::vector<std::pair<std::string, double>> rows{
        {"game_vs_exact", tv_distance(game.probs(), reference)},
        {"centralized_vs_exact", tv_distance(central.probs(), reference)},
        {"game_vs_centralized", tv_distance(game.probs(), central.probs())},
    };
    std::ostringstream csv;
    csv << "comparison,tv,threshold,pass\n";
    bool ok = true;
    for (const auto& [name, tv] : rows) {
        const bool pass = tv <= oc.threshold;
        ok = ok && pass;
        csv << name << ',' << format_double(tv) << ',' << format_double(oc.threshold) << ',' << (pass ? 1 : 0)
            << '\n';
        spdlog::info("oracle-compare {}: tv {}", name, format_double(tv));
    }
    write_text(cfg.output.tv_report, csv.str());
    if (!ok) throw ThresholdExceeded("oracle-compare: total variation above threshold " + format_double(oc.threshold));
    return kOk;
}

int cmd_metrics(const Options& o) {
    if (o.checkpoint.empty()) throw UsageError("metrics: --checkpoint is required");
    const auto cfg = load_config(o);
    const auto ds = load_dataset(o, cfg);
    const auto cp = read_json(o.checkpoint);
    std::vector<InternalState> states;
    SharedSigns signs;
    try {
        for (const auto& j : cp.at("states")) states.push_back(state_from_json(j));
        signs.w = cp.at("signs").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(std::string("checkpoint: ") + e.what());
    }
    require(states.size() >= 2, "checkpoint: at least two agent states are required");
    for (const auto& st : states) st.validate(ds);
    require(signs.size() == ds.num_objects(), "checkpoint: signs length != number of objects");
    double acceptance = 0.0;
    std::size_t iteration = cp.value("iterations", std::size_t{0});
    if (!o.trace.empty()) {
        std::istringstream lines(read_text(o.trace));
        std::string line, last;
        while (std::getline(lines, line))
            if (!line.empty()) last = line;
        if (!last.empty()) {
            const auto rec = nlohmann::json::parse(last);
            acceptance = rec.at("acceptance_rate").get<double>();
            iteration = rec.at("iteration").get<std::size_t>();
        }
    }
    const auto r = compute_report(states, signs, ds, acceptance, iteration);
    std::ostringstream os;
    write_csv_header(os, states.size());
    write_csv_row(os, r);
    emit(o.out, os.str());
    return kOk;
}

int cmd_artic_decode(const Options& o) {
    if (o.utterance.empty()) throw UsageError("artic-decode: --utterance is required");
    const auto lex = load_lexicon(o);
    lex.validate();
    const double eps = o.epsilon.value_or(0.05);
    require(eps >= 0.0 && eps < 1.0, "artic-decode: epsilon must be in [0,1)");
    const auto post = decode_word(lex, o.utterance, ProbVector::uniform(lex.size()), eps);
    const auto& p = post.values();
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const nlohmann::json j = {{"utterance", o.utterance}, {"epsilon", eps}, {"posterior", p}, {"map", best}};
    emit(o.out, j.dump() + "\n");
    return kOk;
}

int cmd_artic_segment(const Options& o) {
    if (o.stream.empty()) throw UsageError("artic-segment: --stream is required");
    const auto lex = load_lexicon(o);
    lex.validate();
    const double eps = o.epsilon.value_or(0.05);
    require(eps >= 0.0 && eps < 1.0, "artic-segment: epsilon must be in [0,1)");
    if (o.method != "viterbi" && o.method != "ffbs") throw UsageError("artic-segment: --method is viterbi or ffbs");
    const auto mode = o.method == "viterbi" ? SegmentMode::viterbi : SegmentMode::ffbs;
    Stream rng(Seed{o.seed.value_or(0)}, stream_id({0x5E6}));
    const auto prior = ProbVector::uniform(lex.size());
    const auto seg = segment(lex, o.stream, prior, eps, mode, rng);
    const nlohmann::json j = {{"stream", o.stream},
                              {"method", o.method},
                              {"words", seg.words},
                              {"boundaries", seg.boundaries},
                              {"log_prob", seg.log_prob},
                              {"log_evidence", stream_log_evidence(lex, o.stream, prior, eps)}};
    emit(o.out, j.dump() + "\n");
    return kOk;
}

int cmd_melody_fit(const Options& o) {
    if (o.corpus.empty()) throw UsageError("melody-fit: --corpus is required");
    if (o.out.empty()) throw UsageError("melody-fit: --out is required");
    std::vector<std::string> corpus;
    std::istringstream lines(read_text(o.corpus));
    for (std::string line; std::getline(lines, line);) {
        line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
                   line.end());
        if (!line.empty()) corpus.push_back(line);
    }
    const auto model = fit_ngram(corpus, o.alphabet, o.order, o.delta);
    write_text(o.out, to_json(model).dump(2) + "\n");
    spdlog::info("melody-fit: {} melodies, order {}, {} contexts", corpus.size(), o.order, model.counts.size());
    return kOk;
}

int cmd_melody_sample(const Options& o) {
    if (o.model.empty()) throw UsageError("melody-sample: --model is required");
    const auto model = ngram_from_json(read_json(o.model));
    Stream rng(Seed{o.seed.value_or(0)}, stream_id({0x3E10}));
    std::string out;
    if (o.constraints.empty()) {
        for (std::size_t n = 0; n < o.count; ++n) out += sample_forward(model, o.length, rng) + "\n";
    } else {
        const auto cj = read_json(o.constraints);
        MelodyConstraint c;
        try {
            c.allowed = cj.at("allowed").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw InvalidParameter(std::string("constraints: ") + e.what());
        }
        ConstrainedGibbs chain(model, c, std::nullopt);
        for (std::size_t n = 0; n < o.count; ++n) {
            for (std::size_t s = 0; s < o.sweeps; ++s) chain.sweep(rng);
            const auto cur = chain.current();
            if (!c.satisfied_by(cur)) throw InvariantBreach("melody-sample: sample violates the constraint");
            out += cur + "\n";
        }
    }
    emit(o.out, out);
    return kOk;
}

int cmd_report(const Options& o) {
    if (o.metrics.empty()) throw UsageError("report: at least one --metrics file is required");
    if (o.out.empty()) throw UsageError("report: --out is required");
    std::vector<tools::Series> series;
    std::ostringstream summary;
    summary << "file,iterations,final_kappa,mean_kappa,final_acceptance_rate\n";
    for (const auto& file : o.metrics) {
        std::istringstream lines(read_text(file));
        std::string header;
        std::getline(lines, header);
        std::vector<std::string> cols;
        {
            std::istringstream h(header);
            for (std::string c; std::getline(h, c, ',');) cols.push_back(c);
        }
        const auto col = [&](const std::string& name) {
            const auto it = std::find(cols.begin(), cols.end(), name);
            require(it != cols.end(), "report: '" + file + "' has no column '" + name + "'");
            return static_cast<std::size_t>(it - cols.begin());
        };
        const auto ci = col("iteration"), ck = col("kappa"), ca = col("acceptance_rate");
        tools::Series s{fs::path(file).stem().string(), {}, {}};
        double last_acc = 0.0;
        for (std::string line; std::getline(lines, line);) {
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::istringstream l(line);
            for (std::string c; std::getline(l, c, ',');) cells.push_back(c);
            require(cells.size() == cols.size(), "report: ragged row in '" + file + "'");
            try {
                s.x.push_back(std::stod(cells[ci]));
                s.y.push_back(std::stod(cells[ck]));
                last_acc = std::stod(cells[ca]);
            } catch (const std::logic_error&) {
                throw InvalidParameter("report: non-numeric cell in '" + file + "'");
            }
        }
        double mean = 0.0;
        for (double y : s.y) mean += y;
        if (!s.y.empty()) mean /= static_cast<double>(s.y.size());
        summary << file << ',' << s.y.size() << ',' << (s.y.empty() ? "" : format_double(s.y.back())) << ','
                << format_double(mean) << ',' << format_double(last_acc) << '\n';
        series.push_back(std::move(s));
    }
    write_text(o.out, tools::svg_line_plot(series, "kappa over iterations", -0.2, 1.0));
    std::cout << summary.str();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"emerge: Metropolis-Hastings naming game experiments"};
    app.require_subcommand(1);
    Options o;

    auto add_config = [&](CLI::App* c) { c->add_option("--config", o.config, "experiment config (JSON)"); };
    auto add_data = [&](CLI::App* c) { c->add_option("--data", o.data, "dataset JSON (default: generate from config)"); };
    auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "seed override"); };
    auto add_lexicon = [&](CLI::App* c) {
        c->add_option("--lexicon", o.lexicon, "lexicon JSON (default: built-in lexicon)");
        c->add_option("--words", o.words, "size of the built-in lexicon")->check(CLI::PositiveNumber);
        c->add_option("--epsilon", o.epsilon, "substitution rate");
    };

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    add_config(gen);
    add_seed(gen);
    gen->add_option("--out", o.out, "dataset output path");

    auto* run = app.add_subcommand("run-game", "run the naming game");
    add_config(run);
    add_data(run);
    add_seed(run);
    run->add_option("--seeds", o.seeds, "seed range a..b, one chain per seed on worker threads");
    run->add_option("--mode", o.mode, "acceptance mode")->check(CLI::IsMember({"mh", "always", "none"}));
    run->add_option("--out", o.out, "output directory");
    run->add_option("--epsilon", o.epsilon, "channel substitution rate override");

    auto* cmp = app.add_subcommand("oracle-compare", "compare chain laws with exact enumeration");
    add_config(cmp);
    add_data(cmp);
    add_seed(cmp);
    cmp->add_option("--mode", o.mode, "acceptance mode")->check(CLI::IsMember({"mh", "always", "none"}));
    cmp->add_option("--posterior", o.posterior, "reference posterior JSON (default: enumerate)");
    cmp->add_option("--out", o.out, "output directory");

    auto* met = app.add_subcommand("metrics", "recompute metrics from a checkpoint");
    add_config(met);
    add_data(met);
    met->add_option("--checkpoint", o.checkpoint, "checkpoint JSON");
    met->add_option("--trace", o.trace, "trace JSONL (for iteration and acceptance rate)");
    met->add_option("--out", o.out, "CSV output path (default: stdout)");

    auto* dec = app.add_subcommand("artic-decode", "decode one noisy utterance");
    add_lexicon(dec);
    dec->add_option("--utterance", o.utterance, "phoneme string");
    dec->add_option("--out", o.out, "JSON output path (default: stdout)");

    auto* seg = app.add_subcommand("artic-segment", "segment a phoneme stream into words");
    add_lexicon(seg);
    add_seed(seg);
    seg->add_option("--stream", o.stream, "phoneme stream");
    seg->add_option("--method", o.method, "viterbi or ffbs");
    seg->add_option("--out", o.out, "JSON output path (default: stdout)");

    auto* fit = app.add_subcommand("melody-fit", "fit an n-gram melody model");
    fit->add_option("--corpus", o.corpus, "text file, one melody per line");
    fit->add_option("--alphabet", o.alphabet, "note alphabet");
    fit->add_option("--order", o.order, "n-gram order")->check(CLI::PositiveNumber);
    fit->add_option("--delta", o.delta, "additive smoothing");
    fit->add_option("--out", o.out, "model JSON output path");

    auto* smp = app.add_subcommand("melody-sample", "sample melodies from a fitted model");
    add_seed(smp);
    smp->add_option("--model", o.model, "model JSON");
    smp->add_option("--length", o.length, "melody length (unconstrained sampling)");
    smp->add_option("--count", o.count, "number of melodies")->check(CLI::PositiveNumber);
    smp->add_option("--constraints", o.constraints, "JSON {\"allowed\": [...]} per-position note sets");
    smp->add_option("--sweeps", o.sweeps, "Gibbs sweeps between constrained samples")->check(CLI::PositiveNumber);
    smp->add_option("--out", o.out, "output path (default: stdout)");

    auto* rep = app.add_subcommand("report", "plot and summarize metrics CSV files");
    rep->add_option("--metrics", o.metrics, "metrics CSV files");
    rep->add_option("--out", o.out, "SVG output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return cmd_gen_data(o);
        if (*run) return cmd_run_game(o);
        if (*cmp) return cmd_oracle_compare(o);
        if (*met) return cmd_metrics(o);
        if (*dec) return cmd_artic_decode(o);
        if (*seg) return cmd_artic_segment(o);
        if (*fit) return cmd_melody_fit(o);
        if (*smp) return cmd_melody_sample(o);
        if (*rep) return cmd_report(o);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const ThresholdExceeded& e) {
        spdlog::error("{}", e.what());
        return kThreshold;
    } catch (const InvariantBreach& e) {
        spdlog::error("invariant breach: {}", e.what());
        return kInvariant;
    } catch (const InvalidParameter& e) {
        spdlog::error("{}", e.what());
        return kInvalid;
    } catch (const NoHypothesis& e) {
        spdlog::error("{}", e.what());
        return kInvalid;
    } catch (const InstanceTooLarge& e) {
        spdlog::error("{}", e.what());
        return kInvalid;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        spdlog::error("internal error: {}", e.what());
        return kInvariant;
    }
    return kUsage;
}
