#pragma once

#include <cctype>
#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "retok/analysis.hpp"
#include "retok/compression.hpp"
#include "retok/grammar.hpp"
#include "retok/inference.hpp"
#include "retok/memory.hpp"
#include "retok/model_io.hpp"

namespace retok {

enum class CorpusMode { worded, spaceless };

struct CorpusSpec {
    std::string path;
    CorpusMode mode = CorpusMode::worded;
};

/// Lowercases ASCII letters; other code points pass through unchanged.
inline std::string normalize_text(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Every code point of the normalized text that is not whitespace, an ASCII
/// digit or ASCII punctuation, sorted.
inline Alphabet alphabet_from_text(std::string_view text) {
    std::set<std::string> cps;
    for (auto& cp : utf8::split(normalize_text(text))) {
        if (cp.size() == 1) {
            const auto c = static_cast<unsigned char>(cp[0]);
            if (std::isspace(c) || std::isdigit(c) || std::ispunct(c) || c < 0x20) continue;
        }
        cps.insert(cp);
    }
    return Alphabet(std::vector<std::string>(cps.begin(), cps.end()));
}

/// Units of symbols. Code points outside the alphabet become boundaries
/// (worded) or are dropped (spaceless).
inline std::vector<SymbolSeq> ingest_text(std::string_view text, const Alphabet& alphabet, CorpusMode mode) {
    std::vector<SymbolSeq> units(1);
    for (auto& cp : utf8::split(normalize_text(text))) {
        if (alphabet.contains(cp)) {
            units.back().push_back(alphabet.intern(cp).raw());
        } else if (mode == CorpusMode::worded && !units.back().empty()) {
            units.emplace_back();
        }
    }
    if (units.back().empty()) units.pop_back();
    return units;
}

inline std::vector<SymbolSeq> ingest(const CorpusSpec& spec, const Alphabet& alphabet) {
    return ingest_text(read_file(spec.path), alphabet, spec.mode);
}

/// Parses "2:.9,3:.55" or "all:0" (sets the fallback).
inline Epsilons parse_epsilons(const std::string& s) {
    Epsilons e;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos) throw DataError("bad-config", "epsilon entry '" + item + "' needs level:value");
        const std::string lv = item.substr(0, colon);
        double v;
        try {
            v = std::stod(item.substr(colon + 1));
        } catch (...) {
            throw DataError("bad-config", "bad epsilon value in '" + item + "'");
        }
        if (lv == "all" || lv == "*") e.fallback = v;
        else {
            try {
                e.by_level[std::stoi(lv)] = v;
            } catch (...) {
                throw DataError("bad-config", "bad epsilon level in '" + item + "'");
            }
        }
    }
    return e;
}

/// Hyperparameters. Unset fields fall back to the config file, then to
/// the defaults below.
struct RunConfig {
    std::optional<std::string> alphabet;  // characters, or "auto"
    std::optional<double> xi_g;
    std::optional<std::string> decay_mode;
    std::optional<std::string> epsilons;
    std::optional<double> beta;
    std::optional<int> max_depth;
    std::optional<double> eta;
    std::optional<double> level_ratio;
    std::optional<double> temperature;
    std::optional<bool> greedy;
    std::optional<std::string> activation;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;

    void fill_from(const json& j) {
        auto take = [&](auto& field, const char* key) {
            using T = typename std::decay_t<decltype(field)>::value_type;
            if (!field && j.contains(key)) {
                try {
                    field = j.at(key).get<T>();
                } catch (const json::exception&) {
                    throw DataError("bad-config", std::string("bad config value for ") + key);
                }
            }
        };
        take(alphabet, "alphabet");
        take(xi_g, "xi-g");
        take(decay_mode, "decay-mode");
        take(epsilons, "epsilons");
        take(beta, "beta");
        take(max_depth, "max-depth");
        take(eta, "eta");
        take(level_ratio, "level-ratio");
        take(temperature, "temperature");
        take(greedy, "greedy");
        take(activation, "activation");
        take(seed, "seed");
        take(jobs, "jobs");
    }

    GrowthConfig growth() const {
        GrowthConfig g;
        if (xi_g) g.xi_g = *xi_g;
        if (decay_mode) g.decay_mode = decay_mode_from_string(*decay_mode);
        if (epsilons) g.epsilons = parse_epsilons(*epsilons);
        if (beta) g.beta = *beta;
        if (max_depth) g.max_depth = *max_depth;
        g.validate();
        return g;
    }

    SamplerConfig sampler() const {
        SamplerConfig s;
        if (temperature) s.temperature = *temperature;
        if (greedy) s.greedy = *greedy;
        if (activation) s.activation = activation_from_string(*activation);
        if (!(s.temperature > 0) || !std::isfinite(s.temperature)) throw DataError("bad-config", "temperature must be positive");
        return s;
    }

    std::uint64_t rng_seed() const {
        if (seed) return *seed;
        if (const char* env = std::getenv("RETOK_SEED")) {
            try {
                return std::stoull(env);
            } catch (...) {
                throw DataError("bad-config", "RETOK_SEED is not an unsigned integer");
            }
        }
        return 0;
    }

    double eta_or_default() const { return eta.value_or(1.0); }
    double ratio_or_default() const { return level_ratio.value_or(2.0); }
    unsigned jobs_or_default() const { return jobs.value_or(1); }
};

/// A replay per draw; draw i uses stream i of the session seed.
inline std::vector<SymbolSeq> replay_session(const StmDag& dag, std::size_t count, std::uint64_t seed,
                                             const SamplerConfig& s) {
    CounterRng root(seed);
    std::vector<SymbolSeq> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = root.fork(i);
        out.push_back(replay(dag, std::nullopt, s, rng).word);
    }
    return out;
}

/// Greedy or sampled continuation until a boundary or `steps` symbols.
inline SymbolSeq continue_context(const StmDag& dag, SymbolSeq ctx, const std::string& direction,
                                  const SamplerConfig& s, CounterRng& rng, std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
        if (direction == "right") {
            auto k = sample_next(right_gradient(dag, ctx), s, rng);
            if (!k) break;
            ctx.push_back(k->raw());
        } else if (direction == "left") {
            auto k = sample_next(left_gradient(dag, ctx), s, rng);
            if (!k) break;
            ctx.insert(ctx.begin(), k->raw());
        } else {
            auto step = outward_gradient(dag, ctx, s);
            if (step.side == OutwardSide::boundary) break;
            auto k = sample_next(step.weights, s, rng);
            if (!k) break;
            if (step.side == OutwardSide::right) ctx.push_back(k->raw());
            else ctx.insert(ctx.begin(), k->raw());
        }
    }
    return ctx;
}

inline std::string segmentation_text(const Alphabet& a, const Segmentation& seg) {
    std::string out;
    for (auto& s : seg.segments) {
        if (!out.empty()) out += ' ';
        out += s.stored ? "[" + a.decode(s.symbols) + "]" : a.decode(s.symbols);
    }
    return out;
}

inline json segmentation_json(const Alphabet& a, const Segmentation& seg) {
    json arr = json::array();
    for (auto& s : seg.segments)
        arr.push_back({{"begin", s.begin}, {"text", a.decode(s.symbols)}, {"stored", s.stored}, {"energy", s.energy}});
    return {{"total", seg.total}, {"segments", arr}};
}

inline std::vector<std::string> vocabulary(const StmDag& dag) {
    std::vector<std::string> out;
    for (auto& l : dag.terminal_labels()) out.push_back(dag.alphabet().decode(l));
    std::sort(out.begin(), out.end());
    return out;
}

namespace cli_detail {

inline void emit(const std::optional<std::string>& path, const std::string& content, std::ostream& out) {
    if (path) write_file(*path, content);
    else out << content;
}

inline Alphabet choose_alphabet(const RunConfig& rc, const std::string& text) {
    if (!rc.alphabet || *rc.alphabet == "latin") return Alphabet::latin();
    if (*rc.alphabet == "auto") return alphabet_from_text(text);
    return Alphabet::from_chars(*rc.alphabet);
}

inline Model load(const std::string& path) { return load_model(read_file(path)); }

inline SymbolSeq encode_arg(const Alphabet& a, const std::string& s) { return a.encode(normalize_text(s)); }

}  // namespace cli_detail

/// Runs one subcommand. Returns 0 on success, 1 on usage errors and 2 on
/// data errors; diagnostics go to `err`.
inline int run_command(const std::vector<std::string>& argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    using namespace cli_detail;
    CLI::App app{"Hierarchical retokenizer: train, grow, infer, embed, compress and analyze", "retok"};
    app.require_subcommand(1);
    RunConfig rc;
    std::optional<std::string> config_path;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--config", config_path, "JSON file with the same keys as the flags");
        c->add_option("--alphabet", rc.alphabet, "alphabet characters, 'latin' (a-z) or 'auto'");
        c->add_option("--xi-g", rc.xi_g, "learning increment per event");
        c->add_option("--decay-mode", rc.decay_mode, "accumulate | ema | ema_global");
        c->add_option("--epsilons,--epsilon", rc.epsilons, "thresholds as level:value list, e.g. 2:.002,all:0");
        c->add_option("--beta", rc.beta, "layer bias (>= 1)");
        c->add_option("--max-depth", rc.max_depth, "deepest level grown");
        c->add_option("--eta", rc.eta, "binding rate");
        c->add_option("--level-ratio", rc.level_ratio, "embedding weight ratio between levels");
        c->add_option("--temperature", rc.temperature, "sampling temperature");
        c->add_option("--greedy", rc.greedy, "argmax sampling (true/false)");
        c->add_option("--activation", rc.activation, "tanh | clip01 | identity");
        c->add_option("--seed", rc.seed, "RNG seed (falls back to RETOK_SEED)");
        c->add_option("--jobs", rc.jobs, "worker threads for parallel-safe paths");
    };

    std::optional<std::string> corpus, model_path, out_path, text, word, words, context, input;
    std::string mode = "worded", direction = "right", regrow = "closure", kind = "vocabulary", format = "csv";
    std::string source = "dag";
    int n_cut = 2, max_len = 16, gram_n = 2, max_n = 0;
    std::size_t count = 1, steps = 64;
    bool json_out = false;

    auto* train = app.add_subcommand("train", "train a retokenizer layer by layer on a corpus");
    add_common(train);
    train->add_option("--corpus", corpus, "corpus file")->required();
    train->add_option("--mode", mode, "worded | spaceless")->check(CLI::IsMember({"worded", "spaceless"}));
    train->add_option("--out", out_path, "model file (stdout if absent)");

    auto* grow = app.add_subcommand("grow-random", "grow a random language");
    add_common(grow);
    grow->add_option("--out", out_path, "model file");

    auto* cutr = app.add_subcommand("cut-regrow", "cut a model and regrow it");
    add_common(cutr);
    cutr->add_option("--model", model_path, "model file")->required();
    cutr->add_option("--n-cut", n_cut, "first level removed")->required();
    cutr->add_option("--regrow", regrow, "closure | random")->check(CLI::IsMember({"closure", "random"}));
    cutr->add_option("--out", out_path, "model file");

    auto* rep = app.add_subcommand("replay", "replay words from a model");
    add_common(rep);
    rep->add_option("--model", model_path, "model file")->required();
    rep->add_option("--count", count, "number of replays");
    rep->add_option("--from", text, "seed symbol (random when absent)");
    rep->add_option("--out", out_path, "output file");

    auto* inf = app.add_subcommand("infer", "continue a context");
    add_common(inf);
    inf->add_option("--model", model_path, "model file")->required();
    inf->add_option("--context", context, "context string")->required();
    inf->add_option("--direction", direction, "right | left | outward")->check(CLI::IsMember({"right", "left", "outward"}));
    inf->add_option("--steps", steps, "maximum symbols to add");

    auto* tok = app.add_subcommand("tokenize", "minimum-energy segmentation");
    add_common(tok);
    tok->add_option("--model", model_path, "model file")->required();
    tok->add_option("--text", text, "text to segment");
    tok->add_option("--input", input, "file to segment (spaceless)");
    tok->add_flag("--json", json_out, "JSON output");
    tok->add_option("--out", out_path, "output file");

    auto* acc = app.add_subcommand("accept", "classify a string against the dag");
    add_common(acc);
    acc->add_option("--model", model_path, "model file")->required();
    acc->add_option("--word", word, "string")->required();

    auto* emb = app.add_subcommand("embed", "bind words into long-term memory");
    add_common(emb);
    emb->add_option("--model", model_path, "model file")->required();
    emb->add_option("--words", words, "comma-separated words (whole units)");
    emb->add_option("--replays", count, "bind this many replays when --words is absent");
    emb->add_option("--out", out_path, "model file");

    auto* rec = app.add_subcommand("recognize", "key-value prediction from long-term memory");
    add_common(rec);
    rec->add_option("--model", model_path, "model file")->required();
    rec->add_option("--context", context, "context string")->required();
    bool with_stm = false;
    rec->add_flag("--with-stm", with_stm, "add the short-term gradient");

    auto* cmp = app.add_subcommand("compress", "build exact SVD chains for every embedding");
    add_common(cmp);
    cmp->add_option("--model", model_path, "model file")->required();
    cmp->add_option("--out", out_path, "model file");

    auto* st = app.add_subcommand("stats", "d_n, log-normal fit and token length");
    add_common(st);
    st->add_option("--model", model_path, "model file");
    st->add_option("--corpus", corpus, "corpus file");
    st->add_option("--mode", mode, "worded | spaceless")->check(CLI::IsMember({"worded", "spaceless"}));
    st->add_option("--max-n", max_n, "largest n counted for corpora");

    auto* gr = app.add_subcommand("grammar", "language, retokenization classes and families");
    add_common(gr);
    gr->add_option("--model", model_path, "model file")->required();
    gr->add_option("--max-len", max_len, "closure bound");
    gr->add_option("--word", word, "word whose retokenization class is listed");

    auto* ex = app.add_subcommand("export", "write a report");
    add_common(ex);
    ex->add_option("--model", model_path, "model file");
    ex->add_option("--corpus", corpus, "corpus file (spectra, d_n)");
    ex->add_option("--mode", mode, "worded | spaceless")->check(CLI::IsMember({"worded", "spaceless"}));
    ex->add_option("--kind", kind, "dn | spectrum | segmentation | vocabulary");
    ex->add_option("--format", format, "csv | json | svg")->check(CLI::IsMember({"csv", "json", "svg"}));
    ex->add_option("--n", gram_n, "gram length for spectra");
    ex->add_option("--text", text, "text for segmentation reports");
    ex->add_option("--out", out_path, "output file");

    std::vector<std::string> args(argv.rbegin(), argv.rend());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (config_path) rc.fill_from(parse_json(read_file(*config_path)));
        const SamplerConfig sampler = rc.sampler();
        const std::uint64_t seed = rc.rng_seed();
        CounterRng rng(seed);
        const CorpusMode cmode = mode == "spaceless" ? CorpusMode::spaceless : CorpusMode::worded;

        if (*train) {
            const std::string raw = read_file(*corpus);
            auto alphabet = choose_alphabet(rc, raw);
            auto units = ingest_text(raw, alphabet, cmode);
            if (units.empty()) err << "warning: corpus is empty after normalization\n";
            Model m{StmDag(alphabet, rc.growth()), LongTermMemory(), {}};
            m.dag.train(units);
            emit(out_path, store_model(m), out);
        } else if (*grow) {
            auto alphabet = choose_alphabet(rc, "");
            auto cfg = rc.growth();
            Model m{random_grow(alphabet, cfg, rng), LongTermMemory(), {}};
            emit(out_path, store_model(m), out);
        } else if (*cutr) {
            Model m = load(*model_path);
            if (rc.epsilons) m.dag.config().epsilons = parse_epsilons(*rc.epsilons);
            if (rc.max_depth) m.dag.config().max_depth = *rc.max_depth;
            m.dag = cut_and_regrow(std::move(m.dag), n_cut, regrow == "random" ? RegrowMode::random : RegrowMode::closure, &rng);
            emit(out_path, store_model(m), out);
        } else if (*rep) {
            Model m = load(*model_path);
            std::string lines;
            if (text) {
                auto s = encode_arg(m.dag.alphabet(), *text);
                if (s.size() != 1) throw DataError("bad-argument", "--from takes a single symbol");
                for (std::size_t i = 0; i < count; ++i) {
                    auto r = rng.fork(i);
                    lines += m.dag.alphabet().decode(replay(m.dag, SymbolId{s[0]}, sampler, r).word) + '\n';
                }
            } else {
                for (auto& w : replay_session(m.dag, count, seed, sampler)) lines += m.dag.alphabet().decode(w) + '\n';
            }
            emit(out_path, lines, out);
        } else if (*inf) {
            Model m = load(*model_path);
            auto ctx = encode_arg(m.dag.alphabet(), *context);
            out << m.dag.alphabet().decode(continue_context(m.dag, ctx, direction, sampler, rng, steps)) << '\n';
        } else if (*tok) {
            Model m = load(*model_path);
            std::string raw = text ? *text : input ? read_file(*input) : "";
            if (!text && !input) throw DataError("bad-argument", "tokenize needs --text or --input");
            auto units = ingest_text(raw, m.dag.alphabet(), CorpusMode::spaceless);
            SymbolSeq s = units.empty() ? SymbolSeq{} : units[0];
            auto seg = tokenize(m.dag, s);
            emit(out_path, json_out ? canonical_dump(segmentation_json(m.dag.alphabet(), seg))
                                    : segmentation_text(m.dag.alphabet(), seg) + "\n",
                 out);
        } else if (*acc) {
            Model m = load(*model_path);
            out << to_string(accept(m.dag, encode_arg(m.dag.alphabet(), *word))) << '\n';
        } else if (*emb) {
            Model m = load(*model_path);
            std::vector<SymbolSeq> ws;
            if (words) {
                std::stringstream ss(*words);
                std::string w;
                while (std::getline(ss, w, ','))
                    if (!w.empty()) ws.push_back(encode_arg(m.dag.alphabet(), w));
            } else {
                ws = replay_session(m.dag, count, seed, sampler);
            }
            for (auto& w : ws) {
                if (m.ltm.find_word(w)) continue;
                m.ltm.add_embedding(embed_word(w, rc.eta_or_default(), rc.ratio_or_default()));
            }
            emit(out_path, store_model(m), out);
        } else if (*rec) {
            Model m = load(*model_path);
            auto ctx = encode_arg(m.dag.alphabet(), *context);
            const auto& es = m.ltm.embeddings();
            auto a = key_activation(es, ctx, sampler.activation, rc.jobs_or_default());
            auto pw = predict_kv(es, ctx, m.dag.d(), sampler.activation, with_stm ? &m.dag : nullptr, rc.jobs_or_default());
            json acts = json::array();
            for (std::size_t i = 0; i < es.size(); ++i)
                if (a[i] != 0.0) acts.push_back({{"word", m.dag.alphabet().decode(es[i].word)}, {"activation", a[i]}});
            json weights = json::object();
            for (auto k : pw.support()) weights[m.dag.alphabet().labels()[k]] = pw.w[k];
            auto next = sample_next(pw, sampler, rng);
            out << canonical_dump({{"activations", acts},
                                   {"weights", weights},
                                   {"next", next ? json(m.dag.alphabet().label(*next)) : json(nullptr)}});
        } else if (*cmp) {
            Model m = load(*model_path);
            const auto& es = m.ltm.embeddings();
            std::vector<PnnChain> chains(es.size());
            const unsigned jobs = std::max(1u, rc.jobs_or_default());
            std::vector<std::future<void>> fs;
            for (unsigned t = 0; t < jobs; ++t)
                fs.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, [&, t] {
                    for (std::size_t i = t; i < es.size(); i += jobs)
                        chains[i] = compress_pnn(es[i], m.dag.d(), 1e-12, m.dag.config().beta);
                }));
            for (auto& f : fs) f.get();
            for (std::size_t i = 0; i < es.size(); ++i) m.chains[es[i].id] = std::move(chains[i]);
            emit(out_path, store_model(m), out);
        } else if (*st) {
            json report;
            DnDistribution dn;
            if (model_path) {
                Model m = load(*model_path);
                dn = dn_of_dag(m.dag);
                report["l_token"] = invariant_token_length(m.dag);
                report["terminals"] = m.dag.terminal_labels().size();
            } else if (corpus) {
                const std::string raw = read_file(*corpus);
                auto units = ingest_text(raw, choose_alphabet(rc, raw), cmode);
                std::size_t longest = 0;
                for (auto& u : units) longest = std::max(longest, u.size());
                dn = dn_of_corpus(units, max_n > 0 ? max_n : static_cast<int>(longest));
            } else {
                throw DataError("bad-argument", "stats needs --model or --corpus");
            }
            report["d_n"] = std::vector<std::size_t>(dn.counts.begin() + 1, dn.counts.end());
            report["n_peak"] = dn.n_peak;
            report["n_max"] = dn.n_max;
            try {
                auto fit = lognormal_fit(dn);
                report["lognormal"] = {{"mu", fit.mu}, {"sigma", fit.sigma}, {"amplitude", fit.amplitude},
                                       {"r_squared", fit.r_squared}, {"peak", fit.peak()}};
            } catch (const DataError& e) {
                report["lognormal"] = nullptr;
            }
            out << canonical_dump(report);
        } else if (*gr) {
            Model m = load(*model_path);
            const auto& a = m.dag.alphabet();
            auto lang = rtg_language(m.dag, max_len);
            json fin = json::array(), fam = json::array();
            for (auto& w : lang.finite) fin.push_back(a.decode(w));
            for (auto& f : lang.repeating) fam.push_back({{"seed", a.decode(f.seed)}, {"period", f.period}});
            json report = {{"finite", fin}, {"repeating", fam}};
            if (word) {
                auto rc2 = retok_class(m.dag, encode_arg(a, *word));
                json ds = json::array();
                for (auto& d : rc2.decompositions) {
                    json f = json::array();
                    for (auto& x : d) f.push_back(a.decode(x));
                    ds.push_back(f);
                }
                report["class"] = {{"word", *word}, {"decompositions", ds}, {"overflow", rc2.overflow}};
            }
            out << canonical_dump(report);
        } else if (*ex) {
            std::string content;
            if (kind == "vocabulary") {
                if (!model_path) throw DataError("bad-argument", "vocabulary needs --model");
                auto v = vocabulary(load(*model_path).dag);
                if (format == "json") content = canonical_dump(json(v));
                else if (format == "csv") {
                    content = "word\n";
                    for (auto& w : v) content += w + '\n';
                } else throw DataError("unknown-kind", "vocabulary has no svg form");
            } else if (kind == "dn") {
                DnDistribution dn;
                if (model_path) dn = dn_of_dag(load(*model_path).dag);
                else if (corpus) {
                    const std::string raw = read_file(*corpus);
                    auto units = ingest_text(raw, choose_alphabet(rc, raw), cmode);
                    std::size_t longest = 0;
                    for (auto& u : units) longest = std::max(longest, u.size());
                    dn = dn_of_corpus(units, static_cast<int>(longest));
                } else throw DataError("bad-argument", "dn needs --model or --corpus");
                if (format == "csv") content = dn_csv(dn);
                else if (format == "svg") content = dn_svg(dn);
                else content = canonical_dump(json(std::vector<std::size_t>(dn.counts.begin() + 1, dn.counts.end())));
            } else if (kind == "spectrum") {
                RankSpectrum sp;
                if (model_path) sp = rank_spectrum(load(*model_path).dag, gram_n);
                else if (corpus) {
                    const std::string raw = read_file(*corpus);
                    sp = rank_spectrum(ingest_text(raw, choose_alphabet(rc, raw), cmode), gram_n);
                } else throw DataError("bad-argument", "spectrum needs --model or --corpus");
                if (format == "csv") content = spectrum_csv({sp});
                else if (format == "svg") content = spectrum_svg(sp);
                else content = canonical_dump({{"n", sp.n}, {"frequencies", sp.frequencies}});
            } else if (kind == "segmentation") {
                if (!model_path || !text) throw DataError("bad-argument", "segmentation needs --model and --text");
                Model m = load(*model_path);
                auto units = ingest_text(*text, m.dag.alphabet(), CorpusMode::spaceless);
                auto seg = tokenize(m.dag, units.empty() ? SymbolSeq{} : units[0]);
                if (format == "json") content = canonical_dump(segmentation_json(m.dag.alphabet(), seg));
                else if (format == "csv") {
                    content = "begin,segment,stored\n";
                    for (auto& s : seg.segments)
                        content += std::to_string(s.begin) + ',' + m.dag.alphabet().decode(s.symbols) + ',' + (s.stored ? "1" : "0") + '\n';
                } else throw DataError("unknown-kind", "segmentation has no svg form");
            } else {
                throw DataError("unknown-kind", "unknown report kind '" + kind + "'");
            }
            emit(out_path, content, out);
        }
    } catch (const Error& e) {
        err << "error [" << e.kind() << "]: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        err << "error [bad-json]: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace retok
