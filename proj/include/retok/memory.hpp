#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <utility>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "retok/dag.hpp"
#include "retok/inference.hpp"

namespace retok {

/// Per level, the feature labels activated by a word.
using FeatureSet = std::map<int, std::vector<SymbolSeq>>;

struct ReplayTrace {
    SymbolSeq word;
    FeatureSet features;
    SymbolId seed;
};

/// Every distinct contiguous subgram of w, sorted per level. With a dag,
/// only stored subgrams (and all symbols) are kept.
inline FeatureSet subgram_features(SymbolView w, const StmDag* dag = nullptr) {
    FeatureSet out;
    for (std::size_t n = 1; n <= w.size(); ++n) {
        std::set<SymbolSeq> grams;
        for (std::size_t i = 0; i + n <= w.size(); ++i) {
            SymbolView g = w.substr(i, n);
            if (n == 1 || !dag || dag->find(g)) grams.emplace(g);
        }
        if (!grams.empty()) out[static_cast<int>(n)] = {grams.begin(), grams.end()};
    }
    return out;
}

/// Outward growth from a seed symbol: right to a boundary, then left, until
/// neither side extends. Each step keeps the current string a stored node.
inline ReplayTrace replay(const StmDag& dag, std::optional<SymbolId> seed, const SamplerConfig& s,
                          CounterRng& rng) {
    if (dag.d() == 0) throw DataError("empty-alphabet", "replay needs a non-empty alphabet");
    SymbolId sd = seed ? *seed : SymbolId{static_cast<std::uint32_t>(rng.below(dag.d()))};
    if (sd.index >= dag.d()) throw UnknownLabelError(std::to_string(sd.index), 0);
    SymbolSeq cur(1, sd.raw());
    for (bool grew = true; grew;) {
        grew = false;
        while (auto k = sample_next(smooth_right(dag, cur), s, rng)) {
            cur.push_back(k->raw());
            grew = true;
        }
        while (auto k = sample_next(smooth_left(dag, cur), s, rng)) {
            cur.insert(cur.begin(), k->raw());
            grew = true;
        }
    }
    return {cur, subgram_features(cur, &dag), sd};
}

/// An object token: independent per-level weighted feature sets.
struct Embedding {
    TokenId id = 0;
    SymbolSeq word;
    std::map<int, std::map<SymbolSeq, double>> m;
    double eta = 1.0;

    double weight(SymbolView label) const {
        auto lv = m.find(static_cast<int>(label.size()));
        if (lv == m.end()) return 0.0;
        auto it = lv->second.find(SymbolSeq(label));
        return it == lv->second.end() ? 0.0 : it->second;
    }
    bool has(SymbolView label) const { return weight(label) > 0.0; }
    std::size_t feature_count() const {
        std::size_t c = 0;
        for (auto& [n, f] : m) c += f.size();
        return c;
    }
    friend bool operator==(const Embedding&, const Embedding&) = default;
};

/// One-shot binding: every level-n feature gets eta * ratio^(n-1). Binding
/// into an existing embedding accumulates.
inline Embedding bind(const ReplayTrace& trace, double eta, double level_ratio, Embedding into = {}) {
    if (trace.word.empty()) throw DataError("empty-word", "cannot bind an empty trace");
    into.word = trace.word;
    into.eta = eta;
    for (auto& [n, labels] : trace.features)
        for (auto& l : labels) into.m[n][l] += eta * std::pow(level_ratio, n - 1);
    return into;
}

/// Binds all subgrams of a word given as a whole unit.
inline Embedding embed_word(SymbolView w, double eta = 1.0, double level_ratio = 2.0) {
    if (w.empty()) throw DataError("empty-word", "cannot embed an empty word");
    ReplayTrace t{SymbolSeq(w), subgram_features(w), SymbolId{w[0]}};
    return bind(t, eta, level_ratio);
}

/// f(sum over trailing windows of m^(n)[window]). Windows are matched by
/// label, so embeddings work without the dag that produced them.
inline double key_value(const Embedding& e, SymbolView context) {
    double x = 0;
    for (std::size_t n = 1; n <= context.size(); ++n) x += e.weight(context.substr(context.size() - n));
    return x;
}

inline std::vector<double> key_activation(const std::vector<Embedding>& es, SymbolView context,
                                          Activation f = Activation::tanh, unsigned jobs = 1) {
    std::vector<double> a(es.size(), 0.0);
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) a[i] = apply(f, key_value(es[i], context));
    };
    if (jobs <= 1 || es.size() < 64) {
        work(0, es.size());
        return a;
    }
    std::vector<std::future<void>> fs;
    const std::size_t chunk = (es.size() + jobs - 1) / jobs;
    for (std::size_t lo = 0; lo < es.size(); lo += chunk)
        fs.push_back(std::async(std::launch::async, work, lo, std::min(es.size(), lo + chunk)));
    for (auto& f2 : fs) f2.get();
    return a;
}

/// Value readout: each activated embedding votes for k with the weight of
/// its level-n feature (trailing n-1 window + k). Activations are computed
/// first; the optional dag term adds the short-term gradient.
inline PredictionWeights predict_kv(const std::vector<Embedding>& es, SymbolView context, std::size_t d,
                                    Activation f = Activation::tanh, const StmDag* dag = nullptr,
                                    unsigned jobs = 1) {
    PredictionWeights out = dag ? right_gradient(*dag, context) : PredictionWeights(d);
    if (out.w.size() < d) out.w.resize(d, 0.0);
    const auto a = key_activation(es, context, f, jobs);
    SymbolSeq probe;
    for (std::size_t i = 0; i < es.size(); ++i) {
        if (a[i] == 0.0) continue;
        const auto& e = es[i];
        for (std::size_t n = 2; n <= context.size() + 1; ++n) {
            auto lv = e.m.find(static_cast<int>(n));
            if (lv == e.m.end()) continue;
            probe.assign(context.substr(context.size() - (n - 1)));
            // Features of this level whose prefix is the trailing window.
            for (auto it = lv->second.lower_bound(probe); it != lv->second.end(); ++it) {
                if (it->first.compare(0, n - 1, probe) != 0) break;
                out.w[it->first.back()] += a[i] * it->second;
            }
        }
    }
    return out;
}

/// A category over embeddings or other classes.
struct ClassToken {
    TokenId id = 0;
    std::string label;
    std::vector<TokenId> members;
    friend bool operator==(const ClassToken&, const ClassToken&) = default;
};

/// Embedding over a pool of embedding ids; children are the phrase order.
struct SuperEmbedding {
    TokenId id = 0;
    std::vector<TokenId> children;
    std::vector<TokenId> pool;  // symbol i of the body stands for pool[i]
    Embedding body;
    friend bool operator==(const SuperEmbedding&, const SuperEmbedding&) = default;
};

/// Long-term store. Ids start at `base` and increase in creation order;
/// nothing is ever removed or overwritten.
class LongTermMemory {
public:
    static constexpr TokenId default_base = TokenId{1} << 40;

    explicit LongTermMemory(TokenId base = default_base) : next_(base), base_(base) {}

    TokenId base() const noexcept { return base_; }
    TokenId next_id() const noexcept { return next_; }

    TokenId add_embedding(Embedding e) {
        e.id = next_++;
        kinds_[e.id] = 0;
        index_[e.id] = embeddings_.size();
        embeddings_.push_back(std::move(e));
        return embeddings_.back().id;
    }

    TokenId associate(const std::vector<TokenId>& members, std::string label) {
        if (members.empty()) throw DataError("empty-class", "a class needs at least one member");
        std::set<TokenId> seen;
        for (TokenId m : members) {
            if (!kinds_.count(m)) throw DanglingReferenceError(m);
            if (!seen.insert(m).second) throw DataError("duplicate-member", "class members must be distinct");
        }
        ClassToken c{next_++, std::move(label), members};
        kinds_[c.id] = 1;
        index_[c.id] = classes_.size();
        classes_.push_back(std::move(c));
        return classes_.back().id;
    }

    TokenId add_super(std::vector<TokenId> children, std::vector<TokenId> pool, Embedding body) {
        for (TokenId c : children)
            if (!kinds_.count(c)) throw DanglingReferenceError(c);
        SuperEmbedding s{next_++, std::move(children), std::move(pool), std::move(body)};
        s.body.id = s.id;
        kinds_[s.id] = 2;
        index_[s.id] = supers_.size();
        supers_.push_back(std::move(s));
        return supers_.back().id;
    }

    /// Restores a record with its original id (document loading).
    void restore(Embedding e) { place(e.id, 0, embeddings_, std::move(e)); }
    void restore(ClassToken c) { place(c.id, 1, classes_, std::move(c)); }
    void restore(SuperEmbedding s) { place(s.id, 2, supers_, std::move(s)); }

    const std::vector<Embedding>& embeddings() const noexcept { return embeddings_; }
    const std::vector<ClassToken>& classes() const noexcept { return classes_; }
    const std::vector<SuperEmbedding>& supers() const noexcept { return supers_; }

    bool contains(TokenId id) const { return kinds_.count(id) != 0; }
    bool is_embedding(TokenId id) const { return kind(id) == 0; }
    bool is_class(TokenId id) const { return kind(id) == 1; }
    bool is_super(TokenId id) const { return kind(id) == 2; }

    const Embedding& embedding(TokenId id) const { return embeddings_.at(slot(id, 0)); }
    const ClassToken& class_token(TokenId id) const { return classes_.at(slot(id, 1)); }
    const SuperEmbedding& super_embedding(TokenId id) const { return supers_.at(slot(id, 2)); }

    std::optional<TokenId> find_word(SymbolView w) const {
        for (auto& e : embeddings_)
            if (e.word == w) return e.id;
        return std::nullopt;
    }

    /// Activation of any id: embeddings use key_value, classes take the max
    /// over members.
    double activation(TokenId id, SymbolView context, Activation f) const {
        if (is_embedding(id)) return apply(f, key_value(embedding(id), context));
        if (is_class(id)) {
            double a = 0;
            for (TokenId m : class_token(id).members) a = std::max(a, activation(m, context, f));
            return a;
        }
        return 0.0;
    }

    /// Words reachable from a class, in member order.
    std::vector<TokenId> leaves(TokenId id) const {
        if (!is_class(id)) return {id};
        std::vector<TokenId> out;
        for (TokenId m : class_token(id).members) {
            auto sub = leaves(m);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }

    /// Embedding -> its word; class -> a uniformly chosen member decoded
    /// recursively; super -> children joined by single spaces.
    std::string sample_decode(TokenId id, const Alphabet& alphabet, CounterRng& rng) const {
        if (!contains(id)) throw DanglingReferenceError(id);
        if (is_embedding(id)) return alphabet.decode(embedding(id).word);
        if (is_class(id)) {
            const auto& m = class_token(id).members;
            return sample_decode(m[rng.below(m.size())], alphabet, rng);
        }
        std::string out;
        for (TokenId c : super_embedding(id).children) {
            if (!out.empty()) out += ' ';
            out += sample_decode(c, alphabet, rng);
        }
        return out;
    }

    std::string sample_decode_code(const std::vector<TokenId>& code, const Alphabet& alphabet,
                                   CounterRng& rng) const {
        std::string out;
        for (TokenId c : code) {
            if (!out.empty()) out += ' ';
            out += sample_decode(c, alphabet, rng);
        }
        return out;
    }

private:
    int kind(TokenId id) const {
        auto it = kinds_.find(id);
        if (it == kinds_.end()) throw DanglingReferenceError(id);
        return it->second;
    }
    std::size_t slot(TokenId id, int k) const {
        if (kind(id) != k) throw DataError("wrong-kind", "token " + std::to_string(id) + " has another kind");
        return index_.at(id);
    }
    template <class T>
    void place(TokenId id, int k, std::vector<T>& v, T x) {
        if (kinds_.count(id)) throw DataError("bad-model", "duplicate token id " + std::to_string(id));
        kinds_[id] = k;
        index_[id] = v.size();
        v.push_back(std::move(x));
        next_ = std::max(next_, id + 1);
    }

    TokenId next_;
    TokenId base_;
    std::vector<Embedding> embeddings_;
    std::vector<ClassToken> classes_;
    std::vector<SuperEmbedding> supers_;
    std::map<TokenId, int> kinds_;
    std::map<TokenId, std::size_t> index_;
};

/// A retokenizer over a pool of word embeddings. Symbol i of the pool
/// alphabet stands for pool[i].
struct SuperLayer {
    std::vector<TokenId> pool;
    StmDag dag;
    std::vector<TokenId> super_ids;

    std::uint32_t index_of(TokenId id) const {
        auto it = std::find(pool.begin(), pool.end(), id);
        if (it == pool.end()) throw DataError("unregistered-embedding", "embedding " + std::to_string(id) + " is not in the pool");
        return static_cast<std::uint32_t>(it - pool.begin());
    }
    SymbolSeq encode(const std::vector<TokenId>& ids) const {
        SymbolSeq s;
        for (TokenId id : ids) s.push_back(index_of(id));
        return s;
    }
    std::vector<TokenId> decode(SymbolView s) const {
        std::vector<TokenId> out;
        for (char32_t c : s) out.push_back(pool.at(c));
        return out;
    }
};

inline Alphabet pool_alphabet(const std::vector<TokenId>& pool) {
    std::vector<std::string> labels;
    for (TokenId id : pool) labels.push_back(std::to_string(id));
    return Alphabet(std::move(labels));
}

/// Trains a super layer over phrases of embedding ids (boundaries given as
/// data) and binds one super-embedding per phrase into the store.
inline SuperLayer lift(LongTermMemory& ltm, const std::vector<std::vector<TokenId>>& phrases,
                       GrowthConfig config, double eta = 1.0, double level_ratio = 2.0) {
    SuperLayer sl;
    for (auto& p : phrases)
        for (TokenId id : p) {
            if (!ltm.contains(id) || ltm.is_super(id))
                throw DataError("unregistered-embedding", "token " + std::to_string(id) + " is not a word or class");
            if (std::find(sl.pool.begin(), sl.pool.end(), id) == sl.pool.end()) sl.pool.push_back(id);
        }
    sl.dag = StmDag(pool_alphabet(sl.pool), config);
    std::vector<SymbolSeq> seqs;
    for (auto& p : phrases) seqs.push_back(sl.encode(p));
    sl.dag.train(seqs);
    for (std::size_t i = 0; i < phrases.size(); ++i)
        sl.super_ids.push_back(ltm.add_super(phrases[i], sl.pool, embed_word(seqs[i], eta, level_ratio)));
    return sl;
}

/// Next-word prediction at the super level: super activations first, then
/// their votes over pool symbols.
inline PredictionWeights predict_super(const LongTermMemory& ltm, const SuperLayer& sl,
                                       const std::vector<TokenId>& context_words,
                                       Activation f = Activation::tanh, bool include_stm = false) {
    std::vector<Embedding> bodies;
    for (TokenId id : sl.super_ids) bodies.push_back(ltm.super_embedding(id).body);
    const SymbolSeq ctx = sl.encode(context_words);
    return predict_kv(bodies, ctx, sl.pool.size(), f, include_stm ? &sl.dag : nullptr);
}

// Quantity tokens over the presence channel u.

struct QuantityToken {
    int n = 1;
    double beta = 10.0;
};

/// Sum over k <= min(n, r) of beta^(k-1) / beta^(n-1): a run of length r
/// lights the level-k presence feature once for each k <= r.
inline double quantity_overlap(const QuantityToken& q, int r) {
    if (r <= 0) return 0.0;
    double s = 0;
    for (int k = 1; k <= std::min(q.n, r); ++k) s += std::pow(q.beta, k - 1);
    return s / std::pow(q.beta, q.n - 1);
}

/// Index into `qs` of the best-matching quantity token (first on ties).
inline std::size_t match_quantity(const std::vector<QuantityToken>& qs, int r) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < qs.size(); ++i)
        if (quantity_overlap(qs[i], r) > quantity_overlap(qs[best], r)) best = i;
    return best;
}

/// 1 where a position holds a symbol, 0 where it is empty.
inline std::vector<int> u_mask(const std::vector<std::optional<SymbolId>>& context) {
    std::vector<int> u;
    u.reserve(context.size());
    for (auto& c : context) u.push_back(c ? 1 : 0);
    return u;
}

/// Decodes quantity tokens to a u-channel string; `boundaries` inserts a
/// zero between consecutive runs.
inline std::vector<int> decode_quantities(const std::vector<QuantityToken>& code, bool boundaries = true) {
    std::vector<int> u;
    for (std::size_t i = 0; i < code.size(); ++i) {
        if (boundaries && i) u.push_back(0);
        u.insert(u.end(), code[i].n, 1);
    }
    return u;
}

inline std::vector<int> run_lengths(const std::vector<int>& u) {
    std::vector<int> out;
    int run = 0;
    for (int x : u) {
        if (x) ++run;
        else if (run) out.push_back(std::exchange(run, 0));
    }
    if (run) out.push_back(run);
    return out;
}

inline std::vector<TokenId> find_by_length(const LongTermMemory& ltm, std::size_t L) {
    std::vector<TokenId> out;
    for (auto& e : ltm.embeddings())
        if (e.word.size() == L) out.push_back(e.id);
    return out;
}

}  // namespace retok
