#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retok/dag.hpp"

namespace retok {

enum class Activation { tanh, clip01, identity };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::clip01: return "clip01";
        case Activation::identity: return "identity";
    }
    return "tanh";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "clip01") return Activation::clip01;
    if (s == "identity") return Activation::identity;
    throw DataError("bad-config", "unknown activation '" + s + "'");
}

inline double apply(Activation f, double x) {
    switch (f) {
        case Activation::tanh: return std::tanh(x);
        case Activation::clip01: return std::clamp(x, 0.0, 1.0);
        case Activation::identity: return x;
    }
    return x;
}

struct SamplerConfig {
    double temperature = 1.0;
    bool greedy = true;
    Activation activation = Activation::tanh;
    double entropy_threshold = 3.0;  // bits; diagnostics only
};

enum class Side { trailing, leading };

/// Active feature per level (index 0 is level 1). Absent windows are nullopt.
struct ContextProjection {
    std::vector<std::optional<TokenId>> levels;

    std::optional<TokenId> at(int n) const {
        if (n < 1 || n > static_cast<int>(levels.size())) return std::nullopt;
        return levels[n - 1];
    }
    std::size_t active_count() const {
        return static_cast<std::size_t>(std::count_if(levels.begin(), levels.end(),
                                                      [](auto& o) { return o.has_value(); }));
    }
};

/// Per-symbol gradient; dense over the alphabet.
struct PredictionWeights {
    std::vector<double> w;

    PredictionWeights() = default;
    explicit PredictionWeights(std::size_t d) : w(d, 0.0) {}

    bool is_boundary() const {
        return std::none_of(w.begin(), w.end(), [](double x) { return x > 0.0; });
    }
    std::vector<std::uint32_t> support() const {
        std::vector<std::uint32_t> s;
        for (std::uint32_t k = 0; k < w.size(); ++k)
            if (w[k] > 0.0) s.push_back(k);
        return s;
    }
    double operator[](std::size_t k) const { return w[k]; }
};

inline ContextProjection project_context(const StmDag& dag, SymbolView context, Side side) {
    ContextProjection p;
    const int depth = std::min<int>(static_cast<int>(context.size()), dag.depth());
    p.levels.resize(depth);
    for (int n = 1; n <= depth; ++n) {
        SymbolView win = side == Side::trailing ? context.substr(context.size() - n) : context.substr(0, n);
        p.levels[n - 1] = dag.find(win);
    }
    return p;
}

inline double level_bias(double beta, int n) { return std::pow(beta, n); }

/// Sum over levels of beta^n * g for every node extending the trailing
/// (n-1)-gram by one symbol on the right.
inline PredictionWeights right_gradient(const StmDag& dag, SymbolView context) {
    PredictionWeights out(dag.d());
    const auto proj = project_context(dag, context, Side::trailing);
    const double beta = dag.config().beta;
    for (int m = 1; m <= static_cast<int>(proj.levels.size()); ++m) {
        auto mu = proj.at(m);
        if (!mu) continue;
        for (TokenId c : dag.prefix_children(*mu)) {
            const auto& node = dag.node(c);
            out.w[node.last_symbol.index] += level_bias(beta, m + 1) * node.weight;
        }
    }
    return out;
}

/// Mirror of right_gradient over suffix children: mass goes to the symbol
/// that would be prepended.
inline PredictionWeights left_gradient(const StmDag& dag, SymbolView context) {
    PredictionWeights out(dag.d());
    const auto proj = project_context(dag, context, Side::leading);
    const double beta = dag.config().beta;
    for (int m = 1; m <= static_cast<int>(proj.levels.size()); ++m) {
        auto mu = proj.at(m);
        if (!mu) continue;
        for (TokenId c : dag.suffix_children(*mu)) {
            const auto& node = dag.node(c);
            out.w[node.first_symbol().index] += level_bias(beta, m + 1) * node.weight;
        }
    }
    return out;
}

/// Sampling distribution over the strictly positive support.
inline std::vector<std::pair<std::uint32_t, double>> distribution(const PredictionWeights& pw,
                                                                  const SamplerConfig& s) {
    std::vector<std::pair<std::uint32_t, double>> p;
    for (auto k : pw.support()) p.push_back({k, apply(s.activation, pw.w[k]) / s.temperature});
    if (p.empty()) return p;
    double mx = p.front().second;
    for (auto& [k, x] : p) mx = std::max(mx, x);
    double z = 0;
    for (auto& [k, x] : p) z += (x = std::exp(x - mx));
    for (auto& [k, x] : p) x /= z;
    return p;
}

/// Greedy argmax (lowest index on ties) or a softmax draw; nullopt is a boundary.
inline std::optional<SymbolId> sample_next(const PredictionWeights& pw, const SamplerConfig& s,
                                           CounterRng& rng) {
    if (pw.is_boundary()) return std::nullopt;
    if (s.greedy) {
        std::uint32_t best = 0;
        double bw = -1;
        for (std::uint32_t k = 0; k < pw.w.size(); ++k)
            if (pw.w[k] > 0.0 && pw.w[k] > bw) bw = pw.w[best = k];
        return SymbolId{best};
    }
    auto p = distribution(pw, s);
    double u = rng.uniform(), acc = 0;
    for (auto& [k, x] : p) {
        acc += x;
        if (u < acc) return SymbolId{k};
    }
    return SymbolId{p.back().first};
}

inline double next_token_entropy(const PredictionWeights& pw, const SamplerConfig& s) {
    double h = 0;
    for (auto& [k, x] : distribution(pw, s))
        if (x > 0) h -= x * std::log2(x);
    return h;
}

enum class Acceptance { accepted, stored, well_formed, rejected };

inline const char* to_string(Acceptance a) {
    switch (a) {
        case Acceptance::accepted: return "accepted";
        case Acceptance::stored: return "stored";
        case Acceptance::well_formed: return "well_formed";
        case Acceptance::rejected: return "rejected";
    }
    return "rejected";
}

/// Single symbols count as stored basis tokens.
inline Acceptance accept(const StmDag& dag, SymbolView w) {
    if (w.empty()) return Acceptance::rejected;
    if (w.size() == 1) return w[0] < dag.d() ? Acceptance::stored : Acceptance::rejected;
    if (auto id = dag.find(w)) return dag.is_terminal(*id) ? Acceptance::accepted : Acceptance::stored;
    for (std::size_t i = 0; i + 2 <= w.size(); ++i)
        if (!dag.find(w.substr(i, 2))) return Acceptance::rejected;
    return Acceptance::well_formed;
}

struct Segment {
    std::size_t begin = 0;
    SymbolSeq symbols;
    bool stored = false;  // multi-symbol node label
    double energy = 0.0;
};

struct Segmentation {
    std::vector<Segment> segments;
    double total = 0.0;
};

/// H of one segment: beta^n * weight for every stored window of length >= 2.
inline double segment_energy(const StmDag& dag, SymbolView seg) {
    double h = 0;
    const double beta = dag.config().beta;
    for (std::size_t n = 2; n <= seg.size(); ++n)
        for (std::size_t i = 0; i + n <= seg.size(); ++i)
            if (auto id = dag.find(seg.substr(i, n))) h += level_bias(beta, static_cast<int>(n)) * dag.node(*id).weight;
    return h;
}

namespace detail {
inline bool approx_eq(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace detail

/// Exact DP: maximize total H; ties prefer fewer segments, then the longest
/// segment at the leftmost differing position.
inline Segmentation tokenize(const StmDag& dag, SymbolView text) {
    const std::size_t L = text.size();
    const int depth = dag.depth();
    std::vector<double> best(L + 1, 0.0);
    std::vector<std::size_t> count(L + 1, 0), choice(L + 1, 1);
    for (std::size_t i = L; i-- > 0;) {
        bool have = false;
        const std::size_t max_len = std::min<std::size_t>(L - i, static_cast<std::size_t>(std::max(depth, 1)));
        for (std::size_t len = max_len; len >= 1; --len) {
            SymbolView seg = text.substr(i, len);
            if (len >= 2 && !dag.find(seg)) continue;
            const double h = (len >= 2 ? segment_energy(dag, seg) : 0.0) + best[i + len];
            const std::size_t c = 1 + count[i + len];
            bool take = !have;
            if (have) {
                if (detail::approx_eq(h, best[i])) take = c < count[i];
                else take = h > best[i];
            }
            if (take) {
                best[i] = h;
                count[i] = c;
                choice[i] = len;
                have = true;
            }
        }
    }
    Segmentation out;
    out.total = best[0];
    for (std::size_t i = 0; i < L;) {
        Segment s;
        s.begin = i;
        s.symbols = SymbolSeq(text.substr(i, choice[i]));
        s.stored = choice[i] >= 2;
        s.energy = s.stored ? segment_energy(dag, s.symbols) : 0.0;
        out.segments.push_back(std::move(s));
        i += choice[i];
    }
    return out;
}

enum class OutwardSide { left, right, boundary };

struct OutwardStep {
    OutwardSide side = OutwardSide::boundary;
    PredictionWeights weights;
    double entropy = 0.0;
};

/// Gradient restricted to symbols k whose extension of `current` is a stored
/// node, so every step stays inside the smooth vocabulary.
inline PredictionWeights smooth_right(const StmDag& dag, SymbolView current) {
    auto pw = right_gradient(dag, current);
    auto id = dag.find(current);
    std::vector<bool> ok(dag.d(), false);
    if (id)
        for (TokenId c : dag.prefix_children(*id)) ok[dag.node(c).last_symbol.index] = true;
    for (std::size_t k = 0; k < ok.size(); ++k)
        if (!ok[k]) pw.w[k] = 0.0;
    return pw;
}

inline PredictionWeights smooth_left(const StmDag& dag, SymbolView current) {
    auto pw = left_gradient(dag, current);
    auto id = dag.find(current);
    std::vector<bool> ok(dag.d(), false);
    if (id)
        for (TokenId c : dag.suffix_children(*id)) ok[dag.node(c).first_symbol().index] = true;
    for (std::size_t k = 0; k < ok.size(); ++k)
        if (!ok[k]) pw.w[k] = 0.0;
    return pw;
}

/// Picks the edge with lower next-token entropy; ties go right.
inline OutwardStep outward_gradient(const StmDag& dag, SymbolView current, const SamplerConfig& s) {
    auto r = smooth_right(dag, current);
    auto l = smooth_left(dag, current);
    const bool rb = r.is_boundary(), lb = l.is_boundary();
    OutwardStep out;
    if (rb && lb) {
        out.weights = PredictionWeights(dag.d());
        return out;
    }
    const double hr = next_token_entropy(r, s), hl = next_token_entropy(l, s);
    if (!rb && (lb || hr <= hl || detail::approx_eq(hr, hl))) {
        out.side = OutwardSide::right;
        out.weights = std::move(r);
        out.entropy = hr;
    } else {
        out.side = OutwardSide::left;
        out.weights = std::move(l);
        out.entropy = hl;
    }
    return out;
}

}  // namespace retok
