#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retok/dag.hpp"
#include "retok/memory.hpp"

namespace retok {

/// merge(t1, t2) = t1 + last(t2) when the (n-1)-overlap matches.
inline SymbolSeq merge(SymbolView t1, SymbolView t2) {
    if (t1.size() != t2.size() || t1.size() < 2)
        throw DataError("overlap-mismatch", "merge needs two grams of equal length >= 2");
    if (t1.substr(1) != t2.substr(0, t2.size() - 1))
        throw DataError("overlap-mismatch", "suffix of the first gram differs from prefix of the second");
    SymbolSeq out(t1);
    out.push_back(t2.back());
    return out;
}

/// Gram sets per level with edges by (n-1)-overlap.
struct RtgDag {
    Alphabet alphabet;
    std::map<int, std::set<SymbolSeq>> levels;

    static RtgDag from(const StmDag& dag) {
        RtgDag r{dag.alphabet(), {}};
        for (auto& [id, n] : dag.nodes()) r.levels[n.level].insert(n.label);
        return r;
    }

    bool contains(SymbolView g) const {
        auto it = levels.find(static_cast<int>(g.size()));
        return it != levels.end() && it->second.count(SymbolSeq(g));
    }

    /// Ordered pairs (t1, t2) at level n with suffix(t1) = prefix(t2).
    std::vector<std::pair<SymbolSeq, SymbolSeq>> edges(int n) const {
        std::vector<std::pair<SymbolSeq, SymbolSeq>> out;
        auto it = levels.find(n);
        if (it == levels.end()) return out;
        std::map<SymbolSeq, std::vector<const SymbolSeq*>> by_prefix;
        for (auto& g : it->second) by_prefix[g.substr(0, g.size() - 1)].push_back(&g);
        for (auto& g : it->second)
            if (auto p = by_prefix.find(g.substr(1)); p != by_prefix.end())
                for (auto* h : p->second) out.push_back({g, *h});
        return out;
    }

    /// Terminal grams: no edge in or out and no merge above them.
    std::set<SymbolSeq> terminals() const {
        std::set<SymbolSeq> covered;
        for (auto& [n, gs] : levels) {
            auto up = levels.find(n + 1);
            if (up == levels.end()) continue;
            for (auto& g : up->second) {
                covered.insert(g.substr(0, g.size() - 1));
                covered.insert(g.substr(1));
            }
        }
        std::set<SymbolSeq> out;
        for (auto& [n, gs] : levels)
            for (auto& g : gs)
                if (!covered.count(g)) out.insert(g);
        return out;
    }
};

/// Smallest p such that w[i] = w[i + p] for all valid i.
inline std::size_t minimal_period(SymbolView w) {
    for (std::size_t p = 1; p < w.size(); ++p) {
        bool ok = true;
        for (std::size_t i = 0; i + p < w.size() && ok; ++i) ok = w[i] == w[i + p];
        if (ok) return p;
    }
    return w.size();
}

struct RepeatingFamily {
    SymbolSeq seed;  // one period, read at the family's first occurrence
    std::size_t period = 0;
    friend auto operator<=>(const RepeatingFamily&, const RepeatingFamily&) = default;
};

struct RtgLanguage {
    std::set<SymbolSeq> finite;
    std::set<RepeatingFamily> repeating;
};

/// Closes the gram sets under merge up to max_len. Terminal grams shorter
/// than max_len are finite words; grams still growing at max_len are
/// periodic families, reported once per period seed.
inline RtgLanguage rtg_language(RtgDag g, int max_len) {
    if (max_len < 2) throw DataError("bad-argument", "max_len must be >= 2");
    int top = g.levels.empty() ? 1 : g.levels.rbegin()->first;
    for (int n = top; n >= 2 && n < max_len; ++n) {
        std::set<SymbolSeq> next;
        for (auto& [a, b] : g.edges(n))
            if (!g.contains(merge(a, b))) next.insert(merge(a, b));
        if (next.empty()) break;
        g.levels[n + 1].insert(next.begin(), next.end());
    }
    RtgLanguage out;
    for (auto& w : g.terminals()) {
        if (static_cast<int>(w.size()) < max_len) {
            out.finite.insert(w);
            continue;
        }
        const std::size_t p = minimal_period(w);
        if (p * 2 > w.size()) continue;  // not a repeating gram, only cut off
        // Canonical seed: least rotation of the period.
        SymbolSeq per = w.substr(0, p), best = per;
        for (std::size_t r = 1; r < p; ++r) best = std::min(best, per.substr(r) + per.substr(0, r));
        out.repeating.insert({best, p});
    }
    return out;
}

inline RtgLanguage rtg_language(const StmDag& dag, int max_len) { return rtg_language(RtgDag::from(dag), max_len); }

struct RetokClass {
    SymbolSeq word;
    std::vector<std::vector<SymbolSeq>> decompositions;
    bool overflow = false;
};

/// All factorizations of w into stored grams and single symbols, longest
/// first factor first. Capped at `cap` entries.
inline RetokClass retok_class(const StmDag& dag, SymbolView w, std::size_t cap = 10000) {
    RetokClass rc{SymbolSeq(w), {}, false};
    std::vector<SymbolSeq> cur;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (rc.overflow) return;
        if (i == w.size()) {
            if (rc.decompositions.size() >= cap) {
                rc.overflow = true;
                return;
            }
            rc.decompositions.push_back(cur);
            return;
        }
        for (std::size_t len = w.size() - i; len >= 1; --len) {
            SymbolView f = w.substr(i, len);
            if (len >= 2 && !dag.find(f)) continue;
            cur.emplace_back(f);
            go(i + len);
            cur.pop_back();
        }
    };
    if (!w.empty()) go(0);
    return rc;
}

struct CrgSpec {
    int n_cut = 2;
    RegrowMode mode = RegrowMode::closure;
    std::optional<Epsilons> epsilons;
    std::uint64_t seed = 0;
};

inline StmDag crg_transform(const StmDag& dag, const CrgSpec& spec) {
    CounterRng rng(spec.seed);
    return cut_and_regrow(dag, spec.n_cut, spec.mode, &rng, spec.epsilons);
}

/// A disentangled memory of single-word dags, keyed by word.
using WordMemory = std::map<SymbolSeq, StmDag>;

/// The dag of one word alone (all subgrams, eps = 0).
inline StmDag word_dag(const Alphabet& alphabet, SymbolView w, GrowthConfig cfg = {}) {
    cfg.epsilons = Epsilons{{}, 0.0};
    cfg.max_depth = std::max<int>(cfg.max_depth, static_cast<int>(w.size()));
    StmDag d(alphabet, cfg);
    d.train_sequence(SymbolSeq(w));
    return d;
}

/// Union of word dags: every node of every word, weights summed.
inline StmDag reload(const Alphabet& alphabet, const GrowthConfig& cfg, const WordMemory& memory,
                     const std::vector<SymbolSeq>& load) {
    StmDag out(alphabet, cfg);
    std::map<int, std::map<SymbolSeq, double>> grams;
    for (auto& w : load) {
        auto it = memory.find(w);
        if (it == memory.end()) throw DataError("not-in-memory", "word " + alphabet.decode(w) + " is not stored");
        for (auto& [id, n] : it->second.nodes()) grams[n.level][n.label] += n.weight;
    }
    for (auto& [lv, m] : grams)
        for (auto& [label, w] : m) {
            out.layer(lv).set(*out.find(SymbolView(label).substr(0, label.size() - 1)), SymbolId{label.back()}, w);
            out.add_node(label, w);
        }
    return out;
}

/// Reload a subset, transform it, replay each terminal into its own word
/// dag, and append words not already stored. Existing entries are untouched.
inline WordMemory rcrg_compose(const Alphabet& alphabet, const GrowthConfig& cfg, const WordMemory& memory,
                               const std::vector<SymbolSeq>& load, const CrgSpec& spec) {
    WordMemory out = memory;
    if (load.empty()) return out;
    const StmDag final_dag = crg_transform(reload(alphabet, cfg, memory, load), spec);
    for (auto& w : final_dag.terminal_labels())
        if (!out.count(w)) out.emplace(w, word_dag(alphabet, w, cfg));
    return out;
}

/// Explicit trie automaton over terminal words: a DFA whose accepting
/// states are the word ends. Used as an independent membership witness.
class TrieAcceptor {
public:
    explicit TrieAcceptor(const std::vector<SymbolSeq>& words) {
        states_.emplace_back();
        for (auto& w : words) {
            std::size_t s = 0;
            for (char32_t c : w) {
                auto it = states_[s].next.find(c);
                if (it == states_[s].next.end()) {
                    states_.emplace_back();
                    it = states_[s].next.emplace(c, states_.size() - 1).first;
                }
                s = it->second;
            }
            states_[s].accepting = true;
        }
    }

    bool accepts(SymbolView w) const {
        std::size_t s = 0;
        for (char32_t c : w) {
            auto it = states_[s].next.find(c);
            if (it == states_[s].next.end()) return false;
            s = it->second;
        }
        return states_[s].accepting;
    }

    std::size_t state_count() const noexcept { return states_.size(); }

private:
    struct State {
        std::map<char32_t, std::size_t> next;
        bool accepting = false;
    };
    std::vector<State> states_;
};

}  // namespace retok
