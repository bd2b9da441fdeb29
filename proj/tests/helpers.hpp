#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "retok/retok.hpp"

namespace retok::testing {

inline std::string data_path(const std::string& name) { return std::string(RETOK_DATA_DIR) + "/" + name; }

inline GrowthConfig eps0(double xi = 0.001) {
    GrowthConfig c;
    c.xi_g = xi;
    c.epsilons.fallback = 0.0;
    return c;
}

inline std::vector<SymbolSeq> encode_all(const Alphabet& a, const std::vector<std::string>& ws) {
    std::vector<SymbolSeq> out;
    for (auto& w : ws) out.push_back(a.encode(w));
    return out;
}

inline StmDag train_words(const std::vector<std::string>& ws, GrowthConfig c = eps0(),
                          const Alphabet& a = Alphabet::latin()) {
    StmDag d(a, c);
    d.train(encode_all(a, ws));
    return d;
}

inline StmDag dogs_cats_frog() { return train_words({"dogs", "cats", "frog"}); }

inline std::set<std::string> labels_at(const StmDag& d, int n) {
    std::set<std::string> out;
    for (auto* node : d.level_nodes(n)) out.insert(d.alphabet().decode(node->label));
    return out;
}

inline std::set<std::string> terminals(const StmDag& d) {
    std::set<std::string> out;
    for (auto& t : d.terminal_labels()) out.insert(d.alphabet().decode(t));
    return out;
}

/// Random string over the first d symbols.
inline SymbolSeq random_seq(CounterRng& rng, std::size_t d, std::size_t len) {
    SymbolSeq s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char32_t>(rng.below(d)));
    return s;
}

inline Alphabet small_alphabet(std::size_t d) { return Alphabet::from_chars(std::string("abcdefgh").substr(0, d)); }

/// Brute-force training oracle: layer-by-layer, plain string maps. Returns
/// per level the window counts and the grown node set.
struct OracleDag {
    std::map<int, std::map<SymbolSeq, double>> counts;
    std::map<int, std::set<SymbolSeq>> nodes;
};

inline OracleDag oracle_train(const std::vector<SymbolSeq>& segs, double eps2, int max_depth) {
    OracleDag o;
    for (int n = 2; n <= max_depth; ++n) {
        for (auto& s : segs)
            for (std::size_t i = 0; i + n <= s.size(); ++i) {
                SymbolSeq w = s.substr(i, n);
                if (n > 2 && !o.nodes[n - 1].count(w.substr(0, n - 1))) continue;
                o.counts[n][w] += 1;
            }
        for (auto& [w, c] : o.counts[n]) {
            const double need = n == 2 ? eps2 : 0.0;
            if (c > 0 && c >= need && (n == 2 || o.nodes[n - 1].count(w.substr(1)))) o.nodes[n].insert(w);
        }
        if (o.nodes[n].empty()) break;
    }
    return o;
}

}  // namespace retok::testing
