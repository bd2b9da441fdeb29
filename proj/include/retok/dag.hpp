#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retok/alphabet.hpp"
#include "retok/error.hpp"
#include "retok/rng.hpp"

namespace retok {

using TokenId = std::uint64_t;

enum class DecayMode {
    accumulate,  // g += xi
    ema,         // g = (1 - xi) g + xi on the updated key only
    ema_global,  // every weight of the layer decays by (1 - xi) per event, then g += xi
};

inline const char* to_string(DecayMode m) {
    switch (m) {
        case DecayMode::accumulate: return "accumulate";
        case DecayMode::ema: return "ema";
        case DecayMode::ema_global: return "ema_global";
    }
    return "accumulate";
}

inline DecayMode decay_mode_from_string(const std::string& s) {
    if (s == "accumulate") return DecayMode::accumulate;
    if (s == "ema") return DecayMode::ema;
    if (s == "ema_global") return DecayMode::ema_global;
    throw DataError("bad-config", "unknown decay mode '" + s + "'");
}

/// Per-level growth thresholds. Unlisted levels use `fallback` when set;
/// otherwise 0 for training and, with `carry` set, the nearest listed
/// level below (random growth treats the last threshold as open-ended).
struct Epsilons {
    std::map<int, double> by_level;
    std::optional<double> fallback;

    double at(int n, bool carry = false) const {
        if (auto it = by_level.find(n); it != by_level.end()) return it->second;
        if (fallback) return *fallback;
        if (carry && !by_level.empty()) {
            auto it = by_level.upper_bound(n);
            if (it != by_level.begin()) return std::prev(it)->second;
        }
        return 0.0;
    }

    friend bool operator==(const Epsilons&, const Epsilons&) = default;
};

struct GrowthConfig {
    double xi_g = 0.001;
    DecayMode decay_mode = DecayMode::accumulate;
    Epsilons epsilons;
    int max_depth = 32;
    double beta = 1.0;

    void validate() const {
        if (!(xi_g > 0) || !std::isfinite(xi_g)) throw DataError("bad-config", "xi_g must be positive");
        if (max_depth < 2) throw DataError("bad-config", "max_depth must be at least 2");
        if (!(beta >= 1.0)) throw DataError("bad-config", "beta must be >= 1");
        for (auto& [n, e] : epsilons.by_level)
            if (n < 2 || e < 0) throw DataError("bad-config", "epsilons must be >= 0 at levels >= 2");
        if (epsilons.fallback && *epsilons.fallback < 0) throw DataError("bad-config", "negative epsilon");
    }

    friend bool operator==(const GrowthConfig&, const GrowthConfig&) = default;
};

/// A stored n-gram. Level-2 nodes have basis ids (the symbol index) as both
/// parents; higher nodes point at level n-1 feature ids.
struct FeatureNode {
    TokenId id = 0;
    int level = 0;
    SymbolSeq label;
    TokenId prefix_parent = 0;
    SymbolId last_symbol;
    TokenId suffix_parent = 0;
    double weight = 0.0;

    SymbolId first_symbol() const { return SymbolId{label.front()}; }
    friend bool operator==(const FeatureNode&, const FeatureNode&) = default;
};

/// Sparse g^(n): (parent id, symbol) -> weight. ema_global keeps a lazy
/// layer-wide scale so each event costs O(log size).
class LayerMemory {
public:
    using Key = std::pair<TokenId, std::uint32_t>;

    explicit LayerMemory(int level = 2) : level_(level) {}

    int level() const noexcept { return level_; }

    double get(TokenId parent, SymbolId k) const {
        auto it = raw_.find({parent, k.index});
        return it == raw_.end() ? 0.0 : it->second * scale_;
    }

    double observe(TokenId parent, SymbolId k, double xi, DecayMode mode) {
        double& g = raw_[{parent, k.index}];
        switch (mode) {
            case DecayMode::accumulate:
                g += xi / scale_;
                break;
            case DecayMode::ema:
                g = ((1.0 - xi) * (g * scale_) + xi) / scale_;
                break;
            case DecayMode::ema_global:
                scale_ *= (1.0 - xi);
                g += xi / scale_;
                if (scale_ < 1e-100) normalize();
                break;
        }
        return g * scale_;
    }

    void set(TokenId parent, SymbolId k, double value) { raw_[{parent, k.index}] = value / scale_; }

    /// Entries in key order with their effective values.
    std::vector<std::pair<Key, double>> entries() const {
        std::vector<std::pair<Key, double>> out;
        out.reserve(raw_.size());
        for (auto& [k, v] : raw_) out.emplace_back(k, v * scale_);
        return out;
    }

    std::size_t size() const noexcept { return raw_.size(); }
    bool empty() const noexcept { return raw_.empty(); }

    void normalize() {
        for (auto& [k, v] : raw_) v *= scale_;
        scale_ = 1.0;
    }

private:
    int level_;
    std::map<Key, double> raw_;
    double scale_ = 1.0;
};

/// The short-term memory DAG. Basis symbols own ids 0..d-1; feature nodes
/// take ids from a counter starting at d, in creation order.
class StmDag {
public:
    StmDag() = default;
    explicit StmDag(Alphabet alphabet, GrowthConfig config = {})
        : alphabet_(std::move(alphabet)), config_(std::move(config)), next_id_(alphabet_.size()) {
        config_.validate();
    }

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    const GrowthConfig& config() const noexcept { return config_; }
    GrowthConfig& config() noexcept { return config_; }
    std::size_t d() const noexcept { return alphabet_.size(); }
    TokenId next_id() const noexcept { return next_id_; }

    bool is_basis(TokenId id) const noexcept { return id < alphabet_.size(); }

    /// Highest level that holds at least one node (1 if none).
    int depth() const {
        for (auto it = by_level_.rbegin(); it != by_level_.rend(); ++it)
            if (!it->second.empty()) return it->first;
        return 1;
    }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t level_size(int n) const {
        auto it = by_level_.find(n);
        return it == by_level_.end() ? 0 : it->second.size();
    }

    const FeatureNode& node(TokenId id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw DanglingReferenceError(id);
        return it->second;
    }
    bool has_node(TokenId id) const { return nodes_.count(id) != 0; }

    const std::map<TokenId, FeatureNode>& nodes() const noexcept { return nodes_; }

    /// Nodes of one level in lexicographic label order.
    std::vector<const FeatureNode*> level_nodes(int n) const {
        std::vector<const FeatureNode*> out;
        if (auto it = by_level_.find(n); it != by_level_.end())
            for (auto& [label, id] : it->second) out.push_back(&nodes_.at(id));
        return out;
    }

    /// Node id for an n-gram label (n >= 2), or the basis id for n = 1.
    std::optional<TokenId> find(SymbolView label) const {
        if (label.empty()) return std::nullopt;
        if (label.size() == 1) {
            if (label[0] < alphabet_.size()) return TokenId{label[0]};
            return std::nullopt;
        }
        auto lv = by_level_.find(static_cast<int>(label.size()));
        if (lv == by_level_.end()) return std::nullopt;
        auto it = lv->second.find(SymbolSeq(label));
        if (it == lv->second.end()) return std::nullopt;
        return it->second;
    }

    bool contains(SymbolView label) const { return label.size() >= 2 && find(label).has_value(); }

    /// Label of a basis id or node id.
    SymbolSeq label_of(TokenId id) const {
        if (is_basis(id)) return SymbolSeq(1, static_cast<char32_t>(id));
        return node(id).label;
    }

    const std::vector<TokenId>& prefix_children(TokenId id) const { return lookup(prefix_children_, id); }
    const std::vector<TokenId>& suffix_children(TokenId id) const { return lookup(suffix_children_, id); }

    bool is_terminal(TokenId id) const {
        return has_node(id) && prefix_children(id).empty() && suffix_children(id).empty();
    }

    const std::map<int, LayerMemory>& layers() const noexcept { return layers_; }
    LayerMemory& layer(int n) {
        auto it = layers_.find(n);
        if (it == layers_.end()) it = layers_.emplace(n, LayerMemory(n)).first;
        return it->second;
    }
    double weight(int n, TokenId parent, SymbolId k) const {
        auto it = layers_.find(n);
        return it == layers_.end() ? 0.0 : it->second.get(parent, k);
    }

    /// One Hebbian event at level n for (parent, next).
    double observe_event(TokenId parent, SymbolId next) {
        if (next.index >= alphabet_.size()) throw UnknownLabelError(std::to_string(next.index), 0);
        int n;
        if (is_basis(parent)) n = 2;
        else if (has_node(parent)) n = node(parent).level + 1;
        else throw DataError("unknown-parent", "unknown parent id " + std::to_string(parent));
        return layer(n).observe(parent, next, config_.xi_g, config_.decay_mode);
    }

    /// Counts level-n events over every segment. Only windows whose first
    /// n-1 symbols form an existing node are observed; segments never merge.
    std::size_t train_level(const std::vector<SymbolSeq>& segments, int n) {
        if (n < 2) throw DataError("layer-order", "levels start at 2");
        if (n > 2 && level_size(n - 1) == 0) return 0;
        std::size_t events = 0;
        for (auto& seg : segments) {
            for (std::size_t i = 0; i + n <= seg.size(); ++i) {
                auto parent = find(SymbolView(seg).substr(i, n - 1));
                if (!parent) continue;
                observe_event(*parent, SymbolId{seg[i + n - 1]});
                ++events;
            }
        }
        return events;
    }

    /// Converts qualifying (parent, symbol) weights at level n into nodes.
    std::vector<TokenId> grow_layer(int n) {
        if (n < 2) throw DataError("layer-order", "levels start at 2");
        if (n > 2 && level_size(n - 1) == 0)
            throw DataError("layer-order", "level " + std::to_string(n - 1) + " is empty");
        const double eps = config_.epsilons.at(n);
        std::vector<std::pair<SymbolSeq, std::pair<TokenId, double>>> cand;
        if (auto it = layers_.find(n); it != layers_.end()) {
            for (auto& [key, g] : it->second.entries()) {
                if (!(g > 0.0 && g >= eps)) continue;
                SymbolSeq label = label_of(key.first);
                label.push_back(static_cast<char32_t>(key.second));
                if (find(label)) continue;
                if (!find(SymbolView(label).substr(1))) continue;
                cand.push_back({std::move(label), {key.first, g}});
            }
        }
        std::sort(cand.begin(), cand.end());
        std::vector<TokenId> out;
        for (auto& [label, pg] : cand) out.push_back(add_node(label, pg.second));
        return out;
    }

    /// Layer-by-layer training: level n events are counted only after levels
    /// below n have grown. Stops at the first level that grows nothing.
    std::size_t train(const std::vector<SymbolSeq>& segments) {
        std::size_t events = 0;
        for (int n = 2; n <= config_.max_depth; ++n) {
            events += train_level(segments, n);
            grow_layer(n);
            if (level_size(n) == 0) break;
        }
        return events;
    }

    std::size_t train_sequence(const SymbolSeq& text) { return train(std::vector<SymbolSeq>{text}); }

    /// Inserts a node directly. Parents must already exist.
    TokenId add_node(const SymbolSeq& label, double weight) {
        if (label.size() < 2) throw DataError("bad-node", "nodes need at least two symbols");
        if (auto existing = find(label)) return *existing;
        auto pre = find(SymbolView(label).substr(0, label.size() - 1));
        auto suf = find(SymbolView(label).substr(1));
        if (!pre || !suf) throw DataError("smoothness", "node " + alphabet_.decode(label) + " lacks a parent");
        return insert(next_id_++, label, *pre, *suf, weight);
    }

    /// Inserts a node with a caller-chosen id (loading documents).
    void restore_node(const FeatureNode& n) {
        if (find(n.label)) throw DataError("bad-model", "duplicate node label");
        if (n.label.size() < 2 || static_cast<int>(n.label.size()) != n.level)
            throw DataError("bad-model", "node level does not match its label");
        auto pre = find(SymbolView(n.label).substr(0, n.label.size() - 1));
        auto suf = find(SymbolView(n.label).substr(1));
        if (!pre || *pre != n.prefix_parent) throw DanglingReferenceError(n.prefix_parent);
        if (!suf || *suf != n.suffix_parent) throw DanglingReferenceError(n.suffix_parent);
        if (n.id < alphabet_.size() || nodes_.count(n.id)) throw DataError("bad-model", "bad node id");
        insert(n.id, n.label, n.prefix_parent, n.suffix_parent, n.weight);
        next_id_ = std::max(next_id_, n.id + 1);
    }

    void set_next_id(TokenId id) { next_id_ = std::max(next_id_, id); }

    /// Removes every node and weight at levels >= n_cut.
    void cut(int n_cut) {
        if (n_cut < 2) throw DataError("bad-cut", "cut level must be at least 2");
        for (auto it = nodes_.begin(); it != nodes_.end();) {
            if (it->second.level >= n_cut) {
                prefix_children_.erase(it->first);
                suffix_children_.erase(it->first);
                it = nodes_.erase(it);
            } else {
                ++it;
            }
        }
        by_level_.erase(by_level_.lower_bound(n_cut), by_level_.end());
        layers_.erase(layers_.lower_bound(n_cut), layers_.end());
        auto prune = [this](std::map<TokenId, std::vector<TokenId>>& m) {
            for (auto& [id, kids] : m)
                kids.erase(std::remove_if(kids.begin(), kids.end(),
                                          [this](TokenId c) { return !nodes_.count(c); }),
                           kids.end());
        };
        prune(prefix_children_);
        prune(suffix_children_);
    }

    /// Every smooth merger of two level n-1 nodes, in label order.
    std::vector<std::pair<SymbolSeq, TokenId>> smooth_candidates(int n) const {
        std::vector<std::pair<SymbolSeq, TokenId>> out;
        if (n == 2) {
            for (std::uint32_t a = 0; a < d(); ++a)
                for (std::uint32_t b = 0; b < d(); ++b) {
                    SymbolSeq l{static_cast<char32_t>(a), static_cast<char32_t>(b)};
                    if (!find(l)) out.push_back({l, TokenId{a}});
                }
            return out;
        }
        for (auto* p : level_nodes(n - 1)) {
            SymbolSeq tail = p->label.substr(1);
            // Symbols k with tail + k stored at level n-1.
            auto tail_id = find(tail);
            if (!tail_id) continue;
            for (TokenId c : prefix_children(*tail_id)) {
                SymbolSeq l = p->label;
                l.push_back(nodes_.at(c).last_symbol.raw());
                if (!find(l)) out.push_back({std::move(l), p->id});
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Grows every smooth merger above the current top level with weight
    /// xi_g until a level adds nothing or max_depth is reached.
    std::size_t regrow_closure() {
        std::size_t added = 0;
        for (int n = depth() + 1; n <= config_.max_depth; ++n) {
            if (n > 2 && level_size(n - 1) == 0) break;
            auto cand = smooth_candidates(n);
            if (cand.empty()) break;
            for (auto& [label, parent] : cand) {
                layer(n).set(parent, SymbolId{label.back()}, config_.xi_g);
                add_node(label, config_.xi_g);
                ++added;
            }
        }
        return added;
    }

    /// Random growth above the current top level: each smooth merger draws
    /// g ~ U[0,1) and is kept iff g > 0 and g >= eps_n (carried forward).
    std::size_t regrow_random(CounterRng& rng) {
        std::size_t added = 0;
        for (int n = depth() + 1; n <= config_.max_depth; ++n) {
            if (n > 2 && level_size(n - 1) == 0) break;
            const double eps = config_.epsilons.at(n, true);
            std::vector<std::pair<SymbolSeq, double>> keep;
            for (auto& [label, parent] : smooth_candidates(n)) {
                const double g = rng.uniform();
                if (g > 0.0 && g >= eps) {
                    layer(n).set(parent, SymbolId{label.back()}, g);
                    keep.push_back({label, g});
                }
            }
            if (keep.empty()) break;
            for (auto& [label, g] : keep) add_node(label, g);
            added += keep.size();
        }
        return added;
    }

    /// Left gauge: (first symbol, suffix parent).
    std::pair<SymbolId, TokenId> left_form(TokenId id) const {
        const auto& n = node(id);
        return {n.first_symbol(), n.suffix_parent};
    }

    std::vector<const FeatureNode*> terminal_nodes() const {
        std::vector<const FeatureNode*> out;
        for (auto& [lv, m] : by_level_)
            for (auto& [label, id] : m)
                if (is_terminal(id)) out.push_back(&nodes_.at(id));
        return out;
    }

    std::vector<SymbolSeq> terminal_labels() const {
        std::vector<SymbolSeq> out;
        for (auto* n : terminal_nodes()) out.push_back(n->label);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Structural equality: same alphabet, labels, ids, links and weights.
    friend bool operator==(const StmDag& a, const StmDag& b) {
        if (!(a.alphabet_ == b.alphabet_) || a.nodes_ != b.nodes_) return false;
        if (a.layers_.size() != b.layers_.size()) return false;
        for (auto ia = a.layers_.begin(), ib = b.layers_.begin(); ia != a.layers_.end(); ++ia, ++ib)
            if (ia->first != ib->first || ia->second.entries() != ib->second.entries()) return false;
        return true;
    }

private:
    static const std::vector<TokenId>& lookup(const std::map<TokenId, std::vector<TokenId>>& m, TokenId id) {
        static const std::vector<TokenId> none;
        auto it = m.find(id);
        return it == m.end() ? none : it->second;
    }

    TokenId insert(TokenId id, const SymbolSeq& label, TokenId pre, TokenId suf, double weight) {
        FeatureNode n;
        n.id = id;
        n.level = static_cast<int>(label.size());
        n.label = label;
        n.prefix_parent = pre;
        n.last_symbol = SymbolId{label.back()};
        n.suffix_parent = suf;
        n.weight = weight;
        nodes_.emplace(id, n);
        by_level_[n.level].emplace(label, id);
        prefix_children_[pre].push_back(id);
        suffix_children_[suf].push_back(id);
        return id;
    }

    Alphabet alphabet_;
    GrowthConfig config_;
    TokenId next_id_ = 0;
    std::map<TokenId, FeatureNode> nodes_;
    std::map<int, std::map<SymbolSeq, TokenId>> by_level_;
    std::map<TokenId, std::vector<TokenId>> prefix_children_;
    std::map<TokenId, std::vector<TokenId>> suffix_children_;
    std::map<int, LayerMemory> layers_;
};

/// Fresh random language (level 2 samples all d*d pairs).
inline StmDag random_grow(const Alphabet& alphabet, const GrowthConfig& config, CounterRng& rng) {
    StmDag dag(alphabet, config);
    dag.regrow_random(rng);
    return dag;
}

enum class RegrowMode { closure, random };

/// Cut at n_cut, then regrow. Random mode may override thresholds.
inline StmDag cut_and_regrow(StmDag dag, int n_cut, RegrowMode mode, CounterRng* rng = nullptr,
                             const std::optional<Epsilons>& eps = std::nullopt) {
    dag.cut(n_cut);
    if (mode == RegrowMode::closure) {
        dag.regrow_closure();
    } else {
        if (!rng) throw DataError("bad-config", "random regrow needs an rng");
        if (eps) dag.config().epsilons = *eps;
        dag.regrow_random(*rng);
    }
    return dag;
}

}  // namespace retok
