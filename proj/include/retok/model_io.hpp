#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "retok/compression.hpp"
#include "retok/dag.hpp"
#include "retok/json_canonical.hpp"
#include "retok/memory.hpp"
#include "retok/tokens.hpp"

namespace retok {

inline constexpr int model_version = 1;

/// Everything a model document holds.
struct Model {
    StmDag dag;
    LongTermMemory ltm;
    std::map<TokenId, PnnChain> chains;  // keyed by embedding id
};

/// Registry view of a model. Embedding features missing from the dag get
/// ids after the dag's counter, in (level, label) order.
inline Registry build_registry(const Model& model) {
    const auto& dag = model.dag;
    const auto& a = dag.alphabet();
    Registry r;
    for (std::uint32_t i = 0; i < a.size(); ++i)
        r[i] = TokenRecord{i, TokenKind::basis, 1, a.labels()[i], {}, {}};
    std::map<SymbolSeq, TokenId> ids;
    for (std::uint32_t i = 0; i < a.size(); ++i) ids[SymbolSeq(1, i)] = i;
    for (auto& [id, n] : dag.nodes()) {
        r[id] = TokenRecord{id, TokenKind::feature, n.level, a.decode(n.label), {n.prefix_parent, n.last_symbol.index}, {}};
        ids[n.label] = id;
    }
    std::map<int, std::set<SymbolSeq>> extra;
    for (auto& e : model.ltm.embeddings())
        for (auto& [lv, feats] : e.m)
            for (auto& [label, w] : feats)
                if (!ids.count(label)) extra[lv].insert(label);
    TokenId next = dag.next_id();
    for (auto& [lv, labels] : extra)
        for (auto& l : labels) {
            const TokenId id = next++;
            if (id >= model.ltm.base()) throw DataError("bad-model", "feature ids collide with long-term ids");
            r[id] = TokenRecord{id, TokenKind::feature, lv, a.decode(l),
                                {ids.at(l.substr(0, l.size() - 1)), TokenId{l.back()}}, {}};
            ids[l] = id;
        }
    for (auto& e : model.ltm.embeddings()) {
        TokenRecord t{e.id, TokenKind::embedding, static_cast<int>(e.word.size()), a.decode(e.word), {}, {}};
        for (auto& [lv, feats] : e.m)
            for (auto& [label, w] : feats) t.children.push_back(ids.at(label));
        r[e.id] = t;
    }
    for (auto& c : model.ltm.classes()) {
        int lv = 1;
        for (TokenId m : c.members) lv = std::max(lv, r.at(m).level);
        r[c.id] = TokenRecord{c.id, TokenKind::class_, lv, c.label, c.members, {}};
    }
    for (auto& s : model.ltm.supers()) {
        std::string label;
        for (TokenId c : s.children) label += (label.empty() ? "" : " ") + std::to_string(c);
        std::vector<TokenId> kids;
        for (TokenId c : s.children)
            if (std::find(kids.begin(), kids.end(), c) == kids.end()) kids.push_back(c);
        r[s.id] = TokenRecord{s.id, TokenKind::super, static_cast<int>(s.children.size()), label, kids, {}};
    }
    return r;
}

namespace io {

inline json config_json(const GrowthConfig& c) {
    json eps = json::object();
    for (auto& [n, e] : c.epsilons.by_level) eps[std::to_string(n)] = e;
    return {{"xi_g", c.xi_g},
            {"decay_mode", to_string(c.decay_mode)},
            {"epsilons", eps},
            {"epsilon_fallback", c.epsilons.fallback ? json(*c.epsilons.fallback) : json(nullptr)},
            {"max_depth", c.max_depth},
            {"beta", c.beta}};
}

inline GrowthConfig config_from(const json& j) {
    GrowthConfig c;
    c.xi_g = j.at("xi_g").get<double>();
    c.decay_mode = decay_mode_from_string(j.at("decay_mode").get<std::string>());
    for (auto& [k, v] : j.at("epsilons").items()) c.epsilons.by_level[std::stoi(k)] = v.get<double>();
    if (!j.at("epsilon_fallback").is_null()) c.epsilons.fallback = j.at("epsilon_fallback").get<double>();
    c.max_depth = j.at("max_depth").get<int>();
    c.beta = j.at("beta").get<double>();
    c.validate();
    return c;
}

inline json seq_json(SymbolView s) {
    json a = json::array();
    for (char32_t c : s) a.push_back(static_cast<std::uint32_t>(c));
    return a;
}

inline SymbolSeq seq_from(const json& j) {
    SymbolSeq s;
    for (auto& c : j) s.push_back(c.get<std::uint32_t>());
    return s;
}

inline json features_json(const Embedding& e) {
    json arr = json::array();
    for (auto& [lv, feats] : e.m)
        for (auto& [label, w] : feats) arr.push_back(json::array({lv, seq_json(label), w}));
    return arr;
}

inline void features_from(const json& arr, Embedding& e) {
    for (auto& f : arr) e.m[f.at(0).get<int>()][seq_from(f.at(1))] = f.at(2).get<double>();
}

inline json matrix_json(const Matrix& m) { return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}}; }

inline Matrix matrix_from(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.a = j.at("data").get<std::vector<double>>();
    if (m.a.size() != m.rows * m.cols) throw DataError("bad-model", "matrix data size mismatch");
    return m;
}

inline json chain_json(TokenId id, const PnnChain& c) {
    json levels = json::array();
    for (auto& [n, lv] : c.levels) {
        json cores = json::array();
        for (auto& m : lv.cores) cores.push_back(matrix_json(m));
        levels.push_back({{"n", n}, {"cap", lv.cap}, {"bottom", matrix_json(lv.bottom)}, {"cores", cores}});
    }
    json out = json::array();
    for (auto& e : c.outward) out.push_back(json::array({seq_json(e.from), e.right ? "right" : "left", e.symbol}));
    return {{"embedding", id}, {"d", c.d}, {"beta", c.beta}, {"level1", c.level1}, {"levels", levels}, {"outward", out}};
}

inline PnnChain chain_from(const json& j) {
    PnnChain c;
    c.d = j.at("d").get<std::size_t>();
    c.beta = j.at("beta").get<double>();
    c.level1 = j.at("level1").get<std::vector<double>>();
    for (auto& l : j.at("levels")) {
        ChainLevel lv;
        lv.n = l.at("n").get<int>();
        lv.cap = l.at("cap").get<double>();
        lv.bottom = matrix_from(l.at("bottom"));
        for (auto& m : l.at("cores")) lv.cores.push_back(matrix_from(m));
        c.levels[lv.n] = std::move(lv);
    }
    for (auto& e : j.at("outward"))
        c.outward.push_back({seq_from(e.at(0)), e.at(1).get<std::string>() == "right", e.at(2).get<char32_t>()});
    return c;
}

}  // namespace io

/// Model document: version, alphabet, config, tokens (registry view),
/// layers (weights and nodes), embeddings, classes, supers, chains.
inline json model_to_json(const Model& m) {
    const auto& dag = m.dag;
    json layers = json::array();
    std::set<int> levels;
    for (auto& [n, lm] : dag.layers()) levels.insert(n);
    for (auto& [id, n] : dag.nodes()) levels.insert(n.level);
    for (int n : levels) {
        json w = json::array();
        if (auto it = dag.layers().find(n); it != dag.layers().end())
            for (auto& [key, v] : it->second.entries()) w.push_back(json::array({key.first, key.second, v}));
        json nodes = json::array();
        for (auto* node : dag.level_nodes(n))
            nodes.push_back(json::array({node->id, node->prefix_parent, node->last_symbol.index, node->suffix_parent, node->weight}));
        std::sort(nodes.begin(), nodes.end());
        layers.push_back({{"level", n}, {"weights", w}, {"nodes", nodes}});
    }
    json embeddings = json::array();
    for (auto& e : m.ltm.embeddings())
        embeddings.push_back({{"id", e.id}, {"word", io::seq_json(e.word)}, {"eta", e.eta}, {"m", io::features_json(e)}});
    json classes = json::array();
    for (auto& c : m.ltm.classes()) classes.push_back({{"id", c.id}, {"label", c.label}, {"members", c.members}});
    json supers = json::array();
    for (auto& s : m.ltm.supers())
        supers.push_back({{"id", s.id}, {"children", s.children}, {"pool", s.pool}, {"eta", s.body.eta},
                          {"m", io::features_json(s.body)}});
    json chains = json::array();
    for (auto& [id, c] : m.chains) chains.push_back(io::chain_json(id, c));
    return {{"version", model_version},
            {"alphabet", dag.alphabet().labels()},
            {"config", io::config_json(dag.config())},
            {"next_id", dag.next_id()},
            {"ltm_base", m.ltm.base()},
            {"tokens", registry_to_json(build_registry(m))},
            {"layers", layers},
            {"embeddings", embeddings},
            {"classes", classes},
            {"supers", supers},
            {"chains", chains}};
}

inline Model model_from_json(const json& j) {
    try {
        if (j.at("version").get<int>() != model_version) throw DataError("bad-model", "unsupported model version");
        Model m;
        m.dag = StmDag(Alphabet(j.at("alphabet").get<std::vector<std::string>>()), io::config_from(j.at("config")));
        std::vector<FeatureNode> nodes;
        for (auto& l : j.at("layers"))
            for (auto& n : l.at("nodes")) {
                FeatureNode f;
                f.id = n.at(0).get<TokenId>();
                f.prefix_parent = n.at(1).get<TokenId>();
                f.last_symbol = SymbolId{n.at(2).get<std::uint32_t>()};
                f.suffix_parent = n.at(3).get<TokenId>();
                f.weight = n.at(4).get<double>();
                f.level = l.at("level").get<int>();
                nodes.push_back(f);
            }
        // Labels follow from the prefix chain; restore level by level.
        std::sort(nodes.begin(), nodes.end(), [](auto& x, auto& y) { return std::pair(x.level, x.id) < std::pair(y.level, y.id); });
        for (auto& f : nodes) {
            f.label = m.dag.label_of(f.prefix_parent);
            f.label.push_back(f.last_symbol.raw());
            m.dag.restore_node(f);
        }
        for (auto& l : j.at("layers"))
            for (auto& w : l.at("weights"))
                m.dag.layer(l.at("level").get<int>()).set(w.at(0).get<TokenId>(), SymbolId{w.at(1).get<std::uint32_t>()}, w.at(2).get<double>());
        m.dag.set_next_id(j.at("next_id").get<TokenId>());
        m.ltm = LongTermMemory(j.at("ltm_base").get<TokenId>());
        for (auto& e : j.at("embeddings")) {
            Embedding x;
            x.id = e.at("id").get<TokenId>();
            x.word = io::seq_from(e.at("word"));
            x.eta = e.at("eta").get<double>();
            io::features_from(e.at("m"), x);
            m.ltm.restore(std::move(x));
        }
        for (auto& c : j.at("classes"))
            m.ltm.restore(ClassToken{c.at("id").get<TokenId>(), c.at("label").get<std::string>(),
                                     c.at("members").get<std::vector<TokenId>>()});
        for (auto& s : j.at("supers")) {
            SuperEmbedding x;
            x.id = s.at("id").get<TokenId>();
            x.children = s.at("children").get<std::vector<TokenId>>();
            x.pool = s.at("pool").get<std::vector<TokenId>>();
            x.body.id = x.id;
            x.body.eta = s.at("eta").get<double>();
            io::features_from(s.at("m"), x.body);
            if (!x.body.m.empty() && x.body.m.rbegin()->first > 0) {
                SymbolSeq w;
                for (TokenId c : x.children) w.push_back(static_cast<char32_t>(std::find(x.pool.begin(), x.pool.end(), c) - x.pool.begin()));
                x.body.word = w;
            }
            m.ltm.restore(std::move(x));
        }
        for (auto& c : j.at("chains")) m.chains[c.at("embedding").get<TokenId>()] = io::chain_from(c);
        // The stored registry must agree with the rebuilt one.
        if (registry_from_json(j.at("tokens")) != build_registry(m))
            throw DataError("bad-model", "token registry does not match model content");
        return m;
    } catch (const json::exception& e) {
        throw DataError("bad-model", std::string("malformed model document: ") + e.what());
    }
}

inline std::string store_model(const Model& m) { return canonical_dump(model_to_json(m)); }
inline Model load_model(const std::string& doc) { return model_from_json(parse_json(doc)); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("unreadable-source", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("unwritable", "cannot write " + path);
    out << content;
}

}  // namespace retok
