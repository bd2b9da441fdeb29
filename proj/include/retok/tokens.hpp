#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "retok/alphabet.hpp"
#include "retok/dag.hpp"
#include "retok/json_canonical.hpp"

namespace retok {

enum class TokenKind { basis, feature, embedding, class_, quantity, super };

inline const char* to_string(TokenKind k) {
    switch (k) {
        case TokenKind::basis: return "basis";
        case TokenKind::feature: return "feature";
        case TokenKind::embedding: return "embedding";
        case TokenKind::class_: return "class";
        case TokenKind::quantity: return "quantity";
        case TokenKind::super: return "super";
    }
    return "basis";
}

inline TokenKind token_kind_from_string(const std::string& s) {
    if (s == "basis") return TokenKind::basis;
    if (s == "feature") return TokenKind::feature;
    if (s == "embedding") return TokenKind::embedding;
    if (s == "class") return TokenKind::class_;
    if (s == "quantity") return TokenKind::quantity;
    if (s == "super") return TokenKind::super;
    throw DataError("bad-model", "unknown token kind '" + s + "'");
}

/// A persisted token. Registry records list child ids; inline records
/// carry their children as nested copies instead.
struct TokenRecord {
    TokenId id = 0;
    TokenKind kind = TokenKind::basis;
    int level = 1;
    std::string label;
    std::vector<TokenId> children;
    std::vector<TokenRecord> inline_children;

    bool is_inline() const { return children.empty() && !inline_children.empty(); }
    friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

using Registry = std::map<TokenId, TokenRecord>;

inline void check_resolvable(const Registry& r) {
    for (auto& [id, rec] : r) {
        if (rec.kind == TokenKind::basis && (rec.level != 1 || !rec.children.empty()))
            throw DataError("bad-model", "basis token " + std::to_string(id) + " must be a childless level-1 token");
        for (TokenId c : rec.children)
            if (!r.count(c)) throw DanglingReferenceError(c);
    }
}

inline json to_json(const TokenRecord& t) {
    json j = {{"id", t.id}, {"kind", to_string(t.kind)}, {"level", t.level}, {"label", t.label}};
    if (!t.inline_children.empty()) {
        json kids = json::array();
        for (auto& c : t.inline_children) kids.push_back(to_json(c));
        j["children"] = kids;
    } else {
        j["children"] = t.children;
    }
    return j;
}

inline TokenRecord record_from_json(const json& j) {
    TokenRecord t;
    try {
        t.id = j.at("id").get<TokenId>();
        t.kind = token_kind_from_string(j.at("kind").get<std::string>());
        t.level = j.at("level").get<int>();
        t.label = j.at("label").get<std::string>();
        for (auto& c : j.at("children")) {
            if (c.is_object()) t.inline_children.push_back(record_from_json(c));
            else t.children.push_back(c.get<TokenId>());
        }
    } catch (const json::exception& e) {
        throw DataError("bad-model", std::string("malformed token record: ") + e.what());
    }
    return t;
}

inline json registry_to_json(const Registry& r) {
    check_resolvable(r);
    json arr = json::array();
    for (auto& [id, rec] : r) arr.push_back(to_json(rec));
    return arr;
}

inline Registry registry_from_json(const json& arr) {
    Registry r;
    for (auto& j : arr) {
        auto t = record_from_json(j);
        if (!r.emplace(t.id, t).second) throw DataError("bad-model", "duplicate token id " + std::to_string(t.id));
    }
    check_resolvable(r);
    return r;
}

/// Serializes a token set sorted by id; fails on any dangling child id.
inline std::string store_registry(const Registry& r) { return canonical_dump(json{{"tokens", registry_to_json(r)}}); }

inline Registry load_registry(const std::string& doc) { return registry_from_json(parse_json(doc).at("tokens")); }

/// Deep copy with every child nested; shared children are duplicated so no
/// record has two parents.
inline TokenRecord inline_copy(TokenId id, const Registry& r) {
    auto it = r.find(id);
    if (it == r.end()) throw DanglingReferenceError(id);
    TokenRecord out = it->second;
    out.children.clear();
    out.inline_children.clear();
    for (TokenId c : it->second.children) out.inline_children.push_back(inline_copy(c, r));
    return out;
}

/// The record ids reachable from `id`, including itself.
inline Registry reachable(TokenId id, const Registry& r) {
    Registry out;
    std::vector<TokenId> stack{id};
    while (!stack.empty()) {
        TokenId t = stack.back();
        stack.pop_back();
        if (out.count(t)) continue;
        auto it = r.find(t);
        if (it == r.end()) throw DanglingReferenceError(t);
        out.emplace(t, it->second);
        for (TokenId c : it->second.children) stack.push_back(c);
    }
    return out;
}

/// Flattens an inline record back to registry records.
inline void flatten(const TokenRecord& t, Registry& out) {
    TokenRecord flat = t;
    flat.inline_children.clear();
    flat.children.clear();
    for (auto& c : t.inline_children) {
        flat.children.push_back(c.id);
        flatten(c, out);
    }
    out[flat.id] = flat;
}

/// A dense index basis over token ids.
class Pool {
public:
    Pool() = default;
    explicit Pool(std::vector<TokenId> members) {
        for (TokenId m : members) add(m);
    }
    std::size_t add(TokenId id) {
        if (index_.count(id)) throw DataError("duplicate-member", "pool members must be distinct");
        index_[id] = members_.size();
        members_.push_back(id);
        return members_.size() - 1;
    }
    std::size_t index_of(TokenId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw DanglingReferenceError(id);
        return it->second;
    }
    const std::vector<TokenId>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }

private:
    std::vector<TokenId> members_;
    std::map<TokenId, std::size_t> index_;
};

}  // namespace retok
