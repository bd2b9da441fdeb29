#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "retok/error.hpp"

namespace retok {

/// Index of a basis token within an alphabet. Distinct symbols are
/// orthogonal one-hot units; the index is stable for the alphabet's lifetime.
struct SymbolId {
    std::uint32_t index = 0;

    constexpr SymbolId() = default;
    constexpr explicit SymbolId(std::uint32_t i) : index(i) {}
    constexpr explicit SymbolId(char32_t c) : index(static_cast<std::uint32_t>(c)) {}

    constexpr char32_t raw() const { return static_cast<char32_t>(index); }
    friend constexpr auto operator<=>(SymbolId, SymbolId) = default;
};

/// A sequence of symbol indices. Each element is a SymbolId::raw() value;
/// u32string gives cheap hashing, ordering and substring views.
using SymbolSeq = std::u32string;
using SymbolView = std::u32string_view;

namespace utf8 {

/// Splits a UTF-8 string into code point substrings. Invalid lead bytes are
/// kept as single-byte units so no input is silently lost.
inline std::vector<std::string> split(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if (c >= 0xF0) len = 4;
        else if (c >= 0xE0) len = 3;
        else if (c >= 0xC0) len = 2;
        if (i + len > s.size()) len = 1;
        out.emplace_back(s.substr(i, len));
        i += len;
    }
    return out;
}

}  // namespace utf8

/// Ordered set of distinct labels forming the external basis. Text alphabets
/// use one UTF-8 code point per label; pools of higher-order tokens use the
/// decimal token id as label.
class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::vector<std::string> labels) {
        for (auto& l : labels) add(std::move(l));
    }

    /// The 26 lowercase Latin letters.
    static Alphabet latin() { return from_chars("abcdefghijklmnopqrstuvwxyz"); }

    /// One label per code point of `chars`, in order, duplicates ignored.
    static Alphabet from_chars(std::string_view chars) {
        Alphabet a;
        for (auto& cp : utf8::split(chars))
            if (!a.contains(cp)) a.add(cp);
        return a;
    }

    SymbolId add(std::string label) {
        if (label.empty()) throw DataError("bad-alphabet", "empty alphabet label");
        if (auto it = index_.find(label); it != index_.end())
            throw DataError("bad-alphabet", "duplicate alphabet label '" + label + "'");
        SymbolId id{static_cast<std::uint32_t>(labels_.size())};
        index_.emplace(label, id);
        labels_.push_back(std::move(label));
        return id;
    }

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(SymbolId s) const { return labels_.at(s.index); }
    bool contains(std::string_view label) const { return index_.count(std::string(label)) != 0; }

    SymbolId intern(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) throw UnknownLabelError(std::string(label), 0);
        return it->second;
    }

    /// Encodes a UTF-8 string one code point per symbol.
    SymbolSeq encode(std::string_view text) const {
        SymbolSeq out;
        std::size_t pos = 0;
        for (auto& cp : utf8::split(text)) {
            auto it = index_.find(cp);
            if (it == index_.end()) throw UnknownLabelError(cp, pos);
            out.push_back(it->second.raw());
            ++pos;
        }
        return out;
    }

    std::string decode(SymbolView seq) const {
        std::string out;
        for (char32_t c : seq) out += labels_.at(c);
        return out;
    }

    /// Joins labels with a separator; used for pools whose labels are ids.
    std::string decode_joined(SymbolView seq, std::string_view sep) const {
        std::string out;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (i) out += sep;
            out += labels_.at(seq[i]);
        }
        return out;
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, SymbolId> index_;
};

inline SymbolId intern_symbol(std::string_view label, const Alphabet& alphabet) {
    return alphabet.intern(label);
}

inline SymbolSeq encode_string(std::string_view s, const Alphabet& alphabet) {
    return alphabet.encode(s);
}

}  // namespace retok
