#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace retok;
using namespace retok::testing;

TEST(Alphabet, InternSymbol) {
    auto abc = Alphabet::from_chars("abc");
    EXPECT_EQ(intern_symbol("a", abc).index, 0u);
    EXPECT_EQ(intern_symbol("c", abc).index, 2u);
    EXPECT_EQ(intern_symbol("c", abc), intern_symbol("c", abc));
    EXPECT_THROW(intern_symbol("q", abc), UnknownLabelError);
}

TEST(Alphabet, EncodeString) {
    auto a = Alphabet::latin();
    EXPECT_EQ(a.size(), 26u);
    auto cat = encode_string("cat", a);
    ASSERT_EQ(cat.size(), 3u);
    EXPECT_EQ(cat[0], U'\x02');
    EXPECT_EQ(a.decode(cat), "cat");
    EXPECT_TRUE(encode_string("", a).empty());
    try {
        encode_string("c@t", a);
        FAIL() << "expected an unknown-label error";
    } catch (const UnknownLabelError& e) {
        EXPECT_EQ(e.position(), 1u);
        EXPECT_EQ(e.label(), "@");
        EXPECT_EQ(e.kind(), "unknown-label");
    }
}

TEST(Alphabet, MultiByteLabels) {
    auto a = Alphabet::from_chars("jonás");
    EXPECT_EQ(a.size(), 5u);
    auto w = a.encode("jonás");
    EXPECT_EQ(w.size(), 5u);
    EXPECT_EQ(a.decode(w), "jonás");
}

TEST(Alphabet, RejectsDuplicates) {
    EXPECT_THROW(Alphabet(std::vector<std::string>{"a", "a"}), DataError);
}

namespace {

Model cats_model() {
    auto a = Alphabet::latin();
    Model m{dogs_cats_frog(), LongTermMemory(), {}};
    m.ltm.add_embedding(embed_word(a.encode("cats")));
    m.ltm.add_embedding(embed_word(a.encode("cat")));
    return m;
}

}  // namespace

TEST(Registry, BasisOnly) {
    Registry r;
    r[0] = {0, TokenKind::basis, 1, "a", {}, {}};
    r[1] = {1, TokenKind::basis, 1, "b", {}, {}};
    auto doc = store_registry(r);
    auto back = load_registry(doc);
    EXPECT_EQ(back.size(), 2u);
    EXPECT_EQ(back, r);
    EXPECT_EQ(store_registry(back), doc);
}

TEST(Registry, CatsEmbeddingClosure) {
    auto m = cats_model();
    auto reg = build_registry(m);
    const TokenId cats = m.ltm.embeddings()[0].id;
    auto sub = reachable(cats, reg);
    EXPECT_EQ(sub.size(), 11u);  // the embedding plus 4 symbols, 3 bigrams, 2 trigrams, 1 four-gram
    std::size_t embeddings = 0;
    for (auto& [id, rec] : sub) embeddings += rec.kind == TokenKind::embedding;
    EXPECT_EQ(embeddings, 1u);
    EXPECT_EQ(load_registry(store_registry(sub)), sub);
}

TEST(Registry, DanglingReference) {
    Registry r;
    r[5] = {5, TokenKind::feature, 2, "ab", {0, 99}, {}};
    r[0] = {0, TokenKind::basis, 1, "a", {}, {}};
    try {
        store_registry(r);
        FAIL();
    } catch (const DanglingReferenceError& e) {
        EXPECT_EQ(e.missing_id(), 99u);
    }
}

TEST(Registry, BasisMustBeLeaf) {
    Registry r;
    r[0] = {0, TokenKind::basis, 1, "a", {}, {}};
    r[1] = {1, TokenKind::basis, 2, "b", {0}, {}};
    EXPECT_THROW(store_registry(r), DataError);
}

namespace {

void collect(const TokenRecord& t, std::vector<const TokenRecord*>& out) {
    out.push_back(&t);
    for (auto& c : t.inline_children) collect(c, out);
}

}  // namespace

TEST(Registry, InlineCopyOfCat) {
    auto m = cats_model();
    auto reg = build_registry(m);
    const TokenId cat = m.ltm.embeddings()[1].id;
    auto rec = inline_copy(cat, reg);
    EXPECT_TRUE(rec.children.empty());
    ASSERT_EQ(rec.inline_children.size(), 6u);  // c,a,t + ca,at + cat
    std::map<int, int> per_level;
    for (auto& c : rec.inline_children) per_level[c.level]++;
    EXPECT_EQ(per_level, (std::map<int, int>{{1, 3}, {2, 2}, {3, 1}}));
    std::vector<const TokenRecord*> all;
    collect(rec, all);
    for (auto* t : all) {
        EXPECT_TRUE(t->children.empty()) << "inline copies hold no id references";
        if (t->kind == TokenKind::basis) EXPECT_TRUE(t->inline_children.empty());
    }
    // Every basis leaf spells one of c, a, t.
    std::set<std::string> leaves;
    for (auto* t : all)
        if (t->kind == TokenKind::basis) leaves.insert(t->label);
    EXPECT_EQ(leaves, (std::set<std::string>{"a", "c", "t"}));
}

TEST(Registry, InlineCopyOfBasisIsIdentical) {
    auto m = cats_model();
    auto reg = build_registry(m);
    EXPECT_EQ(inline_copy(2, reg), reg.at(2));
    EXPECT_THROW(inline_copy(123456789, reg), DanglingReferenceError);
}

TEST(Registry, InlineRoundTripAndFlatten) {
    auto m = cats_model();
    auto reg = build_registry(m);
    const TokenId cats = m.ltm.embeddings()[0].id;
    auto rec = inline_copy(cats, reg);
    auto j = to_json(rec);
    EXPECT_EQ(record_from_json(j), rec);
    Registry flat;
    flatten(rec, flat);
    EXPECT_EQ(flat, reachable(cats, reg));
}

TEST(Registry, InlineAndRegistryRetrieveAlike) {
    // Rebuild an embedding from its inline copy and compare retrieval.
    auto m = cats_model();
    auto reg = build_registry(m);
    const auto& orig = m.ltm.embeddings()[0];
    auto rec = inline_copy(orig.id, reg);
    auto a = Alphabet::latin();
    Embedding rebuilt;
    rebuilt.word = a.encode(rec.label);
    for (auto& c : rec.inline_children) rebuilt.m[c.level][a.encode(c.label)] = std::pow(2.0, c.level - 1);
    EXPECT_EQ(rebuilt.m, orig.m);
    for (std::string ctx : {"c", "ca", "at", "ts", "og"}) {
        auto p1 = predict_kv({orig}, a.encode(ctx), 26);
        auto p2 = predict_kv({rebuilt}, a.encode(ctx), 26);
        EXPECT_EQ(p1.w, p2.w) << ctx;
    }
}

TEST(Registry, Deterministic) {
    auto m1 = cats_model(), m2 = cats_model();
    EXPECT_EQ(store_registry(build_registry(m1)), store_registry(build_registry(m2)));
}

TEST(Pool, DenseIndex) {
    Pool p({10, 7, 3});
    EXPECT_EQ(p.index_of(7), 1u);
    EXPECT_THROW(p.add(7), DataError);
    EXPECT_THROW(p.index_of(99), DanglingReferenceError);
}

TEST(ModelDocument, RoundTripIsByteIdentical) {
    auto m = cats_model();
    m.ltm.associate({m.ltm.embeddings()[0].id, m.ltm.embeddings()[1].id}, "felines");
    m.chains[m.ltm.embeddings()[0].id] = compress_pnn(m.ltm.embeddings()[0], 26);
    const auto doc = store_model(m);
    auto back = load_model(doc);
    EXPECT_TRUE(back.dag == m.dag);
    EXPECT_EQ(back.ltm.embeddings(), m.ltm.embeddings());
    EXPECT_EQ(back.ltm.classes(), m.ltm.classes());
    EXPECT_EQ(store_model(back), doc);
}

TEST(ModelDocument, EmaGlobalWeightsSurvive) {
    GrowthConfig c = eps0();
    c.decay_mode = DecayMode::ema_global;
    Model m{train_words({"abcab", "bca"}, c), LongTermMemory(), {}};
    const auto doc = store_model(m);
    EXPECT_EQ(store_model(load_model(doc)), doc);
}

TEST(ModelDocument, RejectsTamperedRegistry) {
    auto m = cats_model();
    auto j = model_to_json(m);
    j["tokens"][0]["label"] = "z";
    EXPECT_THROW(model_from_json(j), DataError);
}

TEST(CanonicalJson, DoublesKeepSeventeenDigits) {
    json j = {{"b", 0.1}, {"a", 1.0}};
    EXPECT_EQ(canonical_dump(j, -1), "{\"a\":1.0,\"b\":0.10000000000000001}\n");
    EXPECT_EQ(parse_json(canonical_dump(j)).at("b").get<double>(), 0.1);
}
