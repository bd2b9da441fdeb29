#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace retok;
using namespace retok::testing;

TEST(Replay, GreedyRecoversEachWord) {
    auto d = dogs_cats_frog();
    const auto a = Alphabet::latin();
    CounterRng rng(0);
    EXPECT_EQ(a.decode(replay(d, a.intern("c"), SamplerConfig{}, rng).word), "cats");
    EXPECT_EQ(a.decode(replay(d, a.intern("t"), SamplerConfig{}, rng).word), "cats");
    EXPECT_EQ(a.decode(replay(d, a.intern("f"), SamplerConfig{}, rng).word), "frog");
    EXPECT_EQ(a.decode(replay(d, a.intern("z"), SamplerConfig{}, rng).word), "z");
}

TEST(Replay, StaysInsideStoredNodes) {
    auto d = train_words({"abcab", "bcabc", "cab", "aab"});
    CounterRng rng(4);
    SamplerConfig s;
    s.greedy = false;
    for (int i = 0; i < 50; ++i) {
        auto t = replay(d, std::nullopt, s, rng);
        if (t.word.size() >= 2) EXPECT_TRUE(d.find(t.word));
    }
}

TEST(Replay, FeaturesAreStoredSubgrams) {
    auto d = dogs_cats_frog();
    CounterRng rng(0);
    auto t = replay(d, Alphabet::latin().intern("d"), SamplerConfig{}, rng);
    EXPECT_EQ(t.features.at(1).size(), 4u);
    EXPECT_EQ(t.features.at(2).size(), 3u);
    EXPECT_EQ(t.features.at(3).size(), 2u);
    EXPECT_EQ(t.features.at(4).size(), 1u);
}

TEST(Embedding, LevelWeights) {
    auto e = embed_word(Alphabet::latin().encode("cats"), 0.5, 3.0);
    const auto a = Alphabet::latin();
    EXPECT_DOUBLE_EQ(e.weight(a.encode("c")), 0.5);
    EXPECT_DOUBLE_EQ(e.weight(a.encode("at")), 1.5);
    EXPECT_DOUBLE_EQ(e.weight(a.encode("ats")), 4.5);
    EXPECT_DOUBLE_EQ(e.weight(a.encode("cats")), 13.5);
    EXPECT_EQ(e.weight(a.encode("ct")), 0.0);
    EXPECT_EQ(e.feature_count(), 10u);
    EXPECT_THROW(embed_word(SymbolSeq{}), DataError);
}

TEST(Embedding, RepeatedSubgramsCountOnce) {
    auto e = embed_word(Alphabet::latin().encode("aaa"));
    EXPECT_EQ(e.feature_count(), 3u);
    EXPECT_DOUBLE_EQ(e.weight(Alphabet::latin().encode("a")), 1.0);
}

TEST(KeyValue, CatsContexts) {
    auto e = embed_word(Alphabet::latin().encode("cats"));
    const auto a = Alphabet::latin();
    EXPECT_DOUBLE_EQ(key_value(e, a.encode("ca")), 1 + 2);
    EXPECT_DOUBLE_EQ(key_value(e, a.encode("xca")), 1 + 2);
    EXPECT_DOUBLE_EQ(key_value(e, a.encode("cat")), 1 + 2 + 4);
    EXPECT_DOUBLE_EQ(key_value(e, a.encode("q")), 0.0);
}

namespace {

PredictionWeights oracle_kv(const std::vector<Embedding>& es, SymbolView ctx, std::size_t d) {
    PredictionWeights out(d);
    for (auto& e : es) {
        double x = 0;
        for (std::size_t n = 1; n <= ctx.size(); ++n) x += e.weight(ctx.substr(ctx.size() - n));
        const double act = std::tanh(x);
        for (std::uint32_t k = 0; k < d; ++k)
            for (std::size_t n = 1; n <= ctx.size(); ++n)
                out.w[k] += act * e.weight(SymbolSeq(ctx.substr(ctx.size() - n)) + static_cast<char32_t>(k));
    }
    return out;
}

}  // namespace

TEST(KeyValue, PredictMatchesExpansion) {
    CounterRng rng(13);
    std::vector<Embedding> es;
    for (int i = 0; i < 12; ++i) es.push_back(embed_word(random_seq(rng, 4, 2 + rng.below(7))));
    for (int q = 0; q < 40; ++q) {
        auto ctx = random_seq(rng, 4, 1 + rng.below(5));
        auto got = predict_kv(es, ctx, 4);
        auto want = oracle_kv(es, ctx, 4);
        for (int k = 0; k < 4; ++k) EXPECT_NEAR(got[k], want[k], 1e-9);
    }
}

TEST(KeyValue, CatsPredictsS) {
    const auto a = Alphabet::latin();
    std::vector<Embedding> es{embed_word(a.encode("cats")), embed_word(a.encode("dogs"))};
    auto pw = predict_kv(es, a.encode("at"), 26);
    EXPECT_EQ(pw.support(), std::vector<std::uint32_t>{18});
    EXPECT_NEAR(pw[18], std::tanh(1 + 2) * (2 + 4), 1e-12);
}

TEST(KeyValue, ParallelActivationMatchesSerial) {
    CounterRng rng(2);
    std::vector<Embedding> es;
    for (int i = 0; i < 300; ++i) es.push_back(embed_word(random_seq(rng, 5, 3 + rng.below(5))));
    auto ctx = random_seq(rng, 5, 3);
    EXPECT_EQ(key_activation(es, ctx, Activation::tanh, 1), key_activation(es, ctx, Activation::tanh, 4));
    EXPECT_EQ(predict_kv(es, ctx, 5, Activation::tanh, nullptr, 1).w,
              predict_kv(es, ctx, 5, Activation::tanh, nullptr, 4).w);
}

TEST(KeyValue, StmTermAdds) {
    auto d = dogs_cats_frog();
    const auto a = Alphabet::latin();
    std::vector<Embedding> es{embed_word(a.encode("cats"))};
    auto ctx = a.encode("ca");
    auto both = predict_kv(es, ctx, 26, Activation::tanh, &d);
    auto kv = predict_kv(es, ctx, 26);
    auto stm = right_gradient(d, ctx);
    for (int k = 0; k < 26; ++k) EXPECT_NEAR(both[k], kv[k] + stm[k], 1e-12);
}

TEST(LongTerm, IdsAndKinds) {
    LongTermMemory ltm;
    const auto a = Alphabet::latin();
    auto cat = ltm.add_embedding(embed_word(a.encode("cat")));
    auto dog = ltm.add_embedding(embed_word(a.encode("dog")));
    EXPECT_EQ(cat, TokenId{1} << 40);
    EXPECT_EQ(dog, cat + 1);
    auto pets = ltm.associate({cat, dog}, "pets");
    EXPECT_TRUE(ltm.is_class(pets));
    EXPECT_EQ(ltm.leaves(pets), (std::vector<TokenId>{cat, dog}));
    EXPECT_EQ(ltm.find_word(a.encode("dog")), dog);
    EXPECT_FALSE(ltm.find_word(a.encode("cow")));
    EXPECT_THROW(ltm.associate({cat, 5}, "x"), DanglingReferenceError);
    EXPECT_THROW(ltm.associate({cat, cat}, "x"), DataError);
    EXPECT_THROW(ltm.associate({}, "x"), DataError);
    EXPECT_THROW(ltm.embedding(pets), DataError);
}

TEST(LongTerm, ClassActivationIsMaxOverMembers) {
    LongTermMemory ltm;
    const auto a = Alphabet::latin();
    auto cat = ltm.add_embedding(embed_word(a.encode("cat")));
    auto dog = ltm.add_embedding(embed_word(a.encode("dog")));
    auto pets = ltm.associate({cat, dog}, "pets");
    auto ctx = a.encode("do");
    EXPECT_DOUBLE_EQ(ltm.activation(pets, ctx, Activation::identity), 3.0);
    EXPECT_DOUBLE_EQ(ltm.activation(cat, ctx, Activation::identity), 0.0);
}

TEST(LongTerm, SampleDecode) {
    LongTermMemory ltm;
    const auto a = Alphabet::latin();
    auto the = ltm.add_embedding(embed_word(a.encode("the")));
    auto cat = ltm.add_embedding(embed_word(a.encode("cat")));
    auto dog = ltm.add_embedding(embed_word(a.encode("dog")));
    auto pets = ltm.associate({cat, dog}, "pets");
    CounterRng rng(1);
    std::set<std::string> seen;
    for (int i = 0; i < 40; ++i) seen.insert(ltm.sample_decode_code({the, pets}, a, rng));
    EXPECT_EQ(seen, (std::set<std::string>{"the cat", "the dog"}));
    EXPECT_THROW(ltm.sample_decode(12345, a, rng), DanglingReferenceError);
}

TEST(SuperLayer, LiftAndPredictNextWord) {
    LongTermMemory ltm;
    const auto a = Alphabet::latin();
    auto the = ltm.add_embedding(embed_word(a.encode("the")));
    auto cat = ltm.add_embedding(embed_word(a.encode("cat")));
    auto dog = ltm.add_embedding(embed_word(a.encode("dog")));
    auto sat = ltm.add_embedding(embed_word(a.encode("sat")));
    auto sl = lift(ltm, {{the, cat, sat}, {the, dog}}, eps0());
    EXPECT_EQ(sl.pool, (std::vector<TokenId>{the, cat, sat, dog}));
    EXPECT_EQ(sl.super_ids.size(), 2u);
    EXPECT_EQ(ltm.super_embedding(sl.super_ids[0]).children, (std::vector<TokenId>{the, cat, sat}));
    auto pw = predict_super(ltm, sl, {the, cat});
    ASSERT_EQ(pw.support().size(), 1u);
    EXPECT_EQ(sl.pool[pw.support()[0]], sat);
    auto next = predict_super(ltm, sl, {the});
    std::set<TokenId> words;
    for (auto k : next.support()) words.insert(sl.pool[k]);
    EXPECT_EQ(words, (std::set<TokenId>{cat, dog}));
    CounterRng rng(0);
    EXPECT_EQ(ltm.sample_decode(sl.super_ids[0], a, rng), "the cat sat");
    EXPECT_THROW(lift(ltm, {{the, 77}}, eps0()), DataError);
    EXPECT_THROW(sl.index_of(77), DataError);
}

TEST(Quantity, OverlapPeaksAtOwnLength) {
    for (int n = 1; n <= 6; ++n) {
        QuantityToken q{n, 10.0};
        EXPECT_NEAR(quantity_overlap(q, n), (std::pow(10.0, n) - 1) / 9 / std::pow(10.0, n - 1), 1e-12);
        for (int r = n + 1; r <= 8; ++r) EXPECT_DOUBLE_EQ(quantity_overlap(q, r), quantity_overlap(q, n));
    }
    std::vector<QuantityToken> qs;
    for (int n = 1; n <= 6; ++n) qs.push_back({n, 10.0});
    for (int r = 1; r <= 6; ++r) EXPECT_EQ(match_quantity(qs, r), static_cast<std::size_t>(r - 1));
    EXPECT_EQ(quantity_overlap(qs[0], 0), 0.0);
}

TEST(Quantity, RunsAndMask) {
    std::vector<std::optional<SymbolId>> ctx{SymbolId{1u}, std::nullopt, SymbolId{2u}, SymbolId{0u}};
    EXPECT_EQ(u_mask(ctx), (std::vector<int>{1, 0, 1, 1}));
    auto u = decode_quantities({{2, 10}, {3, 10}});
    EXPECT_EQ(u, (std::vector<int>{1, 1, 0, 1, 1, 1}));
    EXPECT_EQ(run_lengths(u), (std::vector<int>{2, 3}));
    EXPECT_EQ(decode_quantities({{2, 10}, {3, 10}}, false).size(), 5u);
}

TEST(Quantity, FindByLength) {
    LongTermMemory ltm;
    const auto a = Alphabet::latin();
    auto cat = ltm.add_embedding(embed_word(a.encode("cat")));
    ltm.add_embedding(embed_word(a.encode("frog")));
    auto dog = ltm.add_embedding(embed_word(a.encode("dog")));
    EXPECT_EQ(find_by_length(ltm, 3), (std::vector<TokenId>{cat, dog}));
}
