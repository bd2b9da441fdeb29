#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace retok;
using namespace retok::testing;

namespace {

std::set<std::string> decode_set(const Alphabet& a, const std::set<SymbolSeq>& s) {
    std::set<std::string> out;
    for (auto& w : s) out.insert(a.decode(w));
    return out;
}

std::size_t oracle_class_size(const StmDag& d, SymbolView w) {
    std::size_t count = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (w.size() - 1)); ++mask) {
        std::size_t start = 0;
        bool ok = true;
        for (std::size_t i = 1; i <= w.size() && ok; ++i)
            if (i == w.size() || (mask >> (i - 1) & 1)) {
                if (i - start >= 2 && !d.find(w.substr(start, i - start))) ok = false;
                start = i;
            }
        count += ok;
    }
    return count;
}

}  // namespace

TEST(Merge, OverlapRule) {
    const auto a = Alphabet::latin();
    EXPECT_EQ(a.decode(merge(a.encode("ca"), a.encode("at"))), "cat");
    EXPECT_EQ(a.decode(merge(a.encode("cat"), a.encode("ats"))), "cats");
    EXPECT_THROW(merge(a.encode("ca"), a.encode("ts")), DataError);
    EXPECT_THROW(merge(a.encode("ca"), a.encode("ats")), DataError);
}

TEST(Rtg, FiniteLanguageOfDogsCatsFrog) {
    auto lang = rtg_language(dogs_cats_frog(), 16);
    EXPECT_EQ(decode_set(Alphabet::latin(), lang.finite), (std::set<std::string>{"cats", "dogs", "frog"}));
    EXPECT_TRUE(lang.repeating.empty());
}

TEST(Rtg, CycleGivesOnePeriodicFamily) {
    const auto a = Alphabet::latin();
    RtgDag g{a, {}};
    for (std::string s : {"ab", "bc", "ca"}) g.levels[2].insert(a.encode(s));
    auto lang = rtg_language(g, 12);
    EXPECT_TRUE(lang.finite.empty());
    ASSERT_EQ(lang.repeating.size(), 1u);
    EXPECT_EQ(a.decode(lang.repeating.begin()->seed), "abc");
    EXPECT_EQ(lang.repeating.begin()->period, 3u);
}

TEST(Rtg, MixedFiniteAndPeriodic) {
    const auto a = Alphabet::latin();
    RtgDag g{a, {}};
    for (std::string s : {"aa", "xy"}) g.levels[2].insert(a.encode(s));
    auto lang = rtg_language(g, 10);
    EXPECT_EQ(decode_set(a, lang.finite), (std::set<std::string>{"xy"}));
    ASSERT_EQ(lang.repeating.size(), 1u);
    EXPECT_EQ(lang.repeating.begin()->period, 1u);
    EXPECT_THROW(rtg_language(g, 1), DataError);
}

TEST(Rtg, MinimalPeriod) {
    const auto a = Alphabet::latin();
    EXPECT_EQ(minimal_period(a.encode("abcabca")), 3u);
    EXPECT_EQ(minimal_period(a.encode("aaaa")), 1u);
    EXPECT_EQ(minimal_period(a.encode("abcd")), 4u);
}

TEST(Rtg, EdgesByOverlap) {
    auto g = RtgDag::from(dogs_cats_frog());
    auto e = g.edges(3);
    // cat->ats, dog->ogs, fro->rog, rog->ogs
    EXPECT_EQ(e.size(), 4u);
}

TEST(RetokClass, CatsFactorizations) {
    auto d = dogs_cats_frog();
    const auto a = Alphabet::latin();
    auto rc = retok_class(d, a.encode("cats"));
    EXPECT_EQ(rc.decompositions.size(), 8u);
    EXPECT_EQ(rc.decompositions.front(), std::vector<SymbolSeq>{a.encode("cats")});
    EXPECT_EQ(rc.decompositions.back().size(), 4u);
    EXPECT_FALSE(rc.overflow);
}

TEST(RetokClass, MatchesBruteForceCount) {
    CounterRng rng(4);
    auto d = train_words({"abcab", "bcabca", "aab", "cc"});
    for (int i = 0; i < 30; ++i) {
        auto w = random_seq(rng, 3, 1 + rng.below(12));
        EXPECT_EQ(retok_class(d, w).decompositions.size(), oracle_class_size(d, w));
    }
}

TEST(RetokClass, Cap) {
    auto d = train_words({"aaaaaaaaaaaa"});
    auto rc = retok_class(d, Alphabet::latin().encode("aaaaaaaaaaaa"), 100);
    EXPECT_TRUE(rc.overflow);
    EXPECT_EQ(rc.decompositions.size(), 100u);
}

TEST(Crg, SeedDeterminesRandomTransform) {
    auto d = dogs_cats_frog();
    CrgSpec s{3, RegrowMode::random, Epsilons{{{3, 0.3}}, std::nullopt}, 9};
    auto x = crg_transform(d, s), y = crg_transform(d, s);
    EXPECT_TRUE(x == y);
    s.seed = 10;
    auto z = crg_transform(d, s);
    EXPECT_EQ(x.level_size(2), z.level_size(2));
}

TEST(Rcrg, ComposeIsAppendOnly) {
    const auto a = Alphabet::latin();
    GrowthConfig cfg = eps0();
    cfg.max_depth = 8;
    WordMemory mem;
    for (std::string w : {"cart", "tar", "frog"}) mem.emplace(a.encode(w), word_dag(a, a.encode(w), cfg));
    const auto before = mem;
    auto out = rcrg_compose(a, cfg, mem, {a.encode("cart"), a.encode("tar")}, CrgSpec{3, RegrowMode::closure, {}, 0});
    EXPECT_GT(out.size(), mem.size());
    for (auto& [w, dag] : before) {
        ASSERT_TRUE(out.count(w));
        EXPECT_TRUE(out.at(w) == dag);
    }
    for (auto& [w, dag] : out) EXPECT_EQ(terminals(dag), std::set<std::string>{a.decode(w)});
    EXPECT_THROW(rcrg_compose(a, cfg, mem, {a.encode("cow")}, CrgSpec{}), DataError);
    EXPECT_EQ(rcrg_compose(a, cfg, mem, {}, CrgSpec{}).size(), mem.size());
}

TEST(Rcrg, ReloadUnionsWords) {
    const auto a = Alphabet::latin();
    WordMemory mem;
    for (std::string w : {"dogs", "cats", "frog"}) mem.emplace(a.encode(w), word_dag(a, a.encode(w), eps0()));
    auto r = reload(a, eps0(), mem, encode_all(a, {"dogs", "cats", "frog"}));
    auto d = dogs_cats_frog();
    for (int n = 2; n <= 4; ++n) EXPECT_EQ(labels_at(r, n), labels_at(d, n));
}

TEST(Trie, AgreesWithDagAcceptance) {
    CounterRng rng(3);
    auto d = train_words({"abca", "bcab", "cabb", "ab"});
    TrieAcceptor t(d.terminal_labels());
    for (auto& w : d.terminal_labels()) EXPECT_TRUE(t.accepts(w));
    for (int i = 0; i < 300; ++i) {
        auto w = random_seq(rng, 3, 1 + rng.below(6));
        EXPECT_EQ(t.accepts(w), accept(d, w) == Acceptance::accepted) << Alphabet::latin().decode(w);
    }
    EXPECT_FALSE(t.accepts(SymbolSeq{}));
}
