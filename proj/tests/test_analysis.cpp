#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"

using namespace retok;
using namespace retok::testing;

TEST(Dn, DogsCatsFrog) {
    auto dn = dn_of_dag(dogs_cats_frog());
    EXPECT_EQ(dn.counts, (std::vector<std::size_t>{0, 9, 8, 6, 3}));
    EXPECT_EQ(dn.n_peak, 2);
    EXPECT_EQ(dn.n_max, 4);
    EXPECT_EQ(dn.at(9), 0u);
}

TEST(Dn, PeakSkipsAlphabetLevel) {
    auto dn = finish_dn({0, 50, 10, 20, 5, 0, 0});
    EXPECT_EQ(dn.n_peak, 3);
    EXPECT_EQ(dn.n_max, 4);
    EXPECT_EQ(finish_dn({0, 5}).n_peak, 1);
    EXPECT_EQ(finish_dn({0}).n_peak, 0);
}

TEST(Dn, CorpusMatchesBruteForce) {
    CounterRng rng(1);
    std::vector<SymbolSeq> units;
    for (int i = 0; i < 15; ++i) units.push_back(random_seq(rng, 4, 1 + rng.below(9)));
    auto dn = dn_of_corpus(units, 10);
    for (int n = 1; n <= 10; ++n) {
        std::set<SymbolSeq> s;
        for (auto& u : units)
            for (std::size_t i = 0; i + n <= u.size(); ++i) s.insert(u.substr(i, n));
        EXPECT_EQ(dn.at(n), s.size()) << n;
    }
}

TEST(Dn, DagMatchesCorpusAtZeroThreshold) {
    // With every window admitted, the dag stores exactly the corpus n-grams.
    CounterRng rng(2);
    std::vector<SymbolSeq> units;
    for (int i = 0; i < 10; ++i) units.push_back(random_seq(rng, 3, 2 + rng.below(8)));
    StmDag d(small_alphabet(3), eps0());
    d.train(units);
    auto a = dn_of_dag(d), b = dn_of_corpus(units, 12);
    for (int n = 2; n <= 12; ++n) {
        const auto o = oracle_train(units, 0, 32);
        EXPECT_EQ(a.at(n), o.nodes.count(n) ? o.nodes.at(n).size() : 0u);
        EXPECT_LE(a.at(n), b.at(n));
    }
}

TEST(Spectrum, CountsOccurrences) {
    const auto a = Alphabet::latin();
    auto s = rank_spectrum(encode_all(a, {"abab", "ab"}), 2);
    EXPECT_EQ(s.frequencies, (std::vector<std::size_t>{3, 1}));
    EXPECT_THROW(rank_spectrum(encode_all(a, {"a"}), 0), DataError);
    auto t = rank_spectrum(dogs_cats_frog(), 1);
    EXPECT_EQ(t.frequencies.front(), 2u);  // g and o and s each occur twice
}

TEST(Spectrum, MatchesBruteForce) {
    CounterRng rng(6);
    std::vector<SymbolSeq> units;
    for (int i = 0; i < 20; ++i) units.push_back(random_seq(rng, 3, 3 + rng.below(6)));
    for (int n = 1; n <= 4; ++n) {
        std::map<SymbolSeq, std::size_t> c;
        for (auto& u : units)
            for (std::size_t i = 0; i + n <= u.size(); ++i) c[u.substr(i, n)]++;
        std::vector<std::size_t> want;
        for (auto& [g, k] : c) want.push_back(k);
        std::sort(want.rbegin(), want.rend());
        EXPECT_EQ(rank_spectrum(units, n).frequencies, want);
    }
}

TEST(LogNormal, RecoversExactParameters) {
    const double mu = 1.2, sigma = 0.6, amp = 300;
    std::vector<double> raw;
    DnDistribution dn;
    dn.counts = {0};
    // Integer counts would perturb the fit; scale up so rounding is negligible.
    for (int n = 1; n <= 12; ++n) {
        const double x = std::log(n) - mu;
        dn.counts.push_back(static_cast<std::size_t>(std::llround(1e9 * amp * std::exp(-x * x / (2 * sigma * sigma)))));
    }
    auto fit = lognormal_fit(dn);
    EXPECT_NEAR(fit.mu, mu, 1e-6);
    EXPECT_NEAR(fit.sigma, sigma, 1e-6);
    EXPECT_NEAR(fit.amplitude / 1e9, amp, 1e-3);
    EXPECT_NEAR(fit.peak(), std::exp(mu), 1e-5);
    EXPECT_GT(fit.r_squared, 0.999999);
}

TEST(LogNormal, MatchesEigenLeastSquares) {
    DnDistribution dn = finish_dn({0, 26, 150, 290, 250, 160, 80, 30, 9, 2});
    auto fit = lognormal_fit(dn);
    Eigen::MatrixXd X(9, 3);
    Eigen::VectorXd y(9);
    for (int n = 1; n <= 9; ++n) {
        const double x = std::log(n);
        X.row(n - 1) << 1, x, x * x;
        y(n - 1) = std::log(static_cast<double>(dn.counts[n]));
    }
    Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
    EXPECT_NEAR(fit.c0, c(0), 1e-9);
    EXPECT_NEAR(fit.c1, c(1), 1e-9);
    EXPECT_NEAR(fit.c2, c(2), 1e-9);
}

TEST(LogNormal, RejectsFlatOrShortData) {
    EXPECT_THROW(lognormal_fit(finish_dn({0, 1, 2})), DataError);
    EXPECT_THROW(lognormal_fit(finish_dn({0, 1, 2, 4, 8, 16})), DataError);
}

TEST(TokenLength, DogsCatsFrog) { EXPECT_EQ(invariant_token_length(dogs_cats_frog()), 1); }

TEST(TokenLength, SingleWord) {
    // Below level 7 the inner windows have both a prefix and a suffix child.
    EXPECT_EQ(invariant_token_length(train_words({"abcdefgh"})), 5);
    EXPECT_EQ(invariant_token_length(StmDag(Alphabet::latin(), eps0())), 0);
}

TEST(TokenLength, TerminalDescendants) {
    auto d = dogs_cats_frog();
    auto desc = terminal_descendants(d);
    const auto a = Alphabet::latin();
    EXPECT_EQ(desc.at(*d.find(a.encode("og"))).size(), 2u);  // dogs, frog
    EXPECT_EQ(desc.at(*d.find(a.encode("cat"))).size(), 1u);
}

TEST(Entropy, ProfileMarksBoundaries) {
    auto d = dogs_cats_frog();
    const auto a = Alphabet::latin();
    auto prof = entropy_profile(d, a.encode("catsdogs"));
    ASSERT_EQ(prof.size(), 8u);
    EXPECT_TRUE(prof[3].smooth_boundary);  // after "cats"
    EXPECT_FALSE(prof[1].smooth_boundary);
    EXPECT_TRUE(prof[7].smooth_boundary);
}

TEST(Reports, Csv) {
    EXPECT_EQ(dn_csv(finish_dn({0, 2, 1})), "n,value\n1,2\n2,1\n");
    EXPECT_EQ(spectrum_csv({RankSpectrum{2, {3, 1}}}), "n,rank,count\n2,1,3\n2,2,1\n");
}

TEST(Reports, Svg) {
    auto s = dn_svg(finish_dn({0, 2, 5, 1}), "a<b");
    EXPECT_NE(s.find("<svg"), std::string::npos);
    EXPECT_NE(s.find("a&lt;b"), std::string::npos);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n') > 5, true);
    auto t = spectrum_svg(RankSpectrum{1, {4, 2, 1}});
    EXPECT_NE(t.find("log10 rank"), std::string::npos);
}
