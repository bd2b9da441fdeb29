// Trains on three words, then replays, segments and recognizes.

#include <iostream>

#include "retok/retok.hpp"

using namespace retok;

int main() {
    const auto a = Alphabet::latin();
    GrowthConfig cfg;
    cfg.epsilons.fallback = 0.0;
    StmDag dag(a, cfg);
    dag.train(std::vector<SymbolSeq>{a.encode("dogs"), a.encode("cats"), a.encode("frog")});

    for (int n = 2; n <= dag.depth(); ++n) {
        std::cout << "level " << n << ":";
        for (auto* node : dag.level_nodes(n)) std::cout << ' ' << a.decode(node->label);
        std::cout << '\n';
    }

    CounterRng rng(0);
    for (char c : std::string("cdf")) {
        auto t = replay(dag, SymbolId{a.encode(std::string(1, c))[0]}, SamplerConfig{}, rng);
        std::cout << "replay " << c << " -> " << a.decode(t.word) << '\n';
    }

    auto seg = tokenize(dag, a.encode("catsxdogsfrog"));
    std::cout << "tokenize:";
    for (auto& s : seg.segments) std::cout << (s.stored ? " [" : " ") << a.decode(s.symbols) << (s.stored ? "]" : "");
    std::cout << '\n';

    std::vector<Embedding> mem{embed_word(a.encode("cats")), embed_word(a.encode("dogs"))};
    auto pw = predict_kv(mem, a.encode("at"), a.size());
    auto next = sample_next(pw, SamplerConfig{}, rng);
    std::cout << "after 'at' memory predicts " << (next ? a.label(SymbolId{next->index}) : "boundary") << '\n';
}
