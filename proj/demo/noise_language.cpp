// Trains on a spaceless stream and prints the first segments under each decay mode.

#include <iostream>

#include "retok/cli.hpp"
#include "retok/retok.hpp"

using namespace retok;

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : std::string(RETOK_DATA_DIR) + "/noise_seed.txt";
    const auto a = Alphabet::latin();
    const auto text = ingest_text(read_file(path), a, CorpusMode::spaceless).at(0);
    for (auto mode : {DecayMode::accumulate, DecayMode::ema_global}) {
        GrowthConfig cfg;
        cfg.decay_mode = mode;
        cfg.epsilons.by_level[2] = 0.002;
        cfg.epsilons.fallback = 0.0;
        StmDag dag(a, cfg);
        dag.train_sequence(text);
        auto seg = tokenize(dag, text);
        std::cout << to_string(mode) << ": depth " << dag.depth() << ", " << dag.terminal_labels().size()
                  << " terminals\n ";
        for (std::size_t i = 0; i < std::min<std::size_t>(25, seg.segments.size()); ++i)
            std::cout << ' ' << a.decode(seg.segments[i].symbols);
        std::cout << "\n";
    }
}
