#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "retok/dag.hpp"
#include "retok/memory.hpp"

namespace retok {

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    Matrix transposed() const {
        Matrix t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
    friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline Matrix multiply(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw DataError("shape", "matrix shapes do not chain");
    Matrix z(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
        }
    return z;
}

struct SvdResult {
    Matrix u;               // m x r
    std::vector<double> s;  // r, non-increasing
    Matrix v;               // n x r

    Matrix reconstruct() const {
        Matrix us = u;
        for (std::size_t i = 0; i < us.rows; ++i)
            for (std::size_t j = 0; j < us.cols; ++j) us(i, j) *= s[j];
        return multiply(us, v.transposed());
    }
};

/// One-sided Jacobi SVD. Values below tol * s_max (and exact zeros) are
/// dropped; ties in s keep original column order.
inline SvdResult svd(const Matrix& in, double tol = 1e-12) {
    for (double x : in.a)
        if (!std::isfinite(x)) throw DataError("non-finite-entry", "svd input has a non-finite entry");
    if (in.rows < in.cols) {
        auto t = svd(in.transposed(), tol);
        return {std::move(t.v), std::move(t.s), std::move(t.u)};
    }
    const std::size_t m = in.rows, n = in.cols;
    Matrix w = in, v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += w(i, p) * w(i, p);
                    beta += w(i, q) * w(i, q);
                    gamma += w(i, p) * w(i, q);
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        if (!rotated) break;
    }
    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return norms[x] > norms[y]; });
    const double smax = n ? norms[order[0]] : 0.0;
    std::vector<std::size_t> keep;
    for (auto j : order)
        if (norms[j] > 0.0 && norms[j] > tol * smax) keep.push_back(j);
    SvdResult r{Matrix(m, keep.size()), {}, Matrix(n, keep.size())};
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const auto j = keep[c];
        r.s.push_back(norms[j]);
        for (std::size_t i = 0; i < m; ++i) r.u(i, c) = w(i, j) / norms[j];
        for (std::size_t i = 0; i < n; ++i) r.v(i, c) = v(i, j);
    }
    return r;
}

/// (output feature, prefix feature, last symbol) and the left-gauge
/// (output, first symbol, suffix feature), by label.
struct ProjectorTriple {
    SymbolSeq out, prefix;
    char32_t last = 0;
    friend auto operator<=>(const ProjectorTriple&, const ProjectorTriple&) = default;
};
struct LeftTriple {
    SymbolSeq out;
    char32_t first = 0;
    SymbolSeq suffix;
    friend auto operator<=>(const LeftTriple&, const LeftTriple&) = default;
};

struct GiProjectorSet {
    std::map<int, std::set<ProjectorTriple>> right;
    std::map<int, std::set<LeftTriple>> left;
    friend bool operator==(const GiProjectorSet&, const GiProjectorSet&) = default;

    std::size_t size() const {
        std::size_t c = 0;
        for (auto& [n, t] : right) c += t.size();
        return c;
    }
};

/// Keeps the triples whose output feature belongs to the embedding. With a
/// dag, features it does not store are dropped.
inline GiProjectorSet specialize_gi(const Embedding& e, const StmDag* dag = nullptr) {
    GiProjectorSet gi;
    for (auto& [n, feats] : e.m) {
        if (n < 2) continue;
        for (auto& [label, w] : feats) {
            if (w <= 0.0) continue;
            if (dag && !dag->find(label)) continue;
            gi.right[n].insert({label, label.substr(0, label.size() - 1), label.back()});
            gi.left[n].insert({label, label.front(), label.substr(1)});
        }
    }
    return gi;
}

/// One level of the compressed chain: cap * A_n * ... * A_3 * P2hat.
struct ChainLevel {
    int n = 0;
    double cap = 0.0;
    Matrix bottom;             // b_2 x (d * d): column j1 * d + j2
    std::vector<Matrix> cores; // cores[k-3] for k = 3..n: (b_k * d + j_k) x b_{k-1}
};

struct OutwardEdge {
    SymbolSeq from;
    bool right = true;
    char32_t symbol = 0;
    friend auto operator<=>(const OutwardEdge&, const OutwardEdge&) = default;
};

struct PnnChain {
    std::size_t d = 0;
    double beta = 1.0;
    std::vector<double> level1;        // m^(1) over symbols
    std::map<int, ChainLevel> levels;  // n >= 2
    std::vector<OutwardEdge> outward;  // merged right/left extensions, fixed before compression

    int max_level() const {
        if (!levels.empty()) return levels.rbegin()->first;
        return std::any_of(level1.begin(), level1.end(), [](double x) { return x != 0.0; }) ? 1 : 0;
    }
    bool empty() const { return max_level() == 0; }

    /// Bond dimension entering level k of the level-n chain.
    std::vector<std::size_t> bond_dims(int n) const {
        std::vector<std::size_t> out;
        auto& lv = levels.at(n);
        out.push_back(lv.bottom.rows);
        for (auto& c : lv.cores) out.push_back(c.cols);
        return out;
    }
};

/// Compresses each level of an embedding by SVD sweeps from the top down.
inline PnnChain compress_pnn(const Embedding& e, std::size_t d, double tol = 1e-12, double beta = 1.0) {
    PnnChain ch;
    ch.d = d;
    ch.beta = beta;
    ch.level1.assign(d, 0.0);
    if (auto it = e.m.find(1); it != e.m.end())
        for (auto& [l, w] : it->second) ch.level1.at(l[0]) = w;

    // Dense index of each level's features.
    std::map<int, std::map<SymbolSeq, std::size_t>> idx;
    for (auto& [n, feats] : e.m) {
        std::size_t i = 0;
        for (auto& [l, w] : feats) idx[n][l] = i++;
    }

    for (auto& [n, feats] : e.m) {
        if (n < 2) continue;
        ChainLevel lv;
        lv.n = n;
        double norm = 0;
        for (auto& [l, w] : feats) norm += w * w;
        lv.cap = std::sqrt(norm);
        if (lv.cap == 0.0) continue;
        Matrix r(1, feats.size());
        for (auto& [l, w] : feats) r(0, idx[n][l]) = w / lv.cap;
        std::vector<Matrix> cores_desc;
        for (int k = n; k >= 3; --k) {
            const auto& fk = idx[k];
            const auto& fprev = idx[k - 1];
            Matrix mtx(r.rows * d, fprev.size());
            for (auto& [l, col] : fk) {
                auto pit = fprev.find(l.substr(0, l.size() - 1));
                if (pit == fprev.end()) throw DataError("not-smooth", "embedding feature lacks its prefix");
                for (std::size_t b = 0; b < r.rows; ++b) mtx(b * d + l.back(), pit->second) += r(b, col);
            }
            auto s = svd(mtx, tol);
            Matrix core = s.u;
            for (std::size_t i = 0; i < core.rows; ++i)
                for (std::size_t j = 0; j < core.cols; ++j) core(i, j) *= s.s[j];
            cores_desc.push_back(std::move(core));
            r = s.v.transposed();
        }
        lv.bottom = Matrix(r.rows, d * d);
        for (auto& [l, col] : idx[2])
            for (std::size_t b = 0; b < r.rows; ++b) lv.bottom(b, l[0] * d + l[1]) = r(b, col);
        lv.cores.assign(cores_desc.rbegin(), cores_desc.rend());
        ch.levels[n] = std::move(lv);
    }

    // Outward edges within the word: P (right) merged with P_L (left).
    std::set<OutwardEdge> edges;
    for (auto& [n, feats] : e.m) {
        auto up = e.m.find(n + 1);
        if (up == e.m.end()) continue;
        for (auto& [l, w] : up->second) {
            edges.insert({l.substr(0, l.size() - 1), true, l.back()});
            edges.insert({l.substr(1), false, l.front()});
        }
    }
    ch.outward.assign(edges.begin(), edges.end());
    return ch;
}

/// Activation of an n-window through the chain.
inline double evaluate_chain(const PnnChain& ch, SymbolView window, int n) {
    if (static_cast<int>(window.size()) != n) throw DataError("length-mismatch", "window length differs from level");
    for (char32_t c : window)
        if (c >= ch.d) return 0.0;
    if (n == 1) return ch.level1.empty() ? 0.0 : ch.level1[window[0]];
    auto it = ch.levels.find(n);
    if (it == ch.levels.end()) return 0.0;
    const auto& lv = it->second;
    std::vector<double> x(lv.bottom.rows);
    const std::size_t col = window[0] * ch.d + window[1];
    for (std::size_t b = 0; b < x.size(); ++b) x[b] = lv.bottom(b, col);
    for (int k = 3; k <= n; ++k) {
        const auto& core = lv.cores[k - 3];
        const std::size_t bk = core.rows / ch.d;
        std::vector<double> y(bk, 0.0);
        for (std::size_t b = 0; b < bk; ++b) {
            const std::size_t row = b * ch.d + window[k - 1];
            double s = 0;
            for (std::size_t j = 0; j < core.cols; ++j) s += core(row, j) * x[j];
            y[b] = s;
        }
        x.swap(y);
    }
    return lv.cap * x.at(0);
}

/// Activation of a window under the uncompressed embedding.
inline double evaluate_gi(const Embedding& e, SymbolView window) { return e.weight(window); }

/// Right prediction from either representation: beta^n * value(window + k).
template <class Eval>
PredictionWeights chain_style_gradient(std::size_t d, double beta, int top, SymbolView context, Eval&& eval) {
    PredictionWeights pw(d);
    SymbolSeq probe;
    for (int n = 2; n <= top && n - 1 <= static_cast<int>(context.size()); ++n) {
        probe.assign(context.substr(context.size() - (n - 1)));
        probe.push_back(0);
        for (std::uint32_t k = 0; k < d; ++k) {
            probe.back() = k;
            const double v = eval(SymbolView(probe), n);
            if (std::abs(v) > 1e-9) pw.w[k] += level_bias(beta, n) * v;
        }
    }
    return pw;
}

inline PredictionWeights chain_right_gradient(const PnnChain& ch, SymbolView context) {
    return chain_style_gradient(ch.d, ch.beta, ch.max_level(), context,
                                [&](SymbolView w, int n) { return evaluate_chain(ch, w, n); });
}

inline PredictionWeights gi_right_gradient(const Embedding& e, std::size_t d, double beta, SymbolView context) {
    const int top = e.m.empty() ? 0 : e.m.rbegin()->first;
    return chain_style_gradient(d, beta, top, context, [&](SymbolView w, int) { return e.weight(w); });
}

/// Greedy-first depth-first decode: extend by the highest-scoring symbol
/// whose prefix is still a chain feature; backtrack on dead ends.
inline std::optional<SymbolSeq> decode_chain(const PnnChain& ch) {
    const int N = ch.max_level();
    if (N == 0) return std::nullopt;
    auto score = [&](const SymbolSeq& p) {
        double s = 0;
        for (int n = 1; n <= static_cast<int>(p.size()) && n <= N; ++n)
            s += level_bias(ch.beta, n) * evaluate_chain(ch, SymbolView(p).substr(p.size() - n), n);
        return s;
    };
    const double floor = 1e-9 * std::max(1.0, ch.levels.empty() ? 1.0 : ch.levels.rbegin()->second.cap);
    SymbolSeq cur;
    std::function<bool()> dfs = [&]() -> bool {
        if (static_cast<int>(cur.size()) == N) return true;
        std::vector<std::pair<double, std::uint32_t>> cand;
        for (std::uint32_t k = 0; k < ch.d; ++k) {
            cur.push_back(k);
            const int L = static_cast<int>(cur.size());
            if (std::abs(evaluate_chain(ch, cur, L)) > floor) cand.push_back({score(cur), k});
            cur.pop_back();
        }
        std::stable_sort(cand.begin(), cand.end(), [](auto& x, auto& y) {
            return x.first > y.first + 1e-9 * std::max(1.0, std::abs(y.first));
        });
        for (auto& [sc, k] : cand) {
            cur.push_back(k);
            if (dfs()) return true;
            cur.pop_back();
        }
        return false;
    };
    if (!dfs()) return std::nullopt;
    return cur;
}

/// Replays a chain into an empty retokenizer and specializes it again.
inline GiProjectorSet pnn_to_gi(const PnnChain& ch, const Alphabet& alphabet, double tol = 1e-9) {
    if (ch.empty()) throw DataError("empty-chain", "cannot convert an empty chain");
    auto word = decode_chain(ch);
    if (!word) throw DataError("inexact-chain", "chain does not decode to a word");
    const std::size_t L = word->size();
    for (std::size_t n = 1; n <= L; ++n) {
        const double ref = evaluate_chain(ch, SymbolView(*word).substr(0, n), static_cast<int>(n));
        for (std::size_t i = 0; i + n <= L; ++i) {
            const double v = evaluate_chain(ch, SymbolView(*word).substr(i, n), static_cast<int>(n));
            if (std::abs(v - ref) > tol * std::max(1.0, std::abs(ref)) || std::abs(v) <= tol)
                throw DataError("inexact-chain", "chain evaluation deviates on a word window");
        }
    }
    GrowthConfig cfg;
    cfg.epsilons.fallback = 0.0;
    cfg.max_depth = std::max<int>(2, static_cast<int>(L));
    StmDag dag(alphabet, cfg);
    dag.train_sequence(*word);
    return specialize_gi(embed_word(*word), &dag);
}

}  // namespace retok
