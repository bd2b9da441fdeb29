#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "retok/dag.hpp"
#include "retok/inference.hpp"

namespace retok {

/// counts[n] is d_n; index 0 is unused.
struct DnDistribution {
    std::vector<std::size_t> counts{0};
    int n_peak = 0;
    int n_max = 0;

    std::size_t at(int n) const { return n >= 0 && n < static_cast<int>(counts.size()) ? counts[n] : 0; }
};

/// Peak over n >= 2 when any n >= 2 count exists (d_1 is the alphabet, not
/// a learned level); ties go to the smaller n.
inline DnDistribution finish_dn(std::vector<std::size_t> counts) {
    DnDistribution d;
    while (counts.size() > 1 && counts.back() == 0) counts.pop_back();
    if (counts.empty()) counts.push_back(0);
    d.counts = std::move(counts);
    d.n_max = static_cast<int>(d.counts.size()) - 1;
    if (d.n_max >= 1 && d.counts[d.n_max] == 0) d.n_max = 0;
    const int lo = d.n_max >= 2 ? 2 : 1;
    for (int n = lo; n <= d.n_max; ++n)
        if (d.n_peak == 0 || d.counts[n] > d.counts[d.n_peak]) d.n_peak = n;
    return d;
}

inline DnDistribution dn_of_dag(const StmDag& dag) {
    std::vector<std::size_t> c(static_cast<std::size_t>(dag.depth()) + 1, 0);
    std::set<char32_t> used;
    for (auto& [id, n] : dag.nodes()) {
        c[n.level]++;
        used.insert(n.label.begin(), n.label.end());
    }
    if (c.size() > 1) c[1] = used.size();
    return finish_dn(std::move(c));
}

/// Distinct n-grams occurring inside units (units never bridge).
inline DnDistribution dn_of_corpus(const std::vector<SymbolSeq>& units, int max_n) {
    std::vector<std::size_t> c(static_cast<std::size_t>(std::max(max_n, 0)) + 1, 0);
    for (int n = 1; n <= max_n; ++n) {
        std::set<SymbolView> seen;
        for (auto& u : units)
            for (std::size_t i = 0; i + n <= u.size(); ++i) seen.insert(SymbolView(u).substr(i, n));
        c[n] = seen.size();
    }
    return finish_dn(std::move(c));
}

struct RankSpectrum {
    int n = 1;
    std::vector<std::size_t> frequencies;
};

/// Occurrence count of each distinct n-gram across units, sorted descending.
inline RankSpectrum rank_spectrum(const std::vector<SymbolSeq>& units, int n) {
    if (n < 1) throw DataError("bad-argument", "spectrum length must be >= 1");
    std::map<SymbolView, std::size_t> counts;
    for (auto& u : units)
        for (std::size_t i = 0; i + n <= u.size(); ++i) counts[SymbolView(u).substr(i, n)]++;
    RankSpectrum r{n, {}};
    for (auto& [g, c] : counts) r.frequencies.push_back(c);
    std::sort(r.frequencies.rbegin(), r.frequencies.rend());
    return r;
}

/// Spectrum over the dag's vocabulary (terminal words, each counted once).
inline RankSpectrum rank_spectrum(const StmDag& dag, int n) { return rank_spectrum(dag.terminal_labels(), n); }

/// d_n ~ amplitude * exp(-(ln n - mu)^2 / (2 sigma^2)), fitted as a
/// quadratic in ln n on the log scale. The fitted peak sits at n = e^mu.
struct LogNormalFit {
    double mu = 0, sigma = 0, amplitude = 0, r_squared = 0;
    double c0 = 0, c1 = 0, c2 = 0;
    double peak() const { return std::exp(mu); }
    double predict(double n) const {
        const double x = std::log(n) - mu;
        return amplitude * std::exp(-x * x / (2 * sigma * sigma));
    }
};

inline LogNormalFit lognormal_fit(const DnDistribution& dist) {
    std::vector<double> xs, ys;
    for (int n = 1; n < static_cast<int>(dist.counts.size()); ++n)
        if (dist.counts[n] > 0) {
            xs.push_back(std::log(static_cast<double>(n)));
            ys.push_back(std::log(static_cast<double>(dist.counts[n])));
        }
    if (xs.size() < 3) throw DataError("insufficient-data", "log-normal fit needs at least 3 positive counts");
    // Normal equations for y = c0 + c1 x + c2 x^2.
    double s[5] = {0, 0, 0, 0, 0}, t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double p = 1;
        for (int k = 0; k < 5; ++k, p *= xs[i]) s[k] += p;
        t[0] += ys[i];
        t[1] += ys[i] * xs[i];
        t[2] += ys[i] * xs[i] * xs[i];
    }
    double a[3][4] = {{s[0], s[1], s[2], t[0]}, {s[1], s[2], s[3], t[1]}, {s[2], s[3], s[4], t[2]}};
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        if (std::abs(a[c][c]) < 1e-300) throw DataError("insufficient-data", "degenerate log-normal fit");
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
        }
    }
    LogNormalFit fit;
    fit.c0 = a[0][3] / a[0][0];
    fit.c1 = a[1][3] / a[1][1];
    fit.c2 = a[2][3] / a[2][2];
    if (!(fit.c2 < 0)) throw DataError("insufficient-data", "counts are not peaked on a log scale");
    const double s2 = -1.0 / (2.0 * fit.c2);
    fit.sigma = std::sqrt(s2);
    fit.mu = fit.c1 * s2;
    fit.amplitude = std::exp(fit.c0 + fit.mu * fit.mu / (2 * s2));
    double mean = 0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = fit.c0 + fit.c1 * xs[i] + fit.c2 * xs[i] * xs[i];
        ss_res += (ys[i] - f) * (ys[i] - f);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    fit.r_squared = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

/// Distinct children (prefix or suffix) of a node.
inline std::vector<TokenId> children_of(const StmDag& dag, TokenId id) {
    std::vector<TokenId> c = dag.prefix_children(id);
    for (TokenId s : dag.suffix_children(id))
        if (std::find(c.begin(), c.end(), s) == c.end()) c.push_back(s);
    return c;
}

/// Terminal descendants per node, computed top-down.
inline std::map<TokenId, std::set<TokenId>> terminal_descendants(const StmDag& dag) {
    std::map<TokenId, std::set<TokenId>> out;
    for (int n = dag.depth(); n >= 2; --n)
        for (auto* node : dag.level_nodes(n)) {
            auto& s = out[node->id];
            auto kids = children_of(dag, node->id);
            if (kids.empty()) s.insert(node->id);
            for (TokenId c : kids) s.insert(out[c].begin(), out[c].end());
        }
    return out;
}

/// n* - n_peak, where n* is the smallest level >= n_peak from which every
/// node has at most one child and exactly one terminal descendant.
inline int invariant_token_length(const StmDag& dag) {
    const auto dn = dn_of_dag(dag);
    if (dn.n_peak < 2) return 0;
    const auto desc = terminal_descendants(dag);
    auto level_ok = [&](int n) {
        for (auto* node : dag.level_nodes(n))
            if (children_of(dag, node->id).size() > 1 || desc.at(node->id).size() != 1) return false;
        return true;
    };
    int n_star = dag.depth() + 1;
    for (int n = dag.depth(); n >= dn.n_peak && level_ok(n); --n) n_star = n;
    return n_star - dn.n_peak;
}

struct EntropyPoint {
    std::size_t position = 0;  // context = text[0, position)
    double bits = 0.0;
    bool boundary = false;         // empty support
    bool smooth_boundary = false;  // longest stored trailing window has no right extension
    bool high_entropy = false;     // above the sampler threshold
};

inline std::vector<EntropyPoint> entropy_profile(const StmDag& dag, SymbolView text, const SamplerConfig& s = {}) {
    std::vector<EntropyPoint> out;
    for (std::size_t i = 1; i <= text.size(); ++i) {
        SymbolView ctx = text.substr(0, i);
        const auto pw = right_gradient(dag, ctx);
        EntropyPoint p;
        p.position = i;
        p.bits = next_token_entropy(pw, s);
        p.boundary = pw.is_boundary();
        p.high_entropy = p.bits > s.entropy_threshold;
        const auto proj = project_context(dag, ctx, Side::trailing);
        for (int n = static_cast<int>(proj.levels.size()); n >= 1; --n)
            if (auto id = proj.at(n)) {
                p.smooth_boundary = dag.prefix_children(*id).empty();
                break;
            }
        out.push_back(p);
    }
    return out;
}

// Report writers.

inline std::string dn_csv(const DnDistribution& d) {
    std::ostringstream os;
    os << "n,value\n";
    for (int n = 1; n < static_cast<int>(d.counts.size()); ++n) os << n << ',' << d.counts[n] << '\n';
    return os.str();
}

inline std::string spectrum_csv(const std::vector<RankSpectrum>& spectra) {
    std::ostringstream os;
    os << "n,rank,count\n";
    for (auto& s : spectra)
        for (std::size_t r = 0; r < s.frequencies.size(); ++r) os << s.n << ',' << r + 1 << ',' << s.frequencies[r] << '\n';
    return os.str();
}

/// Minimal standalone SVG: polyline plus markers, linear or log-log axes.
inline std::string svg_plot(const std::vector<std::pair<double, double>>& pts, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel, bool loglog = false) {
    const double W = 480, H = 320, M = 48;
    std::vector<std::pair<double, double>> p;
    for (auto [x, y] : pts) {
        if (loglog && (x <= 0 || y <= 0)) continue;
        p.push_back(loglog ? std::pair{std::log10(x), std::log10(y)} : std::pair{x, y});
    }
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!p.empty()) {
        x0 = x1 = p[0].first;
        y0 = y1 = p[0].second;
        for (auto [x, y] : p) {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
        if (!loglog) y0 = std::min(y0, 0.0);
        if (x1 == x0) x1 = x0 + 1;
        if (y1 == y0) y1 = y0 + 1;
    }
    auto sx = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
    auto sy = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '<') o += "&lt;";
            else if (c == '>') o += "&gt;";
            else if (c == '&') o += "&amp;";
            else o += c;
        }
        return o;
    };
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n"
       << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << esc(loglog ? "log10 " + xlabel : xlabel) << "</text>\n"
       << "<text x=\"14\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << H / 2 << ")\">" << esc(loglog ? "log10 " + ylabel : ylabel) << "</text>\n";
    if (!p.empty()) {
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << sx(p[i].first) << ',' << sy(p[i].second);
        os << "\"/>\n";
        for (auto [x, y] : p) os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string dn_svg(const DnDistribution& d, const std::string& title = "d_n") {
    std::vector<std::pair<double, double>> pts;
    for (int n = 1; n < static_cast<int>(d.counts.size()); ++n) pts.push_back({double(n), double(d.counts[n])});
    return svg_plot(pts, title, "n", "d_n");
}

inline std::string spectrum_svg(const RankSpectrum& s) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t r = 0; r < s.frequencies.size(); ++r) pts.push_back({double(r + 1), double(s.frequencies[r])});
    return svg_plot(pts, "rank spectrum n=" + std::to_string(s.n), "rank", "count", true);
}

}  // namespace retok
