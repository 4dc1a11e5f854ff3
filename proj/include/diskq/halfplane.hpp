#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diskq/mc.hpp"

namespace diskq {

// Graph over the upper half-plane: n interior vertices, m boundary points
// t_1 < ... < t_m on the real line, directed edges from interior vertices
// only, no whites and no v-degrees.
struct HalfPlaneGraph {
    int n = 0;
    int m = 0;
    std::vector<std::vector<Target>> edges;

    std::vector<int> out_degrees() const {
        std::vector<int> k(n);
        for (int i = 0; i < n; ++i) k[i] = (int)edges[i].size();
        return k;
    }
    int edge_count() const {
        int e = 0;
        for (const auto& l : edges) e += (int)l.size();
        return e;
    }
    std::string key() const {
        std::string s = "H;n=" + std::to_string(n) + ";m=" + std::to_string(m) + ";e=";
        for (int i = 0; i < n; ++i) {
            if (i) s += "|";
            for (size_t j = 0; j < edges[i].size(); ++j)
                s += (j ? "," : "") + edges[i][j].str();
        }
        return s;
    }
};

inline std::vector<std::string> validate(const HalfPlaneGraph& g) {
    std::vector<std::string> bad;
    std::vector<std::vector<bool>> seenB(g.n, std::vector<bool>(g.m, false));
    for (int i = 0; i < g.n; ++i)
        for (const auto& t : g.edges[i]) {
            if (t.kind == Target::White) bad.push_back("white vertices not allowed here");
            if (t.kind == Target::Interior) {
                if (t.index == i) bad.push_back("self-loop");
                if (t.index < 0 || t.index >= g.n) bad.push_back("bad interior target");
            }
            if (t.kind == Target::Boundary) {
                if (t.index < 0 || t.index >= g.m) bad.push_back("bad boundary target");
                else if (seenB[i][t.index]) bad.push_back("multiple edge");
                else seenB[i][t.index] = true;
            }
        }
    return bad;
}

// Configuration sampled through the gauge z_1 = i and the Cayley transform.
struct HalfPlaneConfig {
    std::vector<Complex> z;  // z[0] = i fixed
    std::vector<double> t;   // sorted boundary points
    double jacobian = 1.0;   // d(t,z)/d(sampled variables)
};

// Generators: (dt_1..dt_m, dx_2, dy_2, ..., dx_n, dy_n); z_1 is gauge-fixed.
struct HalfPlaneChart {
    int n, m;
    int gen_t(int j) const { return j; }
    int gen_x(int i) const { return m + 2 * (i - 1); }     // i >= 1
    int gen_y(int i) const { return m + 2 * (i - 1) + 1; } // i >= 1
    int gen_count() const { return m + 2 * (n - 1); }
    std::uint16_t volume_mask() const { return std::uint16_t((1u << gen_count()) - 1); }
};

inline HalfPlaneConfig sample_halfplane(Stream& st, int n, int m, long& rejected) {
    while (true) {
        HalfPlaneConfig cfg;
        cfg.z.resize(n);
        cfg.z[0] = Complex(0.0, 1.0);
        cfg.jacobian = 1.0;
        bool ok = true;
        for (int i = 1; i < n; ++i) {
            Complex w = sample_disk(st);
            if (std::abs(1.0 - w) < kMinSeparation) { ok = false; break; }
            cfg.z[i] = Complex(0.0, 1.0) * (1.0 + w) / (1.0 - w);
            double a = std::abs(1.0 - w);
            cfg.jacobian *= 4.0 / (a * a * a * a);
        }
        if (ok) {
            std::vector<double> beta(m);
            for (int j = 0; j < m; ++j) beta[j] = st.uniform(0.0, 2.0 * PI);
            std::sort(beta.begin(), beta.end());
            cfg.t.resize(m);
            for (int j = 0; j < m; ++j) {
                double b = beta[j];
                if (b < kMinSeparation || 2.0 * PI - b < kMinSeparation ||
                    (j > 0 && b - beta[j - 1] < kMinSeparation)) {
                    ok = false;
                    break;
                }
                double s = std::sin(b / 2.0);
                cfg.t[j] = -std::cos(b / 2.0) / s;
                cfg.jacobian *= 0.5 / (s * s);
            }
        }
        if (ok)
            for (int i = 0; i < n && ok; ++i) {
                for (int k = i + 1; k < n && ok; ++k)
                    if (std::abs(cfg.z[i] - cfg.z[k]) < kMinSeparation) ok = false;
                for (int j = 0; j < m && ok; ++j)
                    if (std::abs(cfg.z[i] - Complex(cfg.t[j], 0)) < kMinSeparation) ok = false;
            }
        if (ok) return cfg;
        ++rejected;
    }
}

inline double halfplane_volume(int n, int m) {
    double v = 1.0;
    for (int i = 1; i < n; ++i) v *= PI;
    for (int j = 1; j <= m; ++j) v *= 2.0 * PI / j;
    return v;
}

inline GrassNum edge_form_halfplane(const HalfPlaneChart& ch, const HalfPlaneConfig& cfg, int i,
                                    const Target& t) {
    GrassNum g;
    if (t.kind == Target::Interior) {
        int k = t.index;
        PropagatorComps p = propagator_halfplane(cfg.z[i], cfg.z[k]);
        if (i >= 1) {
            g.add(std::uint16_t(1u << ch.gen_x(i)), p.dxz);
            g.add(std::uint16_t(1u << ch.gen_y(i)), p.dyz);
        }
        if (k >= 1) {
            g.add(std::uint16_t(1u << ch.gen_x(k)), p.dxw);
            g.add(std::uint16_t(1u << ch.gen_y(k)), p.dyw);
        }
    } else {
        PropagatorComps p = propagator_halfplane(cfg.z[i], Complex(cfg.t[t.index], 0.0));
        if (i >= 1) {
            g.add(std::uint16_t(1u << ch.gen_x(i)), p.dxz);
            g.add(std::uint16_t(1u << ch.gen_y(i)), p.dyz);
        }
        g.add(std::uint16_t(1u << ch.gen_t(t.index)), p.dxw);
    }
    return g;
}

// Raw integral over C_{n,m}(H+) of the product of Kontsevich propagators in
// global edge order, n <= 2. Zero when the form degree cannot match.
inline DiskIntegralResult kontsevich_weight_n2(const HalfPlaneGraph& g, long samples,
                                               std::uint64_t seed) {
    auto bad = validate(g);
    if (!bad.empty()) throw std::invalid_argument("kontsevich_weight_n2: " + bad[0]);
    if (g.n < 1 || g.n > 2) throw std::invalid_argument("kontsevich_weight_n2: n must be 1 or 2");
    HalfPlaneChart ch{g.n, g.m};
    if (g.edge_count() != ch.gen_count()) return {0.0, 0.0, samples, 0};

    Accumulator acc(kMcBlocks);
    long rejected = 0;
    long per_block = samples / kMcBlocks;
    long extra = samples % kMcBlocks;
    double vol = halfplane_volume(g.n, g.m);
    std::uint64_t gkey = hash_string(g.key());
    for (int b = 0; b < kMcBlocks; ++b) {
        Stream st(derive_seed(seed, gkey, std::uint64_t(b)));
        long nb = per_block + (b < extra ? 1 : 0);
        for (long s = 0; s < nb; ++s) {
            HalfPlaneConfig cfg = sample_halfplane(st, g.n, g.m, rejected);
            GrassNum form(1.0);
            for (int i = 0; i < g.n; ++i)
                for (const auto& t : g.edges[i]) form = wedge(form, edge_form_halfplane(ch, cfg, i, t));
            acc.add(b, form.coefficient(ch.volume_mask()) * cfg.jacobian);
        }
    }
    auto [mean, se] = acc.estimate();
    return {mean * vol, se * vol, samples, rejected};
}

// All half-plane graphs with the given out-degrees and m boundary points,
// targets per source distinct, edge lists sorted in canonical target order
// (one representative per unordered edge set).
inline std::vector<HalfPlaneGraph> enumerate_halfplane_graphs(const std::vector<int>& k, int m) {
    int n = (int)k.size();
    std::vector<HalfPlaneGraph> out;
    std::vector<Target> candidates;
    for (int j = 0; j < n; ++j) candidates.push_back({Target::Interior, j});
    for (int j = 0; j < m; ++j) candidates.push_back({Target::Boundary, j});
    HalfPlaneGraph g;
    g.n = n;
    g.m = m;
    g.edges.assign(n, {});
    std::function<void(int, int)> rec = [&](int i, int from) {
        if (i == n) {
            out.push_back(g);
            return;
        }
        if ((int)g.edges[i].size() == k[i]) {
            rec(i + 1, 0);
            return;
        }
        for (int c = from; c < (int)candidates.size(); ++c) {
            const Target& t = candidates[c];
            if (t.kind == Target::Interior && t.index == i) continue;
            g.edges[i].push_back(t);
            rec(i, c + 1);
            g.edges[i].pop_back();
        }
    };
    rec(0, 0);
    return out;
}

} // namespace diskq
