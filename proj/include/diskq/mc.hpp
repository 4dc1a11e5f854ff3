#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "diskq/graph.hpp"
#include "diskq/sampler.hpp"

namespace diskq {

inline constexpr const char* kRngName = "mt19937_64+splitmix64-streams";
inline constexpr int kMcBlocks = 32;
// Excess-kurtosis threshold above which the median-of-means estimate replaces
// the plain mean. Kept high: the median of block means carries an O(1/block)
// bias on skewed integrands, which would eventually dominate the shrinking
// 3-sigma band of the acceptance checks, so the robust estimator is reserved
// for genuinely pathological tails.
inline constexpr double kKurtosisThreshold = 50.0;

// Streaming accumulator over a fixed number of blocks. Each block consumes an
// independent RNG stream; the reduction is in block order, so results are
// bit-reproducible for a fixed block count.
class Accumulator {
public:
    explicit Accumulator(int blocks = kMcBlocks) : sums_(blocks, 0.0), counts_(blocks, 0) {}

    void add(int block, double v) {
        sums_[block] += v;
        counts_[block] += 1;
        m1_ += v;
        m2_ += v * v;
        m3_ += v * v * v;
        m4_ += v * v * v * v;
        n_ += 1;
    }

    long samples() const { return n_; }

    double plain_mean() const { return n_ ? m1_ / double(n_) : 0.0; }

    double variance() const {
        if (n_ < 2) return 0.0;
        double mean = plain_mean();
        double v = m2_ / double(n_) - mean * mean;
        return v > 0 ? v : 0.0;
    }

    double excess_kurtosis() const {
        if (n_ < 4) return 0.0;
        double mean = plain_mean();
        double m2 = m2_ / n_ - mean * mean;
        if (m2 <= 0) return 0.0;
        double m4c = m4_ / n_ - 4 * mean * m3_ / n_ + 6 * mean * mean * m2_ / n_ -
                     3 * mean * mean * mean * mean;
        return m4c / (m2 * m2) - 3.0;
    }

    bool heavy_tailed() const { return excess_kurtosis() > kKurtosisThreshold; }

    // (mean, standard error) including the heavy-tail fallback.
    std::pair<double, double> estimate() const {
        long n = n_;
        if (n == 0) return {0.0, 0.0};
        if (!heavy_tailed()) return {plain_mean(), std::sqrt(variance() / double(n))};
        // median of block means; spread of block means sets the error bar
        std::vector<double> means;
        for (size_t b = 0; b < sums_.size(); ++b)
            if (counts_[b] > 0) means.push_back(sums_[b] / double(counts_[b]));
        if (means.empty()) return {0.0, 0.0};
        std::sort(means.begin(), means.end());
        size_t nb = means.size();
        double med = (nb % 2) ? means[nb / 2] : 0.5 * (means[nb / 2 - 1] + means[nb / 2]);
        double mu = 0, s2 = 0;
        for (double v : means) mu += v;
        mu /= double(nb);
        for (double v : means) s2 += (v - mu) * (v - mu);
        s2 = nb > 1 ? s2 / double(nb - 1) : 0.0;
        // 1.2533 = sqrt(pi/2), the efficiency factor of the median
        return {med, 1.2533141373155003 * std::sqrt(s2 / double(nb))};
    }

private:
    std::vector<double> sums_;
    std::vector<long> counts_;
    double m1_ = 0, m2_ = 0, m3_ = 0, m4_ = 0;
    long n_ = 0;
};

struct Coefficient {
    int u_power;
    double mean;
    double stderr_;
    bool heavy_tailed = false;
};

struct WeightEstimate {
    GraphClassKey graph_key;
    std::uint64_t seed = 0;
    long samples = 0;
    long rejected = 0;
    std::string rng = kRngName;
    std::vector<Coefficient> coefficients; // only u-powers that can carry a top form

    double mean(int upow) const {
        for (const auto& c : coefficients)
            if (c.u_power == upow) return c.mean;
        return 0.0;
    }
    double stderr_of(int upow) const {
        for (const auto& c : coefficients)
            if (c.u_power == upow) return c.stderr_;
        return 0.0;
    }
};

// u-powers for which the graph form can reach the top degree of
// C^0_{n,m}(D): |E_b| + 2#S = 2n + m - 1 with S a subset of vertices of
// nonzero r that contribute their area form.
inline std::vector<int> feasible_u_powers(const AdmissibleGraph& g) {
    int dim = 2 * g.n1 + g.m - 1;
    int eb = g.black_edge_count();
    auto r = g.r_values();
    int rsum = 0;
    for (int v : r) rsum += v;
    std::vector<int> out;
    int npos = 0;
    for (int v : r)
        if (v > 0) ++npos;
    for (int s = 0; s <= npos; ++s)
        if (eb + 2 * s == dim) out.push_back(rsum - s); // each area pick lowers u by 1
    // every free boundary point needs an incoming edge to produce its dphi
    std::vector<bool> hit(g.m, false);
    for (const auto& lst : g.edges)
        for (const auto& t : lst)
            if (t.kind == Target::Boundary) hit[t.index] = true;
    for (int j = 1; j < g.m; ++j)
        if (!hit[j]) return {};
    return out;
}

// Raw configuration-space integral of the graph form (no 1/prod k_i!
// prefactor): for each feasible u-power, the Monte Carlo estimate of the
// integral of the top Grassmann coefficient against the fixed orientation.
inline WeightEstimate mc_weight_raw(const AdmissibleGraph& g0, long samples, std::uint64_t seed) {
    AdmissibleGraph g = canonical(g0);
    auto bad = validate(g);
    if (!bad.empty()) throw std::invalid_argument("mc_weight: invalid graph: " + bad[0]);
    WeightEstimate west;
    west.graph_key = canonical_key(g);
    west.seed = seed;
    west.samples = samples;

    std::vector<int> upows = feasible_u_powers(g);
    if (upows.empty()) {
        west.coefficients = {};
        return west;
    }

    DiskChart ch{g.n1, g.m};
    auto r = g.r_values();
    double vol = config_volume(g.n1, g.m);
    std::map<int, Accumulator> acc;
    for (int u : upows) acc.emplace(u, Accumulator(kMcBlocks));

    long rejected = 0;
    long per_block = samples / kMcBlocks;
    long extra = samples % kMcBlocks;
    for (int b = 0; b < kMcBlocks; ++b) {
        Stream st(derive_seed(seed, hash_string(west.graph_key), std::uint64_t(b)));
        long nb = per_block + (b < extra ? 1 : 0);
        for (long s = 0; s < nb; ++s) {
            DiskConfig cfg = sample_config(st, g.n1, g.m, rejected);
            UGrass form = UGrass::constant(1.0);
            for (int i = 0; i < g.n1; ++i)
                for (const auto& t : g.edges[i]) {
                    if (t.kind == Target::White) continue;
                    GrassNum e = edge_form_disk(ch, cfg, i, t.kind == Target::Interior, t.index);
                    form = wedge(form, UGrass(std::move(e)));
                }
            for (int i = 0; i < g.n1; ++i)
                if (r[i] > 0) form = wedge(form, zero_mode_power(ch, cfg, i, r[i]));
            for (int u : upows) acc.at(u).add(b, form.at(u).coefficient(ch.volume_mask()));
        }
    }
    west.rejected = rejected;
    for (int u : upows) {
        auto [mean, se] = acc.at(u).estimate();
        west.coefficients.push_back({u, mean * vol, se * vol, acc.at(u).heavy_tailed()});
    }
    return west;
}

// The weight w_Gamma = (1/prod k_i!) int omega_Gamma.
inline WeightEstimate mc_weight(const AdmissibleGraph& g, long samples, std::uint64_t seed) {
    WeightEstimate west = mc_weight_raw(g, samples, seed);
    double pref = 1.0;
    for (int k : g.out_degrees())
        for (int i = 2; i <= k; ++i) pref /= double(i);
    for (auto& c : west.coefficients) {
        c.mean *= pref;
        c.stderr_ *= pref;
    }
    return west;
}

// Generic estimator over configurations of extra disk points, used by the
// vanishing-lemma checks: the integrand maps the sampled points to a value.
struct DiskIntegralResult {
    double mean;
    double stderr_;
    long samples;
    long rejected;
};

inline DiskIntegralResult mc_disk_integral(const std::function<double(const std::vector<Complex>&)>& f,
                                           int npoints, long samples, std::uint64_t seed,
                                           std::uint64_t salt = 0) {
    Accumulator acc(kMcBlocks);
    long rejected = 0;
    long per_block = samples / kMcBlocks;
    long extra = samples % kMcBlocks;
    double vol = 1.0;
    for (int i = 0; i < npoints; ++i) vol *= PI;
    for (int b = 0; b < kMcBlocks; ++b) {
        Stream st(derive_seed(seed, 0xd15c1a7e5ULL + salt, std::uint64_t(b)));
        long nb = per_block + (b < extra ? 1 : 0);
        for (long s = 0; s < nb; ++s) {
            std::vector<Complex> pts(npoints);
            bool ok = true;
            do {
                ok = true;
                for (auto& p : pts) p = sample_disk(st);
                for (int i = 0; i < npoints && ok; ++i)
                    for (int j = i + 1; j < npoints && ok; ++j)
                        if (std::abs(pts[i] - pts[j]) < kMinSeparation) ok = false;
                if (!ok) ++rejected;
            } while (!ok);
            acc.add(b, f(pts));
        }
    }
    auto [mean, se] = acc.estimate();
    return {mean * vol, se * vol, samples, rejected};
}

} // namespace diskq
