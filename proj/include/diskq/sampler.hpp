#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "diskq/geometry.hpp"

namespace diskq {

// splitmix64, used only to derive independent stream seeds from
// (seed, stream index); the per-stream generator is std::mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL * (a + 1);
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (b + 1);
    return splitmix64(s);
}

inline std::uint64_t hash_string(const std::string& s) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Mapping the raw 64-bit output to doubles explicitly keeps streams
// bit-reproducible across standard libraries.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : rng_(seed) {}
    double uniform() { return double(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::mt19937_64 rng_;
};

// Uniform point on the unit disk (radius = sqrt(U) scaling).
inline Complex sample_disk(Stream& s) {
    double r = std::sqrt(s.uniform());
    double a = s.uniform(0.0, 2.0 * PI);
    return std::polar(r, a);
}

constexpr double kMinSeparation = 1e-6;

// One configuration on C^0_{n,m}(D): n interior points, m-1 sorted free
// boundary angles. Degenerate draws (any pairwise distance below
// kMinSeparation) are rejected and redrawn; the count is reported.
inline DiskConfig sample_config(Stream& s, int n, int m, long& rejected) {
    while (true) {
        DiskConfig cfg;
        cfg.z.resize(n);
        for (int i = 0; i < n; ++i) cfg.z[i] = sample_disk(s);
        cfg.phi.resize(m - 1);
        for (int j = 0; j < m - 1; ++j) cfg.phi[j] = s.uniform(0.0, 2.0 * PI);
        std::sort(cfg.phi.begin(), cfg.phi.end());
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            for (int j = i + 1; j < n && ok; ++j)
                if (std::abs(cfg.z[i] - cfg.z[j]) < kMinSeparation) ok = false;
            for (int j = 0; j < m && ok; ++j)
                if (std::abs(cfg.z[i] - cfg.boundary(j)) < kMinSeparation) ok = false;
        }
        for (int j = 0; j + 1 < m - 1 && ok; ++j)
            if (cfg.phi[j + 1] - cfg.phi[j] < kMinSeparation) ok = false;
        if (m >= 2 && ok)
            if (cfg.phi.front() < kMinSeparation || 2.0 * PI - cfg.phi.back() < kMinSeparation)
                ok = false;
        if (ok) return cfg;
        ++rejected;
    }
}

// Integration volume of the sampling measure on C^0_{n,m}(D).
inline double config_volume(int n, int m) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= PI;
    for (int j = 1; j < m; ++j) v *= 2.0 * PI / j;
    return v;
}

} // namespace diskq
