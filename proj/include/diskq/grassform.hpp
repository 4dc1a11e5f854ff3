#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace diskq {

// Numeric exterior-algebra element over at most 16 anticommuting generators,
// sparse in the generator masks. Generators are globally ordered; signs follow
// from crossing counts exactly as in the exact layer.
struct GrassNum {
    struct Term {
        std::uint16_t mask;
        double coeff;
    };
    std::vector<Term> terms;

    GrassNum() = default;
    explicit GrassNum(double scalar) {
        if (scalar != 0.0) terms.push_back({0, scalar});
    }

    static GrassNum generator(int i, double c = 1.0) {
        GrassNum g;
        if (c != 0.0) g.terms.push_back({std::uint16_t(1u << i), c});
        return g;
    }

    bool empty() const { return terms.empty(); }

    void add(std::uint16_t mask, double c) {
        if (c == 0.0) return;
        for (auto& t : terms)
            if (t.mask == mask) {
                t.coeff += c;
                return;
            }
        terms.push_back({mask, c});
    }

    GrassNum& operator+=(const GrassNum& o) {
        for (const auto& t : o.terms) add(t.mask, t.coeff);
        return *this;
    }

    double coefficient(std::uint16_t mask) const {
        for (const auto& t : terms)
            if (t.mask == mask) return t.coeff;
        return 0.0;
    }
};

inline int crossing_sign16(std::uint16_t a, std::uint16_t b) {
    int crossings = 0;
    while (b) {
        std::uint16_t low = b & (~b + 1);
        int nu = std::countr_zero((unsigned)low);
        crossings += std::popcount((unsigned)(a >> (nu + 1)));
        b ^= low;
    }
    return (crossings & 1) ? -1 : 1;
}

inline GrassNum wedge(const GrassNum& a, const GrassNum& b) {
    GrassNum r;
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms) {
            if (ta.mask & tb.mask) continue;
            double c = ta.coeff * tb.coeff;
            if (c == 0.0) continue;
            r.add(std::uint16_t(ta.mask | tb.mask), c * crossing_sign16(ta.mask, tb.mask));
        }
    return r;
}

// Polynomial in u with GrassNum coefficients.
struct UGrass {
    std::vector<GrassNum> coeff; // index = power of u

    UGrass() = default;
    explicit UGrass(GrassNum g0) { coeff.push_back(std::move(g0)); }

    static UGrass constant(double c) { return UGrass(GrassNum(c)); }

    GrassNum at(int upow) const { return upow < (int)coeff.size() ? coeff[upow] : GrassNum(); }

    UGrass& operator+=(const UGrass& o) {
        if (o.coeff.size() > coeff.size()) coeff.resize(o.coeff.size());
        for (size_t i = 0; i < o.coeff.size(); ++i) coeff[i] += o.coeff[i];
        return *this;
    }
};

inline UGrass wedge(const UGrass& a, const UGrass& b) {
    UGrass r;
    if (a.coeff.empty() || b.coeff.empty()) return r;
    r.coeff.resize(a.coeff.size() + b.coeff.size() - 1);
    for (size_t i = 0; i < a.coeff.size(); ++i)
        for (size_t j = 0; j < b.coeff.size(); ++j) {
            GrassNum w = wedge(a.coeff[i], b.coeff[j]);
            r.coeff[i + j] += w;
        }
    return r;
}

} // namespace diskq
