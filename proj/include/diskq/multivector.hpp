#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "diskq/poly.hpp"

namespace diskq {

// theta monomials are subsets of {0..d-1} stored as bitmasks, always read in
// ascending index order. All Grassmann signs in the library flow from this
// one convention plus left derivatives.
using ThetaMask = std::uint32_t;

inline int grassmann_degree(ThetaMask m) { return std::popcount(m); }

// Sign of sorting the concatenation (a, b) into ascending order, assuming a
// and b are disjoint: (-1)^{#crossings}.
inline int merge_sign(ThetaMask a, ThetaMask b) {
    int crossings = 0;
    while (b) {
        ThetaMask low = b & (~b + 1); // lowest set bit of b
        int nu = std::countr_zero(low);
        crossings += std::popcount(a >> (nu + 1)); // elements of a above nu
        b ^= low;
    }
    return (crossings % 2 == 0) ? 1 : -1;
}

// Left derivative d/dtheta_nu on the monomial: theta_nu must be moved to the
// front across everything below it.
inline int left_derivative_sign(ThetaMask m, int nu) {
    return (std::popcount(m & ((ThetaMask(1) << nu) - 1)) % 2 == 0) ? 1 : -1;
}

// Right derivative: theta_nu moves to the back.
inline int right_derivative_sign(ThetaMask m, int nu) {
    return (std::popcount(m >> (nu + 1)) % 2 == 0) ? 1 : -1;
}

// Multivector field on R^d with formal v-powers: a polynomial in
// anticommuting theta_nu = d/dx_nu and an even degree-2 variable v, with
// PolyFunction coefficients. Key = (v-power, theta set, x-monomial).
class MultiVector {
public:
    struct Key {
        int l;
        ThetaMask theta;
        Monomial x;
        bool operator<(const Key& o) const {
            if (l != o.l) return l < o.l;
            if (theta != o.theta) return theta < o.theta;
            return GradedLex{}(x, o.x);
        }
        bool operator==(const Key& o) const { return l == o.l && theta == o.theta && x == o.x; }
    };
    using TermMap = std::map<Key, Rational>;

    MultiVector() : dim_(0) {}
    explicit MultiVector(int dim) : dim_(dim) {}

    static MultiVector from_poly(const PolyFunction& p, int l = 0) {
        MultiVector r(p.dim());
        for (const auto& [m, c] : p.terms()) r.add_term({l, 0, m}, c);
        return r;
    }

    // theta_{nu}
    static MultiVector theta(int dim, int nu, const Rational& c = 1) {
        MultiVector r(dim);
        r.add_term({0, ThetaMask(1) << nu, Monomial(dim, 0)}, c);
        return r;
    }

    static MultiVector theta_monomial(int dim, ThetaMask mask, const Rational& c = 1, int l = 0) {
        MultiVector r(dim);
        r.add_term({l, mask, Monomial(dim, 0)}, c);
        return r;
    }

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Key k, const Rational& c) {
        if (c == 0) return;
        if ((int)k.x.size() != dim_) throw std::invalid_argument("multivector monomial dim mismatch");
        auto [it, fresh] = terms_.try_emplace(std::move(k), c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    MultiVector& operator+=(const MultiVector& q) {
        check_dim(q);
        for (const auto& [k, c] : q.terms_) add_term(k, c);
        return *this;
    }
    MultiVector& operator-=(const MultiVector& q) {
        check_dim(q);
        for (const auto& [k, c] : q.terms_) add_term(k, -c);
        return *this;
    }
    friend MultiVector operator+(MultiVector a, const MultiVector& b) { return a += b; }
    friend MultiVector operator-(MultiVector a, const MultiVector& b) { return a -= b; }
    friend MultiVector operator*(const MultiVector& a, const Rational& c) {
        MultiVector r(a.dim_);
        if (c == 0) return r;
        for (const auto& [k, cc] : a.terms_) r.terms_[k] = cc * c;
        return r;
    }
    friend MultiVector operator*(const Rational& c, const MultiVector& a) { return a * c; }
    MultiVector operator-() const { return *this * Rational(-1); }

    bool operator==(const MultiVector& q) const { return dim_ == q.dim_ && terms_ == q.terms_; }
    bool operator!=(const MultiVector& q) const { return !(*this == q); }

    // Multiply by v^j.
    MultiVector shift_v(int j) const {
        MultiVector r(dim_);
        for (const auto& [k, c] : terms_) r.terms_[{k.l + j, k.theta, k.x}] = c;
        return r;
    }

    // Projection to g_S: keep only v-degree zero.
    MultiVector v_truncation() const {
        MultiVector r(dim_);
        for (const auto& [k, c] : terms_)
            if (k.l == 0) r.terms_[k] = c;
        return r;
    }

    // Homogeneous part of theta-degree k and v-power l.
    MultiVector homogeneous_part(int k, int l) const {
        MultiVector r(dim_);
        for (const auto& [key, c] : terms_)
            if (key.l == l && grassmann_degree(key.theta) == k) r.terms_[key] = c;
        return r;
    }

    // If nonzero and concentrated in one (theta-degree, v-power), report it.
    bool homogeneous(int& k, int& l) const {
        bool first = true;
        for (const auto& [key, c] : terms_) {
            int kk = grassmann_degree(key.theta);
            if (first) { k = kk; l = key.l; first = false; }
            else if (k != kk || l != key.l) return false;
        }
        return !first;
    }

    PolyFunction coefficient(ThetaMask mask, int l = 0) const {
        PolyFunction p(dim_);
        for (const auto& [k, c] : terms_)
            if (k.theta == mask && k.l == l) p.add_term(k.x, c);
        return p;
    }

    // Function part (theta-degree 0, v-power 0).
    PolyFunction function_part() const { return coefficient(0, 0); }

    void check_dim(const MultiVector& q) const {
        if (dim_ != q.dim_) throw std::invalid_argument("multivector dimension mismatch");
    }

private:
    int dim_;
    TermMap terms_;
};

// Grassmann (wedge) product; v-powers add, x-parts multiply.
inline MultiVector wedge(const MultiVector& a, const MultiVector& b) {
    a.check_dim(b);
    MultiVector r(a.dim());
    for (const auto& [ka, ca] : a.terms())
        for (const auto& [kb, cb] : b.terms()) {
            if (ka.theta & kb.theta) continue; // theta^2 = 0
            int sgn = merge_sign(ka.theta, kb.theta);
            Monomial m(a.dim());
            for (int i = 0; i < a.dim(); ++i) m[i] = ka.x[i] + kb.x[i];
            r.add_term({ka.l + kb.l, ka.theta | kb.theta, std::move(m)}, ca * cb * sgn);
        }
    return r;
}

// Left Grassmann derivative d/dtheta_nu.
inline MultiVector theta_partial_left(const MultiVector& a, int nu) {
    MultiVector r(a.dim());
    ThetaMask bit = ThetaMask(1) << nu;
    for (const auto& [k, c] : a.terms()) {
        if (!(k.theta & bit)) continue;
        r.add_term({k.l, k.theta ^ bit, k.x}, c * left_derivative_sign(k.theta, nu));
    }
    return r;
}

// Right Grassmann derivative.
inline MultiVector theta_partial_right(const MultiVector& a, int nu) {
    MultiVector r(a.dim());
    ThetaMask bit = ThetaMask(1) << nu;
    for (const auto& [k, c] : a.terms()) {
        if (!(k.theta & bit)) continue;
        r.add_term({k.l, k.theta ^ bit, k.x}, c * right_derivative_sign(k.theta, nu));
    }
    return r;
}

inline MultiVector x_partial(const MultiVector& a, int nu) {
    MultiVector r(a.dim());
    for (const auto& [k, c] : a.terms()) {
        if (k.x[nu] == 0) continue;
        Monomial m = k.x;
        m[nu] -= 1;
        r.add_term({k.l, k.theta, std::move(m)}, c * k.x[nu]);
    }
    return r;
}

// div_Omega = sum_nu d^2/dx_nu dtheta_nu with the left Grassmann derivative;
// v-powers are untouched.
inline MultiVector divergence(const MultiVector& g) {
    MultiVector r(g.dim());
    for (int nu = 0; nu < g.dim(); ++nu) r += x_partial(theta_partial_left(g, nu), nu);
    return r;
}

// delta_Omega = v div_Omega.
inline MultiVector delta_omega(const MultiVector& g) { return divergence(g).shift_v(1); }

// Schouten-Nijenhuis bracket. On vector fields this is the Lie bracket; the
// extension to all multivectors matches the Leibniz rule
//   [a^b, c] = a^[b,c] + (-1)^{|c|(|b|+1)} [a,c]^b
// (checked against term-by-term expansion in the tests). v-bilinear.
inline MultiVector schouten(const MultiVector& a, const MultiVector& b) {
    a.check_dim(b);
    int d = a.dim();
    MultiVector r(d);
    // decompose by theta-degree so the Koszul sign is well-defined
    auto half = [d](const MultiVector& u, const MultiVector& w) {
        MultiVector s(d);
        for (int nu = 0; nu < d; ++nu) {
            MultiVector du = theta_partial_right(u, nu);
            if (du.is_zero()) continue;
            s += wedge(du, x_partial(w, nu));
        }
        return s;
    };
    for (int ka = 0; ka <= d; ++ka)
        for (int kb = 0; kb <= d; ++kb) {
            MultiVector ha(d), hb(d);
            for (const auto& [key, c] : a.terms())
                if (grassmann_degree(key.theta) == ka) ha.add_term(key, c);
            for (const auto& [key, c] : b.terms())
                if (grassmann_degree(key.theta) == kb) hb.add_term(key, c);
            if (ha.is_zero() || hb.is_zero()) continue;
            int sgn = (((ka - 1) * (kb - 1)) % 2 == 0) ? 1 : -1;
            r += half(ha, hb);
            r -= sgn * Rational(1) * half(hb, ha);
        }
    return r;
}

inline MultiVector random_multivector(std::mt19937_64& rng, int dim, int theta_deg, int l,
                                      int xdeg = 2, int nterms = 2, int bound = 3) {
    MultiVector r(dim);
    std::uniform_int_distribution<int> coef(-bound, bound);
    std::uniform_int_distribution<int> var(0, dim - 1);
    std::uniform_int_distribution<int> deg(0, xdeg);
    for (int t = 0; t < nterms; ++t) {
        // random theta subset of the requested size
        std::vector<int> idx(dim);
        for (int i = 0; i < dim; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        if (theta_deg > dim) return r;
        ThetaMask mask = 0;
        for (int i = 0; i < theta_deg; ++i) mask |= ThetaMask(1) << idx[i];
        Monomial m(dim, 0);
        int total = deg(rng);
        for (int j = 0; j < total; ++j) m[var(rng)] += 1;
        r.add_term({l, mask, std::move(m)}, coef(rng));
    }
    return r;
}

} // namespace diskq
