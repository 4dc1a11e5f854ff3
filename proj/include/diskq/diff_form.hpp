#pragma once

#include <map>
#include <stdexcept>

#include "diskq/multivector.hpp"

namespace diskq {

// Differential form on R^d with polynomial coefficients. dx monomials are
// subsets of {0..d-1} in ascending order, same sign conventions as theta.
class DiffForm {
public:
    struct Key {
        ThetaMask dx;
        Monomial x;
        bool operator<(const Key& o) const {
            if (dx != o.dx) return dx < o.dx;
            return GradedLex{}(x, o.x);
        }
        bool operator==(const Key& o) const { return dx == o.dx && x == o.x; }
    };
    using TermMap = std::map<Key, Rational>;

    DiffForm() : dim_(0) {}
    explicit DiffForm(int dim) : dim_(dim) {}

    static DiffForm from_poly(const PolyFunction& p) {
        DiffForm r(p.dim());
        for (const auto& [m, c] : p.terms()) r.add_term({0, m}, c);
        return r;
    }

    static DiffForm dx(int dim, int nu, const Rational& c = 1) {
        DiffForm r(dim);
        r.add_term({ThetaMask(1) << nu, Monomial(dim, 0)}, c);
        return r;
    }

    static DiffForm volume(int dim) {
        DiffForm r(dim);
        r.add_term({(ThetaMask(1) << dim) - 1, Monomial(dim, 0)}, 1);
        return r;
    }

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Key k, const Rational& c) {
        if (c == 0) return;
        if ((int)k.x.size() != dim_) throw std::invalid_argument("form monomial dim mismatch");
        auto [it, fresh] = terms_.try_emplace(std::move(k), c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    DiffForm& operator+=(const DiffForm& q) {
        check_dim(q);
        for (const auto& [k, c] : q.terms_) add_term(k, c);
        return *this;
    }
    DiffForm& operator-=(const DiffForm& q) {
        check_dim(q);
        for (const auto& [k, c] : q.terms_) add_term(k, -c);
        return *this;
    }
    friend DiffForm operator+(DiffForm a, const DiffForm& b) { return a += b; }
    friend DiffForm operator-(DiffForm a, const DiffForm& b) { return a -= b; }
    friend DiffForm operator*(const DiffForm& a, const Rational& c) {
        DiffForm r(a.dim_);
        if (c == 0) return r;
        for (const auto& [k, cc] : a.terms_) r.terms_[k] = cc * c;
        return r;
    }
    friend DiffForm operator*(const Rational& c, const DiffForm& a) { return a * c; }
    DiffForm operator-() const { return *this * Rational(-1); }

    bool operator==(const DiffForm& q) const { return dim_ == q.dim_ && terms_ == q.terms_; }
    bool operator!=(const DiffForm& q) const { return !(*this == q); }

    int max_degree() const {
        int deg = 0;
        for (const auto& [k, c] : terms_) deg = std::max(deg, grassmann_degree(k.dx));
        return deg;
    }

    DiffForm homogeneous_part(int p) const {
        DiffForm r(dim_);
        for (const auto& [k, c] : terms_)
            if (grassmann_degree(k.dx) == p) r.terms_[k] = c;
        return r;
    }

    PolyFunction coefficient(ThetaMask mask) const {
        PolyFunction p(dim_);
        for (const auto& [k, c] : terms_)
            if (k.dx == mask) p.add_term(k.x, c);
        return p;
    }

    void check_dim(const DiffForm& q) const {
        if (dim_ != q.dim_) throw std::invalid_argument("form dimension mismatch");
    }

private:
    int dim_;
    TermMap terms_;
};

inline DiffForm wedge(const DiffForm& a, const DiffForm& b) {
    a.check_dim(b);
    DiffForm r(a.dim());
    for (const auto& [ka, ca] : a.terms())
        for (const auto& [kb, cb] : b.terms()) {
            if (ka.dx & kb.dx) continue;
            int sgn = merge_sign(ka.dx, kb.dx);
            Monomial m(a.dim());
            for (int i = 0; i < a.dim(); ++i) m[i] = ka.x[i] + kb.x[i];
            r.add_term({ka.dx | kb.dx, std::move(m)}, ca * cb * sgn);
        }
    return r;
}

// de Rham differential.
inline DiffForm de_rham(const DiffForm& w) {
    DiffForm r(w.dim());
    for (const auto& [k, c] : w.terms())
        for (int nu = 0; nu < w.dim(); ++nu) {
            if (k.x[nu] == 0) continue;
            ThetaMask bit = ThetaMask(1) << nu;
            if (k.dx & bit) continue;
            Monomial m = k.x;
            m[nu] -= 1;
            // dx_nu ^ dx_K: nu is merged from the left
            int sgn = merge_sign(bit, k.dx);
            r.add_term({k.dx | bit, std::move(m)}, c * k.x[nu] * sgn);
        }
    return r;
}

inline DiffForm random_form(std::mt19937_64& rng, int dim, int form_deg, int xdeg = 2,
                            int nterms = 2, int bound = 3) {
    DiffForm r(dim);
    if (form_deg > dim) return r;
    std::uniform_int_distribution<int> coef(-bound, bound);
    std::uniform_int_distribution<int> var(0, dim - 1);
    std::uniform_int_distribution<int> deg(0, xdeg);
    for (int t = 0; t < nterms; ++t) {
        std::vector<int> idx(dim);
        for (int i = 0; i < dim; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        ThetaMask mask = 0;
        for (int i = 0; i < form_deg; ++i) mask |= ThetaMask(1) << idx[i];
        Monomial m(dim, 0);
        int total = deg(rng);
        for (int j = 0; j < total; ++j) m[var(rng)] += 1;
        r.add_term({mask, std::move(m)}, coef(rng));
    }
    return r;
}

} // namespace diskq
