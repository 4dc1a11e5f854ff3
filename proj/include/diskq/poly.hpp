#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "diskq/rational.hpp"

namespace diskq {

// Exponent vector of a monomial in x_0..x_{d-1}.
using Monomial = std::vector<int>;

inline int total_degree(const Monomial& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

// Graded lexicographic order: total degree first, then lex.
struct GradedLex {
    bool operator()(const Monomial& a, const Monomial& b) const {
        int da = total_degree(a), db = total_degree(b);
        if (da != db) return da < db;
        return a < b;
    }
};

// Polynomial with exact rational coefficients in d variables.
// Stands in for the smooth functions on R^d; every identity in scope is
// polynomial, so nothing is lost and no floating point enters the symbolic
// layer.
class PolyFunction {
public:
    using TermMap = std::map<Monomial, Rational, GradedLex>;

    PolyFunction() : dim_(0) {}
    explicit PolyFunction(int dim) : dim_(dim) {}
    PolyFunction(int dim, const Rational& c) : dim_(dim) {
        if (c != 0) terms_[Monomial(dim, 0)] = c;
    }

    static PolyFunction variable(int dim, int nu, const Rational& c = 1) {
        PolyFunction p(dim);
        Monomial m(dim, 0);
        m[nu] = 1;
        p.add_term(m, c);
        return p;
    }

    static PolyFunction monomial(int dim, Monomial m, const Rational& c = 1) {
        PolyFunction p(dim);
        p.add_term(std::move(m), c);
        return p;
    }

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        if (terms_.empty()) return true;
        return terms_.size() == 1 && total_degree(terms_.begin()->first) == 0;
    }

    Rational constant_term() const {
        auto it = terms_.find(Monomial(dim_, 0));
        return it == terms_.end() ? Rational(0) : it->second;
    }

    // Entry of the normalized bar complex: the polynomial with its constant
    // part removed.
    PolyFunction without_constant() const {
        PolyFunction p = *this;
        p.terms_.erase(Monomial(dim_, 0));
        return p;
    }

    void add_term(Monomial m, const Rational& c) {
        if (c == 0) return;
        if ((int)m.size() != dim_) throw std::invalid_argument("monomial dimension mismatch");
        auto [it, fresh] = terms_.try_emplace(std::move(m), c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    PolyFunction& operator+=(const PolyFunction& q) {
        check_dim(q);
        for (const auto& [m, c] : q.terms_) add_term(m, c);
        return *this;
    }
    PolyFunction& operator-=(const PolyFunction& q) {
        check_dim(q);
        for (const auto& [m, c] : q.terms_) add_term(m, -c);
        return *this;
    }

    friend PolyFunction operator+(PolyFunction a, const PolyFunction& b) { return a += b; }
    friend PolyFunction operator-(PolyFunction a, const PolyFunction& b) { return a -= b; }

    friend PolyFunction operator*(const PolyFunction& a, const PolyFunction& b) {
        a.check_dim(b);
        PolyFunction r(a.dim_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                Monomial m(a.dim_);
                for (int i = 0; i < a.dim_; ++i) m[i] = ma[i] + mb[i];
                r.add_term(std::move(m), ca * cb);
            }
        return r;
    }

    friend PolyFunction operator*(const PolyFunction& a, const Rational& c) {
        PolyFunction r(a.dim_);
        if (c == 0) return r;
        for (const auto& [m, cc] : a.terms_) r.terms_[m] = cc * c;
        return r;
    }
    friend PolyFunction operator*(const Rational& c, const PolyFunction& a) { return a * c; }
    PolyFunction operator-() const { return *this * Rational(-1); }

    // d/dx_nu
    PolyFunction partial(int nu) const {
        if (nu < 0 || nu >= dim_) throw std::invalid_argument("partial: index out of range");
        PolyFunction r(dim_);
        for (const auto& [m, c] : terms_) {
            if (m[nu] == 0) continue;
            Monomial q = m;
            q[nu] -= 1;
            r.add_term(std::move(q), c * m[nu]);
        }
        return r;
    }

    // Apply a derivative multi-index.
    PolyFunction partial_multi(const Monomial& alpha) const {
        PolyFunction r = *this;
        for (int nu = 0; nu < (int)alpha.size(); ++nu)
            for (int j = 0; j < alpha[nu]; ++j) r = r.partial(nu);
        return r;
    }

    bool operator==(const PolyFunction& q) const { return dim_ == q.dim_ && terms_ == q.terms_; }
    bool operator!=(const PolyFunction& q) const { return !(*this == q); }
    bool operator<(const PolyFunction& q) const {
        if (dim_ != q.dim_) return dim_ < q.dim_;
        return std::lexicographical_compare(
            terms_.begin(), terms_.end(), q.terms_.begin(), q.terms_.end(),
            [](const auto& a, const auto& b) {
                GradedLex lt;
                if (lt(a.first, b.first)) return true;
                if (lt(b.first, a.first)) return false;
                return a.second < b.second;
            });
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            if (!first) s += " + ";
            first = false;
            s += rational_to_string(c);
            for (int i = 0; i < dim_; ++i)
                if (m[i] > 0) {
                    s += "*x" + std::to_string(i);
                    if (m[i] > 1) s += "^" + std::to_string(m[i]);
                }
        }
        return s;
    }

private:
    void check_dim(const PolyFunction& q) const {
        if (dim_ != q.dim_) throw std::invalid_argument("polynomial dimension mismatch");
    }

    int dim_;
    TermMap terms_;
};

// Uniform random polynomial for property tests: degree <= max_deg, integer
// coefficients in [-bound, bound].
inline PolyFunction random_poly(std::mt19937_64& rng, int dim, int max_deg, int bound = 3,
                                int nterms = 3) {
    PolyFunction p(dim);
    std::uniform_int_distribution<int> coef(-bound, bound);
    std::uniform_int_distribution<int> deg(0, max_deg);
    for (int t = 0; t < nterms; ++t) {
        Monomial m(dim, 0);
        int total = deg(rng);
        std::uniform_int_distribution<int> var(0, dim - 1);
        for (int j = 0; j < total; ++j) m[var(rng)] += 1;
        p.add_term(std::move(m), coef(rng));
    }
    return p;
}

} // namespace diskq
