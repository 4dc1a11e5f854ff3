#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "diskq/calculus.hpp"
#include "diskq/multidiffop.hpp"
#include "diskq/poly.hpp"

namespace diskq {

// A tuple (a_0,...,a_p) in the normalized complex. Entries in position >= 1
// live in A/R1: their constant part is projected away on insertion; if an
// entry dies the tuple is zero.
using ChainTuple = std::vector<PolyFunction>;

// Formal rational combination of normalized tuples, graded by p per tuple.
class HochschildChain {
public:
    using TermMap = std::map<ChainTuple, Rational>;

    HochschildChain() : dim_(0) {}
    explicit HochschildChain(int dim) : dim_(dim) {}

    static HochschildChain from_tuple(ChainTuple t, const Rational& c = 1) {
        if (t.empty()) throw std::invalid_argument("empty chain tuple");
        HochschildChain r(t[0].dim());
        r.add_tuple(std::move(t), c);
        return r;
    }

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    // Insert with normalization. Tuples are expanded multilinearly into
    // monomial entries, the canonical basis of A (x) Abar^(x)p: monomial
    // entries of degree zero in position >= 1 kill their component (bar
    // normalization), and coefficients move into the chain coefficient.
    void add_tuple(const ChainTuple& t, const Rational& c) {
        if (c == 0 || t.empty()) return;
        for (const auto& e : t)
            if ((int)e.dim() != dim_) throw std::invalid_argument("chain entry dim mismatch");
        ChainTuple mono(t.size(), PolyFunction(dim_));
        expand(t, 0, c, mono);
    }

    HochschildChain& operator+=(const HochschildChain& q) {
        check_dim(q);
        for (const auto& [t, c] : q.terms_) add_tuple(t, c);
        return *this;
    }
    HochschildChain& operator-=(const HochschildChain& q) {
        check_dim(q);
        for (const auto& [t, c] : q.terms_) add_tuple(t, -c);
        return *this;
    }
    friend HochschildChain operator+(HochschildChain a, const HochschildChain& b) { return a += b; }
    friend HochschildChain operator-(HochschildChain a, const HochschildChain& b) { return a -= b; }
    friend HochschildChain operator*(const HochschildChain& a, const Rational& c) {
        HochschildChain r(a.dim_);
        if (c == 0) return r;
        for (const auto& [t, cc] : a.terms_) r.terms_[t] = cc * c;
        return r;
    }
    friend HochschildChain operator*(const Rational& c, const HochschildChain& a) { return a * c; }

    bool operator==(const HochschildChain& q) const { return dim_ == q.dim_ && terms_ == q.terms_; }
    bool operator!=(const HochschildChain& q) const { return !(*this == q); }

    void check_dim(const HochschildChain& q) const {
        if (dim_ != q.dim_) throw std::invalid_argument("chain dimension mismatch");
    }

private:
    void expand(const ChainTuple& t, size_t i, const Rational& c, ChainTuple& mono) {
        if (c == 0) return;
        if (i == t.size()) {
            auto [it, fresh] = terms_.try_emplace(mono, c);
            if (!fresh) {
                it->second += c;
                if (it->second == 0) terms_.erase(it);
            }
            return;
        }
        for (const auto& [m, cm] : t[i].terms()) {
            if (i >= 1 && total_degree(m) == 0) continue; // Abar = A / R 1
            mono[i] = PolyFunction::monomial(dim_, m);
            expand(t, i + 1, c * cm, mono);
        }
        mono[i] = PolyFunction(dim_);
    }

    int dim_;
    TermMap terms_;
};

// Hochschild boundary:
// b(a_0,...,a_p) = sum_{i=0}^{p-1} (-1)^i (a_0,...,a_i a_{i+1},...,a_p)
//                + (-1)^p (a_p a_0, a_1,...,a_{p-1}).
inline HochschildChain hoch_b(const HochschildChain& a) {
    HochschildChain out(a.dim());
    for (const auto& [t, c] : a.terms()) {
        int p = (int)t.size() - 1;
        if (p == 0) continue;
        for (int i = 0; i < p; ++i) {
            ChainTuple s;
            s.reserve(p);
            for (int j = 0; j < i; ++j) s.push_back(t[j]);
            s.push_back(t[i] * t[i + 1]);
            for (int j = i + 2; j <= p; ++j) s.push_back(t[j]);
            out.add_tuple(std::move(s), (i % 2 == 0) ? c : -c);
        }
        ChainTuple s;
        s.reserve(p);
        s.push_back(t[p] * t[0]);
        for (int j = 1; j < p; ++j) s.push_back(t[j]);
        out.add_tuple(std::move(s), (p % 2 == 0) ? c : -c);
    }
    return out;
}

// Connes differential:
// B(a_0,...,a_p) = sum_{i=0}^p (-1)^{ip} (1, a_i,...,a_p, a_0,...,a_{i-1}).
inline HochschildChain connes_B(const HochschildChain& a) {
    HochschildChain out(a.dim());
    for (const auto& [t, c] : a.terms()) {
        int p = (int)t.size() - 1;
        for (int i = 0; i <= p; ++i) {
            ChainTuple s;
            s.reserve(p + 2);
            s.push_back(PolyFunction(a.dim(), 1));
            for (int j = i; j <= p; ++j) s.push_back(t[j]);
            for (int j = 0; j < i; ++j) s.push_back(t[j]);
            out.add_tuple(std::move(s), ((i * p) % 2 == 0) ? c : -c);
        }
    }
    return out;
}

// u-polynomial over Hochschild chains; the differential is b + uB.
class NegCyclicChain {
public:
    using Map = std::map<int, HochschildChain>;

    NegCyclicChain() : dim_(0) {}
    explicit NegCyclicChain(int dim) : dim_(dim) {}

    static NegCyclicChain from_chain(const HochschildChain& c, int upow = 0) {
        NegCyclicChain r(c.dim());
        r.add(upow, c);
        return r;
    }
    static NegCyclicChain from_tuple(ChainTuple t, const Rational& c = 1, int upow = 0) {
        return from_chain(HochschildChain::from_tuple(std::move(t), c), upow);
    }

    int dim() const { return dim_; }
    const Map& parts() const { return parts_; }
    bool is_zero() const { return parts_.empty(); }

    void add(int upow, const HochschildChain& c) {
        if (c.is_zero()) return;
        if (upow < 0) throw std::invalid_argument("negative u-power");
        auto [it, fresh] = parts_.try_emplace(upow, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) parts_.erase(it);
        }
    }

    NegCyclicChain& operator+=(const NegCyclicChain& q) {
        for (const auto& [u, c] : q.parts_) add(u, c);
        return *this;
    }
    friend NegCyclicChain operator+(NegCyclicChain a, const NegCyclicChain& b) { return a += b; }
    friend NegCyclicChain operator*(const NegCyclicChain& a, const Rational& c) {
        NegCyclicChain r(a.dim_);
        for (const auto& [u, cc] : a.parts_) r.add(u, cc * c);
        return r;
    }

    bool operator==(const NegCyclicChain& q) const { return dim_ == q.dim_ && parts_ == q.parts_; }
    bool operator!=(const NegCyclicChain& q) const { return !(*this == q); }

private:
    int dim_;
    Map parts_;
};

inline NegCyclicChain b_plus_uB(const NegCyclicChain& a) {
    NegCyclicChain out(a.dim());
    for (const auto& [u, c] : a.parts()) {
        out.add(u, hoch_b(c));
        out.add(u + 1, connes_B(c));
    }
    return out;
}

// Action of a cochain on a normalized tuple. With k = arity(phi):
//   phi . (a_0,...,a_p) =
//     sum_{i=0}^{p-k+1} (-1)^{i(k-1)}
//        (a_0,...,a_{i-1}, phi(a_i,...,a_{i+k-1}), a_{i+k},...,a_p)
//   + sum_{i=p-k+2}^{p} (-1)^{ip}
//        (phi(a_i,...,a_p,a_0,...,a_{i+k-p-2}), a_{i+k-p-1},...,a_{i-1}).
// The overall prefactor (-1)^{(k-1)(p+1)} of the bookkeeping-normalized
// action is dropped here, so that the action of the multiplication cochain
// equals hoch_b on the nose for every p.
inline HochschildChain cochain_action(const MultiDiffOp& phi, const HochschildChain& a) {
    HochschildChain out(a.dim());
    int k = phi.arity();
    for (const auto& [t, c] : a.terms()) {
        int p = (int)t.size() - 1;
        if (k > p + 1) continue;
        for (int i = 0; i <= p - k + 1; ++i) {
            std::vector<PolyFunction> args(t.begin() + i, t.begin() + i + k);
            PolyFunction val = phi.apply(args);
            if (val.is_zero()) continue;
            ChainTuple s;
            s.reserve(p - k + 2);
            for (int j = 0; j < i; ++j) s.push_back(t[j]);
            s.push_back(val);
            for (int j = i + k; j <= p; ++j) s.push_back(t[j]);
            out.add_tuple(std::move(s), ((i * (k - 1)) % 2 == 0) ? c : -c);
        }
        for (int i = std::max(p - k + 2, 1); i <= p; ++i) {
            std::vector<PolyFunction> args;
            args.reserve(k);
            for (int j = i; j <= p; ++j) args.push_back(t[j]);
            for (int j = 0; j <= i + k - p - 2; ++j) args.push_back(t[j]);
            PolyFunction val = phi.apply(args);
            if (val.is_zero()) continue;
            ChainTuple s;
            s.reserve(p - k + 2);
            s.push_back(val);
            for (int j = i + k - p - 1; j <= i - 1; ++j) s.push_back(t[j]);
            out.add_tuple(std::move(s), ((i * p) % 2 == 0) ? c : -c);
        }
    }
    return out;
}

inline NegCyclicChain cochain_action(const MultiDiffOp& phi, const NegCyclicChain& a) {
    NegCyclicChain out(a.dim());
    for (const auto& [u, c] : a.parts()) out.add(u, cochain_action(phi, c));
    return out;
}

// HKR chain map to forms, extended linearly (and u-linearly below).
inline DiffForm hkr_chain(const HochschildChain& a) {
    DiffForm out(a.dim());
    for (const auto& [t, c] : a.terms()) out += hkr_tuple(t) * c;
    return out;
}

inline HochschildChain random_chain(std::mt19937_64& rng, int dim, int p, int xdeg = 2) {
    ChainTuple t;
    for (int i = 0; i <= p; ++i) {
        PolyFunction f = random_poly(rng, dim, xdeg, 3, 2);
        if (i >= 1 && f.without_constant().is_zero()) f += PolyFunction::variable(dim, 0);
        if (i == 0 && f.is_zero()) f = PolyFunction(dim, 1);
        t.push_back(f);
    }
    return HochschildChain::from_tuple(std::move(t));
}

} // namespace diskq
