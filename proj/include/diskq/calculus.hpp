#pragma once

#include <stdexcept>
#include <vector>

#include "diskq/diff_form.hpp"
#include "diskq/multidiffop.hpp"
#include "diskq/multivector.hpp"

namespace diskq {

// Contraction gamma -| omega in Gamma(wedge^{k-p} TM): the form factors are
// paired against the rightmost theta factors first, i.e. a single dx_nu acts
// as the right Grassmann derivative and the last factor of omega acts first.
// Bilinear; v-powers pass through.
inline MultiVector contraction(const MultiVector& gamma, const DiffForm& omega) {
    if (gamma.dim() != omega.dim()) throw std::invalid_argument("contraction: dimension mismatch");
    MultiVector out(gamma.dim());
    for (const auto& [kw, cw] : omega.terms()) {
        // apply dx factors in descending index order (innermost pairing)
        MultiVector cur = gamma * cw;
        ThetaMask rest = kw.dx;
        while (rest && !cur.is_zero()) {
            int nu = 31 - std::countl_zero(rest); // highest set bit
            cur = theta_partial_right(cur, nu);
            rest ^= ThetaMask(1) << nu;
        }
        if (cur.is_zero()) continue;
        out += wedge(cur, MultiVector::from_poly(PolyFunction::monomial(gamma.dim(), kw.x)));
    }
    return out;
}

// Interior multiplication on forms: iota_{xi_1 ^ ... ^ xi_k} =
// iota_{xi_1} o ... o iota_{xi_k} (composition, last factor applied first).
inline DiffForm iota(const MultiVector& gamma, const DiffForm& omega) {
    if (gamma.dim() != omega.dim()) throw std::invalid_argument("iota: dimension mismatch");
    DiffForm out(omega.dim());
    for (const auto& [kg, cg] : gamma.terms()) {
        if (kg.l != 0) throw std::invalid_argument("iota: nonzero v-power");
        for (const auto& [kw, cw] : omega.terms()) {
            // contract theta indices of kg against dx of kw; the last wedge
            // factor (highest index) is the innermost interior multiplication
            ThetaMask dx = kw.dx;
            Rational c = cg * cw;
            bool dead = false;
            ThetaMask rest = kg.theta;
            std::vector<int> idx;
            while (rest) {
                int nu = std::countr_zero(rest);
                idx.push_back(nu);
                rest ^= ThetaMask(1) << nu;
            }
            for (auto it = idx.rbegin(); it != idx.rend() && !dead; ++it) {
                ThetaMask bit = ThetaMask(1) << *it;
                if (!(dx & bit)) { dead = true; break; }
                // iota_{d_nu}(dx_T): (-1)^{position of nu in T}
                int pos = std::popcount(dx & (bit - 1));
                if (pos % 2) c = -c;
                dx ^= bit;
            }
            if (dead || c == 0) continue;
            Monomial m(omega.dim());
            for (int i = 0; i < omega.dim(); ++i) m[i] = kg.x[i] + kw.x[i];
            out.add_term({dx, std::move(m)}, c);
        }
    }
    return out;
}

// Cartan-type Lie action of a k-vector on forms:
//   L_gamma w = d(iota_gamma w) + (-1)^{k-1} iota_gamma (d w).
// Requires v-power zero.
inline DiffForm lie_action(const MultiVector& gamma, const DiffForm& omega) {
    DiffForm out(omega.dim());
    int dmax = gamma.dim();
    for (int k = 0; k <= dmax; ++k) {
        MultiVector part = gamma.homogeneous_part(k, 0);
        if (part.is_zero()) continue;
        DiffForm t1 = de_rham(iota(part, omega));
        DiffForm t2 = iota(part, de_rham(omega));
        out += ((k - 1) % 2 == 0) ? t1 + t2 : t1 - t2;
    }
    // reject hidden v-powers
    for (const auto& [key, c] : gamma.terms())
        if (key.l != 0) throw std::invalid_argument("lie_action: nonzero v-power");
    return out;
}

// gamma |-> iota_gamma Omega with Omega = dx_0 ... dx_{d-1}; isomorphism onto
// forms used by the divergence oracle.
inline DiffForm volume_contract(const MultiVector& gamma) {
    return iota(gamma, DiffForm::volume(gamma.dim()));
}

// Inverse of volume_contract.
inline MultiVector volume_contract_inverse(const DiffForm& w) {
    int d = w.dim();
    MultiVector out(d);
    // iota(theta_S, volume) = sign(S) dx_{complement(S)}; invert termwise.
    for (const auto& [kw, cw] : w.terms()) {
        ThetaMask full = (ThetaMask(1) << d) - 1;
        ThetaMask S = full ^ kw.dx;
        MultiVector probe = MultiVector::theta_monomial(d, S);
        DiffForm image = iota(probe, DiffForm::volume(d));
        Rational sgn;
        for (const auto& [ki, ci] : image.terms()) sgn = ci; // single term
        out.add_term({0, S, kw.x}, cw / sgn);
    }
    return out;
}

// HKR map on a single tuple: (a_0,...,a_p) -> (1/p!) a_0 da_1 ... da_p.
inline DiffForm hkr_tuple(const std::vector<PolyFunction>& a) {
    if (a.empty()) throw std::invalid_argument("hkr_tuple: empty tuple");
    int d = a[0].dim();
    int p = (int)a.size() - 1;
    DiffForm out = DiffForm::from_poly(a[0]);
    for (int i = 1; i <= p; ++i) out = wedge(out, de_rham(DiffForm::from_poly(a[i])));
    return out * (Rational(1) / factorial(p));
}

// HKR on cochains: xi_1 ^ ... ^ xi_n |-> (1/n!) sum_sigma eps(sigma)
// xi_{sigma(1)}(f_1) ... xi_{sigma(n)}(f_n). This is also the first Taylor
// component U_1. Requires v-power zero.
inline MultiDiffOp hkr_cochain(const MultiVector& gamma, int arity_hint = -1) {
    int d = gamma.dim();
    int k_common = -1;
    for (const auto& [key, c] : gamma.terms()) {
        if (key.l != 0) throw std::invalid_argument("hkr_cochain: nonzero v-power");
        int k = grassmann_degree(key.theta);
        if (k_common < 0) k_common = k;
        else if (k_common != k) throw std::invalid_argument("hkr_cochain: mixed theta-degree");
    }
    if (k_common < 0) k_common = arity_hint >= 0 ? arity_hint : 0;
    MultiDiffOp out(d, k_common);
    for (const auto& [key, c] : gamma.terms()) {
        std::vector<int> idx;
        ThetaMask rest = key.theta;
        while (rest) {
            int nu = std::countr_zero(rest);
            idx.push_back(nu);
            rest ^= ThetaMask(1) << nu;
        }
        int k = (int)idx.size();
        // sum over permutations sigma of the k indices
        std::vector<int> perm(k);
        for (int i = 0; i < k; ++i) perm[i] = i;
        Rational pref = c / factorial(k);
        do {
            // sign of perm
            int inv = 0;
            for (int i = 0; i < k; ++i)
                for (int j = i + 1; j < k; ++j)
                    if (perm[i] > perm[j]) ++inv;
            Rational s = (inv % 2 == 0) ? pref : -pref;
            MultiDiffOp::Orders o(k, Monomial(d, 0));
            for (int slot = 0; slot < k; ++slot) o[slot][idx[perm[slot]]] += 1;
            out.add_term(std::move(o), PolyFunction::monomial(d, key.x) * s);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

} // namespace diskq
