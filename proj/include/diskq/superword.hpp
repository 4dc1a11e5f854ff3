#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "diskq/multivector.hpp"

namespace diskq {

// Exact evaluation of the derivative word a graph applies to
//   g = gamma_1(x^(1), theta^(1)) ... gamma_n(x^(n), theta^(n)) a_0 ... a_p.
// One anticommuting alphabet per gamma slot plus an output alphabet, and one
// odd symbol per propagator edge; all Koszul signs come from the global bit
// order (edge symbols, theta^(1..n) blocks, output block). Boundary arguments
// stay symbolic: only their accumulated derivative multi-indices are stored.
class SuperWord {
public:
    struct Term {
        Rational c;
        std::uint64_t mask = 0;           // odd symbols
        std::vector<Monomial> slot_x;     // x-monomial per gamma slot
        std::vector<Monomial> bnd;        // derivative multi-index per boundary slot
    };

    SuperWord(int n, int d, int nb, int nedges) : n_(n), d_(d), nb_(nb), E_(nedges) {
        if (E_ + (n_ + 1) * d_ > 64) throw std::invalid_argument("superword: too many symbols");
    }

    int edge_bit(int e) const { return e; }
    int theta_bit(int slot, int nu) const { return E_ + slot * d_ + nu; }
    int out_bit(int nu) const { return E_ + n_ * d_ + nu; }

    // Build g from homogeneous multivectors (their v-powers are handled by
    // the caller through the r-values of the graph).
    void init(const std::vector<MultiVector>& gammas) {
        terms_.clear();
        Term base;
        base.c = 1;
        base.slot_x.assign(n_, Monomial(d_, 0));
        base.bnd.assign(nb_, Monomial(d_, 0));
        std::vector<Term> cur = {base};
        for (int i = 0; i < n_; ++i) {
            std::vector<Term> next;
            for (const auto& t : cur)
                for (const auto& [key, c] : gammas[i].terms()) {
                    Term s = t;
                    s.c *= c;
                    // theta^(i) block sits above everything already present
                    s.mask |= std::uint64_t(key.theta) << theta_bit(i, 0);
                    s.slot_x[i] = key.x;
                    next.push_back(std::move(s));
                }
            cur = std::move(next);
        }
        terms_ = std::move(cur);
    }

    bool empty() const { return terms_.empty(); }

    // Apply  Omega_e  sum_nu  d_L/dtheta^(src)_nu  d/dx^(target)_nu.
    // Target is a gamma slot (interior) or a boundary slot.
    void apply_edge(int e, int src, bool target_interior, int target) {
        std::vector<Term> out;
        for (const auto& t : terms_)
            for (int nu = 0; nu < d_; ++nu) {
                int tb = theta_bit(src, nu);
                if (!(t.mask >> tb & 1)) continue;
                Term s = t;
                // left derivative: pass everything below tb
                int below = std::popcount(s.mask & ((std::uint64_t(1) << tb) - 1));
                s.mask ^= std::uint64_t(1) << tb;
                if (below & 1) s.c = -s.c;
                // x-derivative
                if (target_interior) {
                    if (s.slot_x[target][nu] == 0) continue;
                    s.c *= s.slot_x[target][nu];
                    s.slot_x[target][nu] -= 1;
                } else {
                    s.bnd[target][nu] += 1;
                }
                // left multiplication by Omega_e, bubbled to its slot
                int eb = edge_bit(e);
                if (s.mask >> eb & 1) continue; // cannot happen: one symbol per edge
                int cross = std::popcount(s.mask & ((std::uint64_t(1) << eb) - 1));
                s.mask |= std::uint64_t(1) << eb;
                if (cross & 1) s.c = -s.c;
                out.push_back(std::move(s));
            }
        terms_ = std::move(out);
    }

    // Apply  (1/w!) (sum_nu theta^out_nu d_L/dtheta^(i)_nu)^w : the sum over
    // w-element index subsets, each factor theta^out_nu d_L/dtheta^(i)_nu
    // applied with nu ascending.
    void apply_whites(int i, int w) {
        for (int step = 0; step < w; ++step) {
            // apply the single even operator, then drop duplicate subsets by
            // dividing by the number of orderings at the end
            std::vector<Term> out;
            for (const auto& t : terms_)
                for (int nu = 0; nu < d_; ++nu) {
                    int tb = theta_bit(i, nu);
                    if (!(t.mask >> tb & 1)) continue;
                    int ob = out_bit(nu);
                    if (t.mask >> ob & 1) continue; // theta_out^2 = 0
                    Term s = t;
                    int below = std::popcount(s.mask & ((std::uint64_t(1) << tb) - 1));
                    s.mask ^= std::uint64_t(1) << tb;
                    if (below & 1) s.c = -s.c;
                    int cross = std::popcount(s.mask & ((std::uint64_t(1) << ob) - 1));
                    s.mask |= std::uint64_t(1) << ob;
                    if (cross & 1) s.c = -s.c;
                    out.push_back(std::move(s));
                }
            terms_ = std::move(out);
        }
        if (w > 1) {
            Rational inv = Rational(1) / factorial(w);
            for (auto& t : terms_) t.c *= inv;
        }
    }

    // Restriction to the diagonal: all alphabets map to the ambient theta in
    // the written (ascending-bit) order; Omega symbols must all be present
    // and factor out as the edge word in ascending order.
    struct Collapsed {
        Rational c;
        ThetaMask theta;
        Monomial x;                  // product of the gamma-slot monomials
        std::vector<Monomial> bnd;   // boundary derivative multi-indices
    };

    std::vector<Collapsed> collapse() const {
        std::vector<Collapsed> out;
        std::uint64_t full_edges = E_ >= 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << E_) - 1);
        for (const auto& t : terms_) {
            if ((t.mask & full_edges) != full_edges)
                throw std::logic_error("superword: missing edge symbol at collapse");
            Collapsed c;
            c.c = t.c;
            c.theta = 0;
            c.bnd = t.bnd;
            c.x = Monomial(d_, 0);
            for (int i = 0; i < n_; ++i)
                for (int nu = 0; nu < d_; ++nu) c.x[nu] += t.slot_x[i][nu];
            bool dead = false;
            for (int bit = E_; bit < E_ + (n_ + 1) * d_ && !dead; ++bit) {
                if (!(t.mask >> bit & 1)) continue;
                int nu = (bit - E_) % d_;
                ThetaMask b = ThetaMask(1) << nu;
                if (c.theta & b) { dead = true; break; } // theta_nu^2 = 0
                // append on the right: cross everything above nu
                int cross = std::popcount(c.theta >> (nu + 1));
                if (cross & 1) c.c = -c.c;
                c.theta |= b;
            }
            if (!dead) out.push_back(std::move(c));
        }
        return out;
    }

private:
    int n_, d_, nb_, E_;
    std::vector<Term> terms_;
};

} // namespace diskq
