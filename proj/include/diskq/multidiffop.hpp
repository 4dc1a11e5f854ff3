#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "diskq/poly.hpp"

namespace diskq {

// Multidifferential operator: a finite sum of terms
//   coeff(x) * (d^{alpha_0} arg_0) ... (d^{alpha_{k-1}} arg_{k-1}),
// acting multilinearly on k-tuples of polynomials. Arity 0 is allowed (the
// operator is then just its coefficient).
class MultiDiffOp {
public:
    using Orders = std::vector<Monomial>; // one multi-index per argument slot
    using TermMap = std::map<Orders, PolyFunction>;

    MultiDiffOp() : dim_(0), arity_(0) {}
    MultiDiffOp(int dim, int arity) : dim_(dim), arity_(arity) {}

    // The multiplication mu(f,g) = fg.
    static MultiDiffOp multiplication(int dim) {
        MultiDiffOp mu(dim, 2);
        mu.add_term({Monomial(dim, 0), Monomial(dim, 0)}, PolyFunction(dim, 1));
        return mu;
    }

    static MultiDiffOp constant(const PolyFunction& h) {
        MultiDiffOp r(h.dim(), 0);
        r.add_term({}, h);
        return r;
    }

    static MultiDiffOp identity_op(int dim) {
        MultiDiffOp r(dim, 1);
        r.add_term({Monomial(dim, 0)}, PolyFunction(dim, 1));
        return r;
    }

    int dim() const { return dim_; }
    int arity() const { return arity_; }
    // Degree in the shifted Hochschild complex.
    int degree() const { return arity_ - 1; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Orders o, const PolyFunction& coeff) {
        if (coeff.is_zero()) return;
        if ((int)o.size() != arity_) throw std::invalid_argument("operator term arity mismatch");
        auto [it, fresh] = terms_.try_emplace(std::move(o), coeff);
        if (!fresh) {
            it->second += coeff;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    MultiDiffOp& operator+=(const MultiDiffOp& q) {
        if (dim_ != q.dim_ || arity_ != q.arity_)
            throw std::invalid_argument("operator shape mismatch in +=");
        for (const auto& [o, c] : q.terms_) add_term(o, c);
        return *this;
    }
    friend MultiDiffOp operator+(MultiDiffOp a, const MultiDiffOp& b) { return a += b; }
    friend MultiDiffOp operator*(const MultiDiffOp& a, const Rational& c) {
        MultiDiffOp r(a.dim_, a.arity_);
        for (const auto& [o, cc] : a.terms_) r.add_term(o, cc * c);
        return r;
    }
    friend MultiDiffOp operator*(const Rational& c, const MultiDiffOp& a) { return a * c; }
    MultiDiffOp operator-() const { return *this * Rational(-1); }
    friend MultiDiffOp operator-(MultiDiffOp a, const MultiDiffOp& b) {
        return a += (-b);
    }

    bool operator==(const MultiDiffOp& q) const {
        return dim_ == q.dim_ && arity_ == q.arity_ && terms_ == q.terms_;
    }

    PolyFunction apply(const std::vector<PolyFunction>& args) const {
        if ((int)args.size() != arity_) throw std::invalid_argument("apply: wrong argument count");
        PolyFunction out(dim_);
        for (const auto& [o, c] : terms_) {
            PolyFunction t = c;
            for (int j = 0; j < arity_ && !t.is_zero(); ++j) t = t * args[j].partial_multi(o[j]);
            out += t;
        }
        return out;
    }

    // phi o (id^j (x) psi (x) id^{arity-1-j}): insert psi into slot j,
    // distributing the slot's derivative over psi's coefficient and arguments
    // by the Leibniz rule.
    MultiDiffOp insert(int j, const MultiDiffOp& psi) const {
        if (dim_ != psi.dim_) throw std::invalid_argument("insert: dimension mismatch");
        if (j < 0 || j >= arity_) throw std::invalid_argument("insert: bad slot");
        MultiDiffOp out(dim_, arity_ + psi.arity_ - 1);
        for (const auto& [o, c] : terms_) {
            for (const auto& [po, pc] : psi.terms_) {
                // split o[j] over (psi coefficient, psi arguments)
                Orders base(arity_ + psi.arity_ - 1, Monomial(dim_, 0));
                for (int s = 0; s < j; ++s) base[s] = o[s];
                for (int s = 0; s < psi.arity_; ++s) base[j + s] = po[s];
                for (int s = j + 1; s < arity_; ++s) base[s + psi.arity_ - 1] = o[s];
                distribute(out, base, c, pc, o[j], j, psi.arity_, 0, Monomial(dim_, 0),
                           Rational(1));
            }
        }
        return out;
    }

private:
    // Recursively split the multi-index alpha (variable by variable) among
    // psi's coefficient and its arity slots, with multinomial coefficients.
    void distribute(MultiDiffOp& out, const Orders& base, const PolyFunction& phi_coeff,
                    const PolyFunction& psi_coeff, const Monomial& alpha, int slot_base,
                    int psi_arity, int nu, Monomial onto_coeff, Rational mult) const {
        if (nu == dim_) {
            PolyFunction c = phi_coeff * psi_coeff.partial_multi(onto_coeff) * mult;
            if (c.is_zero()) return;
            // remaining derivative orders were accumulated into base already
            out.add_term(base, c);
            return;
        }
        int a = alpha[nu];
        // compositions of a into psi_arity + 1 parts
        std::vector<int> parts(psi_arity + 1, 0);
        split_var(out, base, phi_coeff, psi_coeff, alpha, slot_base, psi_arity, nu, onto_coeff,
                  mult, a, 0, parts);
    }

    void split_var(MultiDiffOp& out, Orders base, const PolyFunction& phi_coeff,
                   const PolyFunction& psi_coeff, const Monomial& alpha, int slot_base,
                   int psi_arity, int nu, Monomial onto_coeff, Rational mult, int remaining,
                   int part, std::vector<int>& parts) const {
        if (part == psi_arity) {
            parts[part] = remaining; // remainder differentiates the coefficient
            Monomial oc = onto_coeff;
            oc[nu] += parts[psi_arity];
            Rational m = mult;
            // multinomial coefficient for this variable
            int a = alpha[nu];
            Integer fact = 1;
            for (int i = 2; i <= a; ++i) fact *= i;
            Integer denom = 1;
            for (int p = 0; p <= psi_arity; ++p)
                for (int i = 2; i <= parts[p]; ++i) denom *= i;
            m *= Rational(fact, denom);
            Orders b = base;
            for (int p = 0; p < psi_arity; ++p) b[slot_base + p][nu] += parts[p];
            distribute(out, b, phi_coeff, psi_coeff, alpha, slot_base, psi_arity, nu + 1, oc, m);
            return;
        }
        for (int take = 0; take <= remaining; ++take) {
            parts[part] = take;
            split_var(out, base, phi_coeff, psi_coeff, alpha, slot_base, psi_arity, nu, onto_coeff,
                      mult, remaining - take, part + 1, parts);
        }
    }

    int dim_;
    int arity_;
    TermMap terms_;
};

// Gerstenhaber product
//   phi o_G psi = sum_{k=0}^{|phi|} (-1)^{|psi| (|phi|-k)}
//                 phi o (id^k (x) psi (x) id^{|phi|-k}),
// degrees |.| = arity - 1.
inline MultiDiffOp gerstenhaber_product(const MultiDiffOp& phi, const MultiDiffOp& psi) {
    int dphi = phi.degree(), dpsi = psi.degree();
    MultiDiffOp out(phi.dim(), phi.arity() + psi.arity() - 1);
    for (int k = 0; k <= dphi; ++k) {
        int ex = dpsi * (dphi - k);
        Rational sgn = (ex % 2 == 0) ? 1 : -1;
        out += phi.insert(k, psi) * sgn;
    }
    return out;
}

// [phi, psi] = phi o_G psi - (-1)^{|phi||psi|} psi o_G phi.
inline MultiDiffOp gerstenhaber_bracket(const MultiDiffOp& phi, const MultiDiffOp& psi) {
    MultiDiffOp a = gerstenhaber_product(phi, psi);
    MultiDiffOp b = gerstenhaber_product(psi, phi);
    int ex = phi.degree() * psi.degree();
    Rational sgn = (ex % 2 == 0) ? 1 : -1;
    return a - b * sgn;
}

// Hochschild cochain differential d(phi) = [mu, phi].
inline MultiDiffOp hochschild_cochain_diff(const MultiDiffOp& phi) {
    return gerstenhaber_bracket(MultiDiffOp::multiplication(phi.dim()), phi);
}

} // namespace diskq
