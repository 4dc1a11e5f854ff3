#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "diskq/calculus.hpp"
#include "diskq/halfplane.hpp"
#include "diskq/hochschild.hpp"
#include "diskq/koszul.hpp"
#include "diskq/mc.hpp"
#include "diskq/superword.hpp"

namespace diskq {

// ---------------------------------------------------------------------------
// Exact u-polynomials over multivectors (closed-form Taylor components).
// ---------------------------------------------------------------------------
struct MultiVectorU {
    int dim = 0;
    std::map<int, MultiVector> parts; // u-power -> value

    MultiVectorU() = default;
    explicit MultiVectorU(int d) : dim(d) {}

    void add(int upow, const MultiVector& v) {
        if (v.is_zero()) return;
        auto [it, fresh] = parts.try_emplace(upow, v);
        if (!fresh) {
            it->second += v;
            if (it->second.is_zero()) parts.erase(it);
        }
    }
    MultiVectorU& operator+=(const MultiVectorU& o) {
        for (const auto& [u, v] : o.parts) add(u, v);
        return *this;
    }
    friend MultiVectorU operator+(MultiVectorU a, const MultiVectorU& b) { return a += b; }
    friend MultiVectorU operator-(MultiVectorU a, const MultiVectorU& b) {
        for (const auto& [u, v] : b.parts) a.add(u, -v);
        return a;
    }
    friend MultiVectorU operator*(const MultiVectorU& a, const Rational& c) {
        MultiVectorU r(a.dim);
        if (c == 0) return r;
        for (const auto& [u, v] : a.parts) r.parts.emplace(u, v * c);
        return r;
    }
    MultiVectorU shifted_u(int j) const {
        MultiVectorU r(dim);
        for (const auto& [u, v] : parts) r.parts.emplace(u + j, v);
        return r;
    }
    bool is_zero() const { return parts.empty(); }
};

inline MultiVectorU divergence(const MultiVectorU& a) {
    MultiVectorU r(a.dim);
    for (const auto& [u, v] : a.parts) r.add(u, divergence(v));
    return r;
}

// ---------------------------------------------------------------------------
// Float-valued multivector u-polynomial with propagated Monte Carlo variances.
// ---------------------------------------------------------------------------
struct FloatMV {
    struct Val {
        double mean = 0.0;
        double var = 0.0;
    };
    struct Key {
        int upow;
        int l;
        ThetaMask theta;
        Monomial x;
        bool operator<(const Key& o) const {
            if (upow != o.upow) return upow < o.upow;
            if (l != o.l) return l < o.l;
            if (theta != o.theta) return theta < o.theta;
            return GradedLex{}(x, o.x);
        }
    };
    int dim = 0;
    std::map<Key, Val> vals;

    FloatMV() = default;
    explicit FloatMV(int d) : dim(d) {}

    void add(const Key& k, double mean, double var) {
        if (mean == 0.0 && var == 0.0) return;
        auto& v = vals[k];
        v.mean += mean;
        v.var += var;
    }

    // contribution (weight +- stderr) * exact multivector at a given u-shift
    void accumulate(int ushift, const MultiVector& mv, double wmean, double wstderr,
                    double scale = 1.0) {
        for (const auto& [key, c] : mv.terms()) {
            double cd = double(c) * scale;
            add({ushift, key.l, key.theta, key.x}, cd * wmean, cd * cd * wstderr * wstderr);
        }
    }

    void accumulate_exact(int ushift, const MultiVector& mv, double scale = 1.0) {
        accumulate(ushift, mv, 1.0, 0.0, scale);
    }

    FloatMV& operator+=(const FloatMV& o) {
        for (const auto& [k, v] : o.vals) add(k, v.mean, v.var);
        return *this;
    }
    FloatMV& axpy(double a, const FloatMV& o) {
        for (const auto& [k, v] : o.vals) add(k, a * v.mean, a * a * v.var);
        return *this;
    }

    FloatMV divergence_() const {
        FloatMV r(dim);
        for (const auto& [k, v] : vals) {
            MultiVector unit(dim);
            unit.add_term({k.l, k.theta, k.x}, 1);
            MultiVector dv = divergence(unit);
            for (const auto& [dk, dc] : dv.terms())
                r.add({k.upow, dk.l, dk.theta, dk.x}, double(dc) * v.mean,
                      double(dc) * double(dc) * v.var);
        }
        return r;
    }

    // left wedge by an exact multivector
    FloatMV wedge_left(const MultiVector& g) const {
        FloatMV r(dim);
        for (const auto& [k, v] : vals) {
            MultiVector unit(dim);
            unit.add_term({k.l, k.theta, k.x}, 1);
            MultiVector w = wedge(g, unit);
            for (const auto& [wk, wc] : w.terms())
                r.add({k.upow, wk.l, wk.theta, wk.x}, double(wc) * v.mean,
                      double(wc) * double(wc) * v.var);
        }
        return r;
    }

    // multiply by an exact polynomial
    FloatMV times_poly(const PolyFunction& p) const {
        FloatMV r(dim);
        for (const auto& [k, v] : vals)
            for (const auto& [m, c] : p.terms()) {
                Monomial x = k.x;
                for (int i = 0; i < dim; ++i) x[i] += m[i];
                r.add({k.upow, k.l, k.theta, x}, double(c) * v.mean,
                      double(c) * double(c) * v.var);
            }
        return r;
    }

    double max_abs_mean() const {
        double m = 0;
        for (const auto& [k, v] : vals) m = std::max(m, std::abs(v.mean));
        return m;
    }
    // largest componentwise |mean| - nsigma*sigma overshoot (<= 0 means pass)
    double worst_z_excess(double nsigma, double floor = 0.0) const {
        double worst = 0.0;
        for (const auto& [k, v] : vals) {
            double tol = std::max(nsigma * std::sqrt(v.var), floor);
            worst = std::max(worst, std::abs(v.mean) - tol);
        }
        return worst;
    }
};

inline FloatMV to_float(const MultiVectorU& a) {
    FloatMV r(a.dim);
    for (const auto& [u, v] : a.parts) r.accumulate_exact(u, v);
    return r;
}

// ---------------------------------------------------------------------------
// Words of homogeneous arguments.
// ---------------------------------------------------------------------------
struct GammaSlot {
    MultiVector stripped; // v-power removed
    int k = 0;
    int l = 0;
};

inline GammaSlot make_slot(const MultiVector& g) {
    GammaSlot s;
    int k, l;
    if (!g.homogeneous(k, l)) throw std::invalid_argument("gamma slot must be homogeneous");
    s.k = k;
    s.l = l;
    s.stripped = MultiVector(g.dim());
    for (const auto& [key, c] : g.terms()) s.stripped.add_term({0, key.theta, key.x}, c);
    return s;
}

// ---------------------------------------------------------------------------
// Closed forms: F_0 and F_1.
// ---------------------------------------------------------------------------
inline MultiVectorU F0_tuple(const ChainTuple& a) {
    MultiVectorU r(a.empty() ? 0 : a[0].dim());
    if (a.size() == 1) r.add(0, MultiVector::from_poly(a[0]));
    return r;
}

inline MultiVectorU F0(const NegCyclicChain& a) {
    MultiVectorU r(a.dim());
    for (const auto& [u, chain] : a.parts())
        for (const auto& [t, c] : chain.terms()) r += (F0_tuple(t) * c).shifted_u(u);
    return r;
}

// F_1(gamma v^l; (a_0..a_p)) = (-1)^p u^s gamma -| H(a), s = k + l - p - 1,
// when k >= p and s >= 0, else 0.
inline MultiVectorU F1_tuple(const GammaSlot& g, const ChainTuple& a) {
    MultiVectorU r(g.stripped.dim());
    int p = (int)a.size() - 1;
    int s = g.k + g.l - p - 1;
    if (g.k < p || s < 0) return r;
    MultiVector val = contraction(g.stripped, hkr_tuple(a));
    if (p % 2) val = -val;
    r.add(s, val);
    return r;
}

inline MultiVectorU F1_chain(const MultiVector& gamma, const HochschildChain& a) {
    MultiVectorU r(gamma.dim());
    // decompose gamma by (theta-degree, v-power)
    std::set<std::pair<int, int>> grades;
    for (const auto& [key, c] : gamma.terms()) grades.insert({grassmann_degree(key.theta), key.l});
    for (auto [k, l] : grades) {
        MultiVector part = gamma.homogeneous_part(k, l);
        GammaSlot slot;
        slot.k = k;
        slot.l = l;
        slot.stripped = MultiVector(gamma.dim());
        for (const auto& [key, c] : part.terms())
            slot.stripped.add_term({0, key.theta, key.x}, c);
        for (const auto& [t, c] : a.terms()) r += F1_tuple(slot, t) * c;
    }
    return r;
}

inline MultiVectorU F1(const MultiVector& gamma, const NegCyclicChain& a) {
    MultiVectorU r(gamma.dim());
    for (const auto& [u, chain] : a.parts()) r += F1_chain(gamma, chain).shifted_u(u);
    return r;
}

// ---------------------------------------------------------------------------
// Graph engine for F_n: one representative per unordered edge set over
// labeled vertices; whites fill the remaining arity.
// ---------------------------------------------------------------------------
struct EngineGraph {
    AdmissibleGraph ag;       // targets sorted, whites appended; vdeg = l_i
    std::vector<int> whites;  // per vertex
};

inline std::vector<EngineGraph> enumerate_engine_graphs(const std::vector<int>& k,
                                                        const std::vector<int>& l, int m,
                                                        bool connected_only) {
    int n = (int)k.size();
    std::vector<Target> candidates;
    for (int j = 0; j < n; ++j) candidates.push_back({Target::Interior, j});
    for (int j = 0; j < m; ++j) candidates.push_back({Target::Boundary, j});
    std::vector<EngineGraph> out;
    std::vector<std::vector<Target>> chosen(n);
    std::function<void(int, int)> rec = [&](int i, int from) {
        if (i == n) {
            EngineGraph eg;
            eg.ag.n1 = n;
            eg.ag.m = m;
            eg.ag.vdeg = l;
            eg.ag.edges = chosen;
            eg.whites.resize(n);
            int nw = 0;
            for (int v = 0; v < n; ++v) {
                eg.whites[v] = k[v] - (int)chosen[v].size();
                for (int w = 0; w < eg.whites[v]; ++w)
                    eg.ag.edges[v].push_back({Target::White, nw++});
            }
            eg.ag.nw = nw;
            if (connected_only) {
                for (int v = 0; v < n; ++v) {
                    bool touched = !eg.ag.edges[v].empty();
                    for (int o = 0; o < n && !touched; ++o)
                        for (const auto& t : eg.ag.edges[o])
                            if (t.kind == Target::Interior && t.index == v) touched = true;
                    if (!touched) return;
                }
            }
            if (feasible_u_powers(eg.ag).empty()) return;
            out.push_back(std::move(eg));
            return;
        }
        if ((int)chosen[i].size() == k[i]) {
            rec(i + 1, 0);
            return;
        }
        // either stop adding non-white targets (pad with whites) ...
        // handled by allowing the vertex to be closed at any point:
        for (int c = from; c < (int)candidates.size(); ++c) {
            const Target& t = candidates[c];
            if (t.kind == Target::Interior && t.index == i) continue;
            chosen[i].push_back(t);
            rec(i, c + 1);
            chosen[i].pop_back();
        }
        rec(i + 1, 0); // remaining slots of vertex i become whites
        return;
    };
    rec(0, 0);
    return out;
}

// Exact weight of an n<=1 engine graph, as a u-polynomial. The only n=1
// classes with nonzero weight hit every free boundary point exactly once and
// nothing else; their raw integral is u^{r-1}/p!.
inline std::optional<std::map<int, Rational>> exact_weight(const EngineGraph& eg) {
    int n = eg.ag.n1;
    int p = eg.ag.m - 1;
    std::map<int, Rational> w;
    if (n == 0) {
        if (p == 0) w[0] = 1;
        return w;
    }
    if (n != 1) return std::nullopt;
    std::vector<bool> hit(eg.ag.m, false);
    int nonwhite = 0;
    for (const auto& t : eg.ag.edges[0]) {
        if (t.kind == Target::White) continue;
        ++nonwhite;
        if (t.kind != Target::Boundary) return std::nullopt;
        hit[t.index] = true;
    }
    bool all_free = !hit[0] && nonwhite == p;
    for (int j = 1; j <= p; ++j)
        if (!hit[j]) all_free = false;
    int r = eg.ag.vdeg[0] + eg.whites[0];
    if (!all_free || r < 1) return w; // zero
    w[r - 1] = Rational(1) / factorial(p);
    return w;
}

// Operator part of a graph applied to (gamma_1,...,gamma_n; a_0..a_p).
struct OperatorTerm {
    Rational c;
    ThetaMask theta;
    Monomial x;
    std::vector<Monomial> bnd;
};

inline std::vector<OperatorTerm> graph_operator(const EngineGraph& eg,
                                                const std::vector<GammaSlot>& word, int d) {
    int n = eg.ag.n1;
    int nb = eg.ag.m;
    int E = 0;
    for (const auto& lst : eg.ag.edges)
        for (const auto& t : lst)
            if (t.kind != Target::White) ++E;
    SuperWord sw(n, d, nb, E);
    std::vector<MultiVector> gammas;
    for (const auto& s : word) gammas.push_back(s.stripped);
    sw.init(gammas);
    int e = 0;
    for (int i = 0; i < n; ++i)
        for (const auto& t : eg.ag.edges[i]) {
            if (t.kind == Target::White) continue;
            sw.apply_edge(e, i, t.kind == Target::Interior, t.index);
            ++e;
        }
    for (int i = 0; i < n; ++i)
        if (eg.whites[i] > 0) sw.apply_whites(i, eg.whites[i]);
    std::vector<OperatorTerm> out;
    for (auto& c : sw.collapse()) out.push_back({c.c, c.theta, c.x, c.bnd});
    return out;
}

// Monte Carlo parameters for every graph-expanded evaluation.
struct McParams {
    long samples = 200000;
    std::uint64_t seed = 42;
    bool force_mc = false; // ignore the exact n<=1 weight table (agreement tests)
};

// Weight estimates are deterministic in (graph, samples, seed); memoize them
// across the many tuples of a chain. Guarded for concurrent callers.
inline WeightEstimate cached_weight_raw(const AdmissibleGraph& g, long samples,
                                        std::uint64_t seed) {
    static std::map<std::tuple<GraphClassKey, long, std::uint64_t>, WeightEstimate> cache;
    static std::mutex mu;
    auto key = std::make_tuple(canonical_key(g), samples, seed);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    WeightEstimate w = mc_weight_raw(g, samples, seed);
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(std::move(key), std::move(w)).first->second;
}

// F_n on a single tuple via the graph expansion. The overall prefactor is
// (-1)^{|gamma| p} with |gamma| = sum k_i mod 2.
inline FloatMV Fn_tuple(const std::vector<GammaSlot>& word, const ChainTuple& a,
                        const McParams& mc, bool connected_only = false) {
    int d = a.empty() ? 0 : a[0].dim();
    int n = (int)word.size();
    int p = (int)a.size() - 1;
    FloatMV out(d);
    std::vector<int> k(n), l(n);
    int ksum = 0;
    for (int i = 0; i < n; ++i) {
        k[i] = word[i].k;
        l[i] = word[i].l;
        ksum += k[i];
    }
    double sign = ((ksum % 2) * (p % 2)) % 2 ? -1.0 : 1.0;
    for (const auto& eg : enumerate_engine_graphs(k, l, p + 1, connected_only)) {
        auto ops = graph_operator(eg, word, d);
        if (ops.empty()) continue;
        auto wexact = mc.force_mc ? std::nullopt : exact_weight(eg);
        // weight as (u-power -> mean, stderr)
        std::map<int, std::pair<double, double>> weight;
        if (wexact) {
            for (const auto& [u, c] : *wexact) weight[u] = {double(c), 0.0};
        } else {
            WeightEstimate west = cached_weight_raw(eg.ag, mc.samples, mc.seed);
            for (const auto& c : west.coefficients) weight[c.u_power] = {c.mean, c.stderr_};
        }
        if (weight.empty()) continue;
        for (const auto& t : ops) {
            // apply boundary derivatives to the tuple entries
            PolyFunction coeff = PolyFunction::monomial(d, t.x, t.c);
            for (int j = 0; j <= p && !coeff.is_zero(); ++j)
                coeff = coeff * a[j].partial_multi(t.bnd[j]);
            if (coeff.is_zero()) continue;
            MultiVector mv(d);
            for (const auto& [xm, cc] : coeff.terms()) mv.add_term({0, t.theta, xm}, cc);
            for (const auto& [u, w] : weight) out.accumulate(u, mv, w.first, w.second, sign);
        }
    }
    return out;
}

inline FloatMV Fn(const std::vector<MultiVector>& word, const NegCyclicChain& a,
                  const McParams& mc, bool connected_only = false) {
    std::vector<GammaSlot> slots;
    for (const auto& g : word) slots.push_back(make_slot(g));
    FloatMV out(a.dim());
    for (const auto& [u, chain] : a.parts())
        for (const auto& [t, c] : chain.terms()) {
            FloatMV f = Fn_tuple(slots, t, mc, connected_only);
            for (const auto& [key, v] : f.vals) {
                FloatMV::Key kk = key;
                kk.upow += u;
                double cd = double(c);
                out.add(kk, cd * v.mean, cd * cd * v.var);
            }
        }
    return out;
}

// Exact F_n for n <= 1 via the same graphs and the exact weight table.
inline MultiVectorU Fn_exact_tuple(const std::vector<GammaSlot>& word, const ChainTuple& a) {
    int d = a.empty() ? 0 : a[0].dim();
    int n = (int)word.size();
    if (n > 1) throw std::invalid_argument("Fn_exact_tuple: n <= 1 only");
    int p = (int)a.size() - 1;
    MultiVectorU out(d);
    std::vector<int> k(n), l(n);
    int ksum = 0;
    for (int i = 0; i < n; ++i) {
        k[i] = word[i].k;
        l[i] = word[i].l;
        ksum += k[i];
    }
    Rational sign = ((ksum % 2) * (p % 2)) % 2 ? -1 : 1;
    for (const auto& eg : enumerate_engine_graphs(k, l, p + 1, false)) {
        auto wexact = exact_weight(eg);
        if (!wexact || wexact->empty()) continue;
        auto ops = graph_operator(eg, word, d);
        for (const auto& t : ops) {
            PolyFunction coeff = PolyFunction::monomial(d, t.x, t.c * sign);
            for (int j = 0; j <= p && !coeff.is_zero(); ++j)
                coeff = coeff * a[j].partial_multi(t.bnd[j]);
            if (coeff.is_zero()) continue;
            MultiVector mv(d);
            for (const auto& [xm, cc] : coeff.terms()) mv.add_term({0, t.theta, xm}, cc);
            for (const auto& [u, c] : *wexact) out.add(u, mv * c);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kontsevich components U_1, U_2.
// ---------------------------------------------------------------------------
inline MultiDiffOp U1(const MultiVector& gamma, int arity_hint = -1) {
    return hkr_cochain(gamma, arity_hint);
}

// A sum of operators with independent scalar weights carrying errors.
struct WeightedOpSum {
    struct Part {
        double w;
        double stderr_;
        MultiDiffOp op;
    };
    int dim = 0;
    int arity = 0;
    std::vector<Part> parts;
};

// U_2 over half-plane graphs, m = k1 + k2 - 2 boundary points. The global
// orientation sign of the n = 2 weights is fixed by the epsilon^2
// associativity of the star product.
inline constexpr double kU2OrientationSign = 1.0;

inline WeightedOpSum U2(const MultiVector& g1, const MultiVector& g2, const McParams& mc) {
    GammaSlot s1, s2;
    int d = g1.dim();
    WeightedOpSum out;
    out.dim = d;
    if (g1.is_zero() || g2.is_zero()) return out;
    s1 = make_slot(g1);
    s2 = make_slot(g2);
    if (s1.l != 0 || s2.l != 0) throw std::invalid_argument("U2: arguments must have no v-power");
    int m = s1.k + s2.k - 2;
    out.arity = m;
    if (m < 0) return out;
    for (const auto& hg : enumerate_halfplane_graphs({s1.k, s2.k}, m)) {
        DiskIntegralResult w = kontsevich_weight_n2(hg, mc.samples, mc.seed);
        if (w.mean == 0.0 && w.stderr_ == 0.0) continue;
        // operator part through the same superword machinery (no whites)
        EngineGraph eg;
        eg.ag.n1 = 2;
        eg.ag.m = m;
        eg.ag.nw = 0;
        eg.ag.vdeg = {0, 0};
        eg.ag.edges = hg.edges;
        eg.whites = {0, 0};
        auto ops = graph_operator(eg, {s1, s2}, d);
        MultiDiffOp op(d, m);
        bool any = false;
        for (const auto& t : ops) {
            if (t.theta != 0) throw std::logic_error("U2: unconsumed theta");
            op.add_term(t.bnd, PolyFunction::monomial(d, t.x, t.c));
            any = true;
        }
        if (!any) continue;
        out.parts.push_back({kU2OrientationSign * w.mean, w.stderr_, op});
    }
    return out;
}

// ---------------------------------------------------------------------------
// The quadratic L-infinity module relation.
// ---------------------------------------------------------------------------

// n = 1, all terms in closed form; the residual is exactly zero when the
// conventions cohere.
inline MultiVectorU module_relation_residual_n1(const MultiVector& gamma,
                                                const NegCyclicChain& a) {
    GammaSlot slot = make_slot(gamma);
    int d = gamma.dim();
    MultiVectorU res(d);
    // F1(delta gamma; a)
    res += F1(delta_omega(gamma), a);
    // (-1)^{|gamma|+p} F1(gamma; (b+uB) a), per homogeneous tuple degree
    for (const auto& [u, chain] : a.parts())
        for (const auto& [t, c] : chain.terms()) {
            int p = (int)t.size() - 1;
            Rational sgn = ((slot.k + p) % 2) ? -1 : 1;
            HochschildChain one(d);
            one.add_tuple(t, c);
            res += (F1_chain(gamma, hoch_b(one)) * sgn).shifted_u(u);
            res += (F1_chain(gamma, connes_B(one)) * sgn).shifted_u(u + 1);
        }
    // (-1)^{|gamma|-1} F0(U1(gamma-bar) . a)
    MultiVector gbar = gamma.v_truncation();
    Rational sgn0 = ((slot.k + 1) % 2) ? -1 : 1;
    if (!gbar.is_zero()) {
        MultiDiffOp u1 = U1(gbar);
        res += F0(cochain_action(u1, a)) * sgn0;
    }
    // - div F1(gamma; a)
    res = res - divergence(F1(gamma, a));
    return res;
}

// n = 2, Monte Carlo valued.
inline FloatMV module_relation_residual_n2(const MultiVector& g1, const MultiVector& g2,
                                           const NegCyclicChain& a, const McParams& mc) {
    GammaSlot s1 = make_slot(g1), s2 = make_slot(g2);
    int d = g1.dim();
    int k1 = s1.k, k2 = s2.k;
    FloatMV res(d);
    auto par = [](int x) { return ((x % 2) + 2) % 2; };

    // F2(delta(gamma1 gamma2); a) with delta a derivation (shifted degrees)
    {
        MultiVector dg1 = delta_omega(g1);
        if (!dg1.is_zero()) res += Fn({dg1, g2}, a, mc);
        MultiVector dg2 = delta_omega(g2);
        if (!dg2.is_zero()) {
            FloatMV t = Fn({g1, dg2}, a, mc);
            res.axpy(par(k1) ? -1.0 : 1.0, t);
        }
    }
    // (-1)^{|gamma|+p} F2(gamma; (b+uB)a)
    for (const auto& [u, chain] : a.parts())
        for (const auto& [t, c] : chain.terms()) {
            int p = (int)t.size() - 1;
            double sgn = par(k1 + k2 + p) ? -1.0 : 1.0;
            HochschildChain one(d);
            one.add_tuple(t, Rational(1));
            NegCyclicChain bu(d);
            bu.add(u, hoch_b(one));
            bu.add(u + 1, connes_B(one));
            if (!bu.is_zero()) {
                FloatMV f = Fn({g1, g2}, bu, mc);
                res.axpy(sgn * double(c), f);
            }
        }
    // shuffle terms with U_1 and U_2; Koszul signs from shifted degrees
    {
        double pref = par(k1 + k2 + 1) ? -1.0 : 1.0; // (-1)^{|gamma|-1}
        MultiVector g1bar = g1.v_truncation(), g2bar = g2.v_truncation();
        // k = 1 shuffles: F1(g_sigma(1); U1(gbar_sigma(2)) . a)
        if (!g2bar.is_zero()) {
            MultiVectorU t = F1(g1, cochain_action(U1(g2bar), a));
            res.axpy(pref, to_float(t));
        }
        if (!g1bar.is_zero()) {
            double eps = par(k1 * k2) ? -1.0 : 1.0; // swap Koszul sign
            MultiVectorU t = F1(g2, cochain_action(U1(g1bar), a));
            res.axpy(pref * eps, to_float(t));
        }
        // k = 0: F0(U2(gbar1 gbar2) . a)
        if (!g1bar.is_zero() && !g2bar.is_zero()) {
            WeightedOpSum u2 = U2(g1bar, g2bar, mc);
            for (const auto& part : u2.parts) {
                MultiVectorU f0 = F0(cochain_action(part.op, a));
                FloatMV f = to_float(f0);
                FloatMV scaled(d);
                for (const auto& [kk, vv] : f.vals) {
                    scaled.add(kk, vv.mean * part.w * pref,
                               vv.mean * vv.mean * part.stderr_ * part.stderr_);
                }
                res += scaled;
            }
        }
    }
    // bracket term: eps_12 = 1, inner sign (-1)^{|gamma_1|-1}
    {
        MultiVector br = schouten(g1, g2);
        if (!br.is_zero()) {
            Rational sgn = par(k1 + 1) ? -1 : 1;
            res += to_float(F1(br, a) * sgn);
        }
    }
    // - div F2(gamma; a)
    {
        FloatMV f = Fn({g1, g2}, a, mc);
        res.axpy(-1.0, f.divergence_());
    }
    return res;
}

// ---------------------------------------------------------------------------
// Star product, unimodularity, trace, affine property.
// ---------------------------------------------------------------------------
struct StarSeries {
    int dim = 0;
    int order = 0;
    MultiDiffOp eps1;   // U1(pi)
    WeightedOpSum eps2; // U2(pi,pi); enters as eps^2/2!
};

struct UnimodularReport {
    bool ok = false;
    MultiVector jacobiator;     // [pi,pi]
    MultiVector divergence_gap; // div pi - [h, pi]
};

inline UnimodularReport check_unimodular(const MultiVector& pi, const MultiVector& h) {
    UnimodularReport r;
    r.jacobiator = schouten(pi, pi);
    r.divergence_gap = divergence(pi) - schouten(h, pi);
    r.ok = r.jacobiator.is_zero() && r.divergence_gap.is_zero();
    return r;
}

inline StarSeries star_product(const MultiVector& pi, int order, const McParams& mc) {
    if (order > 2) throw std::invalid_argument("star_product: order <= 2");
    MultiVector jac = schouten(pi, pi);
    if (!jac.is_zero()) throw std::invalid_argument("star_product: pi is not Poisson");
    StarSeries s;
    s.dim = pi.dim();
    s.order = order;
    if (order >= 1) s.eps1 = U1(pi);
    if (order >= 2) s.eps2 = U2(pi, pi, mc);
    return s;
}

// Coefficient of eps^1 in f*g - g*f (exact).
inline PolyFunction star_commutator_eps1(const StarSeries& s, const PolyFunction& f,
                                         const PolyFunction& g) {
    return s.eps1.apply({f, g}) - s.eps1.apply({g, f});
}

// Componentwise mean and variance of the eps^2 associativity defect
// (f*g)*h - f*(g*h).
struct PolyEstimate {
    std::map<Monomial, std::pair<double, double>, GradedLex> vals; // mean, var
    void add(const PolyFunction& p, double w, double var_w) {
        for (const auto& [m, c] : p.terms()) {
            auto& v = vals[m];
            v.first += double(c) * w;
            v.second += double(c) * double(c) * var_w;
        }
    }
    double worst_z_excess(double nsigma, double floor = 0.0) const {
        double worst = 0;
        for (const auto& [m, v] : vals) {
            double tol = std::max(nsigma * std::sqrt(v.second), floor);
            worst = std::max(worst, std::abs(v.first) - tol);
        }
        return worst;
    }
};

inline PolyEstimate star_associativity_eps2(const StarSeries& s, const PolyFunction& f,
                                            const PolyFunction& g, const PolyFunction& h) {
    PolyEstimate out;
    const MultiDiffOp& u1 = s.eps1;
    // exact part: U1(U1(f,g),h) - U1(f,U1(g,h))
    out.add(u1.apply({u1.apply({f, g}), h}) - u1.apply({f, u1.apply({g, h})}), 1.0, 0.0);
    // half of U2's insertion pattern
    for (const auto& part : s.eps2.parts) {
        PolyFunction pg = part.op.apply({f, g}) * h + part.op.apply({f * g, h}) -
                          f * part.op.apply({g, h}) - part.op.apply({f, g * h});
        out.add(pg * Rational(1, 2), part.w, part.stderr_ * part.stderr_);
    }
    return out;
}

// H_n of the trace integrand: H_n = sum_r (1/r!) F~_{n+r}((hv)^r pi^n; f),
// graphs without disconnected first-type vertices only. H_0 = f exactly.
struct TraceIntegrand {
    PolyFunction h;            // exponent of the global e^h factor
    std::vector<FloatMV> H;    // H_0..H_N
};

inline TraceIntegrand trace_integrand(const MultiVector& pi, const PolyFunction& h,
                                      const PolyFunction& f, int order, const McParams& mc) {
    UnimodularReport rep = check_unimodular(pi, MultiVector::from_poly(h));
    if (!rep.ok) throw std::invalid_argument("trace_integrand: (pi,h) is not unimodular");
    if (order > 1) throw std::invalid_argument("trace_integrand: order <= 1");
    int d = pi.dim();
    TraceIntegrand out;
    out.h = h;
    MultiVector hv = MultiVector::from_poly(h, 1); // h v
    NegCyclicChain af = NegCyclicChain::from_tuple({f});
    // H_0 = f: every (hv)^r graph with r >= 1 has only disconnected vertices.
    FloatMV H0(d);
    H0.accumulate_exact(0, MultiVector::from_poly(f));
    out.H.push_back(H0);
    if (order >= 1) {
        FloatMV H1(d);
        for (int r = 0; r <= 2; ++r) {
            std::vector<MultiVector> word;
            for (int j = 0; j < r; ++j) word.push_back(hv);
            word.push_back(pi);
            if (h.is_zero() && r > 0) continue;
            FloatMV t = Fn(word, af, mc, /*connected_only=*/true);
            double c = 1.0;
            for (int j = 2; j <= r; ++j) c /= j;
            H1.axpy(c, t);
        }
        out.H.push_back(H1);
    }
    return out;
}

// Residual F_n(g1 ... ; a) - g1 ^ F_{n-1}(...; a) for affine g1; exact at
// n = 1, Monte Carlo at n = 2.
inline bool is_affine_vector_field(const MultiVector& g) {
    for (const auto& [k, c] : g.terms()) {
        if (k.l != 0 || grassmann_degree(k.theta) != 1) return false;
        if (total_degree(k.x) > 1) return false;
    }
    return !g.is_zero();
}

inline MultiVectorU affine_residual_n1(const MultiVector& g1, const NegCyclicChain& a) {
    if (!is_affine_vector_field(g1)) throw std::invalid_argument("affine_residual: not affine");
    MultiVectorU lhs = F1(g1, a);
    MultiVectorU rhs(a.dim());
    MultiVectorU f0 = F0(a);
    for (const auto& [u, v] : f0.parts) rhs.add(u, wedge(g1, v));
    return lhs - rhs;
}

inline FloatMV affine_residual_n2(const MultiVector& g1, const MultiVector& g2,
                                  const NegCyclicChain& a, const McParams& mc) {
    if (!is_affine_vector_field(g1)) throw std::invalid_argument("affine_residual: not affine");
    FloatMV lhs = Fn({g1, g2}, a, mc);
    FloatMV rhs = to_float(F1(g2, a)).wedge_left(g1);
    lhs.axpy(-1.0, rhs);
    return lhs;
}

} // namespace diskq
