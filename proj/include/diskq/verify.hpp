#pragma once

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "diskq/assembly.hpp"
#include "diskq/json_io.hpp"
#include "diskq/version.hpp"

namespace diskq {

struct RunConfig {
    int d = 2;
    long samples = 200000;
    std::uint64_t seed = 42;
    double tol_mult = 1.0;
    int trials = 0; // 0 = per-check default
    int max_deg = 2;
    std::string suite = "all";
    std::string out_path;
};

struct CheckResult {
    std::string name;
    std::string anchor;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool escalated = false;
    json details = json::object();
    double wall_seconds = 0.0; // printed to stderr, never serialized
};

namespace checks {

// --- helpers ---------------------------------------------------------------

inline AdmissibleGraph phi_power_graph(int s) {
    // single first-type vertex, v-degree s+1, no edges, one boundary point
    AdmissibleGraph g;
    g.n1 = 1;
    g.m = 1;
    g.nw = 0;
    g.vdeg = {s + 1};
    g.edges = {{}};
    return g;
}

inline AdmissibleGraph theorem_ii_graph(int p, int s) {
    // single vertex with p edges to the free boundary points, v-degree s+1
    AdmissibleGraph g;
    g.n1 = 1;
    g.m = p + 1;
    g.nw = 0;
    g.vdeg = {s + 1};
    g.edges = {{}};
    for (int j = 1; j <= p; ++j) g.edges[0].push_back({Target::Boundary, j});
    return g;
}

// --- criterion 1: exact weight family --------------------------------------
inline CheckResult exact_weight_family(const RunConfig& cfg) {
    CheckResult r;
    r.name = "01-exact-weight-family";
    r.anchor = "integral of the zero-mode power phi^{s+1} over the disk equals u^s";
    r.tolerance = 2e-2 * cfg.tol_mult;
    double worst = 0.0;
    bool pass = true;
    json det = json::array();
    for (int s = 0; s <= 3; ++s) {
        WeightEstimate w = mc_weight(phi_power_graph(s), cfg.samples, cfg.seed);
        double mean = w.mean(s), se = w.stderr_of(s);
        double err = std::abs(mean - 1.0);
        worst = std::max(worst, err);
        bool ok = err <= r.tolerance && err <= 3.0 * se * cfg.tol_mult + 1e-12;
        pass = pass && ok;
        det.push_back({{"s", s}, {"mean", mean}, {"stderr", se}, {"ok", ok}});
    }
    r.residual = worst;
    r.pass = pass;
    r.details = det;
    return r;
}

// --- criterion 2: u^s/p! family --------------------------------------------
inline CheckResult theorem_ii_weights(const RunConfig& cfg) {
    CheckResult r;
    r.name = "02-theorem-ii-weights";
    r.anchor = "raw configuration integral of phi^{s+1} omega(z,t_1)..omega(z,t_p) equals u^s/p!";
    r.tolerance = 2e-2 * cfg.tol_mult;
    double worst = 0.0;
    bool pass = true;
    json det = json::array();
    const std::pair<int, int> cases[] = {{1, 0}, {1, 1}, {2, 0}};
    for (auto [p, s] : cases) {
        WeightEstimate w = mc_weight_raw(theorem_ii_graph(p, s), cfg.samples, cfg.seed);
        double target = 1.0;
        for (int i = 2; i <= p; ++i) target /= i;
        double mean = w.mean(s), se = w.stderr_of(s);
        double err = std::abs(mean - target);
        worst = std::max(worst, err);
        bool ok = err <= r.tolerance && err <= 3.0 * se * cfg.tol_mult + 1e-12;
        pass = pass && ok;
        det.push_back(
            {{"p", p}, {"s", s}, {"mean", mean}, {"stderr", se}, {"target", target}, {"ok", ok}});
    }
    r.residual = worst;
    r.pass = pass;
    r.details = det;
    return r;
}

// --- criterion 3: vanishing lemmas ------------------------------------------
inline CheckResult vanishing_lemmas(const RunConfig& cfg) {
    CheckResult r;
    r.name = "03-vanishing-lemmas";
    r.anchor = "bulk integrals of omega(z,w)phi(w,u) and omega(z,w)omega(w,z') vanish";
    r.tolerance = 1e-2 * cfg.tol_mult;
    bool pass = true;
    double worst = 0.0;
    json det = json::array();
    Stream pts(derive_seed(cfg.seed, 0xbadcafeULL));
    for (int trial = 0; trial < 5; ++trial) {
        Complex z(pts.uniform(-0.6, 0.6), pts.uniform(-0.6, 0.6));
        Complex zp(pts.uniform(-0.6, 0.6), pts.uniform(-0.6, 0.6));
        // (ii): dz-components of int_w omega(z,w) phi(w,u), u^0 part
        for (int comp = 0; comp < 2; ++comp) {
            auto f = [&, comp](const std::vector<Complex>& w) {
                PropagatorComps pc = propagator_disk(z, w[0]);
                double c = comp == 0 ? pc.dxz : pc.dyz;
                return c * zero_mode_area_density;
            };
            DiskIntegralResult est =
                mc_disk_integral(f, 1, cfg.samples, cfg.seed, 101 + 2 * trial + comp);
            double tol = std::max(3.0 * est.stderr_, r.tolerance);
            bool ok = std::abs(est.mean) <= tol;
            pass = pass && ok;
            worst = std::max(worst, std::abs(est.mean));
            det.push_back({{"lemma", "omega-phi"}, {"comp", comp}, {"mean", est.mean},
                           {"stderr", est.stderr_}, {"ok", ok}});
        }
        // (i): scalar part of int_w omega(z,w) omega(w,z')
        auto g = [&](const std::vector<Complex>& w) {
            PropagatorComps p1 = propagator_disk(z, w[0]);
            PropagatorComps p2 = propagator_disk(w[0], zp);
            return p1.dxw * p2.dyz - p1.dyw * p2.dxz;
        };
        DiskIntegralResult est = mc_disk_integral(g, 1, cfg.samples, cfg.seed, 301 + trial);
        double tol = std::max(3.0 * est.stderr_, r.tolerance);
        bool ok = std::abs(est.mean) <= tol;
        pass = pass && ok;
        worst = std::max(worst, std::abs(est.mean));
        det.push_back({{"lemma", "omega-omega"}, {"mean", est.mean}, {"stderr", est.stderr_},
                       {"ok", ok}});
    }
    r.residual = worst;
    r.pass = pass;
    r.details = det;
    return r;
}

// --- criterion 4: exact algebra suite ----------------------------------------
inline CheckResult exact_algebra(const RunConfig& cfg) {
    CheckResult r;
    r.name = "04-exact-algebra";
    r.anchor = "chain/cochain differentials, bracket calculus and HKR identities, exact";
    int failures = 0;
    json det = json::object();
    std::mt19937_64 rng(derive_seed(cfg.seed, 4));

    // b^2 = B^2 = bB + Bb = 0 on 100 random chains, p <= 4
    {
        int bad = 0;
        for (int t = 0; t < 100; ++t) {
            int d = 2 + (int)(rng() % 2);
            int p = (int)(rng() % 5);
            HochschildChain a = random_chain(rng, d, p);
            if (!hoch_b(hoch_b(a)).is_zero()) ++bad;
            if (!connes_B(connes_B(a)).is_zero()) ++bad;
            if (!(hoch_b(connes_B(a)) + connes_B(hoch_b(a))).is_zero()) ++bad;
            NegCyclicChain nc = NegCyclicChain::from_chain(a, (int)(rng() % 2));
            if (!b_plus_uB(b_plus_uB(nc)).is_zero()) ++bad;
        }
        det["differentials_square_zero_failures"] = bad;
        failures += bad;
    }
    // Schouten antisymmetry and Jacobi, 100 triples
    {
        int bad = 0;
        for (int t = 0; t < 100; ++t) {
            int d = 2 + (int)(rng() % 2);
            auto rnd = [&](int) {
                int k = (int)(rng() % std::min(4, d + 1));
                int l = (int)(rng() % 2);
                return random_multivector(rng, d, k, l, 2, 2);
            };
            MultiVector A = rnd(0), B = rnd(1), C = rnd(2);
            int ka, la, kb, lb, kc, lc;
            if (!A.homogeneous(ka, la) || !B.homogeneous(kb, lb) || !C.homogeneous(kc, lc))
                continue;
            int da = ka - 1 + 2 * la, db = kb - 1 + 2 * lb;
            // antisymmetry: [A,B] = -(-1)^{da db} [B,A]
            MultiVector want = schouten(B, A) * Rational(((da * db) % 2 + 2) % 2 ? 1 : -1);
            if (schouten(A, B) != want) ++bad;
            // Jacobi: [A,[B,C]] = [[A,B],C] + (-1)^{da db} [B,[A,C]]
            MultiVector j1 = schouten(A, schouten(B, C));
            MultiVector j2 = schouten(schouten(A, B), C);
            MultiVector j3 = schouten(B, schouten(A, C)) *
                             Rational(((da * db) % 2 + 2) % 2 ? -1 : 1);
            if (j1 != j2 + j3) ++bad;
            (void)kc;
            (void)lc;
        }
        det["schouten_failures"] = bad;
        failures += bad;
    }
    // divergence: square zero, derivation of the bracket, de Rham oracle
    {
        int bad = 0;
        for (int t = 0; t < 100; ++t) {
            int d = 2 + (int)(rng() % 2);
            int ka = (int)(rng() % (d + 1)), kb = (int)(rng() % (d + 1));
            MultiVector A = random_multivector(rng, d, ka, 0, 2, 2);
            MultiVector B = random_multivector(rng, d, kb, 0, 2, 2);
            if (!divergence(divergence(A)).is_zero()) ++bad;
            if (!delta_omega(delta_omega(A)).is_zero()) ++bad;
            // div[A,B] = [div A, B] + (-1)^{ka-1} [A, div B]
            MultiVector lhs = divergence(schouten(A, B));
            MultiVector rhs = schouten(divergence(A), B) +
                              schouten(A, divergence(B)) * Rational(((ka - 1) % 2 + 2) % 2 ? -1 : 1);
            if (lhs != rhs) ++bad;
            // oracle: div = phi_Omega^{-1} o d o phi_Omega
            MultiVector viaforms = volume_contract_inverse(de_rham(volume_contract(A)));
            if (divergence(A) != viaforms) ++bad;
        }
        det["divergence_failures"] = bad;
        failures += bad;
    }
    // HKR chain map: H(b(a)) = 0
    {
        int bad = 0;
        for (int t = 0; t < 60; ++t) {
            int d = 2 + (int)(rng() % 2);
            int p = 1 + (int)(rng() % 3);
            HochschildChain a = random_chain(rng, d, p);
            if (!hkr_chain(hoch_b(a)).is_zero()) ++bad;
        }
        det["hkr_chain_map_failures"] = bad;
        failures += bad;
    }
    // Gerstenhaber: [mu,mu] = 0, d^2 = 0, graded Jacobi on small arities
    {
        int bad = 0;
        int d = 2;
        MultiDiffOp mu = MultiDiffOp::multiplication(d);
        if (!gerstenhaber_bracket(mu, mu).is_zero()) ++bad;
        for (int t = 0; t < 8; ++t) {
            MultiVector A = random_multivector(rng, d, 1 + (int)(rng() % 2), 0, 1, 2);
            MultiDiffOp phi = hkr_cochain(A);
            if (!hochschild_cochain_diff(hochschild_cochain_diff(phi)).is_zero()) ++bad;
            MultiVector B = random_multivector(rng, d, 1, 0, 1, 2);
            MultiVector C = random_multivector(rng, d, 2, 0, 1, 2);
            MultiDiffOp psi = hkr_cochain(B), chi = hkr_cochain(C);
            int dp = phi.degree(), dq = psi.degree();
            MultiDiffOp j1 = gerstenhaber_bracket(phi, gerstenhaber_bracket(psi, chi));
            MultiDiffOp j2 = gerstenhaber_bracket(gerstenhaber_bracket(phi, psi), chi);
            MultiDiffOp j3 = gerstenhaber_bracket(psi, gerstenhaber_bracket(phi, chi)) *
                             Rational(((dp * dq) % 2 + 2) % 2 ? -1 : 1);
            if (!(j1 - j2 - j3).is_zero()) ++bad;
        }
        det["gerstenhaber_failures"] = bad;
        failures += bad;
    }
    // action of the multiplication cochain equals b
    {
        int bad = 0;
        for (int t = 0; t < 60; ++t) {
            int d = 2 + (int)(rng() % 2);
            int p = (int)(rng() % 5);
            HochschildChain a = random_chain(rng, d, p);
            if (cochain_action(MultiDiffOp::multiplication(d), a) != hoch_b(a)) ++bad;
        }
        det["mu_action_vs_b_failures"] = bad;
        failures += bad;
    }
    r.residual = failures;
    r.tolerance = 0;
    r.pass = failures == 0;
    r.details = det;
    return r;
}

// --- criterion 5: F1 closed form vs graph sum -------------------------------
inline CheckResult f1_grid(const RunConfig& cfg) {
    CheckResult r;
    r.name = "05-f1-closed-form";
    r.anchor = "first Taylor component equals (-1)^p u^s gamma -| H(a) on the (k,l,p) grid";
    r.tolerance = 2e-2 * cfg.tol_mult;
    std::mt19937_64 rng(derive_seed(cfg.seed, 5));
    int d = 2;
    bool pass = true;
    double worst = 0.0;
    int exact_failures = 0;
    json det = json::array();
    for (int k = 0; k <= 2; ++k)
        for (int l = 0; l <= 2; ++l)
            for (int p = 0; p <= 2; ++p) {
                MultiVector gamma = random_multivector(rng, d, k, l, 1, 1);
                if (gamma.is_zero())
                    gamma = MultiVector::theta_monomial(d, (ThetaMask(1) << k) - 1, 1, l);
                ChainTuple a;
                for (int i = 0; i <= p; ++i) {
                    PolyFunction f = random_poly(rng, d, 2, 2, 2);
                    if (i >= 1 && f.without_constant().is_zero())
                        f += PolyFunction::variable(d, i % d);
                    if (i == 0 && f.is_zero()) f = PolyFunction(d, 1);
                    a.push_back(i == 0 ? f : f.without_constant());
                }
                GammaSlot slot = make_slot(gamma);
                MultiVectorU closed = F1_tuple(slot, a);
                // exact route
                MultiVectorU viagraphs = Fn_exact_tuple({slot}, a);
                bool same = (closed - viagraphs).is_zero();
                if (!same) ++exact_failures;
                // Monte Carlo route
                McParams mc{cfg.samples, cfg.seed, /*force_mc=*/true};
                FloatMV f_mc = Fn_tuple({slot}, a, mc);
                FloatMV diff = f_mc;
                for (const auto& [u, v] : closed.parts) diff.accumulate_exact(u, v, -1.0);
                double excess = diff.worst_z_excess(3.0 * cfg.tol_mult, r.tolerance);
                worst = std::max(worst, diff.max_abs_mean());
                bool okmc = excess <= 0.0;
                pass = pass && same && okmc;
                det.push_back({{"k", k}, {"l", l}, {"p", p}, {"exact_match", same},
                               {"mc_within_tolerance", okmc}});
            }
    if (exact_failures) r.residual = exact_failures;
    else r.residual = worst;
    r.pass = pass && exact_failures == 0;
    r.details = det;
    return r;
}

// --- criterion 6: module relation at n = 1 ----------------------------------
inline CheckResult module_relation_n1(const RunConfig& cfg) {
    CheckResult r;
    r.name = "06-module-relation-n1";
    r.anchor = "quadratic L-infinity module relation at n = 1, exact";
    r.tolerance = 0;
    std::mt19937_64 rng(derive_seed(cfg.seed, 6));
    int trials = cfg.trials > 0 ? cfg.trials : 20;
    int d = 2;
    int failures = 0;
    json det = json::array();
    for (int t = 0; t < trials; ++t) {
        int k = (int)(rng() % 3);
        int l = (int)(rng() % 2);
        int p = (int)(rng() % 3);
        MultiVector gamma = random_multivector(rng, d, k, l, 2, 2);
        if (gamma.is_zero()) gamma = MultiVector::theta_monomial(d, (ThetaMask(1) << k) - 1, 1, l);
        NegCyclicChain a = NegCyclicChain::from_chain(random_chain(rng, d, p), (int)(rng() % 2));
        MultiVectorU res = module_relation_residual_n1(gamma, a);
        bool ok = res.is_zero();
        if (!ok) ++failures;
        det.push_back({{"k", k}, {"l", l}, {"p", p}, {"zero", ok}});
    }
    r.residual = failures;
    r.pass = failures == 0;
    r.details = det;
    return r;
}

// --- criterion 7: module relation at n = 2, gamma-bar = 0 family -------------
inline CheckResult module_relation_n2(const RunConfig& cfg) {
    CheckResult r;
    r.name = "07-module-relation-n2";
    r.anchor = "quadratic relation at n = 2 for gamma_i = f_i v, Monte Carlo";
    r.tolerance = 0; // pure 3-sigma componentwise
    std::mt19937_64 rng(derive_seed(cfg.seed, 7));
    int trials = cfg.trials > 0 ? cfg.trials : 5;
    int d = 2;
    bool pass = true;
    double worst = 0.0;
    json det = json::array();
    for (int t = 0; t < trials; ++t) {
        MultiVector g1 = MultiVector::from_poly(random_poly(rng, d, 2, 2, 2), 1);
        MultiVector g2 = MultiVector::from_poly(random_poly(rng, d, 2, 2, 2), 1);
        if (g1.is_zero()) g1 = MultiVector::from_poly(PolyFunction(d, 1), 1);
        if (g2.is_zero()) g2 = MultiVector::from_poly(PolyFunction::variable(d, 0), 1);
        int p = (int)(rng() % 2);
        NegCyclicChain a = NegCyclicChain::from_chain(random_chain(rng, d, p));
        McParams mc{cfg.samples, cfg.seed + t, false};
        FloatMV res = module_relation_residual_n2(g1, g2, a, mc);
        double excess = res.worst_z_excess(3.0 * cfg.tol_mult);
        bool ok = excess <= 0.0;
        pass = pass && ok;
        worst = std::max(worst, res.max_abs_mean());
        det.push_back({{"p", p}, {"max_abs_residual", res.max_abs_mean()}, {"ok", ok}});
    }
    r.residual = worst;
    r.pass = pass;
    r.details = det;
    return r;
}

// --- criterion 8: star product ------------------------------------------------
inline CheckResult star_checks(const RunConfig& cfg) {
    CheckResult r;
    r.name = "08-star-product";
    r.anchor = "x1*x2 - x2*x1 = eps exactly; eps^2 associativity within 3 sigma";
    r.tolerance = 0;
    int d = 2;
    MultiVector pi = wedge(MultiVector::theta(d, 0), MultiVector::theta(d, 1));
    McParams mc{cfg.samples, cfg.seed, false};
    StarSeries s = star_product(pi, 2, mc);
    bool pass = true;
    json det = json::object();
    // exact eps^1 commutator
    PolyFunction x1 = PolyFunction::variable(d, 0), x2 = PolyFunction::variable(d, 1);
    PolyFunction comm = star_commutator_eps1(s, x1, x2);
    bool comm_ok = comm == PolyFunction(d, 1);
    det["commutator_eps1_exact"] = comm_ok;
    pass = pass && comm_ok;
    // associativity at eps^2 over monomials of degree <= 2
    std::vector<PolyFunction> mons;
    for (int e1 = 0; e1 <= 2; ++e1)
        for (int e2 = 0; e1 + e2 <= 2; ++e2) {
            if (e1 + e2 == 0) continue;
            Monomial m = {e1, e2};
            mons.push_back(PolyFunction::monomial(d, m));
        }
    double worst = 0.0;
    int checked = 0;
    for (const auto& f : mons)
        for (const auto& g : mons)
            for (const auto& h : mons) {
                PolyEstimate a = star_associativity_eps2(s, f, g, h);
                double excess = a.worst_z_excess(3.0 * cfg.tol_mult);
                if (excess > 0.0) pass = false;
                for (const auto& [m, v] : a.vals) worst = std::max(worst, std::abs(v.first));
                ++checked;
            }
    det["associativity_triples"] = checked;
    det["worst_abs_residual"] = worst;
    r.residual = worst;
    r.pass = pass;
    r.details = det;
    return r;
}

// --- criterion 9: trace -------------------------------------------------------
inline CheckResult trace_checks(const RunConfig& cfg) {
    CheckResult r;
    r.name = "09-trace";
    r.anchor = "H_0 = f for unimodular data; disconnected-vertex resummation";
    r.tolerance = 0;
    std::mt19937_64 rng(derive_seed(cfg.seed, 9));
    bool pass = true;
    json det = json::object();
    // H_0 = f exactly for 10 random unimodular (pi, h, f)
    {
        int bad = 0;
        for (int t = 0; t < 10; ++t) {
            int d = 3;
            // pi = g(x_2) theta_0 theta_1, h = h(x_2): unimodular for any g,h
            PolyFunction g(d);
            PolyFunction h(d);
            for (int j = 0; j <= 2; ++j) {
                Monomial m(d, 0);
                m[2] = j;
                g.add_term(m, (int)(rng() % 5) - 2);
                h.add_term(m, (int)(rng() % 5) - 2);
            }
            if (g.is_zero()) g = PolyFunction(d, 1);
            MultiVector pi = MultiVector::theta_monomial(d, 0b011);
            MultiVector pig(d);
            for (const auto& [m, c] : g.terms()) pig.add_term({0, 0b011, m}, c);
            PolyFunction f = random_poly(rng, d, 2, 2, 2);
            if (f.is_zero()) f = PolyFunction::variable(d, 0);
            McParams mc{cfg.samples / 4, cfg.seed + t, false};
            TraceIntegrand ti = trace_integrand(pig, h, f, 1, mc);
            FloatMV expect(d);
            expect.accumulate_exact(0, MultiVector::from_poly(f));
            FloatMV diff = ti.H[0];
            diff.axpy(-1.0, expect);
            if (diff.max_abs_mean() != 0.0) ++bad;
        }
        det["H0_failures"] = bad;
        if (bad) pass = false;
    }
    // resummation identity for (k,n) in {(1,0),(1,1),(2,0)}
    {
        int d = 3;
        PolyFunction h(d);
        Monomial m(d, 0);
        m[2] = 1;
        h.add_term(m, 1); // h = x_2
        MultiVector pi = MultiVector::theta_monomial(d, 0b011);
        PolyFunction f = PolyFunction::variable(d, 0) * PolyFunction::variable(d, 1);
        MultiVector hv = MultiVector::from_poly(h, 1);
        NegCyclicChain af = NegCyclicChain::from_tuple({f});
        McParams mc{cfg.samples, cfg.seed, false};
        json jd = json::array();
        auto run_case = [&](int kk, int nn) {
            std::vector<MultiVector> word;
            for (int i = 0; i < kk; ++i) word.push_back(hv);
            for (int i = 0; i < nn; ++i) word.push_back(pi);
            FloatMV lhs = Fn(word, af, mc);
            FloatMV rhs(d);
            for (int sft = 0; sft <= kk; ++sft) {
                std::vector<MultiVector> w2;
                for (int i = 0; i < kk - sft; ++i) w2.push_back(hv);
                for (int i = 0; i < nn; ++i) w2.push_back(pi);
                FloatMV t = w2.empty() ? to_float(F0(af)) : Fn(w2, af, mc, true);
                PolyFunction hs(d, 1);
                for (int i = 0; i < sft; ++i) hs = hs * h;
                double bin = double(binomial(kk, sft));
                FloatMV term = t.times_poly(hs);
                rhs.axpy(bin, term);
            }
            FloatMV diff = lhs;
            diff.axpy(-1.0, rhs);
            double excess = diff.worst_z_excess(3.0 * cfg.tol_mult);
            jd.push_back({{"k", kk}, {"n", nn}, {"max_abs", diff.max_abs_mean()},
                          {"ok", excess <= 0.0}});
            return excess <= 0.0;
        };
        bool ok = run_case(1, 0) && run_case(1, 1) && run_case(2, 0);
        det["resummation"] = jd;
        if (!ok) pass = false;
    }
    r.pass = pass;
    r.residual = pass ? 0.0 : 1.0;
    r.details = det;
    return r;
}

// --- criterion 10: affine property --------------------------------------------
inline CheckResult affine_checks(const RunConfig& cfg) {
    CheckResult r;
    r.name = "10-affine-property";
    r.anchor = "F_n(gamma_1 ...; a) = gamma_1 ^ F_{n-1}(...; a) for affine gamma_1";
    r.tolerance = 0;
    std::mt19937_64 rng(derive_seed(cfg.seed, 10));
    int d = 2;
    bool pass = true;
    json det = json::object();
    {
        int bad = 0;
        for (int t = 0; t < 10; ++t) {
            MultiVector g1(d);
            for (int i = 0; i < d; ++i) {
                Monomial m0(d, 0);
                g1.add_term({0, ThetaMask(1) << i, m0}, (int)(rng() % 5) - 2);
                for (int k = 0; k < d; ++k) {
                    Monomial m(d, 0);
                    m[k] = 1;
                    g1.add_term({0, ThetaMask(1) << i, m}, (int)(rng() % 3) - 1);
                }
            }
            if (g1.is_zero()) g1 = MultiVector::theta(d, 0);
            int p = (int)(rng() % 3);
            NegCyclicChain a = NegCyclicChain::from_chain(random_chain(rng, d, p));
            if (!affine_residual_n1(g1, a).is_zero()) ++bad;
        }
        det["n1_failures"] = bad;
        if (bad) pass = false;
    }
    {
        json jd = json::array();
        for (int t = 0; t < 3; ++t) {
            MultiVector g1 = MultiVector::theta(d, t % d);
            MultiVector g2 = MultiVector::from_poly(random_poly(rng, d, 2, 2, 2), 1);
            if (g2.is_zero()) g2 = MultiVector::from_poly(PolyFunction(d, 1), 1);
            NegCyclicChain a = NegCyclicChain::from_tuple({random_poly(rng, d, 2, 2, 2)});
            McParams mc{cfg.samples, cfg.seed + 100 + t, false};
            FloatMV res = affine_residual_n2(g1, g2, a, mc);
            double excess = res.worst_z_excess(3.0 * cfg.tol_mult);
            jd.push_back({{"max_abs", res.max_abs_mean()}, {"ok", excess <= 0.0}});
            if (excess > 0.0) pass = false;
        }
        det["n2"] = jd;
    }
    r.pass = pass;
    r.residual = pass ? 0.0 : 1.0;
    r.details = det;
    return r;
}

} // namespace checks

// ---------------------------------------------------------------------------
// Report assembly.
// ---------------------------------------------------------------------------
inline json build_report(const RunConfig& cfg, const std::vector<CheckResult>& results) {
    json checks = json::array();
    bool all = true;
    for (const auto& c : results) {
        checks.push_back({{"name", c.name},
                          {"anchor", c.anchor},
                          {"residual", c.residual},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass},
                          {"escalated", c.escalated},
                          {"details", c.details}});
        all = all && c.pass;
    }
    return {{"schema_version", "1"},
            {"tool_version", kVersion},
            {"rng", kRngName},
            {"config",
             {{"d", cfg.d},
              {"samples", cfg.samples},
              {"seed", cfg.seed},
              {"tol_mult", cfg.tol_mult},
              {"trials", cfg.trials},
              {"max_deg", cfg.max_deg},
              {"suite", cfg.suite}}},
            {"checks", checks},
            {"all_pass", all}};
}

// criterion 11 needs the full report path to be reproducible; the check
// regenerates a nested report (without itself) twice and compares bytes.
inline CheckResult determinism_check(const RunConfig& cfg,
                                     const std::function<std::string()>& regenerate) {
    CheckResult r;
    r.name = "11-determinism";
    r.anchor = "identical configuration yields byte-identical reports";
    std::string a = regenerate();
    std::string b = regenerate();
    r.pass = (a == b);
    r.residual = r.pass ? 0.0 : 1.0;
    r.details = {{"bytes", a.size()}};
    return r;
}

inline std::vector<std::string> suite_check_names(const std::string& suite) {
    if (suite == "algebra") return {"04"};
    if (suite == "weights") return {"01", "02", "03", "05"};
    if (suite == "miranda1") return {"06"};
    if (suite == "miranda2") return {"07"};
    if (suite == "star") return {"08"};
    if (suite == "trace") return {"09"};
    if (suite == "affine") return {"10"};
    if (suite == "all") return {"01", "02", "03", "04", "05", "06", "07", "08", "09", "10", "11"};
    throw std::invalid_argument("unknown suite: " + suite);
}

inline std::vector<CheckResult> run_suite(const RunConfig& cfg) {
    using Fn = std::function<CheckResult(const RunConfig&)>;
    std::map<std::string, Fn> registry = {
        {"01", checks::exact_weight_family}, {"02", checks::theorem_ii_weights},
        {"03", checks::vanishing_lemmas},    {"04", checks::exact_algebra},
        {"05", checks::f1_grid},             {"06", checks::module_relation_n1},
        {"07", checks::module_relation_n2},  {"08", checks::star_checks},
        {"09", checks::trace_checks},        {"10", checks::affine_checks},
    };
    std::vector<CheckResult> out;
    for (const auto& id : suite_check_names(cfg.suite)) {
        if (id == "11") {
            RunConfig sub = cfg;
            sub.suite = "weights"; // cheap deterministic subset regenerated twice
            sub.samples = std::min(cfg.samples, 20000L);
            auto regen = [&sub, &registry]() {
                std::vector<CheckResult> rs;
                for (const auto& sid : suite_check_names(sub.suite))
                    rs.push_back(registry.at(sid)(sub));
                return build_report(sub, rs).dump(2);
            };
            out.push_back(determinism_check(cfg, regen));
            continue;
        }
        auto t0 = std::chrono::steady_clock::now();
        CheckResult c = registry.at(id)(cfg);
        // escalation: a Monte Carlo check that fails its tolerance is retried
        // once with a tenfold budget before being reported as failed
        bool mc_backed = (id != "04" && id != "06");
        if (!c.pass && mc_backed) {
            RunConfig big = cfg;
            big.samples = cfg.samples * 10;
            c = registry.at(id)(big);
            c.escalated = true;
        }
        auto t1 = std::chrono::steady_clock::now();
        c.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace diskq
