#pragma once

#include <json.hpp>

#include "diskq/assembly.hpp"
#include "diskq/diff_form.hpp"
#include "diskq/graph.hpp"
#include "diskq/hochschild.hpp"
#include "diskq/mc.hpp"
#include "diskq/multidiffop.hpp"
#include "diskq/multivector.hpp"
#include "diskq/poly.hpp"

// Canonical JSON encodings used by the CLI and the golden files. Rationals
// are "num/den" strings; index sets are sorted 0-based arrays; term arrays
// follow the canonical term order of each type, so serialization is
// deterministic.
namespace diskq {

using nlohmann::json;

inline json to_json(const Rational& r) { return rational_to_string(r); }

inline std::vector<int> mask_to_indices(ThetaMask m) {
    std::vector<int> out;
    while (m) {
        int nu = std::countr_zero(m);
        out.push_back(nu);
        m ^= ThetaMask(1) << nu;
    }
    return out;
}

inline ThetaMask indices_to_mask(const std::vector<int>& idx) {
    ThetaMask m = 0;
    for (int i : idx) m |= ThetaMask(1) << i;
    return m;
}

inline json to_json(const PolyFunction& p) {
    json terms = json::array();
    for (const auto& [m, c] : p.terms())
        terms.push_back({{"exp", m}, {"c", rational_to_string(c)}});
    return {{"d", p.dim()}, {"terms", terms}};
}

inline PolyFunction poly_from_json(const json& j) {
    PolyFunction p(j.at("d").get<int>());
    for (const auto& t : j.at("terms"))
        p.add_term(t.at("exp").get<Monomial>(), rational_from_string(t.at("c").get<std::string>()));
    return p;
}

inline json to_json(const MultiVector& g) {
    json terms = json::array();
    for (const auto& [k, c] : g.terms())
        terms.push_back({{"l", k.l},
                         {"theta", mask_to_indices(k.theta)},
                         {"exp", k.x},
                         {"c", rational_to_string(c)}});
    return {{"d", g.dim()}, {"terms", terms}};
}

inline MultiVector multivector_from_json(const json& j) {
    MultiVector g(j.at("d").get<int>());
    for (const auto& t : j.at("terms"))
        g.add_term({t.at("l").get<int>(), indices_to_mask(t.at("theta").get<std::vector<int>>()),
                    t.at("exp").get<Monomial>()},
                   rational_from_string(t.at("c").get<std::string>()));
    return g;
}

inline json to_json(const DiffForm& w) {
    json terms = json::array();
    for (const auto& [k, c] : w.terms())
        terms.push_back(
            {{"dx", mask_to_indices(k.dx)}, {"exp", k.x}, {"c", rational_to_string(c)}});
    return {{"d", w.dim()}, {"terms", terms}};
}

inline DiffForm form_from_json(const json& j) {
    DiffForm w(j.at("d").get<int>());
    for (const auto& t : j.at("terms"))
        w.add_term({indices_to_mask(t.at("dx").get<std::vector<int>>()), t.at("exp").get<Monomial>()},
                   rational_from_string(t.at("c").get<std::string>()));
    return w;
}

inline json to_json(const HochschildChain& a) {
    json terms = json::array();
    for (const auto& [t, c] : a.terms()) {
        json entries = json::array();
        for (const auto& e : t) entries.push_back(to_json(e));
        terms.push_back({{"entries", entries}, {"c", rational_to_string(c)}});
    }
    return {{"d", a.dim()}, {"terms", terms}};
}

inline HochschildChain chain_from_json(const json& j) {
    HochschildChain a(j.at("d").get<int>());
    for (const auto& t : j.at("terms")) {
        ChainTuple tup;
        for (const auto& e : t.at("entries")) tup.push_back(poly_from_json(e));
        a.add_tuple(std::move(tup), rational_from_string(t.at("c").get<std::string>()));
    }
    return a;
}

inline json to_json(const NegCyclicChain& a) {
    json parts = json::array();
    for (const auto& [u, c] : a.parts()) parts.push_back({{"u_power", u}, {"chain", to_json(c)}});
    return {{"d", a.dim()}, {"parts", parts}};
}

inline NegCyclicChain negcyclic_from_json(const json& j) {
    NegCyclicChain a(j.at("d").get<int>());
    for (const auto& p : j.at("parts"))
        a.add(p.at("u_power").get<int>(), chain_from_json(p.at("chain")));
    return a;
}

inline json to_json(const MultiDiffOp& op) {
    json terms = json::array();
    for (const auto& [o, c] : op.terms()) terms.push_back({{"orders", o}, {"coeff", to_json(c)}});
    return {{"d", op.dim()}, {"arity", op.arity()}, {"terms", terms}};
}

inline json to_json(const AdmissibleGraph& g) {
    json edges = json::array();
    for (const auto& lst : g.edges) {
        json l = json::array();
        for (const auto& t : lst) l.push_back(t.str());
        edges.push_back(l);
    }
    return {{"n1", g.n1},     {"m", g.m},          {"nw", g.nw},
            {"k", g.out_degrees()}, {"deg", g.vdeg}, {"edges", edges}};
}

inline AdmissibleGraph graph_from_json(const json& j) {
    AdmissibleGraph g;
    g.n1 = j.at("n1").get<int>();
    g.m = j.at("m").get<int>();
    g.nw = j.at("nw").get<int>();
    g.vdeg = j.at("deg").get<std::vector<int>>();
    for (const auto& lst : j.at("edges")) {
        std::vector<Target> l;
        for (const auto& t : lst) l.push_back(Target::parse(t.get<std::string>()));
        g.edges.push_back(std::move(l));
    }
    return g;
}

inline json to_json(const WeightEstimate& w) {
    json coeffs = json::array();
    for (const auto& c : w.coefficients)
        coeffs.push_back({{"u_power", c.u_power},
                          {"mean", c.mean},
                          {"stderr", c.stderr_},
                          {"heavy_tailed", c.heavy_tailed}});
    return {{"graph_key", w.graph_key}, {"seed", w.seed},         {"samples", w.samples},
            {"rejected", w.rejected},   {"rng", w.rng},           {"coefficients", coeffs}};
}

inline json to_json(const FloatMV& f) {
    json terms = json::array();
    for (const auto& [k, v] : f.vals)
        terms.push_back({{"u_power", k.upow},
                         {"l", k.l},
                         {"theta", mask_to_indices(k.theta)},
                         {"exp", k.x},
                         {"mean", v.mean},
                         {"stderr", std::sqrt(v.var)}});
    return {{"d", f.dim}, {"terms", terms}};
}

inline json to_json(const MultiVectorU& f) {
    json parts = json::array();
    for (const auto& [u, v] : f.parts) parts.push_back({{"u_power", u}, {"value", to_json(v)}});
    return {{"d", f.dim}, {"parts", parts}};
}

} // namespace diskq
