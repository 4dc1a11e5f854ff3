#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace diskq {

// Target of an edge: interior vertex z_i (0-based), boundary vertex t_j
// (j = 0 is the base point), or white vertex w_j.
struct Target {
    enum Kind { Interior = 0, Boundary = 1, White = 2 };
    Kind kind;
    int index;

    bool operator==(const Target& o) const { return kind == o.kind && index == o.index; }
    bool operator<(const Target& o) const {
        if (kind != o.kind) return kind < o.kind;
        return index < o.index;
    }
    std::string str() const {
        static const char* pre[] = {"z", "t", "w"};
        return pre[kind] + std::to_string(index);
    }
    static Target parse(const std::string& s) {
        if (s.empty()) throw std::invalid_argument("empty target");
        Kind k;
        switch (s[0]) {
            case 'z': k = Interior; break;
            case 't': k = Boundary; break;
            case 'w': k = White; break;
            default: throw std::invalid_argument("bad target: " + s);
        }
        return {k, std::stoi(s.substr(1))};
    }
};

// Directed graph with ordered vertex classes V1 (first type, sources), V2
// (boundary, m vertices including the base point) and white vertices, plus a
// v-degree per V1 vertex. Edges are the ordered target lists of V1 vertices.
struct AdmissibleGraph {
    int n1 = 0;
    int m = 1; // all boundary vertices, base point included
    int nw = 0;
    std::vector<int> vdeg;                  // per V1 vertex
    std::vector<std::vector<Target>> edges; // ordered targets per V1 vertex

    std::vector<int> out_degrees() const {
        std::vector<int> k(n1);
        for (int i = 0; i < n1; ++i) k[i] = (int)edges[i].size();
        return k;
    }

    // r_i = v-degree + number of white targets.
    std::vector<int> r_values() const {
        std::vector<int> r(n1);
        for (int i = 0; i < n1; ++i) {
            int w = 0;
            for (const auto& t : edges[i])
                if (t.kind == Target::White) ++w;
            r[i] = vdeg[i] + w;
        }
        return r;
    }

    int black_edge_count() const {
        int e = 0;
        for (const auto& lst : edges)
            for (const auto& t : lst)
                if (t.kind != Target::White) ++e;
        return e;
    }

    // Global ordering of edges: by source vertex, then by position in the
    // source's ordered list.
    std::vector<std::pair<int, int>> global_edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < (int)edges[i].size(); ++j) out.push_back({i, j});
        return out;
    }
};

// Rule checks; returns every violation found (empty = admissible).
inline std::vector<std::string> validate(const AdmissibleGraph& g) {
    std::vector<std::string> bad;
    if ((int)g.edges.size() != g.n1 || (int)g.vdeg.size() != g.n1)
        bad.push_back("rule 1: vertex data sizes do not match n1");
    if (g.m < 1) bad.push_back("rule 2: at least the base boundary vertex is required");
    std::map<int, int> white_in;
    std::set<std::pair<int, Target>> seen;
    for (int i = 0; i < (int)g.edges.size(); ++i) {
        for (const auto& t : g.edges[i]) {
            switch (t.kind) {
                case Target::Interior:
                    if (t.index < 0 || t.index >= g.n1)
                        bad.push_back("edge to nonexistent interior vertex");
                    else if (t.index == i)
                        bad.push_back("rule 4: self-loop at z" + std::to_string(i));
                    break;
                case Target::Boundary:
                    if (t.index < 0 || t.index >= g.m)
                        bad.push_back("edge to nonexistent boundary vertex");
                    break;
                case Target::White:
                    if (t.index < 0 || t.index >= g.nw)
                        bad.push_back("edge to nonexistent white vertex");
                    else
                        white_in[t.index] += 1;
                    break;
            }
            if (!seen.insert({i, t}).second)
                bad.push_back("rule 5: multiple edges z" + std::to_string(i) + " -> " + t.str());
        }
    }
    for (int w = 0; w < g.nw; ++w) {
        int c = white_in.count(w) ? white_in[w] : 0;
        if (c != 1)
            bad.push_back("rule 3: white vertex w" + std::to_string(w) + " has " +
                          std::to_string(c) + " incoming edges");
    }
    for (int i = 0; i < (int)g.vdeg.size(); ++i)
        if (g.vdeg[i] < 0) bad.push_back("negative v-degree at z" + std::to_string(i));
    return bad;
}

// Canonical form: whites renumbered in order of first use along the global
// edge order. Two graphs are equivalent iff their canonical keys agree; V1
// and V2 are totally ordered so only white labels carry symmetry.
inline AdmissibleGraph canonical(const AdmissibleGraph& g) {
    AdmissibleGraph out = g;
    std::map<int, int> relabel;
    int next = 0;
    for (auto& lst : out.edges)
        for (auto& t : lst)
            if (t.kind == Target::White) {
                auto it = relabel.find(t.index);
                if (it == relabel.end()) it = relabel.emplace(t.index, next++).first;
                t.index = it->second;
            }
    out.nw = next;
    return out;
}

using GraphClassKey = std::string;

inline GraphClassKey canonical_key(const AdmissibleGraph& g0) {
    auto bad = validate(g0);
    if (!bad.empty()) throw std::invalid_argument("canonical_key: invalid graph: " + bad[0]);
    AdmissibleGraph g = canonical(g0);
    std::ostringstream os;
    os << "n1=" << g.n1 << ";m=" << g.m << ";deg=";
    for (int i = 0; i < g.n1; ++i) os << (i ? "," : "") << g.vdeg[i];
    os << ";e=";
    for (int i = 0; i < g.n1; ++i) {
        if (i) os << "|";
        for (int j = 0; j < (int)g.edges[i].size(); ++j)
            os << (j ? "," : "") << g.edges[i][j].str();
    }
    return os.str();
}

inline AdmissibleGraph graph_from_key(const GraphClassKey& key) {
    AdmissibleGraph g;
    std::map<std::string, std::string> kv;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ';')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad key: " + key);
        kv[part.substr(0, eq)] = part.substr(eq + 1);
    }
    g.n1 = std::stoi(kv.at("n1"));
    g.m = std::stoi(kv.at("m"));
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> out;
        std::stringstream t(s);
        std::string item;
        while (std::getline(t, item, sep)) out.push_back(item);
        return out;
    };
    for (auto& s : split(kv.at("deg"), ',')) g.vdeg.push_back(std::stoi(s));
    g.edges.resize(g.n1);
    if (g.n1 > 0) {
        auto vparts = split(kv.at("e"), '|');
        vparts.resize(g.n1);
        int maxw = -1;
        for (int i = 0; i < g.n1; ++i)
            if (!vparts[i].empty())
                for (auto& ts : split(vparts[i], ',')) {
                    Target t = Target::parse(ts);
                    if (t.kind == Target::White) maxw = std::max(maxw, t.index);
                    g.edges[i].push_back(t);
                }
        g.nw = maxw + 1;
    }
    return g;
}

// Replace the black-to-black edge at global position e (0-based) by an edge
// to a fresh white vertex; returns the new graph and the sign (-1)^{#e} with
// #e the 1-based global edge number.
inline std::pair<AdmissibleGraph, int> edge_boundary(const AdmissibleGraph& g, int e) {
    auto ge = g.global_edges();
    if (e < 0 || e >= (int)ge.size()) throw std::invalid_argument("edge_boundary: bad edge index");
    auto [vi, pos] = ge[e];
    if (g.edges[vi][pos].kind == Target::White)
        throw std::invalid_argument("edge_boundary: edge is not black-to-black");
    AdmissibleGraph out = g;
    out.edges[vi][pos] = Target{Target::White, out.nw};
    out.nw += 1;
    int sign = ((e + 1) % 2 == 0) ? 1 : -1;
    return {canonical(out), sign};
}

// Complete duplicate-free enumeration of the classes with the given
// out-degrees, boundary count and v-degree cap. Returned sorted by key.
inline std::vector<AdmissibleGraph> enumerate_graphs(const std::vector<int>& k, int m,
                                                     int max_deg) {
    if (m < 1) throw std::invalid_argument("enumerate_graphs: m >= 1 required");
    int n1 = (int)k.size();
    std::vector<AdmissibleGraph> out;
    AdmissibleGraph g;
    g.n1 = n1;
    g.m = m;
    g.nw = 0;
    g.vdeg.assign(n1, 0);
    g.edges.assign(n1, {});

    // candidate non-white targets in canonical order
    std::vector<Target> candidates;
    for (int j = 0; j < n1; ++j) candidates.push_back({Target::Interior, j});
    for (int j = 0; j < m; ++j) candidates.push_back({Target::Boundary, j});

    std::map<GraphClassKey, AdmissibleGraph> found;

    // assign the ordered target list of vertex i, then recurse
    std::function<void(int)> vertex = [&](int i) {
        if (i == n1) {
            // v-degrees
            std::function<void(int)> degs = [&](int j) {
                if (j == n1) {
                    AdmissibleGraph c = canonical(g);
                    found.emplace(canonical_key(c), c);
                    return;
                }
                for (int dgr = 0; dgr <= max_deg; ++dgr) {
                    g.vdeg[j] = dgr;
                    degs(j + 1);
                }
                g.vdeg[j] = 0;
            };
            degs(0);
            return;
        }
        std::function<void(int)> slot = [&](int s) {
            if (s == k[i]) {
                vertex(i + 1);
                return;
            }
            for (const auto& t : candidates) {
                if (t.kind == Target::Interior && t.index == i) continue; // rule 4
                bool dup = false;
                for (int q = 0; q < s; ++q)
                    if (g.edges[i][q] == t) dup = true; // rule 5
                if (dup) continue;
                g.edges[i].push_back(t);
                slot(s + 1);
                g.edges[i].pop_back();
            }
            // fresh white vertex
            g.edges[i].push_back({Target::White, g.nw});
            g.nw += 1;
            slot(s + 1);
            g.nw -= 1;
            g.edges[i].pop_back();
        };
        slot(0);
    };
    vertex(0);

    for (auto& [key, gg] : found) out.push_back(gg);
    return out;
}

// DOT export for visual inspection.
inline std::string to_dot(const AdmissibleGraph& g) {
    std::ostringstream os;
    os << "digraph G {\n  rankdir=TB;\n";
    for (int i = 0; i < g.n1; ++i)
        os << "  z" << i << " [shape=circle,label=\"z" << i << " (deg " << g.vdeg[i] << ")\"];\n";
    for (int j = 0; j < g.m; ++j)
        os << "  t" << j << " [shape=box,label=\"t" << j << (j == 0 ? " (base)" : "") << "\"];\n";
    for (int w = 0; w < g.nw; ++w)
        os << "  w" << w << " [shape=circle,style=dashed];\n";
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < (int)g.edges[i].size(); ++j)
            os << "  z" << i << " -> " << g.edges[i][j].str() << " [label=\"" << j << "\"];\n";
    os << "}\n";
    return os.str();
}

} // namespace diskq
