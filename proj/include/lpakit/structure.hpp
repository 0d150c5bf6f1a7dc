#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "digraph.hpp"

namespace lpakit {

// T(V): everything reachable from V.
inline VertexSet tree(const Graph& g, const VertexSet& v, const Unroll& u = {}) {
    return stable_set(g, u, v.horizon(), [&](const Digraph& d) { return forward(d, mask_of(d, v)); });
}

// R(V): everything that reaches V.
inline VertexSet root(const Graph& g, const VertexSet& v, const Unroll& u = {}) {
    return stable_set(g, u, v.horizon(), [&](const Digraph& d) { return backward(d, mask_of(d, v)); });
}

// A simple cycle. Finite cycles list their edges and vertices (base point
// first). A periodic class stands for the same pattern cycle in every copy
// n >= from of a tail.
struct Cycle {
    bool periodic = false;
    std::string tail;
    std::uint64_t from = 0;
    std::vector<VertexRef> vertices;
    std::vector<std::string> edges;
    bool infinite_family = false;  // some edge is one of an ω-bundle

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < edges.size(); ++i) s += (i ? " " : "") + edges[i];
        s += " @ ";
        for (std::size_t i = 0; i < vertices.size(); ++i) s += (i ? "," : "") + vertices[i].to_string();
        if (periodic) s += " (every copy >= " + std::to_string(from) + " of " + tail + ")";
        return s;
    }
};

// Vertex sequences of the simple cycles of a digraph (Johnson's algorithm),
// each rooted at its least vertex index.
inline std::vector<std::vector<int>> simple_vertex_cycles(const Digraph& d, const Mask& allowed) {
    int n = d.size();
    std::vector<std::set<int>> succ(n);
    for (const auto& e : d.edges)
        if (allowed[e.src] && allowed[e.dst]) succ[e.src].insert(e.dst);
    std::vector<std::vector<int>> result;
    std::vector<char> blocked(n, 0);
    std::vector<std::set<int>> bmap(n);
    std::vector<int> path;
    for (int s = 0; s < n; ++s) {
        if (!allowed[s]) continue;
        std::fill(blocked.begin(), blocked.end(), 0);
        for (auto& b : bmap) b.clear();
        // Recursive circuit search restricted to vertices >= s.
        std::function<bool(int)> circuit = [&](int v) -> bool {
            bool found = false;
            path.push_back(v);
            blocked[v] = 1;
            for (int w : succ[v]) {
                if (w < s) continue;
                if (w == s) {
                    result.push_back(path);
                    found = true;
                } else if (!blocked[w] && circuit(w)) {
                    found = true;
                }
            }
            if (found) {
                std::vector<int> work{v};
                while (!work.empty()) {
                    int x = work.back();
                    work.pop_back();
                    if (!blocked[x]) continue;
                    blocked[x] = 0;
                    for (int y : bmap[x]) work.push_back(y);
                    bmap[x].clear();
                }
            } else {
                for (int w : succ[v])
                    if (w >= s) bmap[w].insert(v);
            }
            path.pop_back();
            return found;
        };
        circuit(s);
    }
    return result;
}

// Expands a vertex cycle into edge-level cycles (one per choice of parallel
// edge at each step). ω-bundles produce one entry flagged infinite_family.
inline std::vector<Cycle> expand_cycle(const Digraph& d, const std::vector<int>& vs, std::size_t cap = 4096) {
    std::vector<std::vector<std::string>> choices;
    bool inf = false;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        int a = vs[i], b = vs[(i + 1) % vs.size()];
        std::vector<std::string> opts;
        for (int e : d.out[a]) {
            const auto& ed = d.edges[e];
            if (ed.dst != b) continue;
            if (ed.mult == omega) {
                opts.push_back(ed.id + "#*");
                inf = true;
            } else if (ed.mult == 1) {
                opts.push_back(ed.id);
            } else {
                for (Mult k = 1; k <= ed.mult; ++k) opts.push_back(ed.id + "#" + std::to_string(k));
            }
        }
        choices.push_back(opts);
    }
    std::vector<Cycle> out;
    std::vector<std::size_t> pick(vs.size(), 0);
    while (out.size() < cap) {
        Cycle c;
        for (int v : vs) c.vertices.push_back(d.refs[v]);
        for (std::size_t i = 0; i < vs.size(); ++i) c.edges.push_back(choices[i][pick[i]]);
        c.infinite_family = inf;
        out.push_back(c);
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

inline std::vector<Cycle> cycles(const Graph& g) {
    std::vector<Cycle> out;
    // Finite cycles live in the core plus copy 0: no cycle can climb into
    // higher copies and return under the one-sided attachment rule.
    Digraph d = materialize(g, g.has_tails() ? 1 : 0);
    Mask all(d.size(), 1);
    for (const auto& vs : simple_vertex_cycles(d, all)) {
        bool core = false;
        for (int v : vs) core = core || d.refs[v].is_core();
        if (!core) continue;
        for (auto& c : expand_cycle(d, vs)) out.push_back(c);
    }
    for (const auto& t : g.tails) {
        Graph pg;
        pg.vertices = t.pattern;
        for (const auto& l : t.intra) pg.bundles.push_back({t.id + ":" + l.src + ">" + l.dst, l.src, l.dst, l.mult, true});
        Digraph pd = materialize(pg, 0);
        Mask pall(pd.size(), 1);
        for (const auto& vs : simple_vertex_cycles(pd, pall))
            for (auto& c : expand_cycle(pd, vs)) {
                c.periodic = true;
                c.tail = t.id;
                for (auto& r : c.vertices) r = VertexRef::tail(r.id, 0);
                out.push_back(c);
            }
    }
    return out;
}

enum class CycleClass { NoExit, Extreme, Other };

inline const char* cycle_class_name(CycleClass c) {
    switch (c) {
        case CycleClass::NoExit: return "NoExit";
        case CycleClass::Extreme: return "Extreme";
        case CycleClass::Other: return "Other";
    }
    return "?";
}

// Class of a cycle; for a periodic class, of its instance in copy `copy`
// (defaults to the class's first copy).
inline CycleClass cycle_class(const Graph& g, const Cycle& c, std::optional<std::uint64_t> copy = std::nullopt,
                              const Unroll& u = {}) {
    std::uint64_t n = copy.value_or(c.from);
    std::vector<VertexRef> vs = c.vertices;
    if (c.periodic)
        for (auto& r : vs) r = VertexRef::tail(r.id, n);
    std::uint64_t horizon = 0;
    for (const auto& r : vs) horizon = std::max<std::uint64_t>(horizon, r.copy.value_or(0) + 1);
    Digraph d = materialize(g, g.has_tails() ? start_depth(g, u, horizon) : 0);
    Mask cm(d.size(), 0);
    for (const auto& r : vs) {
        int i = d.index(r);
        if (i < 0) throw error(errc::unknown_vertex, r.to_string());
        cm[i] = 1;
    }
    // A simple cycle leaves each of its vertices by exactly one edge, so it
    // has an exit iff some vertex emits more than one edge.
    bool exit = false;
    for (int v = 0; v < d.size(); ++v) {
        if (!cm[v]) continue;
        Mult total = 0;
        for (int e : d.out[v]) total = mult_add(total, d.edges[e].mult);
        if (total != 1 || d.open[v]) exit = true;
    }
    if (!exit) return CycleClass::NoExit;
    Mask t = forward(d, cm), r = backward(d, cm);
    return mask_subset(t, r) && !mask_any(mask_and(t, d.open)) ? CycleClass::Extreme : CycleClass::Other;
}

}  // namespace lpakit
