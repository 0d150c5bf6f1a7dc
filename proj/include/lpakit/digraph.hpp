#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lpakit {

using Mask = std::vector<char>;

// Finite directed multigraph. For tail graphs this is the prefix of copies
// 0..depth-1; vertices whose outgoing edges were cut are flagged `open`.
struct Digraph {
    struct Edge {
        int src;
        int dst;
        Mult mult;
        std::string id;
    };

    std::vector<VertexRef> refs;
    std::vector<VertexKind> kind;  // from the presentation, not the cut graph
    Mask open;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out, in;
    std::uint64_t depth = 0;
    std::map<VertexRef, int> lookup;

    int size() const { return static_cast<int>(refs.size()); }
    std::string name(int v) const { return refs[v].to_string(); }
    int index(const VertexRef& r) const {
        auto it = lookup.find(r);
        return it == lookup.end() ? -1 : it->second;
    }
    bool has_open() const { return std::find(open.begin(), open.end(), 1) != open.end(); }

    int add_vertex(const VertexRef& r, VertexKind k) {
        int id = size();
        refs.push_back(r);
        kind.push_back(k);
        open.push_back(0);
        out.emplace_back();
        in.emplace_back();
        lookup[r] = id;
        return id;
    }
    void add_edge(int s, int d, Mult m, std::string id) {
        edges.push_back({s, d, m, std::move(id)});
        out[s].push_back(static_cast<int>(edges.size()) - 1);
        in[d].push_back(static_cast<int>(edges.size()) - 1);
    }

    // Copy index of a vertex (core vertices count as 0).
    std::uint64_t copy_of(int v) const { return refs[v].copy.value_or(0); }
};

inline Digraph materialize(const Graph& g, std::uint64_t depth) {
    Digraph d;
    d.depth = depth;
    for (const auto& v : g.vertices) d.add_vertex(VertexRef::core(v), classify_vertex(g, VertexRef::core(v)));
    for (const auto& b : g.bundles) d.add_edge(d.index(VertexRef::core(b.src)), d.index(VertexRef::core(b.dst)), b.mult, b.id);
    if (depth == 0) return d;
    for (const auto& t : g.tails) {
        std::map<std::string, VertexKind> k0, k1;
        for (const auto& p : t.pattern) {
            k0[p] = classify_vertex(g, VertexRef::tail(p, 0));
            k1[p] = classify_vertex(g, VertexRef::tail(p, 1));
        }
        for (std::uint64_t n = 0; n < depth; ++n)
            for (const auto& p : t.pattern) d.add_vertex(VertexRef::tail(p, n), n == 0 ? k0[p] : k1[p]);
        auto at = [&](const std::string& p, std::uint64_t n) { return d.index(VertexRef::tail(p, n)); };
        auto core = [&](const std::string& v) { return d.index(VertexRef::core(v)); };
        for (std::uint64_t n = 0; n < depth; ++n) {
            for (const auto& l : t.intra) d.add_edge(at(l.src, n), at(l.dst, n), l.mult, t.id + ":" + l.src + ">" + l.dst);
            for (const auto& l : t.attach_out_all) d.add_edge(at(l.src, n), core(l.dst), l.mult, t.id + ":" + l.src + ">" + l.dst);
            for (const auto& l : t.inter) {
                std::string id = t.id + ":" + l.src + ">>" + l.dst;
                if (t.dir == Direction::outward) {
                    if (n + 1 < depth) d.add_edge(at(l.src, n), at(l.dst, n + 1), l.mult, id);
                    else d.open[at(l.src, n)] = 1;
                } else if (n + 1 < depth) {
                    d.add_edge(at(l.src, n + 1), at(l.dst, n), l.mult, id);
                }
            }
        }
        for (const auto& l : t.attach_in) d.add_edge(core(l.src), at(l.dst, 0), l.mult, t.id + ":" + l.src + ">" + l.dst);
        for (const auto& l : t.attach_out0) d.add_edge(at(l.src, 0), core(l.dst), l.mult, t.id + ":" + l.src + ">" + l.dst);
    }
    return d;
}

inline Mask mask_of(const Digraph& d, const VertexSet& s) {
    Mask m(d.size(), 0);
    for (int v = 0; v < d.size(); ++v) m[v] = s.contains(d.refs[v]);
    return m;
}

inline Mask forward(const Digraph& d, Mask m) {
    std::vector<int> stack;
    for (int v = 0; v < d.size(); ++v)
        if (m[v]) stack.push_back(v);
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int e : d.out[v]) {
            int w = d.edges[e].dst;
            if (!m[w]) {
                m[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return m;
}

inline Mask backward(const Digraph& d, Mask m) {
    std::vector<int> stack;
    for (int v = 0; v < d.size(); ++v)
        if (m[v]) stack.push_back(v);
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int e : d.in[v]) {
            int w = d.edges[e].src;
            if (!m[w]) {
                m[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return m;
}

// Least saturated superset. Open vertices are never added since part of
// their edges is unknown.
inline Mask saturate(const Digraph& d, Mask m) {
    std::vector<int> missing(d.size(), 0);
    std::vector<int> stack;
    const Mask start = m;
    for (int v = 0; v < d.size(); ++v) {
        if (m[v] || d.kind[v] != VertexKind::Regular || d.open[v]) continue;
        for (int e : d.out[v])
            if (!start[d.edges[e].dst]) ++missing[v];
        if (missing[v] == 0) {
            m[v] = 1;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        int w = stack.back();
        stack.pop_back();
        for (int e : d.in[w]) {
            int v = d.edges[e].src;
            if (m[v] || d.kind[v] != VertexKind::Regular || d.open[v]) continue;
            if (--missing[v] == 0) {
                m[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return m;
}

inline Mask closure(const Digraph& d, const Mask& m) { return saturate(d, forward(d, m)); }

inline Mask mask_and(Mask a, const Mask& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
    return a;
}
inline Mask mask_or(Mask a, const Mask& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] || b[i];
    return a;
}
inline Mask mask_minus(Mask a, const Mask& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && !b[i];
    return a;
}
inline bool mask_subset(const Mask& a, const Mask& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}
inline bool mask_any(const Mask& a) { return std::find(a.begin(), a.end(), 1) != a.end(); }
inline Mask single(const Digraph& d, int v) {
    Mask m(d.size(), 0);
    m[v] = 1;
    return m;
}

// Total multiplicity of edges from v into `target`.
inline Mult out_into(const Digraph& d, int v, const Mask& target) {
    Mult m = 0;
    for (int e : d.out[v])
        if (target[d.edges[e].dst]) m = mult_add(m, d.edges[e].mult);
    return m;
}

// Strongly connected components (iterative Tarjan). comp[v] is the index of
// v's component; components come out in reverse topological order.
struct SCC {
    std::vector<int> comp;
    std::vector<std::vector<int>> members;

    // Nontrivial: more than one vertex, or a loop.
    std::vector<char> cyclic;
};

inline SCC strongly_connected(const Digraph& d) {
    int n = d.size();
    SCC r;
    r.comp.assign(n, -1);
    std::vector<int> idx(n, -1), low(n, 0), stack;
    std::vector<char> on(n, 0);
    int counter = 0;
    std::vector<std::pair<int, std::size_t>> call;
    for (int s = 0; s < n; ++s) {
        if (idx[s] != -1) continue;
        call.push_back({s, 0});
        idx[s] = low[s] = counter++;
        stack.push_back(s);
        on[s] = 1;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < d.out[v].size()) {
                int w = d.edges[d.out[v][i++]].dst;
                if (idx[w] == -1) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = 1;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
                continue;
            }
            if (low[v] == idx[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = 0;
                    r.comp[w] = static_cast<int>(r.members.size());
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                r.members.push_back(comp);
            }
            int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    r.cyclic.assign(r.members.size(), 0);
    for (std::size_t c = 0; c < r.members.size(); ++c) {
        if (r.members[c].size() > 1) r.cyclic[c] = 1;
        else
            for (int e : d.out[r.members[c][0]])
                if (d.edges[e].dst == r.members[c][0]) r.cyclic[c] = 1;
    }
    return r;
}

// Unroll policy. depth 0 picks the default for the graph.
struct Unroll {
    std::uint64_t depth = 0;
    int retries = 4;
};

inline std::uint64_t default_depth(const Graph& g) {
    std::uint64_t d = 4 * std::max<std::uint64_t>(1, g.max_pattern_size()) * (g.tails.size() + 1);
    return std::max<std::uint64_t>(d, 4);
}

// Starting depth: the policy's, raised so that `horizon` (largest index an
// input set distinguishes) sits well inside the trusted window.
inline std::uint64_t start_depth(const Graph& g, const Unroll& u, std::uint64_t horizon = 0) {
    std::uint64_t d = u.depth ? u.depth : default_depth(g);
    while (d < 4 * horizon + 4) d *= 2;
    return d;
}

// Trusted window of a depth-d materialization.
inline std::uint64_t window(std::uint64_t depth) { return depth / 2; }

// Reads a VertexSet off a mask, extrapolating each pattern from the window.
inline VertexSet extract(const Graph& g, const Digraph& d, const Mask& m) {
    VertexSet s;
    for (const auto& v : g.vertices)
        if (m[d.index(VertexRef::core(v))]) s.core.insert(v);
    std::uint64_t w = window(d.depth);
    for (const auto& t : g.tails)
        for (const auto& p : t.pattern) {
            std::vector<bool> bits(w);
            for (std::uint64_t i = 0; i < w; ++i) bits[i] = m[d.index(VertexRef::tail(p, i))];
            EPSet e = EPSet::from_prefix(bits);
            if (!e.empty()) s.tail[p] = e;
        }
    return s;
}

// True when `s` agrees with mask m on the trusted window of d.
inline bool agrees(const Digraph& d, const VertexSet& s, const Mask& m, std::uint64_t upto) {
    for (int v = 0; v < d.size(); ++v) {
        if (d.copy_of(v) >= upto) continue;
        if (s.contains(d.refs[v]) != static_cast<bool>(m[v])) return false;
    }
    return true;
}

// Computes k set-valued results with `fn` on successive unrollings until the
// depth-d extrapolation agrees with the depth-2d computation.
template <class Fn>
std::vector<VertexSet> stable_sets(const Graph& g, const Unroll& u, std::uint64_t horizon, Fn fn) {
    if (!g.has_tails()) {
        Digraph d = materialize(g, 0);
        std::vector<Mask> ms = fn(d);
        std::vector<VertexSet> out;
        for (const auto& m : ms) out.push_back(extract(g, d, m));
        return out;
    }
    std::uint64_t depth = start_depth(g, u, horizon);
    for (int attempt = 0; attempt <= u.retries; ++attempt, depth *= 2) {
        Digraph d1 = materialize(g, depth);
        Digraph d2 = materialize(g, 2 * depth);
        std::vector<Mask> m1 = fn(d1), m2 = fn(d2);
        std::vector<VertexSet> out;
        bool ok = true;
        for (std::size_t i = 0; i < m1.size() && ok; ++i) {
            out.push_back(extract(g, d1, m1[i]));
            ok = agrees(d2, out.back(), m2[i], window(2 * depth));
        }
        if (ok) return out;
    }
    throw error(errc::needs_deeper_unroll, std::to_string(depth / 2));
}

template <class Fn>
VertexSet stable_set(const Graph& g, const Unroll& u, std::uint64_t horizon, Fn fn) {
    return stable_sets(g, u, horizon, [&](const Digraph& d) { return std::vector<Mask>{fn(d)}; })[0];
}

}  // namespace lpakit
