#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "structure.hpp"

namespace lpakit {

inline bool is_hereditary(const Graph& g, const VertexSet& v, const Unroll& u = {}) {
    return tree(g, v, u).subset_of(v);
}

inline VertexSet saturated_closure(const Graph& g, const VertexSet& v, const Unroll& u = {}) {
    return stable_set(g, u, v.horizon(), [&](const Digraph& d) { return saturate(d, mask_of(d, v)); });
}

inline bool is_saturated(const Graph& g, const VertexSet& v, const Unroll& u = {}) {
    return saturated_closure(g, v, u) == v;
}

// Hereditary saturated closure: the saturated closure of T(V).
inline VertexSet closure(const Graph& g, const VertexSet& v, const Unroll& u = {}) {
    return stable_set(g, u, v.horizon(), [&](const Digraph& d) { return lpakit::closure(d, mask_of(d, v)); });
}

// Lowest vertex first: core ids lexicographically, then by copy and pattern.
inline bool ref_order(const VertexRef& a, const VertexRef& b) {
    if (a.is_core() != b.is_core()) return a.is_core();
    if (a.is_core()) return a.id < b.id;
    if (*a.copy != *b.copy) return *a.copy < *b.copy;
    return a.id < b.id;
}

inline std::optional<int> least_vertex(const Digraph& d, const Mask& m) {
    std::optional<int> best;
    for (int v = 0; v < d.size(); ++v)
        if (m[v] && (!best || ref_order(d.refs[v], d.refs[*best]))) best = v;
    return best;
}

struct ClosureCheck {
    enum Kind { IsClosure, FailsNoInfiniteEmitters, FailsInfinitePathAvoidsT, FailsPvInfinite } kind = IsClosure;
    std::optional<VertexRef> witness;
    // For path failures: a cycle through the witness, or a ray prefix that
    // leaves the trusted window, inside H - T(V).
    std::vector<VertexRef> path;
    bool ray = false;

    static const char* name(Kind k) {
        switch (k) {
            case IsClosure: return "IsClosure";
            case FailsNoInfiniteEmitters: return "FailsNoInfiniteEmitters";
            case FailsInfinitePathAvoidsT: return "FailsInfinitePathAvoidsT";
            case FailsPvInfinite: return "FailsPvInfinite";
        }
        return "?";
    }
};

// Decides whether H is the hereditary saturated closure of V, reporting the
// first failing condition otherwise. Requires H hereditary with
// closure(V) ⊆ H ⊆ R(T(V)).
inline ClosureCheck characterize_closure(const Graph& g, const VertexSet& v, const VertexSet& h, const Unroll& u = {}) {
    VertexSet tv = tree(g, v, u);
    VertexSet cl = closure(g, v, u);
    if (!is_hereditary(g, h, u)) throw error(errc::precondition, "H is not hereditary");
    if (!cl.subset_of(h)) throw error(errc::precondition, "H does not contain the closure of V");
    if (!h.subset_of(root(g, tv, u))) throw error(errc::precondition, "H is not contained in R(T(V))");
    ClosureCheck r;
    if (h == cl) return r;

    std::uint64_t horizon = std::max(h.horizon(), v.horizon());
    std::uint64_t depth = g.has_tails() ? start_depth(g, u, horizon) : 0;
    Digraph d = materialize(g, depth);
    std::uint64_t w = g.has_tails() ? window(depth) : 1;
    Mask rest = mask_minus(mask_of(d, h), mask_of(d, tv));
    Mask in_window(d.size(), 0);
    for (int x = 0; x < d.size(); ++x) in_window[x] = rest[x] && d.copy_of(x) < w;

    Mask emitters(d.size(), 0);
    for (int x = 0; x < d.size(); ++x) emitters[x] = in_window[x] && d.kind[x] == VertexKind::InfiniteEmitter;
    if (auto e = least_vertex(d, emitters)) {
        r.kind = ClosureCheck::FailsNoInfiniteEmitters;
        r.witness = d.refs[*e];
        return r;
    }

    // Infinite paths inside H - T(V): a cycle, or a walk to the cut frontier.
    Mask cyc(d.size(), 0);
    {
        // SCCs of the subgraph induced on rest.
        Digraph sub;
        std::vector<int> map(d.size(), -1);
        for (int x = 0; x < d.size(); ++x)
            if (rest[x]) map[x] = sub.add_vertex(d.refs[x], d.kind[x]);
        for (const auto& e : d.edges)
            if (rest[e.src] && rest[e.dst]) sub.add_edge(map[e.src], map[e.dst], e.mult, e.id);
        SCC s2 = strongly_connected(sub);
        for (int x = 0; x < d.size(); ++x)
            if (rest[x] && s2.cyclic[s2.comp[map[x]]]) cyc[x] = 1;
        if (auto c = least_vertex(d, mask_and(cyc, in_window))) {
            r.kind = ClosureCheck::FailsInfinitePathAvoidsT;
            r.witness = d.refs[*c];
            // Walk the component back to the witness.
            int start = map[*c], comp = s2.comp[start];
            std::vector<int> prev(sub.size(), -1);
            std::queue<int> q;
            q.push(start);
            int last = -1;
            while (!q.empty() && last < 0) {
                int x = q.front();
                q.pop();
                for (int e : sub.out[x]) {
                    int y = sub.edges[e].dst;
                    if (s2.comp[y] != comp) continue;
                    if (y == start) {
                        last = x;
                        break;
                    }
                    if (prev[y] == -1) {
                        prev[y] = x;
                        q.push(y);
                    }
                }
            }
            std::vector<VertexRef> p;
            for (int x = last; x != start && x >= 0; x = prev[x]) p.push_back(sub.refs[x]);
            p.push_back(sub.refs[start]);
            std::reverse(p.begin(), p.end());
            r.path = p;
            return r;
        }
        // Rays: vertices of rest that reach an open vertex inside rest.
        Mask frontier = mask_and(rest, d.open);
        Mask reach = frontier;
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& e : d.edges)
                if (rest[e.src] && reach[e.dst] && !reach[e.src]) reach[e.src] = grew = 1;
        }
        if (auto c = least_vertex(d, mask_and(reach, in_window))) {
            r.kind = ClosureCheck::FailsInfinitePathAvoidsT;
            r.witness = d.refs[*c];
            r.ray = true;
            int x = *c;
            r.path.push_back(d.refs[x]);
            for (int steps = 0; !d.open[x] && steps < d.size(); ++steps) {
                int nxt = -1;
                for (int e : d.out[x])
                    if (reach[d.edges[e].dst]) nxt = d.edges[e].dst;
                if (nxt < 0) break;
                x = nxt;
                r.path.push_back(d.refs[x]);
            }
            return r;
        }
    }
    r.kind = ClosureCheck::FailsPvInfinite;
    VertexSet diff = h - cl;
    Mask dm = mask_of(d, diff);
    if (auto c = least_vertex(d, dm)) r.witness = d.refs[*c];
    return r;
}

// B_H^G: infinite emitters outside H with finitely many, but some, edges
// into `into` - H. With into = everything this is B_H.
inline VertexSet breaking_within(const Graph& g, const VertexSet& h, const VertexSet& into, const Unroll& u = {}) {
    return stable_set(g, u, std::max(h.horizon(), into.horizon()), [&](const Digraph& d) {
        Mask hm = mask_of(d, h), target = mask_minus(mask_of(d, into), hm);
        Mask out(d.size(), 0);
        for (int v = 0; v < d.size(); ++v) {
            if (hm[v] || d.kind[v] != VertexKind::InfiniteEmitter || d.open[v]) continue;
            Mult m = out_into(d, v, target);
            out[v] = m > 0 && m != omega;
        }
        return out;
    });
}

struct BreakingReport {
    VertexSet set;
    bool infinite() const { return !set.finite(); }
};

inline BreakingReport breaking_vertices(const Graph& g, const VertexSet& h, const Unroll& u = {}) {
    return {breaking_within(g, h, VertexSet::all(g), u)};
}

inline VertexSet relative_breaking(const Graph& g, const VertexSet& h, const VertexSet& gs, const Unroll& u = {}) {
    return breaking_within(g, h, gs, u);
}

struct AdmissiblePair {
    VertexSet H;
    VertexSet S;

    bool operator==(const AdmissiblePair& o) const { return H == o.H && S == o.S; }
    std::string to_string() const { return "(" + H.to_string() + ", " + S.to_string() + ")"; }
};

inline bool is_admissible(const Graph& g, const AdmissiblePair& p, const Unroll& u = {}) {
    if (!is_hereditary(g, p.H, u) || !is_saturated(g, p.H, u)) return false;
    if (!p.S.finite()) return false;
    return p.S.subset_of(breaking_vertices(g, p.H, u).set);
}

// (H1,S1) <= (H2,S2) iff H1 ⊆ H2 and S1 ⊆ H2 ∪ S2.
inline bool pair_leq(const AdmissiblePair& a, const AdmissiblePair& b) {
    return a.H.subset_of(b.H) && a.S.subset_of(b.H | b.S);
}

struct PairLattice {
    std::vector<AdmissiblePair> pairs;
    std::vector<std::vector<char>> leq;
    std::vector<std::vector<int>> meet, join;

    int index_of(const AdmissiblePair& p) const {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i] == p) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline std::vector<std::string> sorted_core(const VertexSet& s) { return {s.core.begin(), s.core.end()}; }

// Greatest (or least) element of `cands` under leq, or -1.
inline int extreme_of(const std::vector<std::vector<char>>& leq, const std::vector<int>& cands, bool greatest) {
    for (int x : cands) {
        bool ok = true;
        for (int y : cands) ok = ok && (greatest ? leq[y][x] : leq[x][y]);
        if (ok) return x;
    }
    return -1;
}

}  // namespace detail

// All hereditary saturated subsets of a tail-free graph.
inline std::vector<VertexSet> hereditary_saturated_sets(const Graph& g) {
    if (g.has_tails()) throw error(errc::tail_unsupported, "hereditary saturated sets of a tail graph");
    Digraph d = materialize(g, 0);
    std::set<Mask> seen;
    std::vector<Mask> order;
    std::queue<Mask> q;
    Mask start = lpakit::closure(d, Mask(d.size(), 0));
    q.push(start);
    seen.insert(start);
    while (!q.empty()) {
        Mask m = q.front();
        q.pop();
        order.push_back(m);
        for (int v = 0; v < d.size(); ++v) {
            if (m[v]) continue;
            Mask n = m;
            n[v] = 1;
            n = lpakit::closure(d, n);
            if (seen.insert(n).second) q.push(n);
        }
    }
    std::vector<VertexSet> out;
    for (const auto& m : order) out.push_back(extract(g, d, m));
    return out;
}

inline PairLattice enumerate_pairs(const Graph& g) {
    if (g.has_tails()) throw error(errc::tail_unsupported, "pair lattice of a tail graph");
    PairLattice lat;
    for (const auto& h : hereditary_saturated_sets(g)) {
        std::vector<VertexRef> b = breaking_vertices(g, h).set.members();
        for (std::uint64_t mask = 0; mask < (1ull << b.size()); ++mask) {
            AdmissiblePair p{h, {}};
            for (std::size_t i = 0; i < b.size(); ++i)
                if (mask >> i & 1) p.S.insert(b[i]);
            lat.pairs.push_back(p);
        }
    }
    std::sort(lat.pairs.begin(), lat.pairs.end(), [](const AdmissiblePair& a, const AdmissiblePair& b) {
        auto ka = std::make_tuple(a.H.core.size() + a.S.core.size(), detail::sorted_core(a.H), detail::sorted_core(a.S));
        auto kb = std::make_tuple(b.H.core.size() + b.S.core.size(), detail::sorted_core(b.H), detail::sorted_core(b.S));
        return ka < kb;
    });
    std::size_t n = lat.pairs.size();
    lat.leq.assign(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) lat.leq[i][j] = pair_leq(lat.pairs[i], lat.pairs[j]);
    lat.meet.assign(n, std::vector<int>(n, -1));
    lat.join.assign(n, std::vector<int>(n, -1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            std::vector<int> lower, upper;
            for (std::size_t k = 0; k < n; ++k) {
                if (lat.leq[k][i] && lat.leq[k][j]) lower.push_back(static_cast<int>(k));
                if (lat.leq[i][k] && lat.leq[j][k]) upper.push_back(static_cast<int>(k));
            }
            int m = detail::extreme_of(lat.leq, lower, true), jn = detail::extreme_of(lat.leq, upper, false);
            if (m < 0 || jn < 0)
                throw error(errc::lattice_violation, lat.pairs[i].to_string() + " and " + lat.pairs[j].to_string());
            lat.meet[i][j] = lat.meet[j][i] = m;
            lat.join[i][j] = lat.join[j][i] = jn;
        }
    return lat;
}

// Order isomorphism between two finite posets given as leq matrices.
inline bool order_isomorphic(const std::vector<std::vector<char>>& a, const std::vector<std::vector<char>>& b) {
    std::size_t n = a.size();
    if (b.size() != n) return false;
    auto profile = [](const std::vector<std::vector<char>>& m, std::size_t i) {
        int up = 0, down = 0;
        for (std::size_t j = 0; j < m.size(); ++j) {
            up += m[i][j];
            down += m[j][i];
        }
        return std::make_pair(up, down);
    };
    std::vector<std::pair<int, int>> pa(n), pb(n);
    for (std::size_t i = 0; i < n; ++i) {
        pa[i] = profile(a, i);
        pb[i] = profile(b, i);
    }
    {
        auto sa = pa, sb = pb;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return false;
    }
    std::vector<int> to(n, -1);
    std::vector<char> used(n, 0);
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (i == n) return true;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j] || pa[i] != pb[j]) continue;
            bool ok = true;
            for (std::size_t k = 0; k < i && ok; ++k)
                ok = a[i][k] == b[j][to[k]] && a[k][i] == b[to[k]][j];
            if (!ok) continue;
            to[i] = static_cast<int>(j);
            used[j] = 1;
            if (go(i + 1)) return true;
            used[j] = 0;
        }
        return false;
    };
    return go(0);
}

// The sub-poset [lo, hi] of a lattice.
inline std::vector<std::vector<char>> interval(const PairLattice& lat, int lo, int hi) {
    std::vector<int> ids;
    for (std::size_t k = 0; k < lat.pairs.size(); ++k)
        if (lat.leq[lo][k] && lat.leq[k][hi]) ids.push_back(static_cast<int>(k));
    std::vector<std::vector<char>> m(ids.size(), std::vector<char>(ids.size(), 0));
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < ids.size(); ++j) m[i][j] = lat.leq[ids[i]][ids[j]];
    return m;
}

}  // namespace lpakit
