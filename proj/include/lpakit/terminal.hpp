#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "constructions.hpp"

namespace lpakit {

enum class TerminalKind { Sink, NoExitCycle, ExtremeCycle, TerminalPath };

inline const char* terminal_kind_name(TerminalKind k) {
    switch (k) {
        case TerminalKind::Sink: return "Sink";
        case TerminalKind::NoExitCycle: return "NoExitCycle";
        case TerminalKind::ExtremeCycle: return "ExtremeCycle";
        case TerminalKind::TerminalPath: return "TerminalPath";
    }
    return "?";
}

// Type of the talented-monoid elements a cluster of each kind generates.
enum class ElementType { Periodic, Aperiodic, Incomparable };

inline const char* element_type_name(ElementType t) {
    switch (t) {
        case ElementType::Periodic: return "Periodic";
        case ElementType::Aperiodic: return "Aperiodic";
        case ElementType::Incomparable: return "Incomparable";
    }
    return "?";
}

inline ElementType element_type_of(TerminalKind k) {
    switch (k) {
        case TerminalKind::NoExitCycle: return ElementType::Periodic;
        case TerminalKind::ExtremeCycle: return ElementType::Aperiodic;
        default: return ElementType::Incomparable;
    }
}

inline constexpr TerminalKind terminal_kinds[] = {TerminalKind::Sink, TerminalKind::NoExitCycle, TerminalKind::ExtremeCycle,
                                                  TerminalKind::TerminalPath};

// Vertices of `allowed` from which `seeds` can be reached inside `allowed`.
inline Mask backward_within(const Digraph& d, const Mask& seeds, const Mask& allowed) {
    Mask m = mask_and(seeds, allowed);
    std::vector<int> stack;
    for (int v = 0; v < d.size(); ++v)
        if (m[v]) stack.push_back(v);
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int e : d.in[v]) {
            int w = d.edges[e].src;
            if (allowed[w] && !m[w]) {
                m[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return m;
}

struct TerminalMasks {
    std::map<TerminalKind, Mask> by_kind;

    Mask all() const {
        Mask m;
        for (const auto& [k, x] : by_kind) m = m.empty() ? x : mask_or(m, x);
        return m;
    }
};

// Terminal vertices of a materialization. A vertex is on a terminal path iff
// nothing it reaches is a sink, an infinite emitter or on a cycle, and no
// infinite path from it avoids T(x) for any x it reaches. Infinite paths
// are read as walks to the cut frontier; targets x in the last quarter of
// the unrolling are skipped since their trees are truncated.
inline TerminalMasks terminal_masks(const Digraph& d) {
    int n = d.size();
    SCC s = strongly_connected(d);
    TerminalMasks t;
    for (auto k : terminal_kinds) t.by_kind[k] = Mask(n, 0);
    Mask bad(n, 0);
    for (int v = 0; v < n; ++v) {
        if (d.kind[v] == VertexKind::Sink && !d.open[v]) t.by_kind[TerminalKind::Sink][v] = 1;
        if (d.kind[v] != VertexKind::Regular || s.cyclic[s.comp[v]]) bad[v] = 1;
    }
    for (std::size_t c = 0; c < s.members.size(); ++c) {
        if (!s.cyclic[c]) continue;
        bool no_exit = true, closed = true;
        for (int v : s.members[c]) {
            Mult total = 0;
            for (int e : d.out[v]) {
                total = mult_add(total, d.edges[e].mult);
                if (s.comp[d.edges[e].dst] != static_cast<int>(c)) closed = false;
            }
            if (d.open[v]) closed = no_exit = false;
            if (total != 1) no_exit = false;
        }
        if (!no_exit && !closed) continue;
        for (int v : s.members[c]) t.by_kind[no_exit ? TerminalKind::NoExitCycle : TerminalKind::ExtremeCycle][v] = 1;
    }

    Mask cand = backward(d, bad);
    for (auto& x : cand) x = !x;
    Mask fail(n, 0);
    std::uint64_t limit = d.depth ? 3 * d.depth / 4 : 1;
    for (int x = 0; x < n; ++x) {
        if (!cand[x] || d.copy_of(x) >= limit) continue;
        Mask tx = forward(d, single(d, x));
        Mask outside = tx;
        for (auto& b : outside) b = !b;
        Mask esc = backward_within(d, d.open, outside);
        Mask rx = backward(d, single(d, x));
        for (int v = 0; v < n; ++v)
            if (cand[v] && esc[v] && rx[v]) fail[v] = 1;
    }
    t.by_kind[TerminalKind::TerminalPath] = mask_minus(cand, fail);
    return t;
}

struct TerminalSets {
    std::map<TerminalKind, VertexSet> by_kind;

    VertexSet all() const {
        VertexSet s;
        for (const auto& [k, v] : by_kind) s = s | v;
        return s;
    }
    std::optional<TerminalKind> kind_of(const VertexRef& v) const {
        for (const auto& [k, s] : by_kind)
            if (s.contains(v)) return k;
        return std::nullopt;
    }
};

inline TerminalSets terminal_vertices(const Graph& g, const Unroll& u = {}) {
    auto sets = stable_sets(g, u, 0, [](const Digraph& d) {
        TerminalMasks t = terminal_masks(d);
        std::vector<Mask> out;
        for (auto k : terminal_kinds) out.push_back(t.by_kind[k]);
        return out;
    });
    TerminalSets r;
    for (std::size_t i = 0; i < sets.size(); ++i) r.by_kind[terminal_kinds[i]] = sets[i];
    return r;
}

struct TerSets {
    VertexSet sink;
    VertexSet no_exit;
    VertexSet extreme;
    VertexSet paths;
    VertexSet all;
};

// Closures of the sinks, of the no-exit and extreme cycle vertices, of the
// terminal-path vertices, and of all terminal vertices.
inline TerSets ter_sets(const Graph& g, const Unroll& u = {}) {
    auto sets = stable_sets(g, u, 0, [](const Digraph& d) {
        TerminalMasks t = terminal_masks(d);
        std::vector<Mask> out;
        for (auto k : terminal_kinds) out.push_back(lpakit::closure(d, t.by_kind[k]));
        out.push_back(lpakit::closure(d, t.all()));
        return out;
    });
    return {sets[0], sets[1], sets[2], sets[3], sets[4]};
}

struct Cluster {
    TerminalKind kind;
    VertexSet members;
    VertexSet closure;
    VertexRef representative;  // least member
};

struct ClusterReport {
    bool infinite = false;
    std::string family;  // witness for an infinite family
    std::vector<Cluster> clusters;
};

namespace detail {

struct RawCluster {
    TerminalKind kind;
    Mask members;
    int least;
};

inline std::vector<RawCluster> raw_clusters(const Digraph& d, const TerminalMasks& t) {
    std::vector<RawCluster> out;
    int n = d.size();
    for (int v = 0; v < n; ++v)
        if (t.by_kind.at(TerminalKind::Sink)[v]) out.push_back({TerminalKind::Sink, single(d, v), v});
    SCC s = strongly_connected(d);
    for (auto k : {TerminalKind::NoExitCycle, TerminalKind::ExtremeCycle}) {
        const Mask& m = t.by_kind.at(k);
        for (const auto& comp : s.members) {
            if (!m[comp.front()]) continue;
            Mask cm(n, 0);
            for (int v : comp) cm[v] = 1;
            out.push_back({k, cm, *least_vertex(d, cm)});
        }
    }
    // Terminal-path vertices: one cluster per weak component of the edges
    // between them (everything a terminal-path vertex reaches is one too).
    const Mask& tp = t.by_kind.at(TerminalKind::TerminalPath);
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& e : d.edges)
        if (tp[e.src] && tp[e.dst]) parent[find(e.src)] = find(e.dst);
    std::map<int, Mask> groups;
    for (int v = 0; v < n; ++v)
        if (tp[v]) {
            auto& g = groups[find(v)];
            if (g.empty()) g.assign(n, 0);
            g[v] = 1;
        }
    for (auto& [root, m] : groups) out.push_back({TerminalKind::TerminalPath, m, *least_vertex(d, m)});
    std::sort(out.begin(), out.end(),
              [&](const RawCluster& a, const RawCluster& b) { return ref_order(d.refs[a.least], d.refs[b.least]); });
    return out;
}

inline bool touches(const Digraph& d, const Mask& m, std::uint64_t w) {
    for (int v = 0; v < d.size(); ++v)
        if (m[v] && d.copy_of(v) < w) return true;
    return false;
}

}  // namespace detail

inline ClusterReport clusters(const Graph& g, const Unroll& u = {}) {
    ClusterReport rep;
    auto finish = [&](const Graph& gr, const Digraph& d, const std::vector<detail::RawCluster>& raw, std::uint64_t w) {
        for (const auto& c : raw) {
            if (gr.has_tails() && !detail::touches(d, c.members, w)) continue;
            Cluster cl{c.kind, extract(gr, d, c.members), {}, d.refs[c.least]};
            cl.closure = closure(gr, cl.members, u);
            rep.clusters.push_back(cl);
        }
    };
    if (!g.has_tails()) {
        Digraph d = materialize(g, 0);
        finish(g, d, detail::raw_clusters(d, terminal_masks(d)), 1);
        return rep;
    }
    std::uint64_t depth = start_depth(g, u);
    for (int attempt = 0; attempt <= u.retries; ++attempt, depth *= 2) {
        Digraph d1 = materialize(g, depth), d2 = materialize(g, 2 * depth);
        auto c1 = detail::raw_clusters(d1, terminal_masks(d1));
        auto c2 = detail::raw_clusters(d2, terminal_masks(d2));
        std::uint64_t w1 = window(depth), w2 = window(2 * depth);
        std::vector<const detail::RawCluster*> near, far;
        for (const auto& c : c2) {
            if (detail::touches(d2, c.members, w1)) near.push_back(&c);
            else if (detail::touches(d2, c.members, w2)) far.push_back(&c);
        }
        if (!far.empty()) {
            rep.infinite = true;
            std::string w;
            for (std::size_t i = 0; i < far.size() && i < 3; ++i) w += (i ? ", " : "") + d2.name(far[i]->least);
            rep.family = "new clusters keep appearing deeper in the tails: " + w + (far.size() > 3 ? ", ..." : "");
            finish(g, d1, c1, w1);
            return rep;
        }
        bool ok = true;
        std::size_t count = 0;
        for (const auto& c : c1) {
            if (!detail::touches(d1, c.members, w1)) continue;
            ++count;
            VertexSet s = extract(g, d1, c.members);
            auto it = std::find_if(near.begin(), near.end(), [&](const detail::RawCluster* x) {
                return d2.refs[x->least] == d1.refs[c.least] && x->kind == c.kind;
            });
            ok = ok && it != near.end() && agrees(d2, s, (*it)->members, w2);
        }
        if (ok && count == near.size()) {
            finish(g, d1, c1, w1);
            return rep;
        }
    }
    throw error(errc::needs_deeper_unroll, std::to_string(depth / 2));
}

inline std::optional<VertexRef> least_member(const VertexSet& s) {
    std::optional<VertexRef> best;
    auto consider = [&](const VertexRef& r) {
        if (!best || ref_order(r, *best)) best = r;
    };
    for (const auto& c : s.core) consider(VertexRef::core(c));
    for (const auto& [p, e] : s.tail)
        if (auto m = e.min()) consider(VertexRef::tail(p, *m));
    return best;
}

struct SimplicityVerdict {
    enum Failure { None, NoTerminal, InfiniteClusters, SecondCluster, ClosureDeficit };

    bool cofinal = false;
    char case_tag = 0;  // 'A'..'D' when cofinal
    std::optional<TerminalKind> kind;
    std::optional<VertexRef> generator;
    Failure failure = None;
    std::optional<VertexRef> witness;
    std::string detail;

    static const char* failure_name(Failure f) {
        switch (f) {
            case None: return "None";
            case NoTerminal: return "NoTerminal";
            case InfiniteClusters: return "InfiniteClusters";
            case SecondCluster: return "SecondCluster";
            case ClosureDeficit: return "ClosureDeficit";
        }
        return "?";
    }
};

inline char case_of(TerminalKind k) {
    switch (k) {
        case TerminalKind::Sink: return 'A';
        case TerminalKind::NoExitCycle: return 'B';
        case TerminalKind::ExtremeCycle: return 'C';
        case TerminalKind::TerminalPath: return 'D';
    }
    return '?';
}

// Cofinal iff the terminal vertices form one cluster whose closure is
// everything.
inline SimplicityVerdict is_cofinal(const Graph& g, const Unroll& u = {}) {
    SimplicityVerdict v;
    ClusterReport rep = clusters(g, u);
    if (rep.infinite) {
        v.failure = SimplicityVerdict::InfiniteClusters;
        v.detail = rep.family;
        if (!rep.clusters.empty()) v.witness = rep.clusters.front().representative;
        return v;
    }
    if (rep.clusters.empty()) {
        v.failure = SimplicityVerdict::NoTerminal;
        v.detail = "no terminal vertices";
        return v;
    }
    if (rep.clusters.size() > 1) {
        v.failure = SimplicityVerdict::SecondCluster;
        v.witness = rep.clusters[1].representative;
        v.detail = std::to_string(rep.clusters.size()) + " clusters; " + rep.clusters[0].representative.to_string() +
                   " and " + rep.clusters[1].representative.to_string() + " are not equivalent";
        return v;
    }
    const Cluster& c = rep.clusters[0];
    VertexSet missing = VertexSet::all(g) - c.closure;
    if (!missing.empty()) {
        v.failure = SimplicityVerdict::ClosureDeficit;
        v.witness = least_member(missing);
        v.detail = v.witness->to_string() + " is outside the closure of the only cluster";
        return v;
    }
    v.cofinal = true;
    v.kind = c.kind;
    v.case_tag = case_of(c.kind);
    v.generator = c.representative;
    return v;
}

inline bool is_graded_purely_infinite_simple(const Graph& g, const Unroll& u = {}) {
    SimplicityVerdict v = is_cofinal(g, u);
    return v.cofinal && v.case_tag == 'C';
}

// Brute force on a finite graph: every vertex reaches every sink, every
// infinite emitter and every cycle.
inline bool cofinal_oracle(const Graph& g) {
    if (g.has_tails()) throw error(errc::tail_unsupported, "cofinality oracle needs a finite graph");
    Digraph d = materialize(g, 0);
    int n = d.size();
    if (n == 0) return false;
    std::vector<Mask> reach(n);
    for (int v = 0; v < n; ++v) reach[v] = forward(d, single(d, v));
    SCC s = strongly_connected(d);
    for (int t = 0; t < n; ++t) {
        bool must = d.kind[t] != VertexKind::Regular || s.cyclic[s.comp[t]];
        if (!must) continue;
        for (int v = 0; v < n; ++v)
            if (!reach[v][t]) return false;
    }
    return true;
}

// An infinite path given by an explicit start (and optional further
// vertices); beyond the given vertices it continues along least edges.
struct Ray {
    std::vector<VertexRef> vertices;

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < vertices.size(); ++i) s += (i ? " " : "") + vertices[i].to_string();
        return s + " ...";
    }
};

namespace detail {

// Checks that the ray's vertices form a path that continues forever.
inline void check_ray(const Graph& g, const Ray& ray, const Unroll& u) {
    if (ray.vertices.empty()) throw error(errc::precondition, "empty ray");
    std::uint64_t horizon = 0;
    for (const auto& r : ray.vertices) {
        if (!g.contains(r)) throw error(errc::unknown_vertex, r.to_string());
        horizon = std::max<std::uint64_t>(horizon, r.copy.value_or(0) + 1);
    }
    Digraph d = materialize(g, start_depth(g, u, horizon));
    for (std::size_t i = 0; i + 1 < ray.vertices.size(); ++i) {
        int a = d.index(ray.vertices[i]), b = d.index(ray.vertices[i + 1]);
        bool edge = false;
        for (int e : d.out[a]) edge = edge || d.edges[e].dst == b;
        if (!edge) throw error(errc::precondition, "no edge " + ray.vertices[i].to_string() + "->" + ray.vertices[i + 1].to_string());
    }
    // An infinite path from the last vertex: it reaches a cycle or the frontier.
    SCC s = strongly_connected(d);
    Mask goal = d.open;
    for (int v = 0; v < d.size(); ++v)
        if (s.cyclic[s.comp[v]]) goal[v] = 1;
    if (!mask_any(mask_and(forward(d, single(d, d.index(ray.vertices.back()))), goal)))
        throw error(errc::precondition, "no infinite path continues " + ray.to_string());
}

}  // namespace detail

// Whether a ray is terminal. Every infinite path from a vertex on a terminal
// path is terminal, so this depends on the ray's start only.
inline bool is_terminal_path(const Graph& g, const Ray& ray, const Unroll& u = {}) {
    if (!g.has_tails()) throw error(errc::no_infinite_paths, "a finite graph has no terminal paths");
    detail::check_ray(g, ray, u);
    return terminal_vertices(g, u).by_kind[TerminalKind::TerminalPath].contains(ray.vertices.front());
}

struct Target {
    enum Kind { Sink, InfEmitterOffCycle, CycleTarget, RayTarget } kind = Sink;
    VertexRef vertex;
    Cycle cycle;
    Ray ray;

    static const char* name(Kind k) {
        switch (k) {
            case Sink: return "Sink";
            case InfEmitterOffCycle: return "InfEmitterOffCycle";
            case CycleTarget: return "Cycle";
            case RayTarget: return "Ray";
        }
        return "?";
    }
};

struct Localization {
    AdmissiblePair lo;
    AdmissiblePair hi;
    TerminalKind expected;
    SimplicityVerdict verdict;  // of the porcupine-quotient hi/lo
};

namespace detail {

inline VertexSet successors(const Graph& g, const VertexRef& v, const Unroll& u) {
    return stable_set(g, u, v.copy.value_or(0) + 1, [&](const Digraph& d) {
        Mask m(d.size(), 0);
        int i = d.index(v);
        if (i >= 0)
            for (int e : d.out[i]) m[d.edges[e].dst] = 1;
        return m;
    });
}

}  // namespace detail

// Pairs (H,S) <= (G,T) whose porcupine-quotient is cofinal and carries the
// target with the matching terminal class. The postcondition is checked on
// the quotient's body, which decides its cofinality.
inline Localization localize(const Graph& g, const Target& target, const Unroll& u = {}) {
    Localization loc;
    auto violated = [&](const std::string& why) { throw error(errc::target_hypothesis_violated, why); };
    VertexRef probe;
    switch (target.kind) {
        case Target::Sink:
        case Target::InfEmitterOffCycle: {
            const VertexRef& v = target.vertex;
            if (!g.contains(v)) throw error(errc::unknown_vertex, v.to_string());
            VertexKind k = classify_vertex(g, v);
            if (target.kind == Target::Sink && k != VertexKind::Sink) violated(v.to_string() + " is not a sink");
            if (target.kind == Target::InfEmitterOffCycle) {
                if (k != VertexKind::InfiniteEmitter) violated(v.to_string() + " is not an infinite emitter");
                if (tree(g, detail::successors(g, v, u), u).contains(v)) violated(v.to_string() + " lies on a cycle");
            }
            VertexSet one;
            one.insert(v);
            loc.hi.H = closure(g, one, u);
            loc.lo.H = closure(g, detail::successors(g, v, u), u);
            loc.expected = TerminalKind::Sink;
            probe = v;
            break;
        }
        case Target::CycleTarget: {
            const Cycle& c = target.cycle;
            if (c.vertices.empty()) violated("empty cycle");
            VertexSet cv;
            std::uint64_t horizon = 0;
            for (const auto& r : c.vertices) {
                if (!g.contains(r)) throw error(errc::unknown_vertex, r.to_string());
                cv.insert(r);
                horizon = std::max<std::uint64_t>(horizon, r.copy.value_or(0) + 1);
            }
            Digraph d = materialize(g, g.has_tails() ? start_depth(g, u, horizon) : 0);
            Mult inner = 0;
            for (std::size_t i = 0; i < c.vertices.size(); ++i) {
                int a = d.index(c.vertices[i]), b = d.index(c.vertices[(i + 1) % c.vertices.size()]);
                bool edge = false;
                for (int e : d.out[a]) edge = edge || d.edges[e].dst == b;
                if (!edge) violated("not a cycle: no edge " + d.name(a) + "->" + d.name(b));
            }
            SCC s = strongly_connected(d);
            int comp = s.comp[d.index(c.vertices.front())];
            for (int v : s.members[comp])
                for (int e : d.out[v])
                    if (s.comp[d.edges[e].dst] == comp) inner = mult_add(inner, d.edges[e].mult);
            bool shared = inner != s.members[comp].size() || s.members[comp].size() != c.vertices.size();
            loc.hi.H = closure(g, cv, u);
            loc.lo.H = closure(g, tree(g, cv, u) - root(g, cv, u), u);
            loc.lo.S = loc.hi.H & relative_breaking(g, loc.lo.H, loc.hi.H, u);
            loc.expected = shared ? TerminalKind::ExtremeCycle : TerminalKind::NoExitCycle;
            probe = c.vertices.front();
            break;
        }
        case Target::RayTarget: {
            if (!g.has_tails()) violated("a finite graph has no rays");
            detail::check_ray(g, target.ray, u);
            const VertexRef& start = target.ray.vertices.front();
            VertexSet one;
            one.insert(start);
            std::uint64_t horizon = start.copy.value_or(0) + 1;
            VertexSet escape = stable_set(g, u, horizon, [&](const Digraph& d) {
                int n = d.size(), s0 = d.index(start);
                Mask ts = forward(d, single(d, s0));
                SCC s = strongly_connected(d);
                for (int v = 0; v < n; ++v)
                    if (ts[v] && (d.kind[v] != VertexKind::Regular || s.cyclic[s.comp[v]]))
                        violated("T(α⁰) contains " + d.name(v));
                Mask out(n, 0);
                for (int x = 0; x < n; ++x) {
                    if (!ts[x]) continue;
                    Mask tx = forward(d, single(d, x));
                    for (auto& b : tx) b = !b;
                    if (backward_within(d, d.open, tx)[s0]) out[x] = 1;
                }
                return out;
            });
            loc.hi.H = closure(g, one, u);
            loc.lo.H = closure(g, escape, u);
            loc.expected = TerminalKind::TerminalPath;
            probe = start;
            break;
        }
    }
    ConstructionResult body = pq_body(g, loc.lo, loc.hi, u);
    loc.verdict = is_cofinal(body.graph, u);
    VertexSet one;
    one.insert(probe);
    std::optional<TerminalKind> got;
    VertexSet local = body.origin.lower(one);
    if (auto m = least_member(local)) got = terminal_vertices(body.graph, u).kind_of(*m);
    if (!loc.verdict.cofinal || got != loc.expected)
        throw error(errc::target_hypothesis_violated,
                    "localized quotient of " + probe.to_string() + " is not cofinal with the expected class");
    return loc;
}

}  // namespace lpakit
