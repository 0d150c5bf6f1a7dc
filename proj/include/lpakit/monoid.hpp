#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "terminal.hpp"

namespace lpakit {

struct TypeVerdict {
    ElementType type = ElementType::Incomparable;
    std::uint64_t n = 0;  // exponent witness; 0 for Incomparable

    bool operator==(const TypeVerdict&) const = default;
    std::string to_string() const {
        return std::string(element_type_name(type)) + (n ? "(" + std::to_string(n) + ")" : "");
    }
};

namespace detail {

inline Mask counting_comparable(const Digraph& d, const Mask& closed);

// Masks of the vertices whose class is periodic (saturated closure of the
// no-exit cycle vertices) and of those whose class is comparable.
inline std::pair<Mask, Mask> type_masks(const Digraph& d) {
    SCC s = strongly_connected(d);
    TerminalMasks t = terminal_masks(d);
    Mask cyc(d.size(), 0);
    for (int v = 0; v < d.size(); ++v) cyc[v] = s.cyclic[s.comp[v]];
    return {saturate(d, t.by_kind.at(TerminalKind::NoExitCycle)), counting_comparable(d, saturate(d, cyc))};
}

inline std::uint64_t lcm_capped(std::uint64_t a, std::uint64_t b) {
    std::uint64_t l = std::lcm(a, b);
    return l > (1u << 20) ? (1u << 20) : l;
}

// Least n with [v] = t^n [v] for v in the saturated closure of the no-exit
// cycles. Each such cycle contributes a free N[Z/L] summand, so [v] is a
// count vector per cycle and n is the lcm of the vectors' rotation periods.
inline std::uint64_t least_period(const Digraph& d, int v) {
    SCC s = strongly_connected(d);
    // Position of each no-exit cycle vertex along its cycle, from the least
    // member; every such vertex emits exactly one edge.
    std::vector<int> pos(d.size(), -1);
    std::map<int, int> length;
    auto place = [&](int c) {
        if (length.count(c)) return;
        int start = *std::min_element(s.members[c].begin(), s.members[c].end());
        int x = start, i = 0;
        do {
            pos[x] = i++;
            x = d.edges[d.out[x].front()].dst;
        } while (x != start);
        length[c] = i;
    };
    using Vec = std::map<int, std::vector<std::uint64_t>>;
    std::map<int, Vec> memo;
    std::function<Vec(int)> value = [&](int x) -> Vec {
        if (auto it = memo.find(x); it != memo.end()) return it->second;
        Vec r;
        int c = s.comp[x];
        if (s.cyclic[c]) {
            place(c);
            int l = length[c];
            r[c].assign(l, 0);
            // [c_i] = t^(L-i) [c_0]
            r[c][(l - pos[x]) % l] = 1;
        } else {
            for (int e : d.out[x]) {
                Vec sub = value(d.edges[e].dst);
                for (auto& [cc, vec] : sub) {
                    auto& acc = r[cc];
                    int l = static_cast<int>(vec.size());
                    if (acc.empty()) acc.assign(l, 0);
                    for (int k = 0; k < l; ++k) acc[(k + 1) % l] += vec[k] * d.edges[e].mult;
                }
            }
        }
        return memo[x] = r;
    };
    std::uint64_t n = 1;
    for (const auto& [c, vec] : value(v)) {
        std::size_t l = vec.size(), p = 1;
        for (; p < l; ++p) {
            bool same = true;
            for (std::size_t k = 0; k < l && same; ++k) same = vec[k] == vec[(k + p) % l];
            if (same) break;
        }
        n = lcm_capped(n, p);
    }
    return n;
}

// lcm of the lengths of the simple cycles met by T(v): [v] >= t^n [v]
// for this n by the usual expansion argument.
inline std::uint64_t cycle_lcm(const Digraph& d, int v) {
    Mask reach = forward(d, single(d, v));
    std::uint64_t n = 1;
    std::size_t seen = 0;
    for (const auto& c : simple_vertex_cycles(d, reach)) {
        n = lcm_capped(n, c.size());
        if (++seen > 4096) break;
    }
    return n;
}

// Path count with saturation; `infinite` marks counts through an ω-bundle.
struct Count {
    bool infinite = false;
    std::uint64_t value = 0;

    bool positive() const { return infinite || value > 0; }
    bool covers(const Count& o) const { return infinite || (!o.infinite && value >= o.value); }
};

inline Count scaled(const Count& c, Mult m) {
    if (!c.positive()) return {};
    if (c.infinite || m == omega) return {true, 0};
    constexpr std::uint64_t cap = std::uint64_t{1} << 62;
    return {false, c.value > cap / m ? cap : c.value * m};
}

inline void accumulate(Count& acc, const Count& c) {
    constexpr std::uint64_t cap = std::uint64_t{1} << 62;
    acc.infinite = acc.infinite || c.infinite;
    acc.value = std::min(cap, acc.value + c.value);
}

// Least n with [v] >= t^n [v] for a vertex outside the saturated closures,
// or 0. For a sink or infinite emitter s, the number of paths of length k
// from a vertex to s is a monotone map of the monoid, so the inequality
// needs P(k) >= P(k-n) for every such s and k. If every cycle vertex that v
// reaches has a closed walk of length n, inserting that walk at the first
// cycle vertex of a path gives the inequality for all k - n past the
// cycle-free paths, so only k - n < |reach| is checked. Vertices reaching a
// truncated vertex are left to the saturation criterion.
inline std::uint64_t counting_shift(const Digraph& d, int v) {
    Mask reach = forward(d, single(d, v));
    std::vector<int> members;
    for (int x = 0; x < d.size(); ++x)
        if (reach[x]) {
            if (d.open[x]) return 0;
            members.push_back(x);
        }
    SCC s = strongly_connected(d);
    // Period of each reached cyclic component: gcd of level differences
    // along its internal edges.
    std::uint64_t period = 1;
    std::vector<int> cyclic;
    std::set<int> seen;
    for (int x : members) {
        int c = s.comp[x];
        if (!s.cyclic[c]) continue;
        cyclic.push_back(x);
        if (!seen.insert(c).second) continue;
        std::map<int, std::int64_t> level{{x, 0}};
        std::vector<int> queue{x};
        std::int64_t g = 0;
        for (std::size_t i = 0; i < queue.size(); ++i)
            for (int e : d.out[queue[i]]) {
                int y = d.edges[e].dst;
                if (s.comp[y] != c) continue;
                auto [it, fresh] = level.emplace(y, level[queue[i]] + 1);
                if (fresh) queue.push_back(y);
                else g = std::gcd(g, level[queue[i]] + 1 - it->second);
            }
        period = lcm_capped(period, static_cast<std::uint64_t>(g));
    }
    if (cyclic.empty()) return 0;
    const int size = static_cast<int>(members.size());
    const std::uint64_t bound = std::min<std::uint64_t>(period * (size * size + size + 2), 4096);

    // Shifts admitting a closed walk at every reached cycle vertex.
    std::vector<char> walkable(bound + 1, 1);
    for (int c : cyclic) {
        Mask at = single(d, c);
        for (std::uint64_t k = 1; k <= bound; ++k) {
            Mask next(d.size(), 0);
            for (int x : members)
                if (at[x])
                    for (int e : d.out[x])
                        if (s.comp[d.edges[e].dst] == s.comp[c]) next[d.edges[e].dst] = 1;
            at = std::move(next);
            walkable[k] = walkable[k] && at[c];
        }
    }

    // counts[k][x]: paths of length k from v to x.
    std::vector<std::vector<Count>> counts(bound + size + 1, std::vector<Count>(d.size()));
    counts[0][v] = {false, 1};
    for (std::size_t k = 1; k < counts.size(); ++k)
        for (int x : members) {
            if (!counts[k - 1][x].positive()) continue;
            for (int e : d.out[x]) accumulate(counts[k][d.edges[e].dst], scaled(counts[k - 1][x], d.edges[e].mult));
        }
    std::vector<int> singular;
    for (int x : members)
        if (d.kind[x] != VertexKind::Regular) singular.push_back(x);
    for (std::uint64_t n = 1; n <= bound; ++n) {
        if (!walkable[n]) continue;
        bool holds = true;
        for (int x : singular)
            for (int j = 0; j < size && holds; ++j) holds = counts[n + j][x].covers(counts[j][x]);
        if (holds) return n;
    }
    return 0;
}

// Vertices outside the saturated closure of the cycle vertices that pass
// the counting test.
inline Mask counting_comparable(const Digraph& d, const Mask& closed) {
    Mask m = closed;
    for (int v = 0; v < d.size(); ++v)
        if (!m[v] && counting_shift(d, v)) m[v] = 1;
    return m;
}

}  // namespace detail

// Type of [v] by the graph criteria.
inline TypeVerdict element_type(const Graph& g, const VertexRef& v, const Unroll& u = {}) {
    if (!g.contains(v)) throw error(errc::unknown_vertex, v.to_string());
    std::uint64_t horizon = v.copy.value_or(0) + 1;
    auto sets = stable_sets(g, u, horizon, [](const Digraph& d) {
        auto [p, a] = detail::type_masks(d);
        return std::vector<Mask>{p, a};
    });
    Digraph d = materialize(g, g.has_tails() ? start_depth(g, u, horizon) : 0);
    int i = d.index(v);
    if (sets[0].contains(v)) return {ElementType::Periodic, detail::least_period(d, i)};
    if (sets[1].contains(v)) {
        Mask closed = saturate(d, [&] {
            SCC s = strongly_connected(d);
            Mask cyc(d.size(), 0);
            for (int x = 0; x < d.size(); ++x) cyc[x] = s.cyclic[s.comp[x]];
            return cyc;
        }());
        return {ElementType::Aperiodic, closed[i] ? detail::cycle_lcm(d, i) : detail::counting_shift(d, i)};
    }
    return {ElementType::Incomparable, 0};
}

struct TypeCensus {
    VertexSet periodic, aperiodic, incomparable;
};

inline TypeCensus type_census(const Graph& g, const Unroll& u = {}) {
    auto sets = stable_sets(g, u, 0, [](const Digraph& d) {
        auto [p, a] = detail::type_masks(d);
        return std::vector<Mask>{p, a};
    });
    TypeCensus c;
    c.periodic = sets[0];
    c.aperiodic = sets[1] - sets[0];
    c.incomparable = VertexSet::all(g) - sets[1];
    return c;
}

struct MonoidType {
    enum Kind { Periodic, Aperiodic, Incomparable, Mixed } kind = Mixed;
    TypeCensus census;

    static const char* name(Kind k) {
        switch (k) {
            case Periodic: return "Periodic";
            case Aperiodic: return "Aperiodic";
            case Incomparable: return "Incomparable";
            case Mixed: return "Mixed";
        }
        return "?";
    }
};

inline MonoidType monoid_type(const Graph& g, const Unroll& u = {}) {
    MonoidType m;
    m.census = type_census(g, u);
    const auto& c = m.census;
    bool no_exit_cycles = !ter_sets(g, u).no_exit.empty();
    if (c.aperiodic.empty() && c.incomparable.empty()) m.kind = MonoidType::Periodic;
    else if (c.periodic.empty() && c.incomparable.empty() && !no_exit_cycles) m.kind = MonoidType::Aperiodic;
    else if (c.periodic.empty() && c.aperiodic.empty()) m.kind = MonoidType::Incomparable;
    return m;
}

struct MinimalIdeal {
    Cluster cluster;
    ElementType type;
    AdmissiblePair generator;  // (closure of the cluster, ∅)
};

inline std::vector<MinimalIdeal> minimal_ideals(const Graph& g, const Unroll& u = {}) {
    ClusterReport rep = clusters(g, u);
    if (rep.infinite) throw error(errc::infinite_cluster_family, rep.family);
    std::vector<MinimalIdeal> out;
    for (const auto& c : rep.clusters) out.push_back({c, element_type_of(c.kind), {c.closure, {}}});
    return out;
}

inline AdmissiblePair largest_periodic_ideal(const Graph& g, const Unroll& u = {}) { return {ter_sets(g, u).no_exit, {}}; }

struct TwoTypeProfile {
    bool disjoint_cycles = true;
    bool every_cycle_meets_another = true;
    bool every_vertex_in_cycle_closure = true;
};

inline TwoTypeProfile two_type_profile(const Graph& g, const Unroll& u = {}) {
    TwoTypeProfile p;
    Digraph d = materialize(g, g.has_tails() ? start_depth(g, u) : 0);
    SCC s = strongly_connected(d);
    for (std::size_t c = 0; c < s.members.size(); ++c) {
        if (!s.cyclic[c]) continue;
        Mult inner = 0;
        for (int v : s.members[c])
            for (int e : d.out[v])
                if (s.comp[d.edges[e].dst] == static_cast<int>(c)) inner = mult_add(inner, d.edges[e].mult);
        // A strongly connected piece is a single cycle iff it has exactly
        // as many edges as vertices; otherwise every cycle in it meets another.
        if (inner == s.members[c].size()) p.every_cycle_meets_another = false;
        else p.disjoint_cycles = false;
    }
    p.every_vertex_in_cycle_closure = type_census(g, u).incomparable.empty();
    return p;
}

// Bounded rewriting over the presentation of the talented monoid.

struct Generator {
    std::string vertex;
    std::vector<std::pair<std::string, std::uint64_t>> selection;  // (bundle, count); empty for [v]
    std::int64_t shift = 0;

    bool is_q() const { return !selection.empty(); }
    auto operator<=>(const Generator&) const = default;
    bool operator==(const Generator&) const = default;

    std::string to_string() const {
        std::string s = shift == 0 ? "" : shift == 1 ? "t" : "t^" + std::to_string(shift);
        if (!is_q()) return s + "[" + vertex + "]";
        std::string z;
        for (std::size_t i = 0; i < selection.size(); ++i)
            z += (i ? "," : "") + selection[i].first + (selection[i].second > 1 ? "x" + std::to_string(selection[i].second) : "");
        return s + "[q^" + vertex + "_{" + z + "}]";
    }
};

// Finite multiset of generators, kept sorted; empty is zero.
struct MonElem {
    std::vector<Generator> gens;

    static MonElem of(Generator g) { return {{std::move(g)}}; }
    static MonElem vertex(const std::string& v, std::int64_t shift = 0) { return of({v, {}, shift}); }

    void normalize() { std::sort(gens.begin(), gens.end()); }
    bool operator==(const MonElem& o) const { return gens == o.gens; }
    bool operator<(const MonElem& o) const { return gens < o.gens; }

    std::string to_string() const {
        if (gens.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < gens.size(); ++i) s += (i ? " + " : "") + gens[i].to_string();
        return s;
    }
};

struct OracleBounds {
    std::size_t max_size = 24;
    std::int64_t max_shift = 8;
    std::size_t max_states = 200000;
};

// One application of a defining relation (shifted by `shift`), replacing
// `removed` by `added`.
struct RewriteStep {
    enum Relation { Regular, Emitter, Selection } relation = Regular;
    bool expand = true;  // left-hand side to right-hand side
    std::string vertex;
    std::int64_t shift = 0;
    std::vector<std::pair<std::string, std::uint64_t>> z, w;
    MonElem removed, added;

    std::string to_string() const {
        static const char* names[] = {"regular", "emitter", "selection"};
        return std::string(expand ? "expand " : "contract ") + names[relation] + " at " + vertex + ": " +
               removed.to_string() + " -> " + added.to_string();
    }
};

namespace detail {

using Selection = std::vector<std::pair<std::string, std::uint64_t>>;

inline std::vector<const Bundle*> out_bundles(const Graph& g, const std::string& v) {
    std::vector<const Bundle*> out;
    for (const auto& b : g.bundles)
        if (b.src == v) out.push_back(&b);
    return out;
}

inline bool infinite_emitter(const Graph& g, const std::string& v) {
    Mult total = 0;
    for (const auto* b : out_bundles(g, v)) total = mult_add(total, b->mult);
    return total == omega;
}

inline void add_ranges(const Graph& g, MonElem& m, const Selection& sel, std::int64_t shift) {
    for (const auto& [id, count] : sel)
        for (const auto& b : g.bundles)
            if (b.id == id)
                for (std::uint64_t k = 0; k < count; ++k) m.gens.push_back({b.dst, {}, shift + 1});
}

// The two sides of a relation instance.
inline std::pair<MonElem, MonElem> relation_sides(const Graph& g, RewriteStep::Relation r, const std::string& v,
                                                  std::int64_t shift, const Selection& z, const Selection& w) {
    MonElem lhs, rhs;
    switch (r) {
        case RewriteStep::Regular: {
            lhs = MonElem::vertex(v, shift);
            Selection all;
            for (const auto* b : out_bundles(g, v)) all.push_back({b->id, b->mult});
            add_ranges(g, rhs, all, shift);
            break;
        }
        case RewriteStep::Emitter:
            lhs = MonElem::vertex(v, shift);
            rhs.gens.push_back({v, z, shift});
            add_ranges(g, rhs, z, shift);
            break;
        case RewriteStep::Selection: {
            lhs.gens.push_back({v, z, shift});
            rhs.gens.push_back({v, w, shift});
            Selection diff;
            for (const auto& [id, cw] : w) {
                std::uint64_t cz = 0;
                for (const auto& [zid, c] : z)
                    if (zid == id) cz = c;
                if (cw > cz) diff.push_back({id, cw - cz});
            }
            add_ranges(g, rhs, diff, shift);
            break;
        }
    }
    lhs.normalize();
    rhs.normalize();
    return {lhs, rhs};
}

// True when z is a proper sub-selection of w.
inline bool subtract_selection(const Selection& w, const Selection& z) {
    std::uint64_t zs = 0, ws = 0;
    for (const auto& [id, c] : z) {
        zs += c;
        auto it = std::find_if(w.begin(), w.end(), [&](const auto& p) { return p.first == id; });
        if (it == w.end() || it->second < c) return false;
    }
    for (const auto& [id, c] : w) ws += c;
    return zs < ws;
}

// Removes `part` from `whole` if it is a sub-multiset.
inline std::optional<MonElem> subtract(const MonElem& whole, const MonElem& part) {
    MonElem r;
    std::size_t j = 0;
    for (const auto& x : whole.gens) {
        if (j < part.gens.size() && part.gens[j] == x) ++j;
        else r.gens.push_back(x);
    }
    if (j != part.gens.size()) return std::nullopt;
    return r;
}

inline MonElem combine(const MonElem& a, const MonElem& b) {
    MonElem r = a;
    r.gens.insert(r.gens.end(), b.gens.begin(), b.gens.end());
    r.normalize();
    return r;
}

inline bool within(const MonElem& m, const OracleBounds& b) {
    if (m.gens.size() > b.max_size) return false;
    for (const auto& x : m.gens)
        if (x.shift > b.max_shift || x.shift < -b.max_shift) return false;
    return true;
}

inline Selection with_one_more(const Selection& z, const std::string& id) {
    Selection w = z;
    auto it = std::find_if(w.begin(), w.end(), [&](const auto& p) { return p.first == id; });
    if (it == w.end()) w.push_back({id, 1});
    else ++it->second;
    std::sort(w.begin(), w.end());
    return w;
}

inline Selection with_one_less(const Selection& w, const std::string& id) {
    Selection z;
    for (const auto& [i, c] : w) {
        if (i != id) z.push_back({i, c});
        else if (c > 1) z.push_back({i, c - 1});
    }
    return z;
}

// Every relation application available at m, in a deterministic order.
inline std::vector<RewriteStep> moves(const Graph& g, const MonElem& m) {
    std::vector<RewriteStep> out;
    auto emit = [&](RewriteStep::Relation r, const std::string& v, std::int64_t k, const Selection& z, const Selection& w) {
        auto [lhs, rhs] = relation_sides(g, r, v, k, z, w);
        if (subtract(m, lhs)) out.push_back({r, true, v, k, z, w, lhs, rhs});
        if (subtract(m, rhs)) out.push_back({r, false, v, k, z, w, rhs, lhs});
    };
    std::set<std::pair<std::string, std::int64_t>> sites;
    std::set<std::tuple<std::string, Selection, std::int64_t>> qs;
    for (const auto& x : m.gens) {
        if (x.is_q()) qs.insert({x.vertex, x.selection, x.shift});
        else sites.insert({x.vertex, x.shift});
        // Contractions need the source of an edge into x one step earlier.
        for (const auto& b : g.bundles)
            if (b.dst == x.vertex && !x.is_q()) sites.insert({b.src, x.shift - 1});
    }
    for (const auto& [v, k] : sites) {
        auto bs = out_bundles(g, v);
        if (bs.empty()) continue;
        if (!infinite_emitter(g, v)) {
            emit(RewriteStep::Regular, v, k, {}, {});
            continue;
        }
        for (const auto* b : bs) emit(RewriteStep::Emitter, v, k, {{b->id, 1}}, {});
        // [v] <-> [q_Z] + ... for a larger Z only arises from a q already present.
    }
    for (const auto& [v, z, k] : qs) {
        for (const auto* b : out_bundles(g, v)) {
            std::uint64_t have = 0;
            for (const auto& [id, c] : z)
                if (id == b->id) have = c;
            if (have < b->mult) emit(RewriteStep::Selection, v, k, z, with_one_more(z, b->id));
            Selection smaller = with_one_less(z, b->id);
            if (have > 0 && !smaller.empty()) emit(RewriteStep::Selection, v, k, smaller, z);
        }
        emit(RewriteStep::Emitter, v, k, z, {});
    }
    return out;
}

struct Search {
    std::vector<MonElem> states;
    std::map<MonElem, std::size_t> index;
    std::vector<std::pair<std::size_t, RewriteStep>> parent;  // (previous state, step)
    bool exhausted = false;

    std::vector<RewriteStep> trace_to(std::size_t i) const {
        std::vector<RewriteStep> t;
        while (i != 0) {
            t.push_back(parent[i].second);
            i = parent[i].first;
        }
        std::reverse(t.begin(), t.end());
        return t;
    }
};

// Breadth-first search; stops early at the first state satisfying `stop`.
inline Search explore(const Graph& g, MonElem start, const OracleBounds& b,
                      const std::function<bool(const MonElem&)>& stop = {}) {
    if (g.has_tails()) throw error(errc::tail_unsupported, "the rewriting oracle needs a finite graph");
    Search s;
    start.normalize();
    s.states.push_back(start);
    s.index[start] = 0;
    s.parent.push_back({0, {}});
    std::size_t head = 0;
    while (head < s.states.size()) {
        if (s.states.size() >= b.max_states) return s;
        MonElem cur = s.states[head];
        for (auto& step : moves(g, cur)) {
            MonElem next = combine(*subtract(cur, step.removed), step.added);
            if (!within(next, b) || s.index.count(next)) continue;
            s.index[next] = s.states.size();
            s.states.push_back(next);
            s.parent.push_back({head, step});
            if (stop && stop(next)) return s;
        }
        ++head;
    }
    s.exhausted = true;
    return s;
}

}  // namespace detail

// Elements reachable from x by relation applications within the bounds.
inline std::vector<MonElem> oracle_expand(const Graph& g, const MonElem& x, const OracleBounds& b = {}) {
    return detail::explore(g, x, b).states;
}

struct OracleResult {
    bool found = false;
    MonElem residual;  // for >=
    std::vector<RewriteStep> trace;
};

inline OracleResult oracle_eq(const Graph& g, MonElem x, MonElem y, const OracleBounds& b = {}) {
    y.normalize();
    auto s = detail::explore(g, x, b);
    auto it = s.index.find(y);
    if (it == s.index.end()) return {};
    return {true, {}, s.trace_to(it->second)};
}

// x >= y: some representative of x contains y literally.
inline OracleResult oracle_geq(const Graph& g, MonElem x, MonElem y, const OracleBounds& b = {}) {
    y.normalize();
    auto s = detail::explore(g, x, b);
    for (std::size_t i = 0; i < s.states.size(); ++i)
        if (auto z = detail::subtract(s.states[i], y)) return {true, *z, s.trace_to(i)};
    return {};
}

struct OracleType {
    enum Kind { Periodic, Aperiodic, Unknown } kind = Unknown;
    std::uint64_t n = 0;
    std::vector<RewriteStep> trace;
    MonElem residual;
};

// Searches the expansion of [v] breadth-first for t^n [v] (periodic) or a
// representative strictly containing some t^n [v] (aperiodic), n >= 1,
// reporting the first witness met. Unknown never certifies incomparable.
inline OracleType oracle_type(const Graph& g, const std::string& v, const OracleBounds& b = {}) {
    auto witness = [&](const MonElem& st) -> std::optional<Generator> {
        for (const auto& x : st.gens)
            if (x.vertex == v && !x.is_q() && x.shift > 0) return x;
        return std::nullopt;
    };
    auto s = detail::explore(g, MonElem::vertex(v), b, [&](const MonElem& st) { return witness(st).has_value(); });
    const MonElem& last = s.states.back();
    auto x = witness(last);
    if (!x) return {};
    OracleType r;
    r.kind = last.gens.size() == 1 ? OracleType::Periodic : OracleType::Aperiodic;
    r.n = static_cast<std::uint64_t>(x->shift);
    r.trace = s.trace_to(s.states.size() - 1);
    r.residual = *detail::subtract(last, MonElem::of(*x));
    return r;
}

// Checks a trace step by step against freshly built relation instances.
inline bool replay(const Graph& g, MonElem start, const std::vector<RewriteStep>& trace, MonElem end) {
    start.normalize();
    end.normalize();
    for (const auto& st : trace) {
        auto [lhs, rhs] = detail::relation_sides(g, st.relation, st.vertex, st.shift, st.z, st.w);
        bool emitter = detail::infinite_emitter(g, st.vertex);
        if (st.relation == RewriteStep::Regular && (emitter || detail::out_bundles(g, st.vertex).empty())) return false;
        if (st.relation != RewriteStep::Regular && (!emitter || st.z.empty())) return false;
        if (st.relation == RewriteStep::Selection && !detail::subtract_selection(st.w, st.z)) return false;
        const MonElem& from = st.expand ? lhs : rhs;
        const MonElem& to = st.expand ? rhs : lhs;
        if (!(from == st.removed) || !(to == st.added)) return false;
        auto rest = detail::subtract(start, from);
        if (!rest) return false;
        start = detail::combine(*rest, to);
    }
    return start == end;
}

}  // namespace lpakit
