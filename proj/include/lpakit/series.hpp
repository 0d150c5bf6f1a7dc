#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "terminal.hpp"

namespace lpakit {

// Name-independent key: equal keys imply isomorphic presentations. Vertices
// are ranked by colour refinement, ties broken by id, so distinct keys do
// not prove non-isomorphism.
inline std::string shape_key(const Graph& g) {
    struct Arc {
        char type;
        Mult mult;
        std::string src, dst;
    };
    std::vector<std::string> nodes = g.vertices;
    std::map<std::string, std::string> colour;
    for (const auto& v : g.vertices) colour[v] = "c";
    std::vector<Arc> arcs;
    for (const auto& b : g.bundles) arcs.push_back({'b', b.mult, b.src, b.dst});
    for (const auto& t : g.tails) {
        for (const auto& p : t.pattern) {
            nodes.push_back(p);
            colour[p] = t.dir == Direction::outward ? "o" : "i";
        }
        for (const auto& l : t.intra) arcs.push_back({'i', l.mult, l.src, l.dst});
        for (const auto& l : t.inter) arcs.push_back({'x', l.mult, l.src, l.dst});
        for (const auto& l : t.attach_in) arcs.push_back({'a', l.mult, l.src, l.dst});
        for (const auto& l : t.attach_out0) arcs.push_back({'z', l.mult, l.src, l.dst});
        for (const auto& l : t.attach_out_all) arcs.push_back({'y', l.mult, l.src, l.dst});
    }
    for (std::size_t round = 0; round < nodes.size(); ++round) {
        std::map<std::string, std::vector<std::string>> sig;
        for (const auto& a : arcs) {
            sig[a.src].push_back(std::string(">") + a.type + mult_text(a.mult) + colour[a.dst]);
            sig[a.dst].push_back(std::string("<") + a.type + mult_text(a.mult) + colour[a.src]);
        }
        std::map<std::string, std::string> full;
        std::set<std::string> distinct;
        for (const auto& v : nodes) {
            auto& s = sig[v];
            std::sort(s.begin(), s.end());
            std::string f = colour[v] + "|";
            for (const auto& x : s) f += x + ",";
            full[v] = f;
            distinct.insert(f);
        }
        std::map<std::string, std::string> rank;
        int k = 0;
        for (const auto& f : distinct) rank[f] = std::to_string(k++);
        std::map<std::string, std::string> next;
        for (const auto& v : nodes) next[v] = rank[full[v]];
        std::set<std::string> before, after;
        for (const auto& v : nodes) {
            before.insert(colour[v]);
            after.insert(next[v]);
        }
        colour = next;
        if (after.size() == before.size() && round > 0) break;
    }
    std::vector<std::string> order = nodes;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        return std::make_pair(colour[a], a) < std::make_pair(colour[b], b);
    });
    std::map<std::string, std::string> label;
    for (std::size_t i = 0; i < order.size(); ++i) label[order[i]] = "x" + std::to_string(i);
    std::vector<std::string> lines;
    for (const auto& v : g.vertices) lines.push_back("v " + label[v]);
    for (const auto& t : g.tails) {
        std::vector<std::string> parts;
        for (const auto& p : t.pattern) parts.push_back("p " + label[p]);
        std::sort(parts.begin(), parts.end());
        std::string s = t.dir == Direction::outward ? "tail> " : "tail< ";
        for (const auto& x : parts) s += x + " ";
        lines.push_back(s);
    }
    for (const auto& a : arcs) lines.push_back(std::string(1, a.type) + " " + label[a.src] + " " + label[a.dst] + " " + mult_text(a.mult));
    std::sort(lines.begin(), lines.end());
    std::string key;
    for (const auto& l : lines) key += l + "\n";
    return key;
}

// Lifts sets from an iterated quotient back to the original graph.
struct OriginChain {
    std::vector<Origin> steps;  // steps[i] maps stage i+1 into stage i

    VertexSet lift(VertexSet s) const {
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) s = it->lift(s);
        return s;
    }
};

struct ConditionVerdict {
    bool ok = true;
    std::string witness;
};

struct StageReport {
    int n = 0;
    Graph graph;  // F_n
    VertexSet ter;
    ClusterReport clusters;
    VertexSet breaking;
    bool breaking_infinite = false;
    ConditionVerdict a, b, c;
    AdmissiblePair pair;  // F_n = E/pair
};

enum class SeriesStatus { HasSeries, NoSeries, Undetermined };

inline const char* series_status_name(SeriesStatus s) {
    switch (s) {
        case SeriesStatus::HasSeries: return "HasSeries";
        case SeriesStatus::NoSeries: return "NoSeries";
        case SeriesStatus::Undetermined: return "Undetermined";
    }
    return "?";
}

enum class NoSeriesReason { None, FailsA, FailsB, FailsC, NonTerminating };

inline const char* no_series_reason_name(NoSeriesReason r) {
    switch (r) {
        case NoSeriesReason::None: return "None";
        case NoSeriesReason::FailsA: return "FailsA";
        case NoSeriesReason::FailsB: return "FailsB";
        case NoSeriesReason::FailsC: return "FailsC";
        case NoSeriesReason::NonTerminating: return "NonTerminating";
    }
    return "?";
}

struct QuotientRun {
    std::vector<StageReport> stages;
    bool complete = false;  // F_{n+1} is empty for the last stage
    NoSeriesReason failure = NoSeriesReason::None;
    int failed_stage = -1;
    std::string witness;
    std::vector<AdmissiblePair> prefix;  // increasing chain when non-terminating
    bool capped = false;
    OriginChain origins;
};

inline ConditionVerdict check_a(const StageReport& s) {
    if (s.ter.empty()) return {false, "no terminal vertices"};
    return {};
}

inline ConditionVerdict check_b(const StageReport& s) {
    if (s.clusters.infinite) return {false, s.clusters.family};
    return {};
}

inline ConditionVerdict check_c(const StageReport& s) {
    if (s.breaking_infinite) return {false, "breaking vertices " + s.breaking.to_string()};
    return {};
}

// The necessary conditions (a), (b), (c) of a stage.
inline std::vector<ConditionVerdict> necessary_conditions(const StageReport& s) { return {check_a(s), check_b(s), check_c(s)}; }

// Lifts a pair (K, T) of F_n to E, where F_n = E/(H, S): the S-part keeps
// the old breaking vertices not absorbed by K.
inline AdmissiblePair lift_pair(const OriginChain& chain, const AdmissiblePair& base, const AdmissiblePair& local) {
    VertexSet k = chain.lift(local.H);
    AdmissiblePair p;
    p.H = base.H | k;
    p.S = (base.S - p.H) | chain.lift(local.S);
    return p;
}

inline QuotientRun composition_quotients(const Graph& g, int max_stages = 64, const Unroll& u = {}) {
    if (max_stages < 1) throw error(errc::precondition, "max_stages must be at least 1");
    QuotientRun run;
    Graph current = g;
    AdmissiblePair base;
    std::vector<std::string> keys{shape_key(g)};
    for (int n = 0; n < max_stages; ++n) {
        StageReport st;
        st.n = n;
        st.graph = current;
        st.pair = base;
        st.ter = ter_sets(current, u).all;
        st.a = check_a(st);
        if (st.a.ok) {
            st.clusters = clusters(current, u);
            st.b = check_b(st);
            st.breaking = breaking_vertices(current, st.ter, u).set;
            st.breaking_infinite = !st.breaking.finite();
            st.c = check_c(st);
        }
        run.stages.push_back(st);
        for (auto [cond, reason] : {std::pair{&st.a, NoSeriesReason::FailsA}, {&st.b, NoSeriesReason::FailsB},
                                    {&st.c, NoSeriesReason::FailsC}}) {
            if (cond->ok) continue;
            run.failure = reason;
            run.failed_stage = n;
            run.witness = cond->witness;
            return run;
        }
        if (st.ter == VertexSet::all(current)) {
            run.complete = true;
            return run;
        }
        ConstructionResult next;
        try {
            next = quotient_graph(current, {st.ter, st.breaking}, u);
        } catch (const error& e) {
            if (e.code() != errc::infinite_primes) throw;
            run.failure = NoSeriesReason::FailsC;
            run.failed_stage = n;
            run.witness = e.what();
            return run;
        }
        base = lift_pair(run.origins, base, {st.ter, st.breaking});
        run.origins.steps.push_back(next.origin);
        current = next.graph;
        std::string key = shape_key(current);
        if (key == keys.back()) {
            // F_{n+1} ≅ F_n, so every later stage repeats: record the
            // strictly increasing chain of pairs (∅,∅) < P_1 < P_2 < ...
            run.failure = NoSeriesReason::NonTerminating;
            run.failed_stage = n;
            run.witness = "F_" + std::to_string(n + 1) + " is isomorphic to F_" + std::to_string(n);
            for (const auto& s : run.stages) run.prefix.push_back(s.pair);
            run.prefix.push_back(base);
            OriginChain chain = run.origins;
            AdmissiblePair p = base;
            Graph f = current;
            while (run.prefix.size() < 3) {
                VertexSet ter = ter_sets(f, u).all;
                VertexSet brk = breaking_vertices(f, ter, u).set;
                auto q = quotient_graph(f, {ter, brk}, u);
                p = lift_pair(chain, p, {ter, brk});
                chain.steps.push_back(q.origin);
                f = q.graph;
                run.prefix.push_back(p);
            }
            return run;
        }
        keys.push_back(key);
    }
    run.capped = true;
    return run;
}

struct Factor {
    AdmissiblePair lo, hi;
    enum Step { ClusterStep, BreakingStep } step = ClusterStep;
    VertexSet cluster;  // lifted members, or the breaking vertex
    int stage = 0;
    TerminalKind kind = TerminalKind::Sink;
    ElementType type = ElementType::Incomparable;
    SimplicityVerdict verdict;
    std::optional<Graph> graph;  // the porcupine-quotient when representable
    std::string unrepresentable;
};

struct SeriesLimits {
    int max_stages = 64;
    Unroll unroll;
    // Cluster order per stage; default is greedy (largest new closure first,
    // ties by least member).
    std::function<std::vector<std::size_t>(int stage, const Graph&, const std::vector<Cluster>&)> order;
};

struct SeriesReport {
    SeriesStatus status = SeriesStatus::Undetermined;
    NoSeriesReason reason = NoSeriesReason::None;
    int stage = -1;
    std::string witness;
    std::vector<AdmissiblePair> chain;
    std::vector<Factor> factors;
    std::vector<StageReport> stages;
};

namespace detail {

// Size for ordering: finite sets by count, infinite sets above all of them.
inline std::pair<int, std::size_t> set_weight(const VertexSet& s) {
    auto n = s.size();
    return n ? std::make_pair(0, *n) : std::make_pair(1, std::size_t{0});
}

inline std::vector<std::size_t> greedy_order(const Graph& g, const std::vector<Cluster>& cs, const Unroll& u) {
    std::vector<std::size_t> order, left(cs.size());
    std::iota(left.begin(), left.end(), 0);
    VertexSet acc;
    while (!left.empty()) {
        std::size_t best = 0;
        std::pair<int, std::size_t> best_w{-1, 0};
        for (std::size_t i = 0; i < left.size(); ++i) {
            auto w = set_weight(closure(g, acc | cs[left[i]].members, u));
            // Clusters arrive sorted by least member, so strict > keeps the
            // lexicographic tie-break.
            if (w > best_w) {
                best_w = w;
                best = i;
            }
        }
        order.push_back(left[best]);
        acc = acc | cs[left[best]].members;
        left.erase(left.begin() + static_cast<long>(best));
    }
    return order;
}

}  // namespace detail

// Checks one consecutive pair: the materialized porcupine-quotient when it
// can be built, else its body, which decides cofinality.
inline Factor check_factor(const Graph& g, const AdmissiblePair& lo, const AdmissiblePair& hi, const Unroll& u = {}) {
    Factor f;
    f.lo = lo;
    f.hi = hi;
    try {
        ConstructionResult r = porcupine_quotient(g, lo, hi, u);
        f.graph = r.graph;
        f.verdict = is_cofinal(r.graph, u);
    } catch (const error& e) {
        if (e.code() != errc::unrepresentable && e.code() != errc::tail_unsupported) throw;
        f.unrepresentable = e.what();
        f.verdict = is_cofinal(pq_body(g, lo, hi, u).graph, u);
    }
    if (f.verdict.kind) {
        f.kind = *f.verdict.kind;
        f.type = element_type_of(f.kind);
    }
    return f;
}

inline SeriesReport build_series(const Graph& g, const SeriesLimits& limits = {}) {
    const Unroll& u = limits.unroll;
    SeriesReport rep;
    QuotientRun run = composition_quotients(g, limits.max_stages, u);
    rep.stages = run.stages;
    if (run.capped) {
        rep.status = SeriesStatus::Undetermined;
        rep.witness = "no verdict within " + std::to_string(limits.max_stages) + " stages";
        return rep;
    }
    if (run.failure != NoSeriesReason::None) {
        rep.status = SeriesStatus::NoSeries;
        rep.reason = run.failure;
        rep.stage = run.failed_stage;
        rep.witness = run.witness;
        rep.chain = run.prefix;
        return rep;
    }
    rep.chain.push_back({});
    OriginChain chain;
    for (std::size_t n = 0; n < run.stages.size(); ++n) {
        const StageReport& st = run.stages[n];
        if (n > 0) chain.steps.push_back(run.origins.steps[n - 1]);
        const auto& cs = st.clusters.clusters;
        std::vector<std::size_t> order =
            limits.order ? limits.order(static_cast<int>(n), st.graph, cs) : detail::greedy_order(st.graph, cs, u);
        VertexSet acc;
        auto push = [&](const AdmissiblePair& local, Factor::Step step, const VertexSet& what) {
            AdmissiblePair p = lift_pair(chain, st.pair, local);
            if (!is_admissible(g, p, u))
                throw error(errc::lifting_violation, "lifted pair " + p.to_string() + " is not admissible");
            Factor f = check_factor(g, rep.chain.back(), p, u);
            f.step = step;
            f.stage = static_cast<int>(n);
            f.cluster = chain.lift(what);
            rep.chain.push_back(p);
            rep.factors.push_back(f);
        };
        for (std::size_t i : order) {
            acc = acc | cs[i].members;
            push({closure(st.graph, acc, u), {}}, Factor::ClusterStep, cs[i].members);
        }
        VertexSet brk;
        for (const auto& v : st.breaking.members()) {
            brk.insert(v);
            VertexSet one;
            one.insert(v);
            push({st.ter, brk}, Factor::BreakingStep, one);
        }
    }
    rep.status = SeriesStatus::HasSeries;
    return rep;
}

struct SeriesCheck {
    bool valid = false;
    int length = 0;
    int failed_step = -1;  // index into the chain (pair) or factor
    std::string reason;
    std::vector<Factor> factors;
};

inline SeriesCheck verify_series(const Graph& g, const std::vector<AdmissiblePair>& chain, const Unroll& u = {}) {
    SeriesCheck c;
    c.length = static_cast<int>(chain.size()) - 1;
    auto fail = [&](int step, std::string why) {
        c.failed_step = step;
        c.reason = std::move(why);
        return c;
    };
    if (chain.size() < 2) return fail(0, "a series needs at least two pairs");
    if (!(chain.front() == AdmissiblePair{})) return fail(0, "does not start at (∅,∅)");
    AdmissiblePair top{VertexSet::all(g), {}};
    if (!(chain.back() == top)) return fail(c.length, "does not end at (E⁰,∅)");
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (!is_admissible(g, chain[i], u)) return fail(static_cast<int>(i), "pair " + chain[i].to_string() + " is not admissible");
    for (std::size_t i = 1; i < chain.size(); ++i) {
        if (!pair_leq(chain[i - 1], chain[i]) || chain[i - 1] == chain[i])
            return fail(static_cast<int>(i), "not strictly increasing at step " + std::to_string(i));
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        Factor f = check_factor(g, chain[i - 1], chain[i], u);
        c.factors.push_back(f);
        if (!f.verdict.cofinal)
            return fail(static_cast<int>(i), "factor " + std::to_string(i) + " is not cofinal: " + f.verdict.detail);
    }
    c.valid = true;
    return c;
}

}  // namespace lpakit
