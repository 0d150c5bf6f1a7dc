#include <doctest.h>

#include <lpakit/terminal.hpp>

#include "support.hpp"

using namespace lpakit;
using namespace testing_support;

namespace {

std::optional<TerminalKind> kind_at(const Graph& g, const std::string& v) {
    return terminal_vertices(g).kind_of(ref(g, v));
}

// Terminal class of a vertex from the definitions, by plain reachability.
std::optional<TerminalKind> oracle_kind(const Graph& g, const std::string& v) {
    Mult total = 0;
    for (const auto& b : g.bundles)
        if (b.src == v) total = mult_add(total, b.mult);
    if (total == 0) return TerminalKind::Sink;
    auto down = reach_from(g, v), up = reach_to(g, v);
    bool on_cycle = false;
    for (const auto& b : g.bundles)
        if (b.src == v && up.count(b.dst)) on_cycle = true;
    if (!on_cycle) return std::nullopt;
    // No exit: the unique out-edges from v lead back round to v.
    std::string x = v;
    bool no_exit = true;
    for (std::size_t step = 0; step <= g.vertices.size(); ++step) {
        Mult out = 0;
        std::string next;
        for (const auto& b : g.bundles)
            if (b.src == x) {
                out = mult_add(out, b.mult);
                next = b.dst;
            }
        if (out != 1) {
            no_exit = false;
            break;
        }
        x = next;
        if (x == v) break;
    }
    if (no_exit) return TerminalKind::NoExitCycle;
    for (const auto& w : down)
        if (!up.count(w)) return std::nullopt;
    return TerminalKind::ExtremeCycle;
}

Cycle cycle_at(const Graph& g, std::vector<std::string> vs, std::vector<std::string> es) {
    Cycle c;
    for (const auto& v : vs) c.vertices.push_back(ref(g, v));
    c.edges = std::move(es);
    return c;
}

}  // namespace

TEST_CASE("terminal classes on UVW") {
    Graph g = fixture("FIX_UVW");
    CHECK(kind_at(g, "u") == TerminalKind::NoExitCycle);
    CHECK(kind_at(g, "w") == TerminalKind::Sink);
    CHECK_FALSE(kind_at(g, "v").has_value());
}

TEST_CASE("terminal classes in tails") {
    Graph row = fixture("FIX_SINKROW");
    CHECK(terminal_vertices(row).by_kind[TerminalKind::Sink] == VertexSet::all(row));

    Graph chain = fixture("FIX_LOOPCHAIN_IN");
    auto t = terminal_vertices(chain);
    CHECK(t.by_kind[TerminalKind::NoExitCycle] == set(chain, "p@0"));
    CHECK(t.all() == set(chain, "p@0"));

    Graph ray = fixture("FIX_RAY2");
    CHECK(terminal_vertices(ray).by_kind[TerminalKind::TerminalPath] == VertexSet::all(ray));

    Graph noend = fixture("FIX_LOOPCHAIN_NOEND");
    CHECK(terminal_vertices(noend).all().empty());
    Graph omega = fixture("FIX_OMEGAROW");
    CHECK(terminal_vertices(omega).all() == set(omega, "s"));
}

TEST_CASE("clusters") {
    Graph grid = fixture("FIX_GRID23");
    auto rep = clusters(grid);
    REQUIRE(rep.clusters.size() == 3);
    std::vector<std::string> reps;
    for (const auto& c : rep.clusters) {
        CHECK(c.kind == TerminalKind::Sink);
        reps.push_back(c.representative.to_string());
    }
    CHECK(reps == std::vector<std::string>{"u0", "v0", "w0"});

    auto sinks = clusters(fixture("FIX_SINKROW"));
    CHECK(sinks.infinite);
    CHECK_FALSE(sinks.family.empty());

    Graph ray = fixture("FIX_RAY2");
    auto r = clusters(ray);
    REQUIRE(r.clusters.size() == 1);
    CHECK(r.clusters[0].kind == TerminalKind::TerminalPath);
    CHECK(r.clusters[0].closure == VertexSet::all(ray));
}

TEST_CASE("cofinality verdicts") {
    auto ray = is_cofinal(fixture("FIX_RAY2"));
    CHECK(ray.cofinal);
    CHECK(ray.case_tag == 'D');

    auto rose = is_cofinal(fixture("FIX_ROSE2"));
    CHECK(rose.cofinal);
    CHECK(rose.case_tag == 'C');
    CHECK(is_graded_purely_infinite_simple(fixture("FIX_ROSE2")));

    auto loop = is_cofinal(fixture("FIX_LOOP1"));
    CHECK(loop.case_tag == 'B');
    CHECK_FALSE(is_graded_purely_infinite_simple(fixture("FIX_LOOP1")));

    auto path = is_cofinal(fixture("FIX_PATH4"));
    CHECK(path.case_tag == 'A');
    CHECK(path.generator == VertexRef::core("d"));

    auto uvw = is_cofinal(fixture("FIX_UVW"));
    CHECK_FALSE(uvw.cofinal);
    CHECK(uvw.failure == SimplicityVerdict::SecondCluster);
    CHECK(uvw.witness == VertexRef::core("w"));

    auto rows = is_cofinal(fixture("FIX_SINKROW"));
    CHECK(rows.failure == SimplicityVerdict::InfiniteClusters);

    auto noend = is_cofinal(fixture("FIX_LOOPCHAIN_NOEND"));
    CHECK(noend.failure == SimplicityVerdict::NoTerminal);

    // One sink cluster, but p@n are infinite emitters outside its closure.
    auto omega = is_cofinal(fixture("FIX_OMEGAROW"));
    CHECK(omega.failure == SimplicityVerdict::ClosureDeficit);
    CHECK(omega.witness == VertexRef::tail("p", 0));

    auto chain = is_cofinal(fixture("FIX_LOOPCHAIN_IN"));
    CHECK(chain.failure == SimplicityVerdict::ClosureDeficit);
}

TEST_CASE("cofinality oracle") {
    CHECK_FALSE(cofinal_oracle(fixture("FIX_GRID23")));
    CHECK_FALSE(cofinal_oracle(fixture("FIX_E22A")));
    CHECK(cofinal_oracle(fixture("FIX_ROSE2")));
    CHECK_THROWS_AS(cofinal_oracle(fixture("FIX_RAY2")), error);
}

TEST_CASE("ter sets") {
    Graph g = fixture("FIX_UVW");
    auto t = ter_sets(g);
    CHECK(t.sink == set(g, "w"));
    CHECK(t.no_exit == set(g, "u"));
    CHECK(t.extreme.empty());
    CHECK(t.paths.empty());
    CHECK(t.all == set(g, "u,w"));

    auto n = ter_sets(fixture("FIX_LOOPCHAIN_NOEND"));
    CHECK(n.all.empty());
    CHECK(n.sink.empty());
}

TEST_CASE("terminal paths") {
    Graph ray = fixture("FIX_RAY2");
    CHECK(is_terminal_path(ray, {{ref(ray, "p@0"), ref(ray, "p@1")}}));
    Graph noend = fixture("FIX_LOOPCHAIN_NOEND");
    CHECK_FALSE(is_terminal_path(noend, {{ref(noend, "p@0")}}));
    Graph omega = fixture("FIX_OMEGAROW");
    CHECK_FALSE(is_terminal_path(omega, {{ref(omega, "p@2")}}));
    CHECK_THROWS_AS(is_terminal_path(ray, {{ref(ray, "p@2"), ref(ray, "p@0")}}), error);
    try {
        Graph uvw = fixture("FIX_UVW");
        is_terminal_path(uvw, {{ref(uvw, "u")}});
        FAIL("expected an error");
    } catch (const error& e) {
        CHECK(e.code() == errc::no_infinite_paths);
    }
}

TEST_CASE("localize") {
    Graph uvw = fixture("FIX_UVW");
    Target t;
    t.kind = Target::CycleTarget;
    t.cycle = cycle_at(uvw, {"u"}, {"a"});
    auto l = localize(uvw, t);
    CHECK(l.hi.H == set(uvw, "u"));
    CHECK(l.lo.H.empty());
    CHECK(l.expected == TerminalKind::NoExitCycle);
    CHECK(l.verdict.case_tag == 'B');

    Graph grid = fixture("FIX_GRID23");
    Target s;
    s.vertex = ref(grid, "w0");
    auto ls = localize(grid, s);
    // w1 emits only into w0, so saturation pulls it in.
    CHECK(ls.hi.H == set(grid, "w0,w1"));
    CHECK(ls.lo.H.empty());
    CHECK(ls.verdict.case_tag == 'A');

    Target r;
    r.kind = Target::RayTarget;
    r.ray = {{ref(uvw, "v")}};
    CHECK_THROWS_AS(localize(uvw, r), error);

    // The loops at v exit into u and w; once those are cut away they are
    // extreme.
    Target b;
    b.kind = Target::CycleTarget;
    b.cycle = cycle_at(uvw, {"v"}, {"b1"});
    auto lb = localize(uvw, b);
    CHECK(lb.lo.H == set(uvw, "u,w"));
    CHECK(lb.expected == TerminalKind::ExtremeCycle);
    CHECK(lb.verdict.case_tag == 'C');

    Graph ray = fixture("FIX_RAY2");
    Target a;
    a.kind = Target::RayTarget;
    a.ray = {{ref(ray, "p@1")}};
    auto la = localize(ray, a);
    CHECK(la.hi.H == VertexSet::all(ray));
    CHECK(la.lo.H.empty());
    CHECK(la.verdict.case_tag == 'D');

    Graph chain = fixture("FIX_LOOPCHAIN_IN");
    Target c;
    c.kind = Target::CycleTarget;
    c.cycle = cycle_at(chain, {"p@3"}, {"t:p>p"});
    auto lc = localize(chain, c);
    CHECK(lc.hi.H == set(chain, "p@0-3"));
    CHECK(lc.lo.H == set(chain, "p@0-2"));
    CHECK(lc.verdict.case_tag == 'B');
}

TEST_CASE("random finite graphs: classes and cofinality match the definitions") {
    std::mt19937 rng(20240611);
    for (int trial = 0; trial < 300; ++trial) {
        Graph g = random_finite_graph(rng, 7, 0.25);
        auto t = terminal_vertices(g);
        CHECK(t.by_kind[TerminalKind::TerminalPath].empty());
        for (const auto& v : g.vertices) CHECK(t.kind_of(VertexRef::core(v)) == oracle_kind(g, v));
        auto verdict = is_cofinal(g);
        CHECK(verdict.cofinal == cofinal_oracle(g));
        if (verdict.cofinal) CHECK(t.kind_of(*verdict.generator) == verdict.kind);
    }
}

TEST_CASE("every vertex reaches a terminal vertex or a strictly decreasing ray") {
    std::vector<Graph> gs;
    for (const auto& [name, text] : fixture_catalog()) gs.push_back(parse_graph(text));
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) gs.push_back(random_finite_graph(rng, 7, 0.25));
    for (const auto& g : gs) {
        Digraph d = materialize(g, g.has_tails() ? 16 : 0);
        TerminalMasks t = terminal_masks(d);
        // A path to the cut frontier stepping between strongly connected
        // components has strictly decreasing trees.
        Mask goal = mask_or(t.all(), d.open);
        Mask ok = backward(d, goal);
        for (int v = 0; v < d.size(); ++v)
            if (d.copy_of(v) < window(d.depth)) CHECK_MESSAGE(ok[v], g.name << " " << d.name(v));
    }
}

TEST_CASE("every member of a cluster generates the cluster's closure") {
    for (const char* name : {"FIX_GRID23", "FIX_UVW", "FIX_RAY2", "FIX_LOOPCHAIN_IN", "FIX_ROSE2", "FIX_E22A"}) {
        Graph g = fixture(name);
        for (const auto& c : clusters(g).clusters) {
            auto members = c.members.finite() ? c.members.members() : std::vector<VertexRef>{};
            if (!c.members.finite())
                for (const auto& [p, e] : c.members.tail)
                    for (auto n : e.members_below(6)) members.push_back(VertexRef::tail(p, n));
            for (const auto& m : members) {
                VertexSet one;
                one.insert(m);
                CHECK_MESSAGE(closure(g, one) == c.closure, name << " " << m.to_string());
            }
        }
    }
}

TEST_CASE("suffixes of paths through a terminal path are terminal") {
    Graph g = fixture("FIX_RAY2");
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> start(0, 5), len(1, 8);
    for (int i = 0; i < 20; ++i) {
        int a = start(rng), n = len(rng);
        Ray beta;
        for (int k = 0; k < n; ++k) beta.vertices.push_back(VertexRef::tail("p", a + k));
        CHECK(is_terminal_path(g, beta));
        Ray suffix{{beta.vertices.begin() + n / 2, beta.vertices.end()}};
        CHECK(is_terminal_path(g, suffix));
    }
}

TEST_CASE("localize on random graphs yields cofinal quotients of the expected case") {
    std::mt19937 rng(99);
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
        Graph g = random_finite_graph(rng, 6, 0.3);
        auto verify = [&](const Target& t) {
            auto l = localize(g, t);
            CHECK(pair_leq(l.lo, l.hi));
            CHECK(l.verdict.cofinal);
            CHECK(l.verdict.case_tag == case_of(l.expected));
            ++checked;
        };
        Digraph d = materialize(g, 0);
        SCC s = strongly_connected(d);
        for (int v = 0; v < d.size(); ++v) {
            Target t;
            t.vertex = d.refs[v];
            if (d.kind[v] == VertexKind::Sink) verify(t);
            if (d.kind[v] == VertexKind::InfiniteEmitter && !s.cyclic[s.comp[v]]) {
                t.kind = Target::InfEmitterOffCycle;
                verify(t);
            }
        }
        auto cs = cycles(g);
        for (std::size_t i = 0; i < cs.size() && i < 6; ++i) {
            Target t;
            t.kind = Target::CycleTarget;
            t.cycle = cs[i];
            verify(t);
        }
    }
    CHECK(checked > 200);
}
