#include <doctest.h>

#include <lpakit/monoid.hpp>
#include <lpakit/series.hpp>

#include "support.hpp"

using namespace lpakit;
using namespace testing_support;

namespace {

const OracleBounds quick{24, 8, 20000};

Graph loop1() { return fixture("FIX_LOOP1"); }

}  // namespace

TEST_CASE("element types by graph criteria") {
    Graph g = fixture("FIX_UVW");
    CHECK(element_type(g, ref(g, "u")) == TypeVerdict{ElementType::Periodic, 1});
    CHECK(element_type(g, ref(g, "v")) == TypeVerdict{ElementType::Aperiodic, 1});
    CHECK(element_type(g, ref(g, "w")) == TypeVerdict{ElementType::Incomparable, 0});

    // [x] = t[a] + t[b] and [a] = t[b], [b] = t[a]: period 1 although the
    // cycle has length 2.
    Graph h = parse_graph("graph h\nvertex x a b\nedge x a 1\nedge x b 1\nedge a b 1\nedge b a 1\n");
    CHECK(element_type(h, ref(h, "x")) == TypeVerdict{ElementType::Periodic, 1});
    CHECK(element_type(h, ref(h, "a")) == TypeVerdict{ElementType::Periodic, 2});

    // x reaches the sink s directly, and the loop at a feeds s at every
    // later length: [x] = t[x] + t[s] although x is not in the saturated
    // closure of the cycle vertices.
    Graph fed = parse_graph("graph fed\nvertex x a s\nedge x a 1\nedge x s 1\nedge a a 1\nedge a s 1\n");
    CHECK(element_type(fed, ref(fed, "x")) == TypeVerdict{ElementType::Aperiodic, 1});
    auto fx = oracle_type(fed, "x", quick);
    CHECK(fx.kind == OracleType::Aperiodic);
    // Through a 2-cycle only even lengths reach s, so the direct edge is
    // never absorbed.
    Graph parity = parse_graph("graph parity\nvertex x a b s\nedge x a 1\nedge x s 1\nedge a b 1\nedge b a 1\nedge a s 1\n");
    CHECK(element_type(parity, ref(parity, "x")).type == ElementType::Incomparable);
    CHECK(element_type(parity, ref(parity, "a")) == TypeVerdict{ElementType::Aperiodic, 2});

    Graph chain = fixture("FIX_LOOPCHAIN_IN");
    CHECK(element_type(chain, ref(chain, "p@0")).type == ElementType::Periodic);
    CHECK(element_type(chain, ref(chain, "p@4")).type == ElementType::Aperiodic);
}

TEST_CASE("monoid types") {
    CHECK(monoid_type(loop1()).kind == MonoidType::Periodic);
    CHECK(monoid_type(fixture("FIX_ROSE2")).kind == MonoidType::Aperiodic);
    CHECK(monoid_type(fixture("FIX_GRID23")).kind == MonoidType::Incomparable);
    auto m = monoid_type(fixture("FIX_UVW"));
    CHECK(m.kind == MonoidType::Mixed);
    CHECK(m.census.periodic.size() == 1u);
    CHECK(m.census.aperiodic.size() == 1u);
    CHECK(m.census.incomparable.size() == 1u);
}

TEST_CASE("minimal ideals and the largest periodic ideal") {
    Graph g = fixture("FIX_UVW");
    auto ideals = minimal_ideals(g);
    REQUIRE(ideals.size() == 2);
    CHECK(ideals[0].cluster.members == set(g, "u"));
    CHECK(ideals[0].type == ElementType::Periodic);
    CHECK(ideals[1].cluster.members == set(g, "w"));
    CHECK(ideals[1].type == ElementType::Incomparable);

    auto grid = minimal_ideals(fixture("FIX_GRID23"));
    CHECK(grid.size() == 3);
    for (const auto& i : grid) CHECK(i.type == ElementType::Incomparable);

    auto ray = minimal_ideals(fixture("FIX_RAY2"));
    REQUIRE(ray.size() == 1);
    CHECK(ray[0].cluster.kind == TerminalKind::TerminalPath);
    CHECK(ray[0].type == ElementType::Incomparable);

    CHECK_THROWS_AS(minimal_ideals(fixture("FIX_SINKROW")), error);

    CHECK(largest_periodic_ideal(g) == AdmissiblePair{set(g, "u"), {}});
    CHECK(largest_periodic_ideal(fixture("FIX_PATH4")) == AdmissiblePair{});
    Graph l = loop1();
    CHECK(largest_periodic_ideal(l) == AdmissiblePair{VertexSet::all(l), {}});
}

TEST_CASE("two-type profiles") {
    auto uvw = two_type_profile(fixture("FIX_UVW"));
    CHECK_FALSE(uvw.disjoint_cycles);
    CHECK_FALSE(uvw.every_cycle_meets_another);
    CHECK_FALSE(uvw.every_vertex_in_cycle_closure);

    auto loop = two_type_profile(loop1());
    CHECK(loop.disjoint_cycles);
    CHECK_FALSE(loop.every_cycle_meets_another);
    CHECK(loop.every_vertex_in_cycle_closure);

    auto rose = two_type_profile(fixture("FIX_ROSE2"));
    CHECK_FALSE(rose.disjoint_cycles);
    CHECK(rose.every_cycle_meets_another);
    CHECK(rose.every_vertex_in_cycle_closure);
}

TEST_CASE("rewriting oracle") {
    Graph l = loop1();
    auto states = oracle_expand(l, MonElem::vertex("v"));
    for (std::int64_t k = 1; k <= 8; ++k)
        CHECK(std::find(states.begin(), states.end(), MonElem::vertex("v", k)) != states.end());
    CHECK(oracle_expand(l, MonElem{}) == std::vector<MonElem>{MonElem{}});
    auto eq = oracle_eq(l, MonElem::vertex("v"), MonElem::vertex("v", 1));
    CHECK(eq.found);
    CHECK(eq.trace.size() == 1);

    Graph g = fixture("FIX_UVW");
    auto ex = oracle_expand(g, MonElem::vertex("v"), {24, 8, 50});
    MonElem once{{{"u", {}, 1}, {"v", {}, 1}, {"v", {}, 1}, {"w", {}, 1}}};
    once.normalize();
    CHECK(std::find(ex.begin(), ex.end(), once) != ex.end());

    auto geq = oracle_geq(g, MonElem::vertex("v"), MonElem::vertex("v", 1), quick);
    REQUIRE(geq.found);
    CHECK(geq.residual.to_string() == "t[u] + t[v] + t[w]");
    CHECK_FALSE(oracle_geq(g, MonElem::vertex("w"), MonElem::vertex("w", 1), quick).found);

    auto u = oracle_type(g, "u");
    CHECK(u.kind == OracleType::Periodic);
    CHECK(u.n == 1);
    CHECK(replay(g, MonElem::vertex("u"), u.trace, MonElem::vertex("u", 1)));
    auto v = oracle_type(g, "v");
    CHECK(v.kind == OracleType::Aperiodic);
    CHECK(v.n == 1);
    CHECK(replay(g, MonElem::vertex("v"), v.trace, detail::combine(v.residual, MonElem::vertex("v", 1))));
    CHECK(oracle_type(g, "w", quick).kind == OracleType::Unknown);

    // A tampered trace is rejected.
    auto bad = v.trace;
    bad[0].added.gens.pop_back();
    CHECK_FALSE(replay(g, MonElem::vertex("v"), bad, detail::combine(v.residual, MonElem::vertex("v", 1))));
}

TEST_CASE("emitter relations in the oracle") {
    Graph g = fixture("FIX_LOOPOMEGA");
    auto v = oracle_type(g, "v", quick);
    CHECK(v.kind == OracleType::Aperiodic);
    // [v] = [q_Z] + t[w] for a one-edge Z into w, and back.
    auto states = oracle_expand(g, MonElem::vertex("v"), {6, 2, 2000});
    bool q = false;
    for (const auto& s : states)
        for (const auto& x : s.gens) q = q || x.is_q();
    CHECK(q);
}

TEST_CASE("classifier and oracle agree on random graphs") {
    std::mt19937 rng(515);
    std::vector<Graph> gs;
    for (const auto& [name, text] : fixture_catalog()) {
        Graph g = parse_graph(text);
        if (!g.has_tails()) gs.push_back(g);
    }
    for (int i = 0; i < 100; ++i) gs.push_back(random_finite_graph(rng, 5, 0.3, 0.1));
    for (const auto& g : gs)
        for (const auto& v : g.vertices) {
            auto cls = element_type(g, VertexRef::core(v));
            auto o = oracle_type(g, v, quick);
            if (o.kind == OracleType::Periodic) CHECK(cls.type == ElementType::Periodic);
            if (o.kind == OracleType::Aperiodic) CHECK(cls.type == ElementType::Aperiodic);
            if (cls.type == ElementType::Incomparable) CHECK(o.kind == OracleType::Unknown);
            if (o.kind == OracleType::Periodic) CHECK(cls.n <= o.n);
        }
}

TEST_CASE("monoid is incomparable exactly when the graph is acyclic") {
    std::mt19937 rng(77);
    for (int i = 0; i < 300; ++i) {
        Graph g = random_finite_graph(rng, 7, 0.2);
        CHECK((monoid_type(g).kind == MonoidType::Incomparable) == cycles(g).empty());
    }
}

TEST_CASE("minimal ideals sit at the bottom of the pair lattice") {
    std::mt19937 rng(31);
    for (int i = 0; i < 60; ++i) {
        Graph g = random_finite_graph(rng, 5, 0.3);
        auto lat = enumerate_pairs(g);
        int bottom = lat.index_of(AdmissiblePair{});
        for (const auto& m : minimal_ideals(g)) {
            int k = lat.index_of(m.generator);
            REQUIRE(k >= 0);
            for (std::size_t j = 0; j < lat.pairs.size(); ++j) {
                if (static_cast<int>(j) == k || static_cast<int>(j) == bottom) continue;
                CHECK_FALSE(lat.leq[j][k]);
            }
        }
    }
}

TEST_CASE("series factors have the type of their cluster") {
    std::mt19937 rng(808);
    for (int i = 0; i < 150; ++i) {
        Graph g = random_finite_graph(rng, 6, 0.3, 0.15);
        auto r = build_series(g);
        REQUIRE(r.status == SeriesStatus::HasSeries);
        bool disjoint = two_type_profile(g).disjoint_cycles;
        for (const auto& f : r.factors) {
            if (disjoint) CHECK(f.type != ElementType::Aperiodic);
            if (!f.graph || f.graph->has_tails()) continue;
            auto m = monoid_type(*f.graph);
            auto want = f.type == ElementType::Periodic    ? MonoidType::Periodic
                        : f.type == ElementType::Aperiodic ? MonoidType::Aperiodic
                                                           : MonoidType::Incomparable;
            CHECK_MESSAGE(m.kind == want, emit_graph(*f.graph));
        }
    }
}
