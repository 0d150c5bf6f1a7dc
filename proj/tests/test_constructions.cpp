#include <doctest.h>

#include <lpakit/constructions.hpp>
#include <lpakit/fixtures.hpp>
#include <lpakit/io.hpp>

using namespace lpakit;

namespace {

Graph fixture(const std::string& name) { return parse_graph(fixture_text(name)); }

VertexSet set(const Graph& g, const std::string& s) { return parse_vertex_set(g, s); }

std::set<std::string> vertex_ids(const Graph& g) { return {g.vertices.begin(), g.vertices.end()}; }

std::set<std::string> words(const PathSet& p) {
    std::set<std::string> out;
    for (const auto& w : p.paths) out.insert(path_word(w));
    return out;
}

}  // namespace

TEST_CASE("pq of the grid: G/H keeps v0, v1 and one spine") {
    Graph g = fixture("FIX_GRID23");
    VertexSet h = set(g, "w0,w1"), gs = set(g, "v0,v1,w0,w1");
    auto r = porcupine_quotient(g, {h, {}}, {gs, {}});
    CHECK(vertex_ids(r.graph) == std::set<std::string>{"v0", "v1", "w^e"});
    REQUIRE(r.graph.bundles.size() == 2);
    std::map<std::string, std::pair<std::string, std::string>> es;
    for (const auto& b : r.graph.bundles) es[b.id] = {b.src, b.dst};
    CHECK(es["h"] == std::make_pair(std::string("v1"), std::string("v0")));
    CHECK(es["f^e"] == std::make_pair(std::string("w^e"), std::string("v1")));
    CHECK(r.vertices["w^e"].kind == Provenance::Spine);
    CHECK(r.edges["f^e"].kind == Provenance::SpineEdge);
    CHECK(words(r.paths.f1) == std::set<std::string>{"e"});
    CHECK(r.paths.f2.empty());
}

TEST_CASE("porcupine of the grid sink row") {
    Graph g = fixture("FIX_GRID23");
    auto r = porcupine_graph(g, {set(g, "w0,w1"), {}});
    CHECK(vertex_ids(r.graph) == std::set<std::string>{"w0", "w1", "w^g", "w^{eg}"});
    CHECK(r.graph.bundles.size() == 3);
    std::map<std::string, std::string> dst;
    for (const auto& b : r.graph.bundles) dst[b.id] = b.dst;
    CHECK(dst["f^g"] == "w1");
    CHECK(dst["f^{eg}"] == "w^g");
}

TEST_CASE("quotient and relative quotient of the grid") {
    Graph g = fixture("FIX_GRID23");
    VertexSet h = set(g, "w0,w1"), gs = set(g, "v0,v1,w0,w1");
    auto q = quotient_graph(g, {gs, {}});
    CHECK(vertex_ids(q.graph) == std::set<std::string>{"u0", "u1"});
    CHECK(q.graph.bundles.size() == 1);
    auto rq = relative_quotient(g, h, gs);
    CHECK(vertex_ids(rq.graph) == std::set<std::string>{"v0", "v1"});
    REQUIRE(rq.graph.bundles.size() == 1);
    CHECK(rq.graph.bundles[0].id == "h");
    auto pq = porcupine_quotient(g, {h, {}}, {gs, {}});
    CHECK(pq.graph.vertices.size() == rq.graph.vertices.size() + 1);
}

TEST_CASE("F-paths of the hedgehog example") {
    Graph g = fixture("FIX_E22A");
    auto f = f_paths(g, {}, {set(g, "v"), set(g, "w")});
    CHECK(f.f1.kind == PathSet::ExplicitFinite);
    CHECK(words(f.f1) == std::set<std::string>{"e3", "e2e3", "e1e2e3"});
    CHECK(words(f.f2) == std::set<std::string>{"e1"});
    auto q = quotient_graph(g, {set(g, "v"), set(g, "w")});
    CHECK(vertex_ids(q.graph) == std::set<std::string>{"x", "w", "y", "z"});
    CHECK(q.graph.bundles.size() == 3);
}

TEST_CASE("loop with an omega-bundle") {
    Graph g = fixture("FIX_LOOPOMEGA");
    VertexSet w = set(g, "w"), v = set(g, "v");
    auto q = quotient_graph(g, {w, v});
    CHECK(vertex_ids(q.graph) == std::set<std::string>{"v"});
    REQUIRE(q.graph.bundles.size() == 1);
    CHECK(q.graph.bundles[0].src == "v");
    CHECK(q.graph.bundles[0].dst == "v");

    auto pq = porcupine_quotient(g, {w, {}}, {w, v});
    CHECK(vertex_ids(pq.graph) == std::set<std::string>{"v"});
    REQUIRE(pq.graph.tails.size() == 1);
    const Tail& t = pq.graph.tails[0];
    CHECK(t.dir == Direction::inward);
    CHECK(t.pattern == std::vector<std::string>{"w^e"});
    CHECK(t.inter == std::vector<Link>{{"w^e", "w^e", 1}});
    CHECK(t.attach_out0 == std::vector<Link>{{"w^e", "v", 1}});

    auto f = f_paths(g, {w, {}}, {w, v});
    CHECK(f.f1.empty());
    CHECK(f.f2.kind == PathSet::PeriodicFamily);
    REQUIRE(f.f2.families.size() == 1);
    CHECK(path_word(f.f2.families[0].at(0)) == "e");
    CHECK(path_word(f.f2.families[0].at(2)) == "eee");

    CHECK_THROWS_WITH_AS(porcupine_graph(g, {w, {}}), doctest::Contains("ω-bundle"), error);
}

TEST_CASE("two loops feeding a sink are unrepresentable") {
    Graph g = fixture("FIX_F2LOOPS");
    try {
        porcupine_graph(g, {set(g, "s"), {}});
        FAIL("expected Unrepresentable");
    } catch (const error& e) {
        CHECK(e.code() == errc::unrepresentable);
        CHECK(e.witness().find("two loops f1, f2 at b") != std::string::npos);
    }
    auto f = f_paths(g, {}, {set(g, "s"), {}});
    CHECK(f.f1.kind == PathSet::InfiniteBranching);
}

TEST_CASE("trivial constructions") {
    Graph g = fixture("FIX_E22A");
    auto q = quotient_graph(g, {});
    CHECK(q.graph == g);
    AdmissiblePair p{set(g, "v"), set(g, "w")};
    auto pq = porcupine_quotient(g, p, p);
    CHECK(pq.graph.vertices.empty());
    CHECK(pq.graph.bundles.empty());
    auto rq = relative_quotient(g, set(g, "v"), set(g, "v"));
    CHECK(rq.graph.vertices.empty());
}

TEST_CASE("restricting a tail regroups copies") {
    Graph g = fixture("FIX_RAY2");
    // Even copies only: every other copy, cut at 0.
    VertexSet even;
    even.tail["p"] = EPSet(0, 2, {true, false}, {});
    auto r = restrict_to(g, even);
    REQUIRE(r.graph.tails.size() == 1);
    CHECK(r.graph.tails[0].pattern == std::vector<std::string>{"p~0"});
    CHECK(r.graph.tails[0].inter.empty());
    CHECK(r.origin.lift(VertexRef::tail("p~0", 3)) == VertexRef::tail("p", 6));
    VertexSet back = r.origin.lift(VertexSet::all(r.graph));
    CHECK(back == even);

    VertexSet from3;
    from3.tail["p"] = EPSet::at_least(3);
    auto r3 = restrict_to(g, from3);
    CHECK(r3.graph.tails[0].pattern == std::vector<std::string>{"p"});
    CHECK(r3.graph.vertices.empty());
    CHECK(r3.origin.lift(VertexRef::tail("p", 0)) == VertexRef::tail("p", 3));
}

TEST_CASE("quotient of a tail graph materializes the seam") {
    Graph c = fixture("FIX_LOOPCHAIN_IN");
    VertexSet low;
    low.tail["p"] = EPSet::range(0, 2);
    auto q = quotient_graph(c, {low, {}});
    CHECK(q.graph.tails.size() == 1);
    CHECK(q.origin.lift(VertexSet::all(q.graph)) == VertexSet::all(c) - low);
    CHECK(parse_graph(emit_graph(q.graph)) == q.graph);
}
