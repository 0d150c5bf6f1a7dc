#include <doctest.h>

#include <lpakit/structure.hpp>

#include "support.hpp"

using namespace lpakit;
using namespace testing_support;

namespace {

// Transitive closure by Warshall on the adjacency matrix.
std::vector<std::vector<char>> warshall(const Graph& g) {
    std::size_t n = g.vertices.size();
    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < n; ++i) at[g.vertices[i]] = i;
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
    for (const auto& b : g.bundles) r[at[b.src]][at[b.dst]] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = 1;
    return r;
}

// Simple cycles as vertex sequences starting at their least vertex, by
// plain backtracking.
std::set<std::vector<std::string>> brute_cycles(const Graph& g) {
    std::set<std::vector<std::string>> out;
    std::vector<std::string> path;
    std::function<void(const std::string&)> go = [&](const std::string& x) {
        for (const auto& b : g.bundles) {
            if (b.src != x) continue;
            if (b.dst == path.front()) out.insert(path);
            else if (b.dst > path.front() && std::find(path.begin(), path.end(), b.dst) == path.end()) {
                path.push_back(b.dst);
                go(b.dst);
                path.pop_back();
            }
        }
    };
    for (const auto& v : g.vertices) {
        path = {v};
        go(v);
    }
    return out;
}

}  // namespace

TEST_CASE("parsing") {
    Graph g = fixture("FIX_GRID23");
    CHECK(g.vertices.size() == 6);
    CHECK(g.bundles.size() == 5);
    CHECK(g.tails.empty());

    CHECK_THROWS_AS(parse_graph("graph x\nvertex\n"), error);
    try {
        parse_graph(fixture_text("FIX_OMEGAROW") + "  attach_in s p\n");
        FAIL("expected an attachment error");
    } catch (const error& e) {
        CHECK(e.code() == errc::attachment_rule_violation);
    }
    try {
        parse_graph("graph x\nvertex a\nedge a b 1\n");
        FAIL("expected a parse error");
    } catch (const error& e) {
        CHECK(e.code() == errc::parse_error);
    }
}

TEST_CASE("classify vertices") {
    Graph e = fixture("FIX_E22A");
    CHECK(classify_vertex(e, ref(e, "w")) == VertexKind::InfiniteEmitter);
    Graph g = fixture("FIX_GRID23");
    CHECK(classify_vertex(g, ref(g, "u0")) == VertexKind::Sink);
    Graph r = fixture("FIX_RAY2");
    CHECK(classify_vertex(r, ref(r, "p@7")) == VertexKind::Regular);
    CHECK_THROWS_AS(classify_vertex(g, VertexRef::core("zz")), error);
}

TEST_CASE("tree and root examples") {
    Graph g = fixture("FIX_GRID23");
    CHECK(tree(g, set(g, "v1")) == set(g, "v1,v0,w1,w0"));
    CHECK(tree(g, {}).empty());
    CHECK(root(g, set(g, "w0")) == set(g, "w0,w1,v1,u1"));
    CHECK(root(g, VertexSet::all(g)) == VertexSet::all(g));

    Graph ray = fixture("FIX_RAY1");
    CHECK(tree(ray, set(ray, "p@3")) == set(ray, "p@3-"));
    Graph chain = fixture("FIX_LOOPCHAIN_IN");
    CHECK(root(chain, set(chain, "p@0")) == VertexSet::all(chain));
}

TEST_CASE("cycles") {
    Graph uvw = fixture("FIX_UVW");
    auto cs = cycles(uvw);
    CHECK(cs.size() == 3);
    for (const auto& c : cs) CHECK_FALSE(c.periodic);
    CHECK(cycles(fixture("FIX_GRID23")).empty());
    auto chain = cycles(fixture("FIX_LOOPCHAIN_IN"));
    REQUIRE(chain.size() == 1);
    CHECK(chain[0].periodic);

    std::map<std::string, CycleClass> classes;
    for (const auto& c : cs) classes[c.edges[0]] = cycle_class(uvw, c);
    CHECK(classes["a"] == CycleClass::NoExit);
    CHECK(classes["b1"] == CycleClass::Other);
    CHECK(classes["b2"] == CycleClass::Other);
    for (const auto& c : cycles(fixture("FIX_ROSE2"))) CHECK(cycle_class(fixture("FIX_ROSE2"), c) == CycleClass::Extreme);
}

TEST_CASE("tree and root match transitive closure on random graphs") {
    std::mt19937 rng(1);
    for (int i = 0; i < 200; ++i) {
        Graph g = random_finite_graph(rng, 7, 0.25);
        auto r = warshall(g);
        for (std::size_t a = 0; a < g.vertices.size(); ++a) {
            VertexSet one = VertexSet::of({g.vertices[a]});
            VertexSet t = tree(g, one), rt = root(g, one);
            for (std::size_t b = 0; b < g.vertices.size(); ++b) {
                CHECK(t.contains(VertexRef::core(g.vertices[b])) == static_cast<bool>(r[a][b]));
                CHECK(rt.contains(VertexRef::core(g.vertices[b])) == static_cast<bool>(r[b][a]));
            }
            // Extensive and idempotent.
            CHECK(one.subset_of(t));
            CHECK(tree(g, t) == t);
            CHECK(root(g, rt) == rt);
        }
    }
}

TEST_CASE("simple cycles match a brute-force enumeration") {
    std::mt19937 rng(2);
    for (int i = 0; i < 150; ++i) {
        Graph g = random_finite_graph(rng, 8, 0.2, 0.0);
        std::set<std::vector<std::string>> got;
        for (const auto& c : cycles(g)) {
            std::vector<std::string> vs;
            for (const auto& v : c.vertices) vs.push_back(v.id);
            std::rotate(vs.begin(), std::min_element(vs.begin(), vs.end()), vs.end());
            got.insert(vs);
        }
        CHECK(got == brute_cycles(g));
        // One edge-level cycle per choice of parallel edge.
        std::size_t expected = 0;
        for (const auto& vs : brute_cycles(g)) {
            std::size_t k = 1;
            for (std::size_t j = 0; j < vs.size(); ++j) {
                Mult m = 0;
                for (const auto& b : g.bundles)
                    if (b.src == vs[j] && b.dst == vs[(j + 1) % vs.size()]) m += b.mult;
                k *= m;
            }
            expected += k;
        }
        CHECK(cycles(g).size() == expected);
    }
}

TEST_CASE("EPSet canonical form") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> small(0, 6), per(1, 4);
    std::uniform_real_distribution<double> coin(0, 1);
    for (int i = 0; i < 500; ++i) {
        EPSet::index t = small(rng), p = per(rng);
        std::vector<bool> mask(p);
        for (auto&& m : mask) m = coin(rng) < 0.5;
        std::vector<EPSet::index> ex;
        for (EPSet::index k = 0; k < t; ++k)
            if (coin(rng) < 0.5) ex.push_back(k);
        EPSet a(t, p, mask, ex);
        // Same membership described with a longer threshold and a multiple
        // of the period.
        EPSet::index t2 = t + small(rng), p2 = p * per(rng);
        std::vector<bool> bits(t2 + p2);
        for (EPSet::index k = 0; k < t2 + p2; ++k) bits[k] = a.contains(k);
        EPSet b = EPSet::from_bits(bits, t2, p2);
        for (EPSet::index k = 0; k < 60; ++k) REQUIRE(a.contains(k) == b.contains(k));
        CHECK(a == b);
        CHECK((a | b) == a);
        CHECK((a - b).empty());
        for (EPSet::index k = 0; k < 60; ++k) CHECK(a.complement().contains(k) != a.contains(k));
    }
}

TEST_CASE("emit and parse round-trip") {
    for (const auto& [name, text] : fixture_catalog()) {
        Graph g = parse_graph(text);
        CHECK(emit_graph(g) == text);
        CHECK(parse_graph(emit_graph(g)) == g);
    }
    std::mt19937 rng(4);
    for (int i = 0; i < 100; ++i) {
        Graph g = i % 2 ? random_finite_graph(rng, 6) : random_tail_graph(rng);
        CHECK(parse_graph(emit_graph(g)) == g);
    }
}

TEST_CASE("tail results do not depend on the unroll depth") {
    std::mt19937 rng(5);
    for (int i = 0; i < 100; ++i) {
        Graph g = random_tail_graph(rng);
        VertexSet v;
        v.insert(VertexRef::tail("p0", 2));
        auto shallow = tree(g, v, {8}), deep = tree(g, v, {64});
        CHECK(shallow == deep);
        CHECK(root(g, v, {8}) == root(g, v, {64}));
    }
}

TEST_CASE("copy sets read back from their text") {
    std::mt19937 rng(6);
    std::uniform_int_distribution<int> small(0, 6), per(1, 4);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 300; ++i) {
        EPSet::index t = small(rng), p = per(rng);
        std::vector<bool> mask(p);
        for (auto&& m : mask) m = coin(rng);
        std::vector<EPSet::index> ex;
        for (EPSet::index k = 0; k < t; ++k)
            if (coin(rng)) ex.push_back(k);
        EPSet a(t, p, mask, ex);
        CHECK(parse_epset(a.to_string()) == a);
    }
    CHECK_THROWS_AS(parse_epset("{1,x}"), error);
    CHECK_THROWS_AS(parse_epset("n>=2"), error);
}
