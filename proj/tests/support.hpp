#pragma once

#include <random>
#include <set>
#include <string>

#include <lpakit/fixtures.hpp>
#include <lpakit/io.hpp>

namespace testing_support {

inline lpakit::Graph fixture(const std::string& name) { return lpakit::parse_graph(lpakit::fixture_text(name)); }

inline lpakit::VertexSet set(const lpakit::Graph& g, const std::string& s) { return lpakit::parse_vertex_set(g, s); }

inline lpakit::VertexRef ref(const lpakit::Graph& g, const std::string& s) { return lpakit::parse_vertex_ref(g, s); }

// Random finite graph on vertices v0..v{n-1}; each ordered pair gets a
// bundle with probability `density`, occasionally an ω-bundle.
inline lpakit::Graph random_finite_graph(std::mt19937& rng, int max_vertices = 5, double density = 0.3,
                                         double omega_rate = 0.1) {
    lpakit::Graph g;
    g.name = "random";
    std::uniform_int_distribution<int> size(1, max_vertices);
    std::uniform_real_distribution<double> coin(0, 1);
    int n = size(rng);
    for (int i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
    int id = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (coin(rng) >= density) continue;
            lpakit::Mult m = coin(rng) < omega_rate ? lpakit::omega : (coin(rng) < 0.8 ? 1 : 2);
            g.bundles.push_back({"e" + std::to_string(id++), g.vertices[a], g.vertices[b], m, true});
        }
    return g;
}

// Random graph with one tail (pattern of one or two vertices) and a small
// core, attached on one side only.
inline lpakit::Graph random_tail_graph(std::mt19937& rng) {
    using namespace lpakit;
    std::uniform_real_distribution<double> coin(0, 1);
    std::uniform_int_distribution<int> core_size(0, 3), pat_size(1, 2);
    Graph g = random_finite_graph(rng, 3, 0.3, 0.1);
    g.vertices.resize(std::min(g.vertices.size(), static_cast<std::size_t>(core_size(rng))));
    std::erase_if(g.bundles, [&](const Bundle& b) { return !g.is_core(b.src) || !g.is_core(b.dst); });
    Tail t;
    t.id = "t";
    t.dir = coin(rng) < 0.5 ? Direction::outward : Direction::inward;
    for (int i = 0; i < pat_size(rng); ++i) t.pattern.push_back("p" + std::to_string(i));
    for (const auto& a : t.pattern)
        for (const auto& b : t.pattern) {
            if (coin(rng) < 0.25) t.intra.push_back({a, b, coin(rng) < 0.8 ? 1u : 2u});
            if (coin(rng) < 0.5) t.inter.push_back({a, b, coin(rng) < 0.8 ? 1u : 2u});
        }
    if (!g.vertices.empty()) {
        std::uniform_int_distribution<std::size_t> pick_core(0, g.vertices.size() - 1), pick_pat(0, t.pattern.size() - 1);
        if (coin(rng) < 0.5) {
            if (coin(rng) < 0.6) t.attach_in.push_back({g.vertices[pick_core(rng)], t.pattern[pick_pat(rng)], 1});
        } else {
            if (coin(rng) < 0.5) t.attach_out0.push_back({t.pattern[pick_pat(rng)], g.vertices[pick_core(rng)], 1});
            if (coin(rng) < 0.5)
                t.attach_out_all.push_back({t.pattern[pick_pat(rng)], g.vertices[pick_core(rng)], coin(rng) < 0.2 ? omega : 1});
        }
    }
    g.tails.push_back(t);
    g.validate();
    return g;
}

// Plain adjacency reachability on a finite graph, independent of the
// library's materialization.
inline std::set<std::string> reach_from(const lpakit::Graph& g, const std::string& v) {
    std::set<std::string> seen{v};
    std::vector<std::string> stack{v};
    while (!stack.empty()) {
        std::string x = stack.back();
        stack.pop_back();
        for (const auto& b : g.bundles)
            if (b.src == x && seen.insert(b.dst).second) stack.push_back(b.dst);
    }
    return seen;
}

inline std::set<std::string> reach_to(const lpakit::Graph& g, const std::string& v) {
    std::set<std::string> seen{v};
    std::vector<std::string> stack{v};
    while (!stack.empty()) {
        std::string x = stack.back();
        stack.pop_back();
        for (const auto& b : g.bundles)
            if (b.dst == x && seen.insert(b.src).second) stack.push_back(b.src);
    }
    return seen;
}

}  // namespace testing_support
