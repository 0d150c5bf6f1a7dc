#pragma once

// JSON reports and DOT export. Reports share one envelope:
//   {"tool": "lpakit", "schema_version": N, "command": ..., "graph": ...,
//    "status": "ok" | "error", "result": {...} | "error": {...}}
// The layout is described by schema/lpakit-report.schema.json.

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "constructions.hpp"
#include "monoid.hpp"
#include "series.hpp"
#include "terminal.hpp"

namespace lpakit {

inline constexpr int report_schema_version = 1;

namespace report {

using json = nlohmann::ordered_json;

inline json mult(Mult m) {
    if (m == omega) return "omega";
    return m;
}

// Core ids sorted, tails as eventually periodic copy sets.
inline json of(const VertexSet& s) {
    json j;
    j["core"] = std::vector<std::string>(s.core.begin(), s.core.end());
    json tail = json::object();
    for (const auto& [p, e] : s.tail) tail[p] = e.to_string();
    j["tail"] = tail;
    j["finite"] = s.finite();
    j["text"] = s.to_string();
    return j;
}

inline json of(const std::optional<VertexRef>& v) { return v ? json(v->to_string()) : json(nullptr); }

inline json of(const AdmissiblePair& p) { return {{"H", of(p.H)}, {"S", of(p.S)}}; }

inline json of(const Graph& g) {
    json j;
    j["name"] = g.name;
    j["vertices"] = g.vertices;
    json bs = json::array();
    for (const auto& b : g.bundles) bs.push_back({{"id", b.id}, {"src", b.src}, {"dst", b.dst}, {"mult", mult(b.mult)}});
    j["bundles"] = bs;
    json ts = json::array();
    for (const auto& t : g.tails) {
        auto links = [](const std::vector<Link>& ls) {
            json a = json::array();
            for (const auto& l : ls) a.push_back({{"src", l.src}, {"dst", l.dst}, {"mult", mult(l.mult)}});
            return a;
        };
        ts.push_back({{"id", t.id},
                      {"direction", t.dir == Direction::outward ? "outward" : "inward"},
                      {"pattern", t.pattern},
                      {"intra", links(t.intra)},
                      {"inter", links(t.inter)},
                      {"attach_in", links(t.attach_in)},
                      {"attach_out0", links(t.attach_out0)},
                      {"attach_out_all", links(t.attach_out_all)}});
    }
    j["tails"] = ts;
    j["text"] = emit_graph(g);
    return j;
}

inline json of(const PathSet& p) {
    json j;
    j["kind"] = PathSet::name(p.kind);
    json words = json::array();
    for (const auto& w : p.paths) words.push_back(path_word(w, "."));
    j["paths"] = words;
    json fams = json::array();
    for (const auto& f : p.families)
        fams.push_back({{"head", path_word(f.head, ".")},
                        {"pump", path_word(f.pump, ".")},
                        {"rest", path_word(f.rest, ".")},
                        {"parallel", f.parallel},
                        {"first", path_word(f.at(0), ".")}});
    j["families"] = fams;
    if (!p.witness.empty()) j["witness"] = p.witness;
    return j;
}

inline json of(const ConstructionResult& r) {
    json j;
    j["graph"] = of(r.graph);
    auto prov = [](const std::map<std::string, Provenance>& m) {
        json a = json::array();
        for (const auto& [id, p] : m) a.push_back({{"id", id}, {"provenance", Provenance::name(p.kind)}, {"ref", p.ref}});
        return a;
    };
    j["vertex_provenance"] = prov(r.vertices);
    j["edge_provenance"] = prov(r.edges);
    j["f1"] = of(r.paths.f1);
    j["f2"] = of(r.paths.f2);
    return j;
}

inline json of(const Cluster& c) {
    return {{"kind", terminal_kind_name(c.kind)},
            {"type", element_type_name(element_type_of(c.kind))},
            {"representative", c.representative.to_string()},
            {"members", of(c.members)},
            {"closure", of(c.closure)}};
}

inline json of(const ClusterReport& r) {
    json a = json::array();
    for (const auto& c : r.clusters) a.push_back(of(c));
    json j{{"infinite", r.infinite}, {"clusters", a}};
    if (r.infinite) j["family"] = r.family;
    return j;
}

inline json of(const TerminalSets& t) {
    json j = json::object();
    for (auto k : terminal_kinds) {
        auto it = t.by_kind.find(k);
        j[terminal_kind_name(k)] = of(it == t.by_kind.end() ? VertexSet{} : it->second);
    }
    return j;
}

inline json of(const SimplicityVerdict& v) {
    json j;
    j["cofinal"] = v.cofinal;
    if (v.cofinal) {
        j["case"] = std::string(1, v.case_tag);
        j["kind"] = v.kind ? json(terminal_kind_name(*v.kind)) : json(nullptr);
        j["generator"] = of(v.generator);
    } else {
        j["failure"] = SimplicityVerdict::failure_name(v.failure);
        j["witness"] = of(v.witness);
    }
    if (!v.detail.empty()) j["detail"] = v.detail;
    return j;
}

inline json of(const ConditionVerdict& c) {
    json j{{"ok", c.ok}};
    if (!c.ok) j["witness"] = c.witness;
    return j;
}

inline json of(const Factor& f) {
    json j;
    j["lo"] = of(f.lo);
    j["hi"] = of(f.hi);
    j["step"] = f.step == Factor::ClusterStep ? "cluster" : "breaking";
    j["stage"] = f.stage;
    j["cluster"] = of(f.cluster);
    j["kind"] = terminal_kind_name(f.kind);
    j["type"] = element_type_name(f.type);
    j["simplicity"] = of(f.verdict);
    j["graph"] = f.graph ? of(*f.graph) : json(nullptr);
    if (!f.unrepresentable.empty()) j["unrepresentable"] = f.unrepresentable;
    return j;
}

inline json of(const StageReport& s) {
    return {{"n", s.n},
            {"graph", emit_graph(s.graph)},
            {"ter", of(s.ter)},
            {"clusters", of(s.clusters)},
            {"breaking", of(s.breaking)},
            {"breaking_infinite", s.breaking_infinite},
            {"a", of(s.a)},
            {"b", of(s.b)},
            {"c", of(s.c)},
            {"pair", of(s.pair)}};
}

inline json of(const SeriesReport& r) {
    json j;
    j["status"] = series_status_name(r.status);
    if (r.status != SeriesStatus::HasSeries) {
        j["reason"] = no_series_reason_name(r.reason);
        j["failed_stage"] = r.stage;
        j["witness"] = r.witness;
    }
    json chain = json::array();
    for (const auto& p : r.chain) chain.push_back(of(p));
    j["chain"] = chain;
    j["length"] = r.chain.empty() ? 0 : r.chain.size() - 1;
    json fs = json::array();
    for (const auto& f : r.factors) fs.push_back(of(f));
    j["factors"] = fs;
    json st = json::array();
    for (const auto& s : r.stages) st.push_back(of(s));
    j["stages"] = st;
    return j;
}

inline json of(const SeriesCheck& c) {
    json j{{"valid", c.valid}, {"length", c.length}};
    if (!c.valid) {
        j["failed_step"] = c.failed_step;
        j["reason"] = c.reason;
    }
    json fs = json::array();
    for (const auto& f : c.factors) fs.push_back(of(f));
    j["factors"] = fs;
    return j;
}

inline json of(const TypeVerdict& t) {
    json j{{"type", element_type_name(t.type)}};
    j["n"] = t.n ? json(t.n) : json(nullptr);
    return j;
}

inline json of(const MonoidType& m) {
    return {{"type", MonoidType::name(m.kind)},
            {"periodic", of(m.census.periodic)},
            {"aperiodic", of(m.census.aperiodic)},
            {"incomparable", of(m.census.incomparable)}};
}

inline json of(const TwoTypeProfile& p) {
    return {{"disjoint_cycles", p.disjoint_cycles},
            {"every_cycle_meets_another", p.every_cycle_meets_another},
            {"every_vertex_in_cycle_closure", p.every_vertex_in_cycle_closure}};
}

inline json of(const std::vector<RewriteStep>& trace) {
    json a = json::array();
    for (const auto& s : trace) {
        auto sel = [](const std::vector<std::pair<std::string, std::uint64_t>>& z) {
            json o = json::array();
            for (const auto& [b, k] : z) o.push_back({{"bundle", b}, {"count", k}});
            return o;
        };
        static const char* names[] = {"regular", "emitter", "selection"};
        a.push_back({{"relation", names[s.relation]},
                     {"direction", s.expand ? "expand" : "contract"},
                     {"vertex", s.vertex},
                     {"shift", s.shift},
                     {"z", sel(s.z)},
                     {"w", sel(s.w)},
                     {"removed", s.removed.to_string()},
                     {"added", s.added.to_string()}});
    }
    return a;
}

inline json of(const OracleType& t) {
    static const char* names[] = {"Periodic", "Aperiodic", "Unknown"};
    json j{{"type", names[t.kind]}};
    j["n"] = t.n ? json(t.n) : json(nullptr);
    j["trace"] = of(t.trace);
    if (t.kind == OracleType::Aperiodic) j["residual"] = t.residual.to_string();
    return j;
}

inline json of(const PairLattice& lat) {
    json ps = json::array();
    for (const auto& p : lat.pairs) ps.push_back(of(p));
    json covers = json::array();
    std::size_t n = lat.pairs.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b || !lat.leq[a][b]) continue;
            bool cover = true;
            for (std::size_t c = 0; c < n && cover; ++c)
                cover = c == a || c == b || !(lat.leq[a][c] && lat.leq[c][b]);
            if (cover) covers.push_back({a, b});
        }
    return {{"pairs", ps}, {"covers", covers}};
}

inline json envelope(const std::string& command, const std::string& graph, json result) {
    return {{"tool", "lpakit"},
            {"schema_version", report_schema_version},
            {"command", command},
            {"graph", graph},
            {"status", "ok"},
            {"result", std::move(result)}};
}

inline json failure(const std::string& command, const std::string& graph, const error& e) {
    json err{{"kind", errc_name(e.code())}, {"witness", e.witness()}};
    if (e.code() == errc::parse_error && e.line()) err["line"] = e.line();
    return {{"tool", "lpakit"},
            {"schema_version", report_schema_version},
            {"command", command},
            {"graph", graph},
            {"status", "error"},
            {"error", err}};
}

}  // namespace report

// DOT export. Tails are drawn as a finite prefix of `copies` copies with a
// dashed stub where the graph continues.
struct DotStyle {
    std::uint64_t copies = 3;
    const std::map<std::string, Provenance>* provenance = nullptr;
    std::map<std::string, int> cluster_of;  // vertex ref text -> cluster index
};

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

inline std::string to_dot(const Graph& g, const DotStyle& style = {}) {
    static const char* palette[] = {"#fde2a8", "#c9e4c5", "#cfe0f3", "#f3cfe0", "#e0d4f5", "#f5d9c4"};
    Digraph d = materialize(g, g.has_tails() ? style.copies : 0);
    std::ostringstream os;
    os << "digraph \"" << dot_escape(g.name.empty() ? "graph" : g.name) << "\" {\n";
    os << "  rankdir=LR;\n  node [shape=circle, fontsize=11];\n  edge [fontsize=10];\n";
    for (int v = 0; v < d.size(); ++v) {
        const VertexRef& r = d.refs[v];
        std::string name = r.to_string();
        std::vector<std::string> attrs{"label=\"" + dot_escape(name) + "\""};
        if (style.provenance) {
            auto it = style.provenance->find(r.id);
            if (it != style.provenance->end()) {
                switch (it->second.kind) {
                    case Provenance::Spine: attrs.push_back("color=\"#1f77b4\", shape=diamond"); break;
                    case Provenance::Prime: attrs.push_back("color=\"#d62728\", shape=doublecircle"); break;
                    default: break;
                }
                attrs.push_back("tooltip=\"" + std::string(Provenance::name(it->second.kind)) + " " +
                                dot_escape(it->second.ref) + "\"");
            }
        }
        if (auto it = style.cluster_of.find(name); it != style.cluster_of.end())
            attrs.push_back(std::string("style=filled, fillcolor=\"") + palette[it->second % 6] + "\"");
        os << "  \"" << dot_escape(name) << "\" [";
        for (std::size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i];
        os << "];\n";
    }
    for (const auto& e : d.edges) {
        std::string label = e.id;
        if (e.mult == omega) label += " (∞)";
        else if (e.mult != 1) label += " (" + std::to_string(e.mult) + ")";
        std::vector<std::string> attrs{"label=\"" + dot_escape(label) + "\""};
        if (e.mult == omega) attrs.push_back("style=bold");
        if (style.provenance) {
            // Materialized tail edges carry their link id as the edge id.
            auto it = style.provenance->find(e.id);
            if (it != style.provenance->end() && it->second.kind == Provenance::SpineEdge)
                attrs.push_back("color=\"#1f77b4\"");
            if (it != style.provenance->end() && it->second.kind == Provenance::PrimeCopy)
                attrs.push_back("color=\"#d62728\"");
        }
        os << "  \"" << dot_escape(d.name(e.src)) << "\" -> \"" << dot_escape(d.name(e.dst)) << "\" [";
        for (std::size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i];
        os << "];\n";
    }
    int stub = 0;
    for (int v = 0; v < d.size(); ++v) {
        if (!d.open[v]) continue;
        std::string s = "more" + std::to_string(stub++);
        os << "  \"" << s << "\" [label=\"...\", shape=plaintext];\n";
        os << "  \"" << dot_escape(d.name(v)) << "\" -> \"" << s << "\" [style=dashed, dir=none];\n";
    }
    // Inward tails are fed from copies beyond the prefix.
    for (const auto& t : g.tails) {
        if (t.dir != Direction::inward || d.depth == 0) continue;
        for (const auto& l : t.inter) {
            std::string s = "more" + std::to_string(stub++);
            os << "  \"" << s << "\" [label=\"...\", shape=plaintext];\n";
            os << "  \"" << s << "\" -> \"" << dot_escape(VertexRef::tail(l.dst, d.depth - 1).to_string())
               << "\" [style=dashed];\n";
        }
    }
    os << "}\n";
    return os.str();
}

// Cluster colouring for to_dot on a tail-free graph, or on the trusted
// window of a tail graph.
inline std::map<std::string, int> cluster_colouring(const Graph& g, const ClusterReport& r, std::uint64_t copies = 3) {
    std::map<std::string, int> out;
    Digraph d = materialize(g, g.has_tails() ? copies : 0);
    for (std::size_t i = 0; i < r.clusters.size(); ++i)
        for (int v = 0; v < d.size(); ++v)
            if (r.clusters[i].members.contains(d.refs[v])) out[d.name(v)] = static_cast<int>(i);
    return out;
}

}  // namespace lpakit
