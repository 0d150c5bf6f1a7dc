#pragma once

#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hsets.hpp"

namespace lpakit {

// Where a vertex of a restricted graph came from. Core ids map to a single
// vertex; a pattern id p' stands for copies offset + stride * m + residue of
// the source pattern vertex.
struct PatternOrigin {
    std::string id;
    std::uint64_t offset = 0;
    std::uint64_t stride = 1;
    std::uint64_t residue = 0;
};

struct Origin {
    std::map<std::string, VertexRef> core;
    std::map<std::string, PatternOrigin> pattern;

    VertexRef lift(const VertexRef& v) const {
        if (v.is_core()) {
            auto it = core.find(v.id);
            if (it == core.end()) throw error(errc::unknown_vertex, v.to_string());
            return it->second;
        }
        auto it = pattern.find(v.id);
        if (it == pattern.end()) throw error(errc::unknown_vertex, v.to_string());
        const auto& po = it->second;
        return VertexRef::tail(po.id, po.offset + po.stride * *v.copy + po.residue);
    }

    // Image in the source graph; ids without an origin (primes, spines) are
    // dropped.
    VertexSet lift(const VertexSet& s) const {
        VertexSet r;
        for (const auto& c : s.core) {
            auto it = core.find(c);
            if (it != core.end()) r.insert(it->second);
        }
        for (const auto& [p, e] : s.tail) {
            auto it = pattern.find(p);
            if (it == pattern.end()) continue;
            const auto& po = it->second;
            r.tail[po.id] = r.tail[po.id] | e.affine_image(po.offset, po.stride, po.residue);
        }
        r.prune();
        return r;
    }

    // Preimage of a source-graph set.
    VertexSet lower(const VertexSet& s) const {
        VertexSet r;
        for (const auto& [name, ref] : core)
            if (s.contains(ref)) r.core.insert(name);
        for (const auto& [name, po] : pattern) {
            auto it = s.tail.find(po.id);
            if (it == s.tail.end()) continue;
            EPSet e = it->second.affine_preimage(po.offset, po.stride, po.residue);
            if (!e.empty()) r.tail[name] = e;
        }
        return r;
    }

    std::optional<std::string> local_core(const VertexRef& v) const {
        for (const auto& [name, ref] : core)
            if (ref == v) return name;
        return std::nullopt;
    }
};

struct Restricted {
    Graph graph;
    Origin origin;
};

// Largest copy index in a finite set plus one (0 without tail members).
inline std::uint64_t finite_extent(const VertexSet& s) {
    std::uint64_t n = 0;
    for (const auto& [p, e] : s.tail) {
        if (!e.finite()) throw error(errc::precondition, "set is infinite");
        for (auto i : e.exceptions()) n = std::max<std::uint64_t>(n, i + 1);
    }
    return n;
}

// The subgraph induced on `alive`, re-presented with tails. Each tail is cut
// at a common threshold (at least `min_threshold`): earlier copies become
// core vertices, later ones are regrouped with the lcm of the periods.
inline Restricted restrict_to(const Graph& g, const VertexSet& alive, std::uint64_t min_threshold = 0) {
    Restricted r;
    Graph& out = r.graph;
    out.name = g.name;
    struct Cut {
        std::uint64_t at;
        std::uint64_t rho;
    };
    std::vector<Cut> cuts;
    std::uint64_t depth = 1;
    for (const auto& t : g.tails) {
        Cut c{min_threshold, 1};
        for (const auto& p : t.pattern) {
            auto it = alive.tail.find(p);
            if (it == alive.tail.end() || it->second.empty()) continue;
            c.at = std::max<std::uint64_t>(c.at, it->second.threshold());
            c.rho = std::lcm(c.rho, it->second.period());
        }
        cuts.push_back(c);
        depth = std::max(depth, c.at + 1);
    }
    Digraph d = materialize(g, g.has_tails() ? depth : 0);
    auto in_prefix = [&](int v) {
        const auto& ref = d.refs[v];
        return ref.is_core() || *ref.copy < cuts[g.find_pattern(ref.id)->first].at;
    };
    std::vector<std::string> local(d.size());
    for (int v = 0; v < d.size(); ++v) {
        if (!in_prefix(v) || !alive.contains(d.refs[v])) continue;
        local[v] = d.refs[v].to_string();
        out.vertices.push_back(local[v]);
        r.origin.core[local[v]] = d.refs[v];
    }
    std::map<std::string, bool> core_named;
    for (const auto& b : g.bundles) core_named[b.id] = b.named;
    std::vector<char> named;
    for (const auto& e : d.edges) {
        if (local[e.src].empty() || local[e.dst].empty()) continue;
        bool kept = d.refs[e.src].is_core() && d.refs[e.dst].is_core() && core_named.count(e.id);
        // Kept ids count as named while fresh ones are generated.
        out.bundles.push_back({kept ? e.id : "", local[e.src], local[e.dst], e.mult, kept});
        named.push_back(kept && core_named[e.id]);
    }
    assign_bundle_ids(out);
    for (std::size_t i = 0; i < out.bundles.size(); ++i) out.bundles[i].named = named[i];

    for (std::size_t ti = 0; ti < g.tails.size(); ++ti) {
        const Tail& t = g.tails[ti];
        const Cut c = cuts[ti];
        auto live = [&](const std::string& p, std::uint64_t res) { return alive.contains(VertexRef::tail(p, c.at + res)); };
        auto pn = [&](const std::string& p, std::uint64_t res) {
            return c.rho == 1 ? p : p + "~" + std::to_string(res);
        };
        auto prefix_name = [&](const std::string& p, std::uint64_t n) -> std::string {
            VertexRef ref = VertexRef::tail(p, n);
            return alive.contains(ref) ? ref.to_string() : std::string();
        };
        Tail nt;
        nt.id = t.id;
        nt.dir = t.dir;
        for (std::uint64_t res = 0; res < c.rho; ++res)
            for (const auto& p : t.pattern)
                if (live(p, res)) {
                    nt.pattern.push_back(pn(p, res));
                    r.origin.pattern[pn(p, res)] = {p, c.at, c.rho, res};
                }
        if (nt.pattern.empty()) continue;
        for (std::uint64_t res = 0; res < c.rho; ++res)
            for (const auto& l : t.intra)
                if (live(l.src, res) && live(l.dst, res)) nt.intra.push_back({pn(l.src, res), pn(l.dst, res), l.mult});
        for (const auto& l : t.inter) {
            if (t.dir == Direction::outward) {
                for (std::uint64_t res = 0; res + 1 < c.rho; ++res)
                    if (live(l.src, res) && live(l.dst, res + 1))
                        nt.intra.push_back({pn(l.src, res), pn(l.dst, res + 1), l.mult});
                if (live(l.src, c.rho - 1) && live(l.dst, 0)) nt.inter.push_back({pn(l.src, c.rho - 1), pn(l.dst, 0), l.mult});
                if (c.at > 0 && live(l.dst, 0)) {
                    auto s = prefix_name(l.src, c.at - 1);
                    if (!s.empty()) nt.attach_in.push_back({s, pn(l.dst, 0), l.mult});
                }
            } else {
                for (std::uint64_t res = 0; res + 1 < c.rho; ++res)
                    if (live(l.src, res + 1) && live(l.dst, res))
                        nt.intra.push_back({pn(l.src, res + 1), pn(l.dst, res), l.mult});
                if (live(l.src, 0) && live(l.dst, c.rho - 1)) nt.inter.push_back({pn(l.src, 0), pn(l.dst, c.rho - 1), l.mult});
                if (c.at > 0 && live(l.src, 0)) {
                    auto s = prefix_name(l.dst, c.at - 1);
                    if (!s.empty()) nt.attach_out0.push_back({pn(l.src, 0), s, l.mult});
                }
            }
        }
        if (c.at == 0) {
            for (const auto& l : t.attach_in)
                if (alive.core.count(l.src) && live(l.dst, 0)) nt.attach_in.push_back({l.src, pn(l.dst, 0), l.mult});
            for (const auto& l : t.attach_out0)
                if (live(l.src, 0) && alive.core.count(l.dst)) nt.attach_out0.push_back({pn(l.src, 0), l.dst, l.mult});
        }
        for (std::uint64_t res = 0; res < c.rho; ++res)
            for (const auto& l : t.attach_out_all)
                if (live(l.src, res) && alive.core.count(l.dst)) nt.attach_out_all.push_back({pn(l.src, res), l.dst, l.mult});
        out.tails.push_back(nt);
    }
    out.validate(false);
    return r;
}

struct Provenance {
    enum Kind { Original, Prime, Spine, PrimeCopy, SpineEdge } kind = Original;
    std::string ref;  // source vertex or edge, or a spine path

    static const char* name(Kind k) {
        switch (k) {
            case Original: return "Original";
            case Prime: return "Prime";
            case Spine: return "Spine";
            case PrimeCopy: return "PrimeCopy";
            case SpineEdge: return "SpineEdge";
        }
        return "?";
    }
    bool operator==(const Provenance&) const = default;
};

// Copy m of a pumped spine vertex is the path head pump^m rest. With
// `parallel`, copy m instead takes the (m+1)-th edge of the ω-bundle that
// ends the path (written e:* in the labels).
struct SpineFamily {
    std::vector<std::string> head;
    std::vector<std::string> pump;
    std::vector<std::string> rest;
    bool parallel = false;

    std::vector<std::string> at(std::uint64_t m) const {
        std::vector<std::string> p = head;
        for (std::uint64_t i = 0; i < m; ++i) p.insert(p.end(), pump.begin(), pump.end());
        p.insert(p.end(), rest.begin(), rest.end());
        if (parallel && !p.empty()) {
            auto& last = p.back();
            last = last.substr(0, last.rfind(':')) + ":" + std::to_string(m + 1);
        }
        return p;
    }
};

struct PathSet {
    enum Kind { ExplicitFinite, PeriodicFamily, InfiniteBranching } kind = ExplicitFinite;
    std::vector<std::vector<std::string>> paths;
    std::vector<SpineFamily> families;
    std::string witness;

    static const char* name(Kind k) {
        switch (k) {
            case ExplicitFinite: return "ExplicitFinite";
            case PeriodicFamily: return "PeriodicFamily";
            case InfiniteBranching: return "InfiniteBranching";
        }
        return "?";
    }
    bool empty() const { return paths.empty() && families.empty() && kind != InfiniteBranching; }
};

struct FPaths {
    PathSet f1;
    PathSet f2;
};

struct ConstructionResult {
    Graph graph;
    Origin origin;
    std::map<std::string, Provenance> vertices;  // core and pattern ids
    std::map<std::string, Provenance> edges;     // bundle ids and tail link ids
    std::map<std::string, SpineFamily> families;  // spine pattern vertices
    FPaths paths;
};

inline std::string link_id(const Tail& t, const Link& l, bool inter = false) {
    return t.id + ":" + l.src + (inter ? ">>" : ">") + l.dst;
}

inline std::string path_word(const std::vector<std::string>& labels, const std::string& sep = "") {
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) s += (i ? sep : "") + labels[i];
    return s;
}

namespace detail {

struct Step {
    int edge;
    Mult k;  // which parallel edge, 1-based; 0 for a generic member of an ω-bundle
};

class SpineBuilder {
public:
    SpineBuilder(const Graph& g, ConstructionResult& out, std::set<std::string>& taken)
        : g_(g), out_(out), taken_(taken), d_(materialize(g, 0)), scc_(strongly_connected(d_)) {
        cyc_of_.assign(d_.size(), -1);
        for (std::size_t c = 0; c < scc_.members.size(); ++c) {
            if (!scc_.cyclic[c]) continue;
            const auto& ms = scc_.members[c];
            Mult inner = 0;
            for (int v : ms)
                for (int e : d_.out[v])
                    if (scc_.comp[d_.edges[e].dst] == static_cast<int>(c)) inner = mult_add(inner, d_.edges[e].mult);
            if (inner != ms.size()) continue;  // not a simple cycle
            Loop l;
            int v = ms.front();
            do {
                int next = -1;
                for (int e : d_.out[v])
                    if (scc_.comp[d_.edges[e].dst] == static_cast<int>(c)) next = e;
                l.vertices.push_back(v);
                l.edges.push_back(next);
                v = d_.edges[next].dst;
            } while (v != ms.front());
            for (int x : l.vertices) cyc_of_[x] = static_cast<int>(loops_.size());
            loops_.push_back(l);
        }
    }

    // All spines hanging off one bundle that enters the body.
    void add_seed(int bundle, const std::string& target, const std::string& prime, PathSet& rec) {
        const auto& seed = d_.edges[bundle];
        check(bundle);
        if (seed.mult == omega) {
            ++tail_count_;
            Tail t;
            t.id = "spine" + std::to_string(tail_count_);
            std::vector<Step> root{{bundle, 0}};
            std::string name = vertex_name(root);
            t.pattern.push_back(name);
            t.attach_out_all.push_back({name, target, 1});
            out_.edges[link_id(t, t.attach_out_all.back())] = {Provenance::SpineEdge, edge_name(root)};
            if (!prime.empty()) {
                t.attach_out_all.push_back({name, prime, 1});
                out_.edges[link_id(t, t.attach_out_all.back())] = {Provenance::PrimeCopy, label(root[0]) + "'"};
            }
            auto fam = [&](const std::vector<Step>& p) {
                SpineFamily f;
                f.head = labels(p);
                f.rest = {f.head.back()};
                f.head.pop_back();
                f.parallel = true;
                return f;
            };
            pattern_node(t, root, fam, rec);
            for (const auto& c : children(root)) pattern_child(t, c, name, fam, rec);
            out_.graph.tails.push_back(t);
            return;
        }
        for (Mult k = 1; k <= seed.mult; ++k) {
            std::vector<Step> root{{bundle, k}};
            int y = d_.edges[bundle].src;
            if (cyc_of_[y] >= 0) {
                ray(root, target, prime, rec);
                continue;
            }
            std::string name = core_node(root, target, rec);
            if (!prime.empty()) add_bundle(label(root[0]) + "'", name, prime, {Provenance::PrimeCopy, label(root[0])});
            for (const auto& c : children(root)) grow(c, name, rec);
        }
    }

private:
    struct Loop {
        std::vector<int> vertices;
        std::vector<int> edges;  // edges[i] leaves vertices[i]
    };

    const Graph& g_;
    ConstructionResult& out_;
    std::set<std::string>& taken_;
    Digraph d_;
    SCC scc_;
    std::vector<int> cyc_of_;
    std::vector<Loop> loops_;
    std::size_t made_ = 0;
    int tail_count_ = 0;
    static constexpr std::size_t cap_ = 100000;

    std::string label(const Step& s) const {
        const auto& e = d_.edges[s.edge];
        if (e.mult == 1) return e.id;
        return e.id + ":" + (s.k ? std::to_string(s.k) : std::string("*"));
    }
    std::vector<std::string> labels(const std::vector<Step>& p) const {
        std::vector<std::string> out;
        for (const auto& s : p) out.push_back(label(s));
        return out;
    }
    std::string spine_id(const std::string& prefix, const std::vector<Step>& p, const std::string& sep) const {
        auto ls = labels(p);
        std::string w = path_word(ls, sep);
        return prefix + (ls.size() == 1 && w.size() == 1 ? w : "{" + w + "}");
    }
    std::string vertex_name(const std::vector<Step>& p) {
        std::string n = spine_id("w^", p, "");
        if (taken_.count(n)) n = spine_id("w^", p, ".");
        for (int k = 2; taken_.count(n); ++k) n = spine_id("w^", p, ".") + "~" + std::to_string(k);
        taken_.insert(n);
        if (++made_ > cap_) throw error(errc::unrepresentable, "spine tree exceeds " + std::to_string(cap_) + " vertices");
        return n;
    }
    std::string edge_name(const std::vector<Step>& p) const { return spine_id("f^", p, ""); }

    void add_bundle(const std::string& id, const std::string& src, const std::string& dst, Provenance prov) {
        std::string bid = id;
        std::set<std::string> ids;
        for (const auto& b : out_.graph.bundles) ids.insert(b.id);
        for (int k = 2; ids.count(bid); ++k) bid = id + "~" + std::to_string(k);
        out_.graph.bundles.push_back({bid, src, dst, 1, true});
        out_.edges[bid] = prov;
    }

    // One child path per parallel edge entering the path's first vertex.
    std::vector<std::vector<Step>> children(const std::vector<Step>& p, int skip_edge = -1) const {
        std::vector<std::vector<Step>> out;
        int y = d_.edges[p.front().edge].src;
        for (int e : d_.in[y]) {
            if (e == skip_edge) continue;
            for (Mult k = 1; k <= d_.edges[e].mult; ++k) {
                std::vector<Step> c{{e, d_.edges[e].mult == 1 ? 1 : k}};
                c.insert(c.end(), p.begin(), p.end());
                out.push_back(c);
            }
        }
        return out;
    }

    std::string core_node(const std::vector<Step>& p, const std::string& parent, PathSet& rec) {
        std::string name = vertex_name(p);
        out_.graph.vertices.push_back(name);
        out_.vertices[name] = {Provenance::Spine, path_word(labels(p), " ")};
        add_bundle(edge_name(p), name, parent, {Provenance::SpineEdge, path_word(labels(p), " ")});
        rec.paths.push_back(labels(p));
        return name;
    }

    void grow(const std::vector<Step>& p, const std::string& parent, PathSet& rec) {
        if (cyc_of_[d_.edges[p.front().edge].src] >= 0) {
            ray(p, parent, "", rec);
            return;
        }
        std::string name = core_node(p, parent, rec);
        for (const auto& c : children(p)) grow(c, name, rec);
    }

    void pattern_node(Tail& t, const std::vector<Step>& p, const std::function<SpineFamily(const std::vector<Step>&)>& fam,
                      PathSet& rec) {
        const std::string& name = t.pattern.back();
        out_.vertices[name] = {Provenance::Spine, path_word(labels(p), " ")};
        out_.families[name] = fam(p);
        rec.families.push_back(fam(p));
    }

    void pattern_child(Tail& t, const std::vector<Step>& p, const std::string& parent,
                       const std::function<SpineFamily(const std::vector<Step>&)>& fam, PathSet& rec) {
        std::string name = vertex_name(p);
        t.pattern.push_back(name);
        t.intra.push_back({name, parent, 1});
        out_.edges[link_id(t, t.intra.back())] = {Provenance::SpineEdge, path_word(labels(p), " ")};
        pattern_node(t, p, fam, rec);
        for (const auto& c : children(p)) pattern_child(t, c, name, fam, rec);
    }

    // Entry path q0 starts on a cycle: its continuations around the cycle
    // form an inward ray, one cycle length per copy.
    void ray(const std::vector<Step>& q0, const std::string& parent, const std::string& prime, PathSet& rec) {
        int y = d_.edges[q0.front().edge].src;
        const Loop& lp = loops_[cyc_of_[y]];
        std::size_t len = lp.vertices.size();
        std::size_t j = std::find(lp.vertices.begin(), lp.vertices.end(), y) - lp.vertices.begin();
        auto cyc_edge = [&](std::size_t i) { return lp.edges[i % len]; };
        std::vector<std::string> pump;
        for (std::size_t i = 0; i < len; ++i) pump.push_back(label({cyc_edge(j + i), 1}));

        ++tail_count_;
        Tail t;
        t.id = "ray" + std::to_string(tail_count_);
        t.dir = Direction::inward;
        std::vector<std::vector<Step>> nodes{q0};
        for (std::size_t k = 1; k < len; ++k) {
            std::vector<Step> n{{cyc_edge(j + len - k), 1}};
            n.insert(n.end(), nodes.back().begin(), nodes.back().end());
            nodes.push_back(n);
        }
        std::size_t rest = q0.size();
        auto fam = [&](const std::vector<Step>& p) {
            SpineFamily f;
            auto ls = labels(p);
            f.head.assign(ls.begin(), ls.end() - rest);
            f.rest.assign(ls.end() - rest, ls.end());
            f.pump = pump;
            return f;
        };
        std::vector<std::string> names;
        for (std::size_t k = 0; k < len; ++k) {
            names.push_back(vertex_name(nodes[k]));
            t.pattern.push_back(names.back());
            pattern_node(t, nodes[k], fam, rec);
            if (k > 0) {
                t.intra.push_back({names[k], names[k - 1], 1});
                out_.edges[link_id(t, t.intra.back())] = {Provenance::SpineEdge, path_word(labels(nodes[k]), " ")};
            }
        }
        t.inter.push_back({names[0], names[len - 1], 1});
        out_.edges[link_id(t, t.inter.back(), true)] = {Provenance::SpineEdge, "pumped by " + path_word(pump, " ")};
        t.attach_out0.push_back({names[0], parent, 1});
        out_.edges[link_id(t, t.attach_out0.back())] = {Provenance::SpineEdge, path_word(labels(q0), " ")};
        if (!prime.empty()) {
            t.attach_out0.push_back({names[0], prime, 1});
            out_.edges[link_id(t, t.attach_out0.back())] = {Provenance::PrimeCopy, label(q0.back())};
        }
        // Side branches: edges into a ray vertex other than the cycle edge.
        for (std::size_t k = 0; k < len; ++k)
            for (const auto& c : children(nodes[k], cyc_edge(j + len - k - 1))) pattern_child(t, c, names[k], fam, rec);
        out_.graph.tails.push_back(t);
    }

    std::string loop_text(const Loop& l) const {
        std::vector<std::string> es;
        for (int e : l.edges) es.push_back(d_.edges[e].id);
        return path_word(es, " ") + " at " + d_.name(l.vertices.front());
    }

    // Rejects spine trees outside the representable shapes.
    void check(int bundle) const {
        const auto& seed = d_.edges[bundle];
        Mask reach = backward(d_, single(d_, seed.src));
        for (std::size_t c = 0; c < scc_.members.size(); ++c) {
            if (!scc_.cyclic[c] || !reach[scc_.members[c].front()]) continue;
            if (cyc_of_[scc_.members[c].front()] >= 0) continue;
            Mask m(d_.size(), 0);
            for (int v : scc_.members[c]) m[v] = 1;
            std::vector<Cycle> cs;
            for (const auto& vs : simple_vertex_cycles(d_, m))
                for (auto& cy : expand_cycle(d_, vs, 2)) cs.push_back(cy);
            std::string w;
            if (cs.size() >= 2 && cs[0].edges.size() == 1 && cs[1].edges.size() == 1 && cs[0].vertices == cs[1].vertices)
                w = "two loops " + cs[0].edges[0] + ", " + cs[1].edges[0] + " at " + cs[0].vertices[0].to_string();
            else if (cs.size() >= 2)
                w = "two cycles (" + cs[0].to_string() + ") and (" + cs[1].to_string() + ")";
            else
                w = "branching cycle through " + d_.name(scc_.members[c].front());
            throw error(errc::unrepresentable, w + " feed spines into " + d_.name(seed.dst));
        }
        for (std::size_t a = 0; a < loops_.size(); ++a) {
            if (!reach[loops_[a].vertices.front()]) continue;
            Mask from = forward(d_, single(d_, loops_[a].vertices.front()));
            for (std::size_t b = 0; b < loops_.size(); ++b)
                if (b != a && reach[loops_[b].vertices.front()] && from[loops_[b].vertices.front()])
                    throw error(errc::unrepresentable,
                                "cycle " + loop_text(loops_[a]) + " feeds cycle " + loop_text(loops_[b]));
        }
        for (const auto& e : d_.edges)
            if (e.mult == omega && reach[e.dst])
                throw error(errc::unrepresentable, "ω-bundle " + e.id + " (" + d_.name(e.src) + "->" + d_.name(e.dst) +
                                                       ") at a non-final spine position");
        if (seed.mult == omega)
            for (std::size_t a = 0; a < loops_.size(); ++a)
                if (reach[loops_[a].vertices.front()])
                    throw error(errc::unrepresentable, "ω-bundle " + seed.id + " (" + d_.name(seed.src) + "->" +
                                                           d_.name(seed.dst) + ") ends paths pumped by cycle " +
                                                           loop_text(loops_[a]));
    }
};

inline void finish(PathSet& p) {
    if (p.kind != PathSet::InfiniteBranching && !p.families.empty()) p.kind = PathSet::PeriodicFamily;
}

}  // namespace detail

inline std::string origin_text(const VertexRef& r) { return r.to_string(); }

namespace detail {

// Grows the spines over edges entering the body: into G-H from outside the
// body (F1, side bit 1), or into T-S from anywhere (F2, side bit 2). With
// `soft`, an unrepresentable side is recorded as InfiniteBranching.
inline void add_spines(const Graph& g, ConstructionResult& res, const AdmissiblePair& lo, const AdmissiblePair& hi,
                       const std::map<std::string, std::string>& prime_of, const Unroll& u, int sides, bool soft) {
    VertexSet gh = hi.H - lo.H, ts = hi.S - lo.S, body = gh | ts;
    if (g.has_tails()) {
        std::uint64_t depth = start_depth(g, u, std::max(body.horizon(), finite_extent(ts)));
        Digraph d = materialize(g, depth);
        Mask bm = mask_of(d, body), gm = mask_of(d, gh), tm = mask_of(d, ts);
        for (const auto& e : d.edges)
            if ((sides & 1 && gm[e.dst] && !bm[e.src]) || (sides & 2 && tm[e.dst]))
                throw error(errc::tail_unsupported,
                            "spines over a tail graph (edge " + d.name(e.src) + "->" + d.name(e.dst) + ")");
        return;
    }
    std::set<std::string> taken(res.graph.vertices.begin(), res.graph.vertices.end());
    SpineBuilder sb(g, res, taken);
    for (int side : {1, 2}) {
        if (!(sides & side)) continue;
        PathSet& rec = side == 1 ? res.paths.f1 : res.paths.f2;
        try {
            for (std::size_t i = 0; i < g.bundles.size(); ++i) {
                const auto& b = g.bundles[i];
                VertexRef s = VertexRef::core(b.src), r = VertexRef::core(b.dst);
                bool hit = side == 1 ? gh.contains(r) && !body.contains(s) : ts.contains(r);
                if (!hit) continue;
                auto it = prime_of.find(b.dst);
                sb.add_seed(static_cast<int>(i), b.dst, it == prime_of.end() ? "" : it->second, rec);
            }
        } catch (const error& e) {
            if (!soft || e.code() != errc::unrepresentable) throw;
            rec = {};
            rec.kind = PathSet::InfiniteBranching;
            rec.witness = e.witness();
        }
    }
}

}  // namespace detail


// The porcupine-quotient (G,T)/(H,S). With spines = false only the body is
// built: (G-H) ∪ (T-S), its edges into G-H, and the primes with the copies
// of body edges. That body is hereditary in the full graph.
inline ConstructionResult porcupine_quotient(const Graph& g, const AdmissiblePair& lo, const AdmissiblePair& hi,
                                             const Unroll& u = {}, bool spines = true) {
    if (!pair_leq(lo, hi)) throw error(errc::precondition, "pairs are not nested: " + lo.to_string() + " vs " + hi.to_string());
    VertexSet gh = hi.H - lo.H, ts = hi.S - lo.S, body = gh | ts;
    VertexSet primes = ((hi.H | hi.S) - lo.S) & relative_breaking(g, lo.H, hi.H, u);
    if (!primes.finite()) throw error(errc::infinite_primes, primes.to_string());
    if (!ts.finite()) throw error(errc::precondition, "T - S is infinite");

    ConstructionResult res;
    Restricted rs = restrict_to(g, body, std::max(finite_extent(ts), finite_extent(primes)));
    res.graph = rs.graph;
    res.origin = rs.origin;
    Graph& out = res.graph;
    std::set<std::string> ts_local;
    for (const auto& v : ts.members()) ts_local.insert(*rs.origin.local_core(v));
    auto into_ts = [&](const std::string& dst) { return ts_local.count(dst) > 0; };
    std::erase_if(out.bundles, [&](const Bundle& b) { return into_ts(b.dst); });
    for (auto& t : out.tails) {
        std::erase_if(t.attach_out0, [&](const Link& l) { return into_ts(l.dst); });
        std::erase_if(t.attach_out_all, [&](const Link& l) { return into_ts(l.dst); });
    }
    for (const auto& v : out.vertices) res.vertices[v] = {Provenance::Original, origin_text(rs.origin.core[v])};
    for (const auto& [p, po] : rs.origin.pattern) res.vertices[p] = {Provenance::Original, po.id};
    for (const auto& b : out.bundles) res.edges[b.id] = {Provenance::Original, b.id};
    for (const auto& t : out.tails) {
        for (const auto& l : t.intra) res.edges[link_id(t, l)] = {Provenance::Original, link_id(t, l)};
        for (const auto& l : t.inter) res.edges[link_id(t, l, true)] = {Provenance::Original, link_id(t, l, true)};
        for (const auto* ls : {&t.attach_in, &t.attach_out0, &t.attach_out_all})
            for (const auto& l : *ls) res.edges[link_id(t, l)] = {Provenance::Original, link_id(t, l)};
    }

    std::vector<VertexRef> pm = primes.members();
    std::sort(pm.begin(), pm.end(), ref_order);
    std::map<std::string, std::string> prime_of;
    std::size_t nb = out.bundles.size();
    for (const auto& v : pm) {
        std::string loc = *rs.origin.local_core(v), pname = loc + "'";
        prime_of[loc] = pname;
        out.vertices.push_back(pname);
        res.vertices[pname] = {Provenance::Prime, v.to_string()};
        if (!hi.H.contains(v)) continue;  // only spines reach primes of T - S
        for (std::size_t i = 0; i < nb; ++i) {
            Bundle b = out.bundles[i];
            if (b.dst != loc) continue;
            b.id += "'";
            b.dst = pname;
            b.named = true;
            out.bundles.push_back(b);
            res.edges[b.id] = {Provenance::PrimeCopy, out.bundles[i].id};
        }
        for (auto& t : out.tails)
            for (auto* ls : {&t.attach_out0, &t.attach_out_all}) {
                std::size_t n = ls->size();
                for (std::size_t i = 0; i < n; ++i)
                    if ((*ls)[i].dst == loc) {
                        Link l = (*ls)[i];
                        l.dst = pname;
                        ls->push_back(l);
                        res.edges[link_id(t, l)] = {Provenance::PrimeCopy, link_id(t, (*ls)[i])};
                    }
            }
    }

    if (spines) detail::add_spines(g, res, lo, hi, prime_of, u, 3, false);
    detail::finish(res.paths.f1);
    detail::finish(res.paths.f2);
    out.validate(false);
    return res;
}

inline ConstructionResult pq_body(const Graph& g, const AdmissiblePair& lo, const AdmissiblePair& hi, const Unroll& u = {}) {
    return porcupine_quotient(g, lo, hi, u, false);
}

inline ConstructionResult porcupine_graph(const Graph& g, const AdmissiblePair& p, const Unroll& u = {}) {
    return porcupine_quotient(g, {}, p, u);
}

inline ConstructionResult quotient_graph(const Graph& g, const AdmissiblePair& p, const Unroll& u = {}) {
    return porcupine_quotient(g, p, {VertexSet::all(g), {}}, u);
}

inline ConstructionResult relative_quotient(const Graph& g, const VertexSet& h, const VertexSet& gs, const Unroll& u = {}) {
    if (!h.subset_of(gs)) throw error(errc::precondition, "H is not contained in G");
    return porcupine_quotient(g, {h, {}}, {gs, {}}, u, false);
}

// F1 and F2 of a nested pair; an unrepresentable side comes back as
// InfiniteBranching instead of an error.
inline FPaths f_paths(const Graph& g, const AdmissiblePair& lo, const AdmissiblePair& hi, const Unroll& u = {}) {
    ConstructionResult res = porcupine_quotient(g, lo, hi, u, false);
    std::map<std::string, std::string> prime_of;
    for (const auto& [id, prov] : res.vertices)
        if (prov.kind == Provenance::Prime) prime_of[id.substr(0, id.size() - 1)] = id;
    detail::add_spines(g, res, lo, hi, prime_of, u, 3, true);
    detail::finish(res.paths.f1);
    detail::finish(res.paths.f2);
    return res.paths;
}

}  // namespace lpakit
