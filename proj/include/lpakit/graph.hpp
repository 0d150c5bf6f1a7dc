#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "epset.hpp"
#include "error.hpp"

namespace lpakit {

using Mult = std::uint64_t;
inline constexpr Mult omega = std::numeric_limits<Mult>::max();

inline Mult mult_add(Mult a, Mult b) {
    if (a == omega || b == omega) return omega;
    return a + b;
}

inline std::string mult_text(Mult m) { return m == omega ? "*" : std::to_string(m); }

enum class Direction { outward, inward };

// Bundle of `mult` parallel edges src -> dst.
struct Bundle {
    std::string id;
    std::string src;
    std::string dst;
    Mult mult = 1;
    bool named = true;  // false when the id was generated

    bool operator==(const Bundle&) const = default;
};

// Pattern-level bundle; endpoints are pattern ids or core ids depending on use.
struct Link {
    std::string src;
    std::string dst;
    Mult mult = 1;

    bool operator==(const Link&) const = default;
    auto operator<=>(const Link&) const = default;
};

struct Tail {
    std::string id;
    Direction dir = Direction::outward;
    std::vector<std::string> pattern;
    std::vector<Link> intra;
    std::vector<Link> inter;
    std::vector<Link> attach_in;       // core -> (p, 0)
    std::vector<Link> attach_out0;     // (p, 0) -> core
    std::vector<Link> attach_out_all;  // (p, n) -> core for every n

    bool operator==(const Tail&) const = default;
};

// A vertex of the (possibly infinite) graph: a core id, or copy `copy` of a
// pattern vertex.
struct VertexRef {
    std::string id;
    std::optional<std::uint64_t> copy;

    static VertexRef core(std::string v) { return {std::move(v), std::nullopt}; }
    static VertexRef tail(std::string p, std::uint64_t n) { return {std::move(p), n}; }

    bool is_core() const { return !copy.has_value(); }
    std::string to_string() const { return copy ? id + "@" + std::to_string(*copy) : id; }

    bool operator==(const VertexRef&) const = default;
    auto operator<=>(const VertexRef&) const = default;
};

struct Graph {
    std::string name = "g";
    std::vector<std::string> vertices;
    std::vector<Bundle> bundles;
    std::vector<Tail> tails;

    bool has_tails() const { return !tails.empty(); }

    bool is_core(const std::string& v) const {
        return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
    }

    // (tail index, pattern position) of a pattern id.
    std::optional<std::pair<std::size_t, std::size_t>> find_pattern(const std::string& p) const {
        for (std::size_t t = 0; t < tails.size(); ++t)
            for (std::size_t i = 0; i < tails[t].pattern.size(); ++i)
                if (tails[t].pattern[i] == p) return std::make_pair(t, i);
        return std::nullopt;
    }

    bool contains(const VertexRef& v) const {
        return v.is_core() ? is_core(v.id) : find_pattern(v.id).has_value();
    }

    std::size_t max_pattern_size() const {
        std::size_t m = 0;
        for (const auto& t : tails) m = std::max(m, t.pattern.size());
        return m;
    }

    // Checks the structural invariants. Graphs built internally may relax
    // the one-sided attachment rule after prefix materialization.
    void validate(bool one_sided = true) const {
        std::set<std::string> ids;
        for (const auto& v : vertices)
            if (!ids.insert(v).second) throw error(errc::parse_error, "duplicate vertex " + v);
        for (const auto& t : tails) {
            if (t.pattern.empty()) throw error(errc::parse_error, "tail " + t.id + " has an empty pattern");
            for (const auto& p : t.pattern)
                if (!ids.insert(p).second) throw error(errc::parse_error, "duplicate vertex " + p);
        }
        auto core_ok = [&](const std::string& v) { return is_core(v); };
        auto pat_ok = [](const Tail& t, const std::string& p) {
            return std::find(t.pattern.begin(), t.pattern.end(), p) != t.pattern.end();
        };
        auto mult_ok = [](Mult m) { return m >= 1; };
        std::set<std::string> bundle_ids;
        for (const auto& b : bundles) {
            if (!core_ok(b.src)) throw error(errc::unknown_vertex, b.src);
            if (!core_ok(b.dst)) throw error(errc::unknown_vertex, b.dst);
            if (!mult_ok(b.mult)) throw error(errc::parse_error, "multiplicity must be positive");
            if (!bundle_ids.insert(b.id).second) throw error(errc::parse_error, "duplicate edge id " + b.id);
        }
        for (const auto& t : tails) {
            for (const auto* links : {&t.intra, &t.inter})
                for (const auto& l : *links) {
                    if (!pat_ok(t, l.src)) throw error(errc::unknown_vertex, l.src);
                    if (!pat_ok(t, l.dst)) throw error(errc::unknown_vertex, l.dst);
                    if (!mult_ok(l.mult)) throw error(errc::parse_error, "multiplicity must be positive");
                }
            for (const auto& l : t.attach_in) {
                if (!core_ok(l.src)) throw error(errc::unknown_vertex, l.src);
                if (!pat_ok(t, l.dst)) throw error(errc::unknown_vertex, l.dst);
            }
            for (const auto* links : {&t.attach_out0, &t.attach_out_all})
                for (const auto& l : *links) {
                    if (!pat_ok(t, l.src)) throw error(errc::unknown_vertex, l.src);
                    if (!core_ok(l.dst)) throw error(errc::unknown_vertex, l.dst);
                    if (!mult_ok(l.mult)) throw error(errc::parse_error, "multiplicity must be positive");
                }
            if (one_sided && !t.attach_in.empty() && !(t.attach_out0.empty() && t.attach_out_all.empty()))
                throw error(errc::attachment_rule_violation, t.id);
        }
    }

    bool operator==(const Graph& o) const {
        return vertices == o.vertices && bundles == o.bundles && tails == o.tails;
    }
};

// Makes bundle ids unique and fills in generated ones.
inline void assign_bundle_ids(Graph& g) {
    std::set<std::string> used;
    for (const auto& b : g.bundles)
        if (b.named) used.insert(b.id);
    for (auto& b : g.bundles) {
        if (b.named) continue;
        std::string base = b.src + "_" + b.dst, id = base;
        for (int k = 2; used.count(id); ++k) id = base + "_" + std::to_string(k);
        b.id = id;
        used.insert(id);
    }
}

// Subset of the vertex set: explicit core members plus an index set per
// pattern vertex. Missing patterns are empty.
struct VertexSet {
    std::set<std::string> core;
    std::map<std::string, EPSet> tail;

    static VertexSet of(std::initializer_list<std::string> ids) {
        VertexSet s;
        for (const auto& i : ids) s.core.insert(i);
        return s;
    }

    static VertexSet all(const Graph& g) {
        VertexSet s;
        s.core.insert(g.vertices.begin(), g.vertices.end());
        for (const auto& t : g.tails)
            for (const auto& p : t.pattern) s.tail[p] = EPSet::all();
        return s;
    }

    bool contains(const VertexRef& v) const {
        if (v.is_core()) return core.count(v.id) > 0;
        auto it = tail.find(v.id);
        return it != tail.end() && it->second.contains(*v.copy);
    }

    void insert(const VertexRef& v) {
        if (v.is_core()) core.insert(v.id);
        else tail[v.id] = tail[v.id] | EPSet::singleton(*v.copy);
        prune();
    }

    bool empty() const {
        if (!core.empty()) return false;
        for (const auto& [p, s] : tail)
            if (!s.empty()) return false;
        return true;
    }

    bool finite() const {
        for (const auto& [p, s] : tail)
            if (!s.finite()) return false;
        return true;
    }

    // Number of members, or nullopt when infinite.
    std::optional<std::size_t> size() const {
        std::size_t n = core.size();
        for (const auto& [p, s] : tail) {
            auto k = s.size();
            if (!k) return std::nullopt;
            n += *k;
        }
        return n;
    }

    // Finite sets only.
    std::vector<VertexRef> members() const {
        std::vector<VertexRef> out;
        for (const auto& c : core) out.push_back(VertexRef::core(c));
        for (const auto& [p, s] : tail)
            for (auto i : s.exceptions()) out.push_back(VertexRef::tail(p, i));
        return out;
    }

    VertexSet operator|(const VertexSet& o) const {
        VertexSet r = *this;
        r.core.insert(o.core.begin(), o.core.end());
        for (const auto& [p, s] : o.tail) r.tail[p] = r.tail[p] | s;
        r.prune();
        return r;
    }
    VertexSet operator&(const VertexSet& o) const {
        VertexSet r;
        std::set_intersection(core.begin(), core.end(), o.core.begin(), o.core.end(),
                              std::inserter(r.core, r.core.end()));
        for (const auto& [p, s] : tail) {
            auto it = o.tail.find(p);
            if (it != o.tail.end()) r.tail[p] = s & it->second;
        }
        r.prune();
        return r;
    }
    VertexSet operator-(const VertexSet& o) const {
        VertexSet r;
        std::set_difference(core.begin(), core.end(), o.core.begin(), o.core.end(),
                            std::inserter(r.core, r.core.end()));
        for (const auto& [p, s] : tail) {
            auto it = o.tail.find(p);
            r.tail[p] = it == o.tail.end() ? s : s - it->second;
        }
        r.prune();
        return r;
    }
    bool subset_of(const VertexSet& o) const { return (*this - o).empty(); }

    bool operator==(const VertexSet& o) const {
        VertexSet a = *this, b = o;
        a.prune();
        b.prune();
        return a.core == b.core && a.tail == b.tail;
    }

    // Largest threshold + period across patterns.
    std::uint64_t horizon() const {
        std::uint64_t h = 0;
        for (const auto& [p, s] : tail) h = std::max<std::uint64_t>(h, s.threshold() + s.period());
        return h;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "{";
        bool first = true;
        for (const auto& c : core) {
            os << (first ? "" : ", ") << c;
            first = false;
        }
        for (const auto& [p, s] : tail) {
            if (s.empty()) continue;
            os << (first ? "" : ", ") << p << "@" << s.to_string();
            first = false;
        }
        os << "}";
        return os.str();
    }

    void prune() {
        for (auto it = tail.begin(); it != tail.end();)
            it = it->second.empty() ? tail.erase(it) : std::next(it);
    }
};

enum class VertexKind { Sink, Regular, InfiniteEmitter };

inline const char* kind_name(VertexKind k) {
    switch (k) {
        case VertexKind::Sink: return "Sink";
        case VertexKind::Regular: return "Regular";
        case VertexKind::InfiniteEmitter: return "InfiniteEmitter";
    }
    return "?";
}

// Outgoing multiplicity summary of v read off the presentation.
inline VertexKind classify_vertex(const Graph& g, const VertexRef& v) {
    Mult total = 0;
    if (v.is_core()) {
        if (!g.is_core(v.id)) throw error(errc::unknown_vertex, v.to_string());
        for (const auto& b : g.bundles)
            if (b.src == v.id) total = mult_add(total, b.mult);
    } else {
        auto loc = g.find_pattern(v.id);
        if (!loc) throw error(errc::unknown_vertex, v.to_string());
        const Tail& t = g.tails[loc->first];
        auto add = [&](const std::vector<Link>& ls) {
            for (const auto& l : ls)
                if (l.src == v.id) total = mult_add(total, l.mult);
        };
        add(t.intra);
        add(t.attach_out_all);
        if (*v.copy == 0) add(t.attach_out0);
        // Inward inter edges leave copy n+1 for copy n; copy 0 has none.
        if (t.dir == Direction::outward || *v.copy > 0) add(t.inter);
    }
    if (total == 0) return VertexKind::Sink;
    if (total == omega) return VertexKind::InfiniteEmitter;
    return VertexKind::Regular;
}

}  // namespace lpakit
