#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lpakit {

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

inline Mult parse_mult(const std::string& s, long line) {
    if (s == "*" || s == "omega") return omega;
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw error(errc::parse_error, "bad multiplicity '" + s + "'", line);
    Mult m = 0;
    try {
        m = std::stoull(s);
    } catch (const std::exception&) {
        throw error(errc::parse_error, "bad multiplicity '" + s + "'", line);
    }
    if (m == 0 || m == omega) throw error(errc::parse_error, "multiplicity must be positive", line);
    return m;
}

}  // namespace detail

inline Graph parse_graph(const std::string& text) {
    Graph g;
    std::istringstream in(text);
    std::string raw;
    long line = 0;
    Tail* cur = nullptr;
    bool any_vertex = false;
    auto fail = [&](const std::string& msg) { throw error(errc::parse_error, msg, line); };
    auto need_core = [&](const std::string& v) {
        if (!g.is_core(v)) fail("undeclared vertex " + v);
    };
    auto need_pat = [&](const std::string& p) {
        if (std::find(cur->pattern.begin(), cur->pattern.end(), p) == cur->pattern.end())
            fail("undeclared pattern vertex " + p);
    };
    std::set<std::string> ids;
    auto declare = [&](const std::string& v) {
        if (!ids.insert(v).second) fail("duplicate vertex " + v);
        any_vertex = true;
    };

    while (std::getline(in, raw)) {
        ++line;
        std::string body = raw.substr(0, raw.find('#'));
        auto tok = detail::split_ws(body);
        if (tok.empty()) continue;
        bool indented = std::isspace(static_cast<unsigned char>(body[0]));
        const std::string& kw = tok[0];
        if (indented) {
            if (!cur) fail("indented line outside a tail block");
            if (kw == "pattern") {
                if (tok.size() < 2) fail("empty pattern list");
                for (std::size_t i = 1; i < tok.size(); ++i) {
                    declare(tok[i]);
                    cur->pattern.push_back(tok[i]);
                }
            } else if (kw == "intra" || kw == "inter") {
                if (tok.size() != 4) fail(kw + " expects <p> <q> <mult>");
                need_pat(tok[1]);
                need_pat(tok[2]);
                (kw == "intra" ? cur->intra : cur->inter).push_back({tok[1], tok[2], detail::parse_mult(tok[3], line)});
            } else if (kw == "attach_in") {
                if (tok.size() != 3 && tok.size() != 4) fail("attach_in expects <core> <p> [mult]");
                need_core(tok[1]);
                need_pat(tok[2]);
                Mult m = tok.size() == 4 ? detail::parse_mult(tok[3], line) : 1;
                cur->attach_in.push_back({tok[1], tok[2], m});
            } else if (kw == "attach_out0" || kw == "attach_out_all") {
                if (tok.size() != 4) fail(kw + " expects <p> <core> <mult>");
                need_pat(tok[1]);
                need_core(tok[2]);
                (kw == "attach_out0" ? cur->attach_out0 : cur->attach_out_all)
                    .push_back({tok[1], tok[2], detail::parse_mult(tok[3], line)});
            } else {
                fail("unknown tail directive '" + kw + "'");
            }
            continue;
        }
        cur = nullptr;
        if (kw == "graph") {
            if (tok.size() != 2) fail("graph expects a name");
            g.name = tok[1];
        } else if (kw == "vertex") {
            if (tok.size() < 2) fail("empty vertex list");
            for (std::size_t i = 1; i < tok.size(); ++i) {
                declare(tok[i]);
                g.vertices.push_back(tok[i]);
            }
        } else if (kw == "edge") {
            if (tok.size() != 4 && tok.size() != 5) fail("edge expects [id] <src> <dst> <mult>");
            Bundle b;
            std::size_t k = 1;
            if (tok.size() == 5) b.id = tok[k++];
            else b.named = false;
            b.src = tok[k++];
            b.dst = tok[k++];
            need_core(b.src);
            need_core(b.dst);
            b.mult = detail::parse_mult(tok[k], line);
            g.bundles.push_back(b);
        } else if (kw == "tail") {
            if (tok.size() != 3) fail("tail expects <id> outward|inward");
            Tail t;
            t.id = tok[1];
            if (tok[2] == "outward") t.dir = Direction::outward;
            else if (tok[2] == "inward") t.dir = Direction::inward;
            else fail("tail direction must be outward or inward");
            for (const auto& o : g.tails)
                if (o.id == t.id) fail("duplicate tail " + t.id);
            g.tails.push_back(t);
            cur = &g.tails.back();
        } else {
            fail("unknown directive '" + kw + "'");
        }
    }
    if (!any_vertex) throw error(errc::parse_error, "graph declares no vertices", line);
    for (const auto& t : g.tails)
        if (t.pattern.empty()) throw error(errc::parse_error, "tail " + t.id + " has an empty pattern", line);
    assign_bundle_ids(g);
    g.validate(true);
    return g;
}

inline std::string emit_graph(const Graph& g) {
    std::ostringstream os;
    os << "graph " << g.name << "\n";
    if (!g.vertices.empty()) {
        os << "vertex";
        for (const auto& v : g.vertices) os << " " << v;
        os << "\n";
    }
    for (const auto& b : g.bundles) {
        os << "edge ";
        if (b.named) os << b.id << " ";
        os << b.src << " " << b.dst << " " << mult_text(b.mult) << "\n";
    }
    for (const auto& t : g.tails) {
        os << "tail " << t.id << " " << (t.dir == Direction::outward ? "outward" : "inward") << "\n";
        os << "  pattern";
        for (const auto& p : t.pattern) os << " " << p;
        os << "\n";
        for (const auto& l : t.intra) os << "  intra " << l.src << " " << l.dst << " " << mult_text(l.mult) << "\n";
        for (const auto& l : t.inter) os << "  inter " << l.src << " " << l.dst << " " << mult_text(l.mult) << "\n";
        for (const auto& l : t.attach_in) {
            os << "  attach_in " << l.src << " " << l.dst;
            if (l.mult != 1) os << " " << mult_text(l.mult);
            os << "\n";
        }
        for (const auto& l : t.attach_out0)
            os << "  attach_out0 " << l.src << " " << l.dst << " " << mult_text(l.mult) << "\n";
        for (const auto& l : t.attach_out_all)
            os << "  attach_out_all " << l.src << " " << l.dst << " " << mult_text(l.mult) << "\n";
    }
    return os.str();
}

// Set syntax: items separated by commas or whitespace. A core id; `p@n` one
// copy; `p@n-` copies n and up; `p@a-b` copies a..b inclusive; bare `p` all
// copies of a pattern vertex.
inline VertexSet parse_vertex_set(const Graph& g, const std::string& text) {
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    VertexSet out;
    for (const auto& item : detail::split_ws(s)) {
        auto at = item.rfind('@');
        if (at == std::string::npos || g.is_core(item)) {
            if (g.is_core(item)) out.core.insert(item);
            else if (g.find_pattern(item)) out.tail[item] = EPSet::all();
            else throw error(errc::unknown_vertex, item);
            continue;
        }
        std::string p = item.substr(0, at), range = item.substr(at + 1);
        if (!g.find_pattern(p)) throw error(errc::unknown_vertex, item);
        auto num = [&](const std::string& x) -> std::uint64_t {
            if (x.empty() || !std::all_of(x.begin(), x.end(), [](unsigned char c) { return std::isdigit(c); }))
                throw error(errc::unknown_vertex, item);
            return std::stoull(x);
        };
        auto dash = range.find('-');
        EPSet add;
        if (dash == std::string::npos) add = EPSet::singleton(num(range));
        else if (dash + 1 == range.size()) add = EPSet::at_least(num(range.substr(0, dash)));
        else add = EPSet::range(num(range.substr(0, dash)), num(range.substr(dash + 1)) + 1);
        out.tail[p] = out.tail[p] | add;
    }
    out.prune();
    return out;
}

// Reads back EPSet::to_string: "{}", "N", "{0,2}", "{n>=3 : n mod 2 in {1}}",
// or a finite part and a periodic part joined by " + ".
inline EPSet parse_epset(const std::string& text) {
    auto bad = [&]() { return error(errc::parse_error, "copy set " + text); };
    auto numbers = [&](const std::string& s) {
        std::vector<EPSet::index> out;
        std::istringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) {
            auto a = item.find_first_not_of(' '), b = item.find_last_not_of(' ');
            if (a == std::string::npos) continue;
            item = item.substr(a, b - a + 1);
            if (!std::all_of(item.begin(), item.end(), [](unsigned char c) { return std::isdigit(c); })) throw bad();
            out.push_back(std::stoull(item));
        }
        return out;
    };
    auto periodic = [&](std::string s) {
        // s is "n>=t" or "n>=t : n mod p in {r,...}"
        if (s.rfind("n>=", 0) != 0) throw bad();
        auto colon = s.find(':');
        EPSet::index t = numbers(s.substr(3, colon == std::string::npos ? std::string::npos : colon - 3)).at(0), period = 1;
        std::vector<bool> mask{true};
        if (colon != std::string::npos) {
            std::string rest = s.substr(colon + 1);
            auto mod = rest.find("mod"), in = rest.find("in"), open = rest.find('{'), close = rest.rfind('}');
            if (mod == std::string::npos || in == std::string::npos || open == std::string::npos || close == std::string::npos)
                throw bad();
            period = numbers(rest.substr(mod + 3, in - mod - 3)).at(0);
            mask.assign(period, false);
            for (auto r : numbers(rest.substr(open + 1, close - open - 1))) {
                if (r >= period) throw bad();
                mask[r] = true;
            }
        }
        return EPSet(t, period, mask, {});
    };
    std::string s = text;
    s.erase(0, s.find_first_not_of(' '));
    s.erase(s.find_last_not_of(' ') + 1);
    if (s == "N") return EPSet::all();
    EPSet out;
    auto plus = s.find(" + ");
    std::string head = plus == std::string::npos ? s : s.substr(0, plus);
    std::string tail = plus == std::string::npos ? "" : s.substr(plus + 3);
    if (head.size() < 2 || head.front() != '{' || head.back() != '}') throw bad();
    std::string inner = head.substr(1, head.size() - 2);
    if (inner.rfind("n>=", 0) == 0) {
        if (!tail.empty()) throw bad();
        return periodic(inner);
    }
    for (auto n : numbers(inner)) out = out | EPSet::singleton(n);
    if (!tail.empty()) {
        if (tail.size() < 2 || tail.front() != '{' || tail.back() != '}') throw bad();
        out = out | periodic(tail.substr(1, tail.size() - 2));
    }
    return out;
}

inline VertexRef parse_vertex_ref(const Graph& g, const std::string& item) {
    if (g.is_core(item)) return VertexRef::core(item);
    auto at = item.rfind('@');
    if (at != std::string::npos) {
        std::string p = item.substr(0, at), n = item.substr(at + 1);
        if (g.find_pattern(p) && !n.empty() &&
            std::all_of(n.begin(), n.end(), [](unsigned char c) { return std::isdigit(c); }))
            return VertexRef::tail(p, std::stoull(n));
    }
    throw error(errc::unknown_vertex, item);
}

}  // namespace lpakit
