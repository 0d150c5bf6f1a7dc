// lpakit: command-line front end.
//
// Exit codes: 0 success (or HasSeries), 2 usage, 3 NoSeries, 4 Undetermined,
// 5 domain error. Reports are JSON unless --text is given.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include <lpakit/lpakit.hpp>

namespace fs = std::filesystem;
using namespace lpakit;
using json = report::json;

namespace {

enum Exit { ok = 0, usage = 2, no_series = 3, undetermined = 4, domain = 5 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw usage_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Options {
    std::string input;
    bool text = false;
    std::string out;
    std::uint64_t unroll = 0;
    std::string h, s, g, t, v;
};

struct Outcome {
    json result;
    std::string text;
    int code = ok;
};

// "a,b c" or "@file" (the file holds the same syntax).
VertexSet set_arg(const Graph& g, const std::string& arg, const char* flag) {
    std::string text = arg;
    if (!text.empty() && text[0] == '@') text = slurp(text.substr(1));
    try {
        return parse_vertex_set(g, text);
    } catch (const error& e) {
        throw usage_error(std::string("--") + flag + ": " + e.what());
    }
}

Unroll unroll_policy(const Options& o) {
    Unroll u;
    u.depth = o.unroll;
    if (!u.depth)
        if (const char* env = std::getenv("LPAKIT_UNROLL")) {
            char* end = nullptr;
            unsigned long long d = std::strtoull(env, &end, 10);
            if (!*env || *end) throw usage_error(std::string("LPAKIT_UNROLL is not a number: ") + env);
            u.depth = d;
        }
    return u;
}

std::string kinds_line(const TerminalSets& t) {
    std::string s;
    for (auto k : terminal_kinds) {
        auto it = t.by_kind.find(k);
        s += std::string(terminal_kind_name(k)) + ": " + (it == t.by_kind.end() ? "{}" : it->second.to_string()) + "\n";
    }
    return s;
}

std::string verdict_text(const SimplicityVerdict& v) {
    if (v.cofinal)
        return "cofinal, case " + std::string(1, v.case_tag) + " (" + terminal_kind_name(*v.kind) + ", generator " +
               v.generator->to_string() + ")";
    return std::string("not cofinal: ") + SimplicityVerdict::failure_name(v.failure) +
           (v.witness ? " at " + v.witness->to_string() : "") + (v.detail.empty() ? "" : " (" + v.detail + ")");
}

std::string construction_text(const ConstructionResult& r) {
    std::ostringstream os;
    os << emit_graph(r.graph);
    for (const auto& [id, p] : r.vertices)
        if (p.kind != Provenance::Original) os << "# " << id << ": " << Provenance::name(p.kind) << " " << p.ref << "\n";
    auto words = [](const PathSet& p) {
        std::string s = PathSet::name(p.kind);
        for (const auto& w : p.paths) s += " " + path_word(w, ".");
        for (const auto& f : p.families) s += " (" + path_word(f.head, ".") + ")(" + path_word(f.pump, ".") + ")*(" + path_word(f.rest, ".") + ")";
        return s;
    };
    os << "# F1: " << words(r.paths.f1) << "\n# F2: " << words(r.paths.f2) << "\n";
    return os.str();
}

std::string pair_text(const AdmissiblePair& p) { return p.to_string(); }

// Chain files: a `series` JSON report, or one "H | S" pair per line.
std::vector<AdmissiblePair> read_chain(const Graph& g, const std::string& path) {
    std::string text = slurp(path);
    std::vector<AdmissiblePair> chain;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j = json::parse(text);
        const json& c = j.contains("result") ? j["result"]["chain"] : j["chain"];
        auto read = [&](const json& js) {
            VertexSet v;
            for (const auto& id : js.at("core")) {
                if (!g.is_core(id.get<std::string>())) throw error(errc::unknown_vertex, id.get<std::string>());
                v.core.insert(id.get<std::string>());
            }
            for (const auto& [pat, copies] : js.at("tail").items()) {
                if (!g.find_pattern(pat)) throw error(errc::unknown_vertex, pat);
                v.tail[pat] = parse_epset(copies.get<std::string>());
            }
            v.prune();
            return v;
        };
        for (const auto& p : c) chain.push_back({read(p.at("H")), read(p.at("S"))});
        return chain;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        auto bar = line.find('|');
        std::string h = line.substr(0, bar), s = bar == std::string::npos ? "" : line.substr(bar + 1);
        chain.push_back({parse_vertex_set(g, h), parse_vertex_set(g, s)});
    }
    return chain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graded ideal structure of directed graphs: closures, admissible pairs, porcupine-quotients, "
                 "terminal vertices, composition series and monoid types."};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c, bool needs_graph = true) {
        if (needs_graph) c->add_option("graph", o.input, "Graph file")->required()->check(CLI::ExistingFile);
        c->add_flag("--text", o.text, "Human-readable output instead of JSON");
        c->add_option("-o,--out", o.out, "Write the report to a file");
        c->add_option("--unroll", o.unroll, "Tail unroll depth (default: LPAKIT_UNROLL or automatic)");
    };
    auto sets = [&](CLI::App* c, std::initializer_list<char> which) {
        for (char w : which) {
            std::string* dst = w == 'H' ? &o.h : w == 'S' ? &o.s : w == 'G' ? &o.g : w == 'T' ? &o.t : &o.v;
            std::string name = std::string(1, w);
            c->add_option("-" + name + ",--" + name, *dst, "Vertex set " + name + " (ids, p@n, p@a-b, p@n-, p; or @file)");
        }
    };

    auto* validate = app.add_subcommand("validate", "Parse a graph and classify its vertices");
    common(validate);
    auto* closure_cmd = app.add_subcommand("closure", "Saturated and hereditary saturated closures of V");
    common(closure_cmd);
    sets(closure_cmd, {'V', 'H'});
    closure_cmd->get_option("-V")->required();
    auto* pairs = app.add_subcommand("pairs", "Breaking vertices of H, or the admissible-pair lattice");
    common(pairs);
    sets(pairs, {'H', 'G'});
    auto* quotient = app.add_subcommand("quotient", "Quotient graph E/(H,S)");
    common(quotient);
    sets(quotient, {'H', 'S'});
    auto* porcupine = app.add_subcommand("porcupine", "Porcupine graph of (H,S)");
    common(porcupine);
    sets(porcupine, {'H', 'S'});
    auto* pq = app.add_subcommand("pq", "Porcupine-quotient (G,T)/(H,S)");
    common(pq);
    sets(pq, {'H', 'S', 'G', 'T'});
    auto* relq = app.add_subcommand("relquotient", "Relative quotient of G by H");
    common(relq);
    sets(relq, {'H', 'G'});
    auto* terminal = app.add_subcommand("terminal", "Terminal vertices by kind");
    common(terminal);
    auto* clusters_cmd = app.add_subcommand("clusters", "Clusters of terminal vertices");
    common(clusters_cmd);
    auto* simple = app.add_subcommand("simple", "Graded simplicity (cofinality) decision");
    common(simple);
    auto* pis = app.add_subcommand("pis", "Graded purely infinite simplicity decision");
    common(pis);
    auto* series = app.add_subcommand("series", "Constructive graded composition series");
    common(series);
    int max_stages = 64;
    std::optional<unsigned> seed;
    series->add_option("--max-stages", max_stages, "Stage cap before reporting Undetermined");
    series->add_option("--seed", seed, "Shuffle the cluster order with this seed instead of the greedy order");
    auto* verify = app.add_subcommand("verify", "Check a chain of admissible pairs");
    common(verify);
    std::string chain_file;
    verify->add_option("--chain", chain_file, "A series JSON report, or one 'H | S' pair per line")
        ->required()
        ->check(CLI::ExistingFile);
    auto* montype = app.add_subcommand("montype", "Talented monoid type and element types");
    common(montype);
    sets(montype, {'V'});
    auto* oracle = app.add_subcommand("oracle", "Bounded rewriting search for the type of a vertex");
    common(oracle);
    std::string oracle_vertex;
    OracleBounds bounds;
    oracle->add_option("vertex", oracle_vertex, "Core vertex")->required();
    oracle->add_option("--max-size", bounds.max_size, "Largest multiset explored");
    oracle->add_option("--max-shift", bounds.max_shift, "Largest |shift| explored");
    oracle->add_option("--max-states", bounds.max_states, "State budget");
    auto* dot = app.add_subcommand("dot", "Graphviz rendering");
    common(dot);
    sets(dot, {'H', 'S', 'G', 'T'});
    std::string dot_of = "graph";
    std::uint64_t copies = 3;
    bool colour_clusters = false;
    dot->add_option("--of", dot_of, "What to draw")
        ->check(CLI::IsMember({"graph", "quotient", "porcupine", "pq", "relquotient"}));
    dot->add_option("--copies", copies, "Tail copies drawn");
    dot->add_flag("--clusters", colour_clusters, "Fill terminal clusters");
    auto* fixtures = app.add_subcommand("fixtures", "Write the shipped fixture graphs");
    common(fixtures, false);
    std::vector<std::string> fixture_names;
    std::string fixture_dir = "fixtures";
    fixtures->add_option("name", fixture_names, "Fixture names (default: all)");
    fixtures->add_option("--dir", fixture_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    CLI::App* cmd = app.get_subcommands().front();
    std::string name = cmd->get_name();
    Graph g;
    Outcome out;
    auto emit = [&](const json& j, const std::string& text) {
        std::string body = o.text ? text : j.dump(2) + "\n";
        if (o.out.empty()) std::cout << body;
        else std::ofstream(o.out, std::ios::binary) << body;
    };

    try {
        Unroll u = unroll_policy(o);
        if (!o.input.empty()) g = parse_graph(slurp(o.input));
        auto opt_set = [&](const std::string& arg, const char* flag) { return arg.empty() ? VertexSet{} : set_arg(g, arg, flag); };
        auto need = [&](const std::string& arg, const char* flag) {
            if (arg.empty()) throw usage_error(std::string("--") + flag + " is required");
            return set_arg(g, arg, flag);
        };

        if (name == "validate") {
            json kinds = json::object();
            std::string text = g.name + ": " + std::to_string(g.vertices.size()) + " core vertices, " +
                               std::to_string(g.bundles.size()) + " bundles, " + std::to_string(g.tails.size()) + " tails\n";
            for (const auto& v : g.vertices) {
                const char* k = kind_name(classify_vertex(g, VertexRef::core(v)));
                kinds[v] = k;
                text += v + " " + k + "\n";
            }
            for (const auto& t : g.tails)
                for (const auto& p : t.pattern)
                    for (std::uint64_t n : {0, 1}) {
                        VertexRef r = VertexRef::tail(p, n);
                        std::string key = n ? p + "@n (n>=1)" : r.to_string();
                        kinds[key] = kind_name(classify_vertex(g, r));
                        text += key + " " + kind_name(classify_vertex(g, r)) + "\n";
                    }
            out.result = {{"graph", report::of(g)}, {"kinds", kinds}};
            out.text = text;
        } else if (name == "closure") {
            VertexSet v = need(o.v, "V");
            VertexSet sat = saturated_closure(g, v, u), cl = closure(g, v, u);
            out.result = {{"V", report::of(v)}, {"saturated", report::of(sat)}, {"closure", report::of(cl)}};
            out.text = "saturated closure: " + sat.to_string() + "\nhereditary saturated closure: " + cl.to_string() + "\n";
            if (!o.h.empty()) {
                ClosureCheck c = characterize_closure(g, v, need(o.h, "H"), u);
                json cj{{"kind", ClosureCheck::name(c.kind)}, {"witness", report::of(c.witness)}};
                json path = json::array();
                for (const auto& x : c.path) path.push_back(x.to_string());
                cj["path"] = path;
                cj["ray"] = c.ray;
                out.result["check"] = cj;
                out.text += std::string("check: ") + ClosureCheck::name(c.kind) + (c.witness ? " at " + c.witness->to_string() : "") + "\n";
            }
        } else if (name == "pairs") {
            if (!o.h.empty()) {
                VertexSet h = need(o.h, "H");
                VertexSet b = o.g.empty() ? breaking_vertices(g, h, u).set : relative_breaking(g, h, need(o.g, "G"), u);
                out.result = {{"H", report::of(h)}, {"breaking", report::of(b)}, {"infinite", !b.finite()}};
                if (!o.g.empty()) out.result["G"] = report::of(need(o.g, "G"));
                out.text = "breaking vertices: " + b.to_string() + "\n";
            } else {
                PairLattice lat = enumerate_pairs(g);
                out.result = report::of(lat);
                out.text = std::to_string(lat.pairs.size()) + " admissible pairs\n";
                for (std::size_t i = 0; i < lat.pairs.size(); ++i) out.text += std::to_string(i) + " " + pair_text(lat.pairs[i]) + "\n";
            }
        } else if (name == "quotient" || name == "porcupine" || name == "pq" || name == "relquotient") {
            AdmissiblePair lo{opt_set(o.h, "H"), opt_set(o.s, "S")}, hi{opt_set(o.g, "G"), opt_set(o.t, "T")};
            ConstructionResult r;
            if (name == "quotient") r = quotient_graph(g, lo, u);
            else if (name == "porcupine") r = porcupine_graph(g, lo, u);
            else if (name == "relquotient") r = relative_quotient(g, lo.H, need(o.g, "G"), u);
            else {
                if (o.g.empty()) throw usage_error("--G is required");
                for (const auto& p : {lo, hi})
                    if (!is_admissible(g, p, u)) throw error(errc::precondition, p.to_string() + " is not admissible");
                r = porcupine_quotient(g, lo, hi, u);
            }
            out.result = report::of(r);
            out.text = construction_text(r);
        } else if (name == "terminal") {
            TerminalSets t = terminal_vertices(g, u);
            out.result = {{"by_kind", report::of(t)}, {"all", report::of(t.all())}};
            out.text = kinds_line(t);
        } else if (name == "clusters") {
            ClusterReport r = clusters(g, u);
            out.result = report::of(r);
            if (r.infinite) out.text = "infinitely many clusters: " + r.family + "\n";
            for (const auto& c : r.clusters)
                out.text += std::string(terminal_kind_name(c.kind)) + " " + c.members.to_string() + " closure " + c.closure.to_string() + "\n";
        } else if (name == "simple") {
            SimplicityVerdict v = is_cofinal(g, u);
            out.result = report::of(v);
            out.text = verdict_text(v) + "\n";
        } else if (name == "pis") {
            SimplicityVerdict v = is_cofinal(g, u);
            bool p = is_graded_purely_infinite_simple(g, u);
            out.result = {{"purely_infinite_simple", p}, {"simplicity", report::of(v)}};
            out.text = std::string(p ? "graded purely infinite simple" : "not graded purely infinite simple") + "; " + verdict_text(v) + "\n";
        } else if (name == "series") {
            SeriesLimits lim;
            lim.max_stages = max_stages;
            lim.unroll = u;
            if (seed) {
                auto rng = std::make_shared<std::mt19937>(*seed);
                lim.order = [rng](int, const Graph&, const std::vector<Cluster>& cs) {
                    std::vector<std::size_t> idx(cs.size());
                    std::iota(idx.begin(), idx.end(), 0);
                    std::shuffle(idx.begin(), idx.end(), *rng);
                    return idx;
                };
            }
            SeriesReport r = build_series(g, lim);
            out.result = report::of(r);
            std::ostringstream os;
            os << series_status_name(r.status);
            if (r.status != SeriesStatus::HasSeries) os << " (" << no_series_reason_name(r.reason) << ", stage " << r.stage << "): " << r.witness;
            os << "\n";
            for (const auto& p : r.chain) os << "  " << pair_text(p) << "\n";
            for (const auto& f : r.factors)
                os << "factor " << pair_text(f.lo) << " < " << pair_text(f.hi) << ": " << terminal_kind_name(f.kind) << ", "
                   << element_type_name(f.type) << "\n";
            out.text = os.str();
            out.code = r.status == SeriesStatus::HasSeries ? ok : r.status == SeriesStatus::NoSeries ? no_series : undetermined;
        } else if (name == "verify") {
            std::vector<AdmissiblePair> chain;
            try {
                chain = read_chain(g, chain_file);
            } catch (const json::exception& e) {
                throw usage_error(std::string("--chain: ") + e.what());
            }
            SeriesCheck c = verify_series(g, chain, u);
            out.result = report::of(c);
            out.text = c.valid ? "valid, length " + std::to_string(c.length) + "\n"
                               : "invalid at step " + std::to_string(c.failed_step) + ": " + c.reason + "\n";
            out.code = c.valid ? ok : domain;
        } else if (name == "montype") {
            MonoidType m = monoid_type(g, u);
            out.result = report::of(m);
            out.text = std::string("monoid type: ") + MonoidType::name(m.kind) + "\n";
            out.result["profile"] = report::of(two_type_profile(g, u));
            json per = json::object();
            std::vector<VertexRef> vs;
            if (!o.v.empty()) {
                VertexSet sel = need(o.v, "V");
                if (!sel.finite()) throw usage_error("--V must be finite");
                vs = sel.members();
            } else {
                for (const auto& v : g.vertices) vs.push_back(VertexRef::core(v));
            }
            for (const auto& v : vs) {
                TypeVerdict t = element_type(g, v, u);
                per[v.to_string()] = report::of(t);
                out.text += v.to_string() + " " + t.to_string() + "\n";
            }
            out.result["elements"] = per;
            try {
                json ideals = json::array();
                for (const auto& mi : minimal_ideals(g, u))
                    ideals.push_back({{"cluster", report::of(mi.cluster)}, {"type", element_type_name(mi.type)}, {"generator", report::of(mi.generator)}});
                out.result["minimal_ideals"] = ideals;
            } catch (const error& e) {
                if (e.code() != errc::infinite_cluster_family) throw;
                out.result["minimal_ideals"] = nullptr;
            }
        } else if (name == "oracle") {
            if (!g.is_core(oracle_vertex)) throw usage_error("unknown core vertex " + oracle_vertex);
            OracleType t = oracle_type(g, oracle_vertex, bounds);
            out.result = report::of(t);
            out.result["vertex"] = oracle_vertex;
            out.result["bounds"] = {{"max_size", bounds.max_size}, {"max_shift", bounds.max_shift}, {"max_states", bounds.max_states}};
            static const char* names[] = {"Periodic", "Aperiodic", "Unknown"};
            out.text = std::string(names[t.kind]) + (t.n ? "(" + std::to_string(t.n) + ")" : "") + "\n";
            for (const auto& s : t.trace) out.text += "  " + s.to_string() + "\n";
        } else if (name == "dot") {
            DotStyle style;
            style.copies = copies;
            Graph shown = g;
            ConstructionResult r;
            AdmissiblePair lo{opt_set(o.h, "H"), opt_set(o.s, "S")}, hi{opt_set(o.g, "G"), opt_set(o.t, "T")};
            if (dot_of != "graph") {
                if (dot_of == "quotient") r = quotient_graph(g, lo, u);
                else if (dot_of == "porcupine") r = porcupine_graph(g, lo, u);
                else if (dot_of == "relquotient") r = relative_quotient(g, lo.H, hi.H, u);
                else r = porcupine_quotient(g, lo, hi, u);
                shown = r.graph;
                style.provenance = &r.vertices;
            }
            if (colour_clusters) style.cluster_of = cluster_colouring(shown, clusters(shown, u), copies);
            std::string d = to_dot(shown, style);
            if (o.out.empty()) std::cout << d;
            else std::ofstream(o.out, std::ios::binary) << d;
            return ok;
        } else if (name == "fixtures") {
            const auto& cat = fixture_catalog();
            if (fixture_names.empty())
                for (const auto& [n, text] : cat) fixture_names.push_back(n);
            fs::create_directories(fixture_dir);
            json written = json::array();
            for (const auto& n : fixture_names) {
                const std::string& text = fixture_text(n);
                fs::path p = fs::path(fixture_dir) / (n + ".graph");
                std::ofstream(p, std::ios::binary) << text;
                written.push_back(p.string());
                out.text += p.string() + "\n";
            }
            out.result = {{"written", written}};
        }
        emit(report::envelope(name, o.input.empty() ? "" : g.name, out.result), out.text);
        return out.code;
    } catch (const usage_error& e) {
        std::cerr << "lpakit " << name << ": " << e.what() << "\n";
        return usage;
    } catch (const error& e) {
        std::cerr << "lpakit " << name << ": " << e.what() << "\n";
        emit(report::failure(name, o.input.empty() ? "" : g.name, e), std::string(e.what()) + "\n");
        return domain;
    }
}
