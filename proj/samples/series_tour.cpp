// Composition series and element types for a graph read from a file.
#include <fstream>
#include <iostream>
#include <sstream>

#include <lpakit/lpakit.hpp>

int main(int argc, char** argv) {
    using namespace lpakit;
    std::string text = fixture_text("FIX_UVW");
    if (argc > 1) {
        std::ifstream in(argv[1]);
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    try {
        Graph g = parse_graph(text);
        for (const auto& v : g.vertices) std::cout << v << ": " << element_type(g, VertexRef::core(v)).to_string() << "\n";
        SeriesReport r = build_series(g);
        std::cout << report::of(r).dump(2) << "\n";
        return r.status == SeriesStatus::HasSeries ? 0 : 1;
    } catch (const error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
