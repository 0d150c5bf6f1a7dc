// Closures and the quotient and porcupine constructions on a small graph.
#include <iostream>

#include <lpakit/lpakit.hpp>

int main() {
    using namespace lpakit;
    Graph g = parse_graph(fixture_text("FIX_GRID23"));
    VertexSet h = parse_vertex_set(g, "w0");
    VertexSet closed = closure(g, h);
    std::cout << "closure of " << h.to_string() << ": " << closed.to_string() << "\n";

    AdmissiblePair pair{closed, {}};
    std::cout << "quotient:\n" << emit_graph(quotient_graph(g, pair).graph);
    std::cout << "porcupine:\n" << emit_graph(porcupine_graph(g, pair).graph);
}
