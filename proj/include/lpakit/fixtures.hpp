#pragma once

#include <map>
#include <string>

#include "error.hpp"

namespace lpakit {

// Shipped fixture texts. fixtures/<name>.graph holds the same bytes.
inline const std::map<std::string, std::string>& fixture_catalog() {
    static const std::map<std::string, std::string> cat = {
        {"FIX_GRID23",
         "graph FIX_GRID23\n"
         "vertex u0 u1 v0 v1 w0 w1\n"
         "edge u1 u0 1\n"
         "edge e u1 v1 1\n"
         "edge h v1 v0 1\n"
         "edge g v1 w1 1\n"
         "edge w1 w0 1\n"},
        {"FIX_E22A",
         "graph FIX_E22A\n"
         "vertex x w v y z\n"
         "edge e1 x w 1\n"
         "edge w v *\n"
         "edge e2 w y 1\n"
         "edge e3 y v 1\n"
         "edge e4 y z 1\n"},
        {"FIX_LOOPOMEGA",
         "graph FIX_LOOPOMEGA\n"
         "vertex v w\n"
         "edge e v v 1\n"
         "edge v w *\n"},
        {"FIX_UVW",
         "graph FIX_UVW\n"
         "vertex u v w\n"
         "edge a u u 1\n"
         "edge b1 v v 1\n"
         "edge b2 v v 1\n"
         "edge v u 1\n"
         "edge v w 1\n"},
        {"FIX_F2LOOPS",
         "graph FIX_F2LOOPS\n"
         "vertex b s\n"
         "edge f1 b b 1\n"
         "edge f2 b b 1\n"
         "edge b s 1\n"},
        {"FIX_RAY1",
         "graph FIX_RAY1\n"
         "tail t outward\n"
         "  pattern p\n"
         "  inter p p 1\n"},
        {"FIX_RAY2",
         "graph FIX_RAY2\n"
         "tail t outward\n"
         "  pattern p\n"
         "  inter p p 2\n"},
        {"FIX_LOOPCHAIN_IN",
         "graph FIX_LOOPCHAIN_IN\n"
         "tail t inward\n"
         "  pattern p\n"
         "  intra p p 1\n"
         "  inter p p 1\n"},
        {"FIX_LOOPCHAIN_NOEND",
         "graph FIX_LOOPCHAIN_NOEND\n"
         "tail t outward\n"
         "  pattern p\n"
         "  intra p p 1\n"
         "  inter p p 1\n"},
        {"FIX_SINKROW",
         "graph FIX_SINKROW\n"
         "tail t outward\n"
         "  pattern p\n"},
        {"FIX_OMEGAROW",
         "graph FIX_OMEGAROW\n"
         "vertex s\n"
         "tail t outward\n"
         "  pattern p\n"
         "  inter p p 1\n"
         "  attach_out_all p s *\n"},
        // Small reference graphs for the four simplicity cases.
        {"FIX_PATH4",
         "graph FIX_PATH4\n"
         "vertex a b c d\n"
         "edge a b 1\n"
         "edge b c 1\n"
         "edge c d 1\n"},
        {"FIX_LOOP1",
         "graph FIX_LOOP1\n"
         "vertex v\n"
         "edge e v v 1\n"},
        {"FIX_ROSE2",
         "graph FIX_ROSE2\n"
         "vertex v\n"
         "edge e1 v v 1\n"
         "edge e2 v v 1\n"},
    };
    return cat;
}

inline const std::string& fixture_text(const std::string& name) {
    const auto& cat = fixture_catalog();
    auto it = cat.find(name);
    if (it == cat.end()) throw error(errc::unknown_fixture, name);
    return it->second;
}

}  // namespace lpakit
