#pragma once

#include "constructions.hpp"
#include "digraph.hpp"
#include "epset.hpp"
#include "error.hpp"
#include "fixtures.hpp"
#include "graph.hpp"
#include "hsets.hpp"
#include "io.hpp"
#include "monoid.hpp"
#include "report.hpp"
#include "series.hpp"
#include "structure.hpp"
#include "terminal.hpp"
