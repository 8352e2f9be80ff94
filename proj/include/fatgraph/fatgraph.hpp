#pragma once

#include "fatgraph/error.hpp"
#include "fatgraph/rat.hpp"
#include "fatgraph/grid.hpp"
#include "fatgraph/schedule.hpp"
#include "fatgraph/construction.hpp"
#include "fatgraph/parallel.hpp"
#include "fatgraph/words.hpp"
#include "fatgraph/measure.hpp"
#include "fatgraph/doubling.hpp"
#include "fatgraph/graph.hpp"
#include "fatgraph/render.hpp"
#include "fatgraph/serialize.hpp"
#include "fatgraph/report.hpp"
