#pragma once

#include "fatgraph/fatgraph.hpp"

namespace fixtures {

using namespace fatgraph;

inline Params reference_params() { return Params::validate(Rat(1, 2), {Stage{3, 3}}); }
inline Params two_stage_params() { return Params::validate(Rat(1, 2), {Stage{3, 3}, Stage{3, 3}}); }

inline const Construction& reference() {
    static const Construction cons(reference_params());
    return cons;
}

inline const Construction& two_stage() {
    static const Construction cons(two_stage_params());
    return cons;
}

} // namespace fixtures
