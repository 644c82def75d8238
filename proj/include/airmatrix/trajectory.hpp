#pragma once

#include <string>
#include <vector>

#include "airmatrix/grid.hpp"

namespace airmatrix {

// One planned stay inside a block. The aircraft enters at t_enter, may hover
// for `hover` seconds before traversing the outgoing link, and hands the
// block to its successor at t_exit (= successor's t_enter).
struct BlockVisit {
    BlockIndex block;
    double t_enter = 0.0;
    double t_exit = 0.0;
    double hover = 0.0;
};

struct Trajectory4D {
    int id = 0;
    std::string aircraft;
    std::vector<BlockVisit> visits;
    double flight_time = 0.0;

    double departure_time() const { return visits.empty() ? 0.0 : visits.front().t_enter; }
    double arrival_time() const { return visits.empty() ? 0.0 : visits.back().t_exit; }
};

}  // namespace airmatrix
