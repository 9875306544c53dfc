#pragma once

#include <string>

#include "swarmneat/population.hpp"
#include "swarmneat/runner.hpp"

namespace swarmneat {

// Arena outline, interior wall, one path per agent with a marker at its
// last position.
std::string render_trajectory_svg(const TrajectoryLog& log);

// Best and mean fitness per generation with a mean +- stdev band.
std::string plot_evolution_svg(const EvolutionReport& report);

}  // namespace swarmneat
