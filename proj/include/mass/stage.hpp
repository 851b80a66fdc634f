#pragma once

#include <optional>
#include <string_view>

namespace mass {

enum class Stage { PATH_SIM, HIL, INITIAL_TRIALS, SMALL_CRAFT, MEDIUM_SHIP, IMO };

inline constexpr Stage kAllStages[] = {Stage::PATH_SIM,    Stage::HIL,         Stage::INITIAL_TRIALS,
                                       Stage::SMALL_CRAFT, Stage::MEDIUM_SHIP, Stage::IMO};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

}  // namespace mass
