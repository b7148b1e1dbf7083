#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace optfair {

// Full resolved config for a named experiment preset.
nlohmann::json preset_config(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace optfair
