#pragma once

#include "osasi/rir.hpp"
#include "osasi/types.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace osasi {

using Json = nlohmann::json;

/// Reject keys outside the allowed set (strict config parsing).
void require_keys(const Json& obj, const std::string& context,
                  std::initializer_list<const char*> allowed);

const Json& require_field(const Json& obj, const std::string& context, const char* key);

Json scenario_to_json(const RoomScenario& scenario);
RoomScenario scenario_from_json(const Json& j, const std::string& context = "scenario");

}  // namespace osasi
