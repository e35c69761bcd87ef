#include "osasi/json_util.hpp"

#include <algorithm>
#include <vector>

namespace osasi {

void require_keys(const Json& obj, const std::string& context,
                  std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(context + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(context + ": unknown key '" + item.key() + "'");
  }
}

const Json& require_field(const Json& obj, const std::string& context, const char* key) {
  if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  return obj.at(key);
}

namespace {

Json vec3_to_json(const Eigen::Vector3d& v) {
  return Json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vec3_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(context + ": expected [x, y, z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

Json scenario_to_json(const RoomScenario& s) {
  Json j;
  j["room_dims"] = vec3_to_json(s.room_dims);
  j["t60"] = s.t60;
  j["fs"] = s.sample_rate;
  Json mics = Json::array();
  for (const auto& m : s.mic_positions) mics.push_back(vec3_to_json(m));
  j["mic_positions"] = mics;
  j["source_sector"] = Json{
      {"center", vec3_to_json(s.source_sector.center)},
      {"radius", s.source_sector.radius},
      {"azimuth_deg", Json::array({s.source_sector.azimuth_deg[0], s.source_sector.azimuth_deg[1]})},
      {"elevation_deg",
       Json::array({s.source_sector.elevation_deg[0], s.source_sector.elevation_deg[1]})},
  };
  j["rir_length"] = s.rir_length;
  if (s.max_reflection_order < 0)
    j["max_reflection_order"] = "auto";
  else
    j["max_reflection_order"] = s.max_reflection_order;
  return j;
}

RoomScenario scenario_from_json(const Json& j, const std::string& context) {
  require_keys(j, context,
               {"room_dims", "t60", "fs", "mic_positions", "source_sector", "rir_length",
                "max_reflection_order"});
  RoomScenario s;
  s.room_dims = vec3_from_json(require_field(j, context, "room_dims"), context + ".room_dims");
  s.t60 = require_field(j, context, "t60").get<double>();
  s.sample_rate = require_field(j, context, "fs").get<double>();
  s.mic_positions.clear();
  for (const auto& m : require_field(j, context, "mic_positions"))
    s.mic_positions.push_back(vec3_from_json(m, context + ".mic_positions"));

  const Json& sec = require_field(j, context, "source_sector");
  const std::string sec_ctx = context + ".source_sector";
  require_keys(sec, sec_ctx, {"center", "radius", "azimuth_deg", "elevation_deg"});
  s.source_sector.center = vec3_from_json(require_field(sec, sec_ctx, "center"), sec_ctx + ".center");
  s.source_sector.radius = require_field(sec, sec_ctx, "radius").get<double>();
  const Json& az = require_field(sec, sec_ctx, "azimuth_deg");
  const Json& el = require_field(sec, sec_ctx, "elevation_deg");
  if (!az.is_array() || az.size() != 2 || !el.is_array() || el.size() != 2)
    throw ConfigError(sec_ctx + ": angle ranges must be [lo, hi]");
  s.source_sector.azimuth_deg[0] = az.at(0).get<double>();
  s.source_sector.azimuth_deg[1] = az.at(1).get<double>();
  s.source_sector.elevation_deg[0] = el.at(0).get<double>();
  s.source_sector.elevation_deg[1] = el.at(1).get<double>();

  s.rir_length = require_field(j, context, "rir_length").get<int>();
  const Json& order = require_field(j, context, "max_reflection_order");
  if (order.is_string()) {
    if (order.get<std::string>() != "auto")
      throw ConfigError(context + ".max_reflection_order: expected integer or \"auto\"");
    s.max_reflection_order = -1;
  } else {
    s.max_reflection_order = order.get<int>();
  }
  s.validate();
  return s;
}

}  // namespace osasi
