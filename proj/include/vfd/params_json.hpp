#pragma once

#include <json.hpp>

#include "vfd/params.hpp"

namespace vfd {

inline void to_json(nlohmann::json& j, const RgfParams& p) {
  j = nlohmann::json{{"t_offset", p.t_offset}, {"kg", p.kg},
                     {"kv", p.kv},             {"kc", p.kc},
                     {"kn", p.kn},             {"log_epsilon", p.log_epsilon},
                     {"moment_epsilon", p.moment_epsilon}};
}

/// Missing keys keep their current value, so partial objects act as overrides.
inline void from_json(const nlohmann::json& j, RgfParams& p) {
  if (!j.is_object()) throw nlohmann::json::type_error::create(302, "params must be an object", &j);
  if (j.contains("t_offset")) j.at("t_offset").get_to(p.t_offset);
  if (j.contains("kg")) j.at("kg").get_to(p.kg);
  if (j.contains("kv")) j.at("kv").get_to(p.kv);
  if (j.contains("kc")) j.at("kc").get_to(p.kc);
  if (j.contains("kn")) j.at("kn").get_to(p.kn);
  if (j.contains("log_epsilon")) j.at("log_epsilon").get_to(p.log_epsilon);
  if (j.contains("moment_epsilon")) j.at("moment_epsilon").get_to(p.moment_epsilon);
}

}  // namespace vfd
