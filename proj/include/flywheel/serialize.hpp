#pragma once

// JSON forms of the parameter types, shared by sidecars and manifests.

#include "flywheel/device.hpp"

#include <json.hpp>

namespace flywheel {

void to_json(nlohmann::json& j, const LeadSpec& lead);
void from_json(const nlohmann::json& j, LeadSpec& lead);
void to_json(nlohmann::json& j, const DeviceParams& params);
void from_json(const nlohmann::json& j, DeviceParams& params);

}  // namespace flywheel
