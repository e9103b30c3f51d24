#include "flywheel/serialize.hpp"

namespace flywheel {

void to_json(nlohmann::json& j, const LeadSpec& lead) {
  j = nlohmann::json{{"center_frequency", lead.center_frequency},
                     {"bandwidth", lead.bandwidth},
                     {"coupling", lead.coupling},
                     {"inverse_temperature", lead.inverse_temperature},
                     {"chemical_potential", lead.chemical_potential}};
}

void from_json(const nlohmann::json& j, LeadSpec& lead) {
  j.at("center_frequency").get_to(lead.center_frequency);
  j.at("bandwidth").get_to(lead.bandwidth);
  j.at("coupling").get_to(lead.coupling);
  j.at("inverse_temperature").get_to(lead.inverse_temperature);
  j.at("chemical_potential").get_to(lead.chemical_potential);
}

void to_json(nlohmann::json& j, const DeviceParams& params) {
  j = nlohmann::json{{"mass", params.mass},
                     {"oscillator_frequency", params.oscillator_frequency},
                     {"coupling_energy", params.coupling_energy},
                     {"dot_energy", params.dot_energy},
                     {"left", params.left},
                     {"right", params.right},
                     {"bias", params.bias()}};
}

void from_json(const nlohmann::json& j, DeviceParams& params) {
  j.at("mass").get_to(params.mass);
  j.at("oscillator_frequency").get_to(params.oscillator_frequency);
  j.at("coupling_energy").get_to(params.coupling_energy);
  j.at("dot_energy").get_to(params.dot_energy);
  j.at("left").get_to(params.left);
  j.at("right").get_to(params.right);
}

}  // namespace flywheel
