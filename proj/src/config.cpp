#include "flywheel/config.hpp"

#include "flywheel/errors.hpp"
#include "flywheel/io.hpp"
#include "flywheel/serialize.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace flywheel {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"device", {"mass", "omega0", "lambda", "epsilon", "beta"}},
      {"lead_left", {"omega", "delta", "gamma", "beta"}},
      {"lead_right", {"omega", "delta", "gamma", "beta"}},
      {"sweep", {"voltages", "seed", "workers", "batches", "out_dir", "dump_trajectory", "max_extensions"}},
      {"integrator", {"dt", "steps", "burn_in", "record_stride", "initial_x", "initial_v", "scheme"}},
      {"table", {"extent", "points"}},
      {"grid", {"extent", "bins", "profile_bin_width"}},
      {"reconstruction", {"n_max", "max_n_max", "r_max", "tail_tolerance"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': cannot parse '" + text + "' as a number");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    if (!t.empty() && t[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long v = std::stoull(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    // accept integral values written in floating notation such as 1e7
    const double d = to_double(key, text);
    if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
      throw ConfigError("'" + key + "': expected a non-negative integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(key, item));
  }
  return out;
}

void apply_lead(const pt::ptree& section, const std::string& name, LeadSpec& lead) {
  for (const auto& [key, node] : section) {
    const std::string v = node.data();
    const std::string full = name + "." + key;
    if (key == "omega") lead.center_frequency = to_double(full, v);
    else if (key == "delta") lead.bandwidth = to_double(full, v);
    else if (key == "gamma") lead.coupling = to_double(full, v);
    else if (key == "beta") lead.inverse_temperature = to_double(full, v);
  }
}

}  // namespace

void RunConfig::validate() const {
  if (voltages.empty()) throw ConfigError("voltage list is empty");
  for (double v : voltages) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("voltages must be finite and non-negative");
    device.with_voltage(v).validate();
  }
  for (std::size_t i = 0; i < voltages.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (voltages[i] == voltages[j]) throw ConfigError("voltage list contains duplicates");
    }
  }
  if (!(integrator.time_step > 0.0)) throw ConfigError("integrator.dt must be positive");
  if (integrator.n_steps <= integrator.burn_in_steps) throw ConfigError("integrator.steps must exceed burn_in");
  if (integrator.record_stride == 0) throw ConfigError("integrator.record_stride must be at least 1");
  if (batches < 1) throw ConfigError("sweep.batches must be at least 1");
  if (integrator.recorded_samples() < static_cast<std::uint64_t>(batches)) {
    throw ConfigError("fewer recorded samples than batches");
  }
  if (!(table.extent > 0.0) || table.n_points < 16) throw ConfigError("table needs extent > 0 and at least 16 points");
  grid.validate();
  if (!(profile_bin_width > 0.0)) throw ConfigError("grid.profile_bin_width must be positive");
  if (reconstruction.initial_n_max < 1 || reconstruction.max_n_max < reconstruction.initial_n_max) {
    throw ConfigError("reconstruction n_max settings are inconsistent");
  }
  if (!(reconstruction.r_max > 0.0) || !(reconstruction.tail_tolerance > 0.0)) {
    throw ConfigError("reconstruction r_max and tail_tolerance must be positive");
  }
  if (workers < 1) throw ConfigError("sweep.workers must be at least 1");
  if (max_extensions < 0) throw ConfigError("sweep.max_extensions must be non-negative");
  if (out_dir.empty()) throw ConfigError("sweep.out_dir is empty");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["device"] = device;
  j["voltages"] = voltages;
  j["integrator"] = {{"dt", integrator.time_step},
                     {"steps", integrator.n_steps},
                     {"burn_in", integrator.burn_in_steps},
                     {"record_stride", integrator.record_stride},
                     {"initial_x", integrator.initial_x},
                     {"initial_v", integrator.initial_v},
                     {"scheme", integrator.scheme == StepScheme::symplectic_euler ? "symplectic" : "explicit"}};
  j["table"] = {{"extent", table.extent}, {"points", table.n_points}};
  j["grid"] = {{"extent", grid.extent}, {"bins", grid.bins}, {"profile_bin_width", profile_bin_width}};
  j["reconstruction"] = {{"n_max", reconstruction.initial_n_max},
                         {"max_n_max", reconstruction.max_n_max},
                         {"r_max", reconstruction.r_max},
                         {"tail_tolerance", reconstruction.tail_tolerance}};
  j["batches"] = batches;
  j["out_dir"] = out_dir.string();
  j["seed"] = master_seed;
  j["workers"] = workers;
  j["dump_trajectory"] = dump_trajectory;
  j["max_extensions"] = max_extensions;
  return j;
}

RunConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  for (const auto& [section, node] : tree) {
    if (!node.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, unused] : node) {
      if (!it->second.count(key)) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  RunConfig c;
  auto get = [&](const std::string& path) { return tree.get_optional<std::string>(pt::ptree::path_type(path, '/')); };

  if (auto v = get("device/mass")) c.device.mass = to_double("device.mass", *v);
  if (auto v = get("device/omega0")) c.device.oscillator_frequency = to_double("device.omega0", *v);
  if (auto v = get("device/lambda")) c.device.coupling_energy = to_double("device.lambda", *v);
  if (auto v = get("device/epsilon")) c.device.dot_energy = to_double("device.epsilon", *v);
  if (auto v = get("device/beta")) c.device = c.device.with_inverse_temperature(to_double("device.beta", *v));
  if (auto s = tree.get_child_optional("lead_left")) apply_lead(*s, "lead_left", c.device.left);
  if (auto s = tree.get_child_optional("lead_right")) apply_lead(*s, "lead_right", c.device.right);

  if (auto v = get("sweep/voltages")) c.voltages = to_list("sweep.voltages", *v);
  if (auto v = get("sweep/seed")) c.master_seed = to_unsigned("sweep.seed", *v);
  if (auto v = get("sweep/workers")) c.workers = static_cast<int>(to_unsigned("sweep.workers", *v));
  if (auto v = get("sweep/batches")) c.batches = static_cast<int>(to_unsigned("sweep.batches", *v));
  if (auto v = get("sweep/out_dir")) c.out_dir = trim(*v);
  if (auto v = get("sweep/dump_trajectory")) c.dump_trajectory = to_bool("sweep.dump_trajectory", *v);
  if (auto v = get("sweep/max_extensions")) c.max_extensions = static_cast<int>(to_unsigned("sweep.max_extensions", *v));

  bool burn_in_given = false;
  if (auto v = get("integrator/dt")) c.integrator.time_step = to_double("integrator.dt", *v);
  if (auto v = get("integrator/steps")) c.integrator.n_steps = to_unsigned("integrator.steps", *v);
  if (auto v = get("integrator/burn_in")) {
    c.integrator.burn_in_steps = to_unsigned("integrator.burn_in", *v);
    burn_in_given = true;
  }
  if (!burn_in_given) c.integrator.burn_in_steps = c.integrator.n_steps / 10;
  if (auto v = get("integrator/record_stride")) {
    c.integrator.record_stride = static_cast<std::uint32_t>(to_unsigned("integrator.record_stride", *v));
  }
  if (auto v = get("integrator/initial_x")) c.integrator.initial_x = to_double("integrator.initial_x", *v);
  if (auto v = get("integrator/initial_v")) c.integrator.initial_v = to_double("integrator.initial_v", *v);
  if (auto v = get("integrator/scheme")) {
    const std::string s = trim(*v);
    if (s == "symplectic") c.integrator.scheme = StepScheme::symplectic_euler;
    else if (s == "explicit") c.integrator.scheme = StepScheme::explicit_euler;
    else throw ConfigError("integrator.scheme must be 'symplectic' or 'explicit'");
  }

  if (auto v = get("table/extent")) c.table.extent = to_double("table.extent", *v);
  if (auto v = get("table/points")) c.table.n_points = static_cast<int>(to_unsigned("table.points", *v));
  if (auto v = get("grid/extent")) c.grid = GridSpec::with_extent(to_double("grid.extent", *v));
  if (auto v = get("grid/bins")) c.grid.bins = static_cast<int>(to_unsigned("grid.bins", *v));
  if (auto v = get("grid/profile_bin_width")) c.profile_bin_width = to_double("grid.profile_bin_width", *v);

  if (auto v = get("reconstruction/n_max")) {
    c.reconstruction.initial_n_max = static_cast<int>(to_unsigned("reconstruction.n_max", *v));
  }
  if (auto v = get("reconstruction/max_n_max")) {
    c.reconstruction.max_n_max = static_cast<int>(to_unsigned("reconstruction.max_n_max", *v));
  }
  if (auto v = get("reconstruction/r_max")) c.reconstruction.r_max = to_double("reconstruction.r_max", *v);
  if (auto v = get("reconstruction/tail_tolerance")) {
    c.reconstruction.tail_tolerance = to_double("reconstruction.tail_tolerance", *v);
  }

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

}  // namespace flywheel
