#pragma once

// Checks on the electronic coefficients that need no stochastic integration.

#include "flywheel/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace flywheel {

enum class CheckStatus { pass, fail, skipped };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;

  bool ok() const;
  nlohmann::json to_json() const;
  /// One line per check.
  std::string to_text() const;
};

/// Sum rule at each configured voltage, and at V = 0: fluctuation-dissipation
/// ratio at every table node, detailed balance of the noise spectrum, parity
/// of the coefficients and agreement of the two damping evaluations. The
/// equilibrium checks are skipped when the leads have different temperatures.
ValidationReport validate_electronics(const RunConfig& config, int workers = 1);

}  // namespace flywheel
