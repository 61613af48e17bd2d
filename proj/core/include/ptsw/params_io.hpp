#pragma once

// Parameter files. Two formats are accepted: a JSON object, or plain
// `key = value` lines with `#` comments. Recognized keys are
//
//   delta, epsilon            qubit tunneling and bias
//   omega, theta, theta_frac  alternative spelling (theta = pi / theta_frac)
//   gamma, omega_r, g, n_max
//
// Mixing the two qubit spellings in one source is a ConfigError.

#include <optional>
#include <stdexcept>
#include <string>

#include "ptsw/qed_model.hpp"

namespace ptsw {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamsInput {
  std::optional<double> delta, epsilon;
  std::optional<double> omega, theta;
  std::optional<double> gamma, omega_r, g;
  std::optional<int> n_max;

  bool uses_cartesian() const { return delta || epsilon; }
  bool uses_polar() const { return omega || theta; }
};

ParamsInput parse_params_text(const std::string& text);
ParamsInput load_params_file(const std::string& path);

/// Fields set in `over` replace those in `base`. An angle given in one
/// spelling drops the other spelling from `base`, so flags can override a
/// file written in either form.
ParamsInput merge_params(ParamsInput base, const ParamsInput& over);

/// Fills unset fields from `defaults` and validates. Throws ConfigError on
/// mixed spellings.
SystemParams resolve_params(const ParamsInput& in, const SystemParams& defaults);

/// One-line `key=value` rendering used in artifact headers.
std::string describe(const SystemParams& p);

}  // namespace ptsw
