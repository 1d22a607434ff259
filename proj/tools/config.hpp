#pragma once

#include <map>
#include <optional>
#include <string>

#include "eprsim/ensemble.hpp"
#include "eprsim/nonlocality.hpp"

namespace eprsim::cli {

// Fully resolved run configuration. Assembled from defaults, then a flat
// key-value config file, then command-line flags (flags win). Angles are
// taken in degrees unless settings.units = rad.
struct RunConfig {
  double theta_a = 0.0;  // radians after resolution
  double theta_b = 0.0;
  double theta_a_prime = 0.0;
  double theta_b_prime = 90.0 * kPi / 180.0;
  std::string units = "deg";
  InteractionMode mode = InteractionMode::VonNeumann;

  CouplingProfile couplings{1.0, 1.0};
  PacketSpec packet{1.0};

  std::string ensemble_kind = "equilibrium";
  std::string ensemble_side = "right";        // half-square
  std::string ensemble_quadrant = "top-right";
  double ensemble_x0 = -0.25, ensemble_x1 = 0.25, ensemble_y0 = -0.25, ensemble_y1 = 0.25;
  double ensemble_tilt = 1.0;
  double ensemble_r_a0 = 0.0, ensemble_r_b0 = 0.0;
  std::string ensemble_file;

  Method method = Method::mc(1'000'000, 42);

  std::string output_format = "csv";
  std::string output_path = "-";  // stdout

  EnsembleDistribution make_distribution() const;

  /// Key-value echo of every resolved field (radians), embedded in reports.
  std::map<std::string, std::string> resolved() const;
};

/// Raw option values before resolution; string-typed so that file and flag
/// sources merge uniformly.
using KeyValues = std::map<std::string, std::string>;

/// Parse a flat `section.key = value` config file; '#' starts a comment.
KeyValues parse_config_file(const std::string& path);

/// Resolve defaults <- file <- flags. Throws std::invalid_argument naming the
/// offending key on any invalid value. The EPRSIM_SEED environment variable
/// overrides the default seed when no explicit method.seed is given.
RunConfig resolve_config(const KeyValues& file, const KeyValues& flags);

}  // namespace eprsim::cli
