#pragma once

#include <stdexcept>
#include <string>

namespace asvnav {

/// Rotation logarithm requested at angle pi, where the branch is ambiguous.
struct LogBranchError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Orientation in a configuration where a requested decomposition is undefined
/// (e.g. yaw extraction at pitch +-90 deg).
struct DegenerateOrientationError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Innovation covariance is numerically singular; no update direction exists.
struct UnobservableInnovationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No usable horizon segment (all candidates filtered, or empty input).
struct NoHorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Projected horizon falls outside the image bounds.
struct HorizonOutOfFrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Configuration document is malformed, has unknown keys, or out-of-range values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace asvnav
