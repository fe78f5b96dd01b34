#pragma once

#include <optional>
#include <vector>

#include "netlqr/graph.hpp"
#include "netlqr/lqr.hpp"

namespace netlqr {

inline constexpr double kNormFloor = 1e-14;

// K^kappa: blocks with d(i,j) > kappa, or unreachable, become exact zeros.
GainMatrix truncate_gain(const GainMatrix& K, const DistanceMatrix& dist, int kappa);

struct TruncationError {
  double absolute = 0.0;
  std::optional<double> relative;  // empty when ||K*|| = 0
};

TruncationError truncation_error(const GainMatrix& Kstar, const GainMatrix& Kkappa);

struct DecayProfile {
  std::vector<double> max_norm;    // index d
  std::vector<long> pair_count;    // index d
  std::optional<double> upsilon_emp, rho_emp;
};

// Per-distance maximum block norm over reachable pairs, fitted when possible.
DecayProfile block_norm_profile(const GainMatrix& K, const DistanceMatrix& dist);

struct DecayFit {
  double upsilon = 0.0;
  double rho = 0.0;
  double slope = 0.0;      // log-scale slope per unit distance
  double intercept = 0.0;
  int points = 0;
};

// Least squares of log(value) on index over entries above kNormFloor.
DecayFit fit_decay(const std::vector<double>& values);
DecayFit fit_decay(const DecayProfile& profile);

}  // namespace netlqr
