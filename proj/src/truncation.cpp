#include "netlqr/truncation.hpp"

#include <algorithm>
#include <cmath>

#include "netlqr/errors.hpp"

namespace netlqr {

GainMatrix truncate_gain(const GainMatrix& K, const DistanceMatrix& dist, int kappa) {
  if (kappa < 0) throw InvalidArgument("truncate_gain: kappa must be nonnegative");
  if (dist.size() != K.num_nodes()) throw InvalidArgument("truncate_gain: gain and graph sizes differ");
  GainMatrix out = K;
  for (int i = 0; i < K.num_nodes(); ++i)
    for (int j = 0; j < K.num_nodes(); ++j)
      if (!dist.reachable(i, j) || dist(i, j) > kappa) out.remove_block(i, j);
  return out;
}

TruncationError truncation_error(const GainMatrix& Kstar, const GainMatrix& Kkappa) {
  if (Kstar.dense().rows() != Kkappa.dense().rows() || Kstar.dense().cols() != Kkappa.dense().cols())
    throw InvalidArgument("truncation_error: gain dimensions differ");
  TruncationError e;
  e.absolute = spectral_norm(Kstar.dense() - Kkappa.dense());
  const double ref = spectral_norm(Kstar.dense());
  if (ref > 0.0) e.relative = e.absolute / ref;
  return e;
}

DecayProfile block_norm_profile(const GainMatrix& K, const DistanceMatrix& dist) {
  if (dist.size() != K.num_nodes()) throw InvalidArgument("block_norm_profile: size mismatch");
  int dmax = 0;
  for (int i = 0; i < dist.size(); ++i)
    for (int j = 0; j < dist.size(); ++j)
      if (dist.reachable(i, j)) dmax = std::max(dmax, dist(i, j));
  DecayProfile p;
  p.max_norm.assign(dmax + 1, 0.0);
  p.pair_count.assign(dmax + 1, 0);
  for (int i = 0; i < K.num_nodes(); ++i)
    for (int j = 0; j < K.num_nodes(); ++j) {
      if (!dist.reachable(i, j)) continue;
      const int d = dist(i, j);
      ++p.pair_count[d];
      Matrix b = K.block(i, j);
      if (b.size() == 0) continue;
      p.max_norm[d] = std::max(p.max_norm[d], spectral_norm(b));
    }
  try {
    DecayFit f = fit_decay(p.max_norm);
    p.upsilon_emp = f.upsilon;
    p.rho_emp = f.rho;
  } catch (const InvalidArgument&) {
  }
  return p;
}

DecayFit fit_decay(const std::vector<double>& values) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t d = 0; d < values.size(); ++d) {
    if (!(values[d] > kNormFloor) || !std::isfinite(values[d])) continue;
    const double x = static_cast<double>(d), y = std::log(values[d]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (n < 2) throw InvalidArgument("fit_decay: fewer than two points above the norm floor");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  return DecayFit{std::exp(intercept), std::exp(slope), slope, intercept, static_cast<int>(n)};
}

DecayFit fit_decay(const DecayProfile& profile) { return fit_decay(profile.max_norm); }

}  // namespace netlqr
