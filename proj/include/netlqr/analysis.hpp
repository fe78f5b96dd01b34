#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netlqr/bounds.hpp"
#include "netlqr/config.hpp"
#include "netlqr/kkt_oracle.hpp"
#include "netlqr/lqr.hpp"
#include "netlqr/truncation.hpp"

namespace netlqr {

inline const std::vector<double> kDefaultEtaGrid = {0.5, 1.0, 2.0, 4.0};

struct SweepOptions {
  std::vector<double> etas;                  // empty: config eta list, then the default grid
  std::optional<std::pair<int, int>> kappa;  // empty: config kappa, then 0..diameter
  bool bound_audit = true;
};

struct SweepRow {
  double eta = 0;
  int kappa = 0;
  std::optional<double> rel_trunc_err;  // empty when K* = 0
  double spectral_radius = 0;
  std::optional<double> rel_opt_gap;    // empty when the truncated loop is unstable
  bool stable = false;
};

struct EtaSummary {
  double eta = 0;
  std::string model_hash;
  std::optional<std::string> error;  // DARE diagnostic; no rows for this eta
  long dare_iterations = 0;
  double dare_residual = 0;
  double optimal_spectral_radius = 0;
  DecayProfile profile;
  std::vector<double> abs_trunc_err;  // kappa = 0..max kappa
  std::optional<DecayFit> truncation_fit;
  std::optional<std::string> certification_error;
  std::optional<BoundConstants> bounds;
  BoundReport decay_check, truncation_check;
  RegretReport regret;
};

struct SweepResult {
  std::string model;
  int diameter = 0;
  std::pair<int, int> kappa{0, 0};
  std::vector<SweepRow> rows;
  std::vector<EtaSummary> per_eta;
};

// eta1 = eta2 = eta for each grid value; eta3 from the config.
SweepResult run_sweep(const ModelConfig& cfg, const SweepOptions& opts = {});

// sweep.csv, decay_profile.csv, fits.csv, bound_checks.csv, sweep_meta.txt
void write_sweep(const SweepResult& r, const std::filesystem::path& out_dir);
void write_sweep_csv(const SweepResult& r, std::ostream& os);

struct ConstantsReport {
  std::string model;
  double eta1 = 0, eta2 = 0, eta3 = 0;
  Certification cert;
  BoundConstants bounds;
  std::vector<std::string> range_violations;
  std::vector<int> growth;
  int diameter = 0;
  bool kappa_bar_within_diameter = false;
  long dare_iterations = 0;
  double min_eig_P_minus_Q = 0, max_eig_P = 0;
  double gain_norm = 0, gain_norm_bound = 0;
  double optimal_spectral_radius = 0;
  BoundReport decay_check, truncation_check, loop_check;
  RegretReport regret;
  bool pass() const;
};

ConstantsReport run_constants_audit(const ModelConfig& cfg, std::optional<double> alpha0 = {});
void write_constants_report(const ConstantsReport& r, std::ostream& os);

struct OracleReport {
  int T = 0;
  int dim = 0;
  double discrepancy = 0;             // ||K_kkt - K_dare||
  std::optional<double> horizon_drift;  // ||K_kkt(T) - K_kkt(T+1)||
  int bandwidth_same_stage = 0, bandwidth_transition_stage = 0;
  std::size_t stage0_mismatches = 0;
  std::optional<KktBoundReport> bounds;
  std::optional<std::string> certification_error;
  std::optional<DecayProfile> inverse_profile;
  std::optional<BoundReport> inverse_check;
};

// Default T = diameter + 1. Throws SizeGuardError beyond kKktMaxDim.
OracleReport run_oracle_check(const ModelConfig& cfg, std::optional<int> T = {});
void write_oracle_report(const OracleReport& r, std::ostream& os);

// gain_blocks.csv (i, j, distance, block_norm; 1-based) and gain.csv (dense rows).
void write_gain(const NetworkedSystem& sys, const GainMatrix& K, const std::filesystem::path& out_dir);

void write_validation_report(const ValidationReport& v, std::ostream& os);
void write_uniformity_report(const UniformityReport& u, std::ostream& os);

}  // namespace netlqr
