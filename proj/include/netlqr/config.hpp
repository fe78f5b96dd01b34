#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netlqr/model.hpp"

namespace netlqr {

// Key-value model configuration, one "key = value" per line, '#' comments.
//
//   model      hvac | power | custom
//   rows, cols mesh size (hvac)
//   dt, k      time step; uniform coupling (hvac)
//   eta1, eta2, eta3
//   edge_list  path to an edge list, relative to the config file (power)
//   nodes      minimum node count for the edge list
//   v_ref, inertia   power coupling k_ij = w_ij * v_ref / inertia^2
//   controlled 1-based node list; hvac nodes outside get no actuator
//   observed   1-based node list; power nodes outside get no stage cost
//   block_file path to a block file (custom)
//   partition  1-based blocks, e.g. "1,2;3,4"
//   eta        sweep grid, e.g. "0.5,1,2,4"
//   kappa      sweep range "a..b"
//   horizon    KKT horizon
//   alpha0     certification rate
struct ModelConfig {
  std::string model = "hvac";
  int rows = 10, cols = 10;
  double dt = 1.0, k = 0.05;
  double eta1 = 1.0, eta2 = 1.0, eta3 = 0.0;
  std::string edge_list;
  int nodes = 0;
  double v_ref = 1.0, inertia = 1.0;
  std::optional<std::vector<int>> controlled, observed;  // 1-based
  std::string block_file;
  std::optional<std::vector<std::vector<int>>> partition;  // 1-based
  std::vector<double> eta;
  std::optional<std::pair<int, int>> kappa;
  std::optional<int> horizon;
  double alpha0 = 0.5;
  std::filesystem::path base_dir;  // resolves relative paths
};

ModelConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ModelConfig load_config(const std::filesystem::path& path);

// Inverse of parse_config: every key, reals at 17 significant digits.
std::string write_config(const ModelConfig& cfg);

// "a..b" or a single integer.
std::pair<int, int> parse_kappa_range(std::string_view s);
std::vector<double> parse_real_list(std::string_view s);
std::vector<int> parse_int_list(std::string_view s);
std::vector<std::vector<int>> parse_partition(std::string_view s);

// Copy with eta1 = eta2 = eta.
ModelConfig with_eta(const ModelConfig& cfg, double eta);

NetworkedSystem build_system(const ModelConfig& cfg);

// Custom block format, 1-based ids:
//   nodes N
//   dims i nx nu
//   edge i j
//   A i j = r11 r12; r21 r22     (likewise B, Q, R; Q and R mirror off-diagonal blocks)
NetworkedSystem parse_block_file(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

// 17 significant digits.
std::string format_real(double v);

// FNV-1a over the dense A, B, Q, R entries printed with format_real.
std::uint64_t model_hash(const NetworkedSystem& sys);
std::string hash_hex(std::uint64_t h);

}  // namespace netlqr
