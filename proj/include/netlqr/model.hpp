#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netlqr/graph.hpp"
#include "netlqr/numkernel.hpp"

namespace netlqr {

enum class ModelKind { custom, hvac, power };

const char* to_string(ModelKind k);

// Parameters of the built-in examples, kept for certificate construction.
struct ExampleParams {
  double dt = 0.0;
  double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0;
  Matrix laplacian;                // weighted graph Laplacian
  std::vector<bool> actuated;      // per node
  std::vector<bool> observed;      // per node
};

using BlockMap = std::map<std::pair<int, int>, Matrix>;

struct NetworkedSystem {
  Graph graph;
  std::vector<int> state_dims;
  std::vector<int> input_dims;
  BlockMap A, B, Q, R;
  ModelKind kind = ModelKind::custom;
  ExampleParams params;

  int num_nodes() const { return graph.num_nodes; }
  int total_states() const;
  int total_inputs() const;
  std::vector<int> state_offsets() const;
  std::vector<int> input_offsets() const;

  // Symmetric blocks: stores (i,j) and its transpose at (j,i).
  void set_Q(int i, int j, const Matrix& m);
  void set_R(int i, int j, const Matrix& m);
};

// Blank system on a graph with the given per-node dimensions.
NetworkedSystem make_system(const Graph& g, std::vector<int> state_dims,
                            std::vector<int> input_dims);

struct DenseSystem {
  Matrix A, B, Q, R;
};

DenseSystem assemble_dense(const NetworkedSystem& sys);

struct ValidationReport {
  double norm_A = 0, norm_B = 0, norm_Q = 0, norm_R = 0;
  double min_eig_Q = 0, min_eig_R = 0;
  bool dims_ok = true;
  bool q_symmetric = true, r_symmetric = true;
  bool q_psd = true, r_pd = true;
  bool sparsity_ok = true;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

ValidationReport validate(const NetworkedSystem& sys);

// Per-node state [U; T] (thermal) or [theta; omega] (power), one input.
NetworkedSystem build_hvac(int rows, int cols, double dt, double k, double eta1, double eta2,
                           double eta3);
NetworkedSystem build_hvac_network(const Graph& g, const EdgeWeights& k, double dt, double eta1,
                                   double eta2, double eta3);
NetworkedSystem build_power(const Graph& g, const EdgeWeights& k, double dt, double eta1,
                            double eta2, double eta3);

// Nodes outside `controlled` get input dimension 0.
NetworkedSystem build_hvac_underactuated(int rows, int cols, double dt, double k, double eta1,
                                         double eta2, double eta3,
                                         const std::vector<int>& controlled);
// Nodes outside `observed` carry a zero stage-cost block.
NetworkedSystem build_power_undersensed(const Graph& g, const EdgeWeights& k, double dt,
                                        double eta1, double eta2, double eta3,
                                        const std::vector<int>& observed);

// Gains making A - B*K and A - Kp*Q^{1/2} nilpotent of index 2.
struct CertificateGains {
  Matrix K;   // total_inputs x total_states
  Matrix Kp;  // total_states x total_states
};

CertificateGains nilpotent_gain_hvac(const NetworkedSystem& sys);
CertificateGains nilpotent_gain_power(const NetworkedSystem& sys);
CertificateGains nilpotent_gain(const NetworkedSystem& sys);  // dispatch on kind

// max(1 + 1e-6, ||kbar||, sup_t ||phi^t|| / alpha^t).
double certify_stability_pair(const Matrix& phi, const Matrix& kbar, double alpha);

struct Partition {
  std::vector<std::vector<int>> blocks;
};

Partition make_partition(std::vector<std::vector<int>> blocks, int num_nodes);
Partition trivial_partition(int num_nodes);

struct UniformityCheck {
  char condition = 'a';  // 'a'..'e', or 'D' for the neighbor-block count
  bool pass = true;
  int block = -1;        // violating block index, -1 if global
  int other_block = -1;
  double value = 0.0;
  std::string detail;
};

struct UniformityReport {
  std::vector<UniformityCheck> checks;
  double L0 = 0.0;
  double gamma0 = 0.0;
  double alpha0 = 0.0;
  int D = 0;
  std::optional<double> L, gamma, alpha;  // set only when every check passes
  bool pass() const;
};

UniformityReport check_uniform_conditions(const NetworkedSystem& sys, const Partition& part,
                                          double alpha0 = 0.5);

}  // namespace netlqr
