#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsd/linalg.hpp"

namespace qsd {

enum class ModelKind { tfim, hubbard, synthetic };

// Which g=0 ground state of the TFIM to start from. `cat` is the
// Z2-symmetric combination (|0...0> + |1...1>)/sqrt(2).
enum class TfimState { all_up, all_down, cat };

struct ModelSpec {
  ModelKind kind = ModelKind::tfim;
  int L = 10;
  double g = 0.0;
  double U = 0.0;
  int Ne = 0;
  std::optional<int> n_up;  // Hubbard: restrict to fixed N_up as well
  TfimState tfim_state = TfimState::cat;
  std::string synthetic_name;  // e.g. "sm_H1"
  std::string xi_name;         // initial vector for synthetic operators
  std::uint64_t seed = 0;
};

HermitianMatrix tfim_hamiltonian(int L, double g);
CVector tfim_initial_state(int L, TfimState state = TfimState::all_up);

// Occupation-number basis of the sector, as ascending bitmasks over 2L
// spin-orbitals; orbital p = 2*site + spin (spin 0 = up, 1 = down).
std::vector<std::uint32_t> hubbard_sector_basis(int L, int Ne,
                                                std::optional<int> n_up = std::nullopt);
HermitianMatrix hubbard_hamiltonian(int L, double U, int Ne,
                                    std::optional<int> n_up = std::nullopt);
CVector hubbard_initial_state(int L, int Ne, std::optional<int> n_up = std::nullopt);

// Named synthetic instances. Pairs fill h/s; perturbed instances also fill
// h_tilde/s_tilde; operator-only instances fill h (and vec for xi vectors).
struct SyntheticBundle {
  std::string name;
  HermitianMatrix h, s;
  std::optional<HermitianMatrix> h_tilde, s_tilde;
  std::optional<HermitianMatrix> delta_s;
  CVector vec;
  double epsilon = 0.0;  // threshold tied to the instance, when there is one
  std::map<std::string, double> info;
};

// params: "epsilon" (wilkinson, bad_threshold), "eta" (reorder),
// "seed" (sm_tightness, sm_thresh_only).
SyntheticBundle synthetic_pair(const std::string& name,
                               const std::map<std::string, double>& params = {});

// Operator and initial vector for a model spec (TFIM, Hubbard, or a
// synthetic operator paired with an xi vector).
struct ModelInstance {
  HermitianMatrix h_op;
  CVector phi0;
};
ModelInstance build_model(const ModelSpec& spec);

std::string to_string(TfimState s);
TfimState tfim_state_from_string(const std::string& s);

}  // namespace qsd
