#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsd/linalg.hpp"
#include "qsd/models.hpp"

namespace qsd {

// forward: t_j = j*dt, j = 0..n-1.
// symmetric: t_j = pi*j/delta_EM, j = -k..k.
// explicit: caller-supplied times (not necessarily equispaced).
struct TimeGrid {
  enum class Kind { forward, symmetric, explicit_times };
  Kind kind = Kind::forward;
  int n = 1;
  double dt = 1.0;
  int k = 0;
  double delta_EM = 1.0;
  std::vector<double> custom;

  static TimeGrid forward(int n, double dt);
  static TimeGrid symmetric(int k, double delta_EM);
  static TimeGrid from_times(std::vector<double> t);

  std::vector<double> times() const;
  int size() const;
  bool equispaced(double rtol = 1e-12) const;
};

enum class Provenance { exact, noisy, synthetic };

struct DefinitePair {
  HermitianMatrix H;
  HermitianMatrix S;
  // Present when the pair is Hermitian-Toeplitz and was built from first rows.
  std::optional<CVector> first_row_H, first_row_S;
  Provenance provenance = Provenance::exact;
  std::string meta;  // JSON text echoing how the pair was produced
};

// Eigendecomposition of the operator, computed once and reused for all times.
struct Spectrum {
  RVector E;
  CMatrix psi;
};
Spectrum operator_spectrum(const HermitianMatrix& h_op);

struct KrylovBasis {
  CMatrix K;
  std::vector<double> times;
};

KrylovBasis krylov_matrix(const Spectrum& spec, const CVector& phi0, const TimeGrid& grid);
KrylovBasis krylov_matrix(const HermitianMatrix& h_op, const CVector& phi0,
                          const TimeGrid& grid);

enum class PairMode { direct, toeplitz };

DefinitePair projected_pair(const HermitianMatrix& h_op, const KrylovBasis& kb,
                            PairMode mode = PairMode::direct);

struct Overlaps {
  RVector E;
  CVector gamma;
};
Overlaps overlaps(const Spectrum& spec, const CVector& phi0);
Overlaps overlaps(const HermitianMatrix& h_op, const CVector& phi0);

// Everything derived from (operator, phi0, grid), built once.
class QsdInstance {
 public:
  QsdInstance(HermitianMatrix h_op, CVector phi0, TimeGrid grid,
              PairMode mode = PairMode::toeplitz,
              std::shared_ptr<const Spectrum> spectrum = nullptr);

  const HermitianMatrix& h_op() const { return h_op_; }
  const CVector& phi0() const { return phi0_; }
  const TimeGrid& grid() const { return grid_; }
  const Spectrum& spectrum() const { return *spectrum_; }
  std::shared_ptr<const Spectrum> spectrum_ptr() const { return spectrum_; }
  const KrylovBasis& krylov() const { return kb_; }
  const DefinitePair& pair() const { return pair_; }
  const Overlaps& overlap() const { return ov_; }
  double exact_e0() const { return spectrum_->E(0); }

 private:
  HermitianMatrix h_op_;
  CVector phi0_;
  TimeGrid grid_;
  std::shared_ptr<const Spectrum> spectrum_;
  KrylovBasis kb_;
  DefinitePair pair_;
  Overlaps ov_;
};

// Least Ritz value after thresholding the noiseless pair. When relative is
// true the threshold is epsilon * |S|.
double noiseless_qsd_energy(const ModelSpec& model, const TimeGrid& grid, double epsilon,
                            bool relative = true);
double noiseless_qsd_energy(const DefinitePair& pair, double epsilon, bool relative = true);

// Max entrywise deviation from Toeplitz structure, relative to |M|.
double toeplitz_defect(const HermitianMatrix& m);

}  // namespace qsd
