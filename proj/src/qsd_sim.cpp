#include "qsd/qsd_sim.hpp"

#include <cmath>
#include <numbers>

#include "qsd/errors.hpp"
#include "qsd/threshold.hpp"

namespace qsd {

TimeGrid TimeGrid::forward(int n, double dt) {
  if (n < 1 || !(dt > 0.0)) throw InvalidInput("TimeGrid::forward: need n >= 1, dt > 0");
  TimeGrid g;
  g.kind = Kind::forward;
  g.n = n;
  g.dt = dt;
  return g;
}

TimeGrid TimeGrid::symmetric(int k, double delta_EM) {
  if (k < 0 || !(delta_EM > 0.0)) {
    throw InvalidInput("TimeGrid::symmetric: need k >= 0, delta_EM > 0");
  }
  TimeGrid g;
  g.kind = Kind::symmetric;
  g.k = k;
  g.delta_EM = delta_EM;
  return g;
}

TimeGrid TimeGrid::from_times(std::vector<double> t) {
  if (t.empty()) throw InvalidInput("TimeGrid::from_times: empty");
  TimeGrid g;
  g.kind = Kind::explicit_times;
  g.custom = std::move(t);
  return g;
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t;
  switch (kind) {
    case Kind::forward:
      for (int j = 0; j < n; ++j) t.push_back(j * dt);
      break;
    case Kind::symmetric:
      for (int j = -k; j <= k; ++j) t.push_back(std::numbers::pi * j / delta_EM);
      break;
    case Kind::explicit_times:
      t = custom;
      break;
  }
  return t;
}

int TimeGrid::size() const {
  switch (kind) {
    case Kind::forward: return n;
    case Kind::symmetric: return 2 * k + 1;
    case Kind::explicit_times: return static_cast<int>(custom.size());
  }
  return 0;
}

bool TimeGrid::equispaced(double rtol) const {
  if (kind != Kind::explicit_times) return true;
  if (custom.size() < 3) return true;
  const double step = custom[1] - custom[0];
  for (std::size_t j = 2; j < custom.size(); ++j) {
    if (std::abs(custom[j] - custom[j - 1] - step) > rtol * std::max(1.0, std::abs(step))) {
      return false;
    }
  }
  return true;
}

Spectrum operator_spectrum(const HermitianMatrix& h_op) {
  EigenSystem es = hermitian_eig(h_op);
  return {std::move(es.values), std::move(es.vectors)};
}

KrylovBasis krylov_matrix(const Spectrum& spec, const CVector& phi0, const TimeGrid& grid) {
  if (phi0.size() != spec.E.size()) throw ShapeError("krylov_matrix: phi0 has wrong size");
  KrylovBasis kb;
  kb.times = grid.times();
  const CVector gamma = spec.psi.adjoint() * phi0;
  const auto n = static_cast<Eigen::Index>(kb.times.size());
  CMatrix coeff(spec.E.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double t = kb.times[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < spec.E.size(); ++i) {
      coeff(i, j) = std::polar(1.0, t * spec.E(i)) * gamma(i);
    }
  }
  kb.K = spec.psi * coeff;
  return kb;
}

KrylovBasis krylov_matrix(const HermitianMatrix& h_op, const CVector& phi0,
                          const TimeGrid& grid) {
  if (phi0.size() != h_op.dim()) throw ShapeError("krylov_matrix: phi0 has wrong size");
  return krylov_matrix(operator_spectrum(h_op), phi0, grid);
}

namespace {

bool times_equispaced(const std::vector<double>& t) {
  if (t.size() < 3) return true;
  const double step = t[1] - t[0];
  for (std::size_t j = 2; j < t.size(); ++j) {
    if (std::abs(t[j] - t[j - 1] - step) > 1e-12 * std::max(1.0, std::abs(step))) return false;
  }
  return true;
}

}  // namespace

DefinitePair projected_pair(const HermitianMatrix& h_op, const KrylovBasis& kb, PairMode mode) {
  const CMatrix& k = kb.K;
  if (k.rows() != h_op.dim()) throw ShapeError("projected_pair: K has wrong row count");
  const CMatrix hk = h_op.mat() * k;
  DefinitePair p;
  p.provenance = Provenance::exact;
  if (mode == PairMode::direct) {
    p.H = HermitianMatrix(CMatrix(k.adjoint() * hk));
    p.S = HermitianMatrix(CMatrix(k.adjoint() * k));
    return p;
  }
  if (!times_equispaced(kb.times)) throw NotToeplitz("projected_pair: times not equispaced");
  const CVector rh = (k.col(0).adjoint() * hk).transpose();
  const CVector rs = (k.col(0).adjoint() * k).transpose();
  p.H = HermitianMatrix::toeplitz(rh);
  p.S = HermitianMatrix::toeplitz(rs);
  p.first_row_H = p.H.mat().row(0).transpose();
  p.first_row_S = p.S.mat().row(0).transpose();
  return p;
}

Overlaps overlaps(const Spectrum& spec, const CVector& phi0) {
  if (phi0.size() != spec.E.size()) throw ShapeError("overlaps: phi0 has wrong size");
  return {spec.E, spec.psi.adjoint() * phi0};
}

Overlaps overlaps(const HermitianMatrix& h_op, const CVector& phi0) {
  return overlaps(operator_spectrum(h_op), phi0);
}

QsdInstance::QsdInstance(HermitianMatrix h_op, CVector phi0, TimeGrid grid, PairMode mode,
                         std::shared_ptr<const Spectrum> spectrum)
    : h_op_(std::move(h_op)), phi0_(std::move(phi0)), grid_(std::move(grid)) {
  if (phi0_.size() != h_op_.dim()) throw ShapeError("QsdInstance: phi0 has wrong size");
  if (std::abs(phi0_.norm() - 1.0) > 1e-12) throw InvalidInput("QsdInstance: phi0 not unit norm");
  spectrum_ = spectrum ? std::move(spectrum)
                       : std::make_shared<const Spectrum>(operator_spectrum(h_op_));
  kb_ = krylov_matrix(*spectrum_, phi0_, grid_);
  pair_ = projected_pair(h_op_, kb_, mode);
  ov_ = overlaps(*spectrum_, phi0_);
}

double noiseless_qsd_energy(const DefinitePair& pair, double epsilon, bool relative) {
  const double eps = relative ? epsilon * spectral_norm(pair.S) : epsilon;
  return threshold_solve(pair.H, pair.S, eps).e0;
}

double noiseless_qsd_energy(const ModelSpec& model, const TimeGrid& grid, double epsilon,
                            bool relative) {
  ModelInstance mi = build_model(model);
  QsdInstance inst(std::move(mi.h_op), std::move(mi.phi0), grid);
  return noiseless_qsd_energy(inst.pair(), epsilon, relative);
}

double toeplitz_defect(const HermitianMatrix& m) {
  const CMatrix& a = m.mat();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    for (Eigen::Index k = j; k < a.cols(); ++k)
      worst = std::max(worst, std::abs(a(j, k) - a(0, k - j)));
  const double nrm = spectral_norm(m);
  return nrm > 0.0 ? worst / nrm : worst;
}

}  // namespace qsd
