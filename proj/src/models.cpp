#include "qsd/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "qsd/errors.hpp"

namespace qsd {

HermitianMatrix tfim_hamiltonian(int L, double g) {
  if (L < 2 || L > 14) throw TooLarge("tfim_hamiltonian: L must be in [2, 14]");
  const std::size_t dim = std::size_t{1} << L;
  RMatrix h = RMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int i = 0; i < L; ++i) {
      const int j = (i + 1) % L;
      const int zi = (s >> i) & 1 ? -1 : 1;
      const int zj = (s >> j) & 1 ? -1 : 1;
      diag -= zi * zj;
      h(static_cast<Eigen::Index>(s ^ (std::size_t{1} << i)), static_cast<Eigen::Index>(s)) -= g;
    }
    h(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = diag;
  }
  return HermitianMatrix(h);
}

CVector tfim_initial_state(int L, TfimState state) {
  if (L < 2 || L > 14) throw TooLarge("tfim_initial_state: L must be in [2, 14]");
  const Eigen::Index dim = Eigen::Index{1} << L;
  CVector v = CVector::Zero(dim);
  switch (state) {
    case TfimState::all_up:
      v(0) = 1.0;
      break;
    case TfimState::all_down:
      v(dim - 1) = 1.0;
      break;
    case TfimState::cat:
      v(0) = v(dim - 1) = 1.0 / std::sqrt(2.0);
      break;
  }
  return v;
}

std::vector<std::uint32_t> hubbard_sector_basis(int L, int Ne, std::optional<int> n_up) {
  if (L < 2 || L > 6) throw TooLarge("hubbard: L must be in [2, 6]");
  if (Ne < 0 || Ne > 2 * L) throw BadSector("hubbard: Ne out of range");
  if (n_up && (*n_up < 0 || *n_up > L || Ne - *n_up < 0 || Ne - *n_up > L)) {
    throw BadSector("hubbard: n_up inconsistent with Ne");
  }
  std::uint32_t up_mask = 0;
  for (int i = 0; i < L; ++i) up_mask |= 1u << (2 * i);
  std::vector<std::uint32_t> basis;
  const std::uint32_t full = 1u << (2 * L);
  for (std::uint32_t m = 0; m < full; ++m) {
    if (std::popcount(m) != Ne) continue;
    if (n_up && std::popcount(m & up_mask) != *n_up) continue;
    basis.push_back(m);
  }
  return basis;
}

namespace {

// Applies a+_p a_q to |m>. Returns false when the result vanishes.
bool hop(std::uint32_t m, int p, int q, std::uint32_t& out, int& sign) {
  if (!((m >> q) & 1u)) return false;
  std::uint32_t t = m & ~(1u << q);
  int parity = std::popcount(m & ((1u << q) - 1u));
  if ((t >> p) & 1u) return false;
  parity += std::popcount(t & ((1u << p) - 1u));
  out = t | (1u << p);
  sign = parity % 2 ? -1 : 1;
  return true;
}

}  // namespace

HermitianMatrix hubbard_hamiltonian(int L, double U, int Ne, std::optional<int> n_up) {
  const auto basis = hubbard_sector_basis(L, Ne, n_up);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  RMatrix h = RMatrix::Zero(dim, dim);
  auto index_of = [&](std::uint32_t m) {
    auto it = std::lower_bound(basis.begin(), basis.end(), m);
    return static_cast<Eigen::Index>(it - basis.begin());
  };
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t m = basis[static_cast<std::size_t>(col)];
    for (int i = 0; i < L; ++i) {
      const int j = (i + 1) % L;
      for (int spin = 0; spin < 2; ++spin) {
        const int p = 2 * i + spin;
        const int q = 2 * j + spin;
        std::uint32_t out;
        int sign;
        if (hop(m, p, q, out, sign)) h(index_of(out), col) -= sign;
        if (hop(m, q, p, out, sign)) h(index_of(out), col) -= sign;
      }
      if (((m >> (2 * i)) & 1u) && ((m >> (2 * i + 1)) & 1u)) h(col, col) += U;
    }
  }
  return HermitianMatrix(h);
}

CVector hubbard_initial_state(int L, int Ne, std::optional<int> n_up) {
  const EigenSystem es = hermitian_eig(hubbard_hamiltonian(L, 0.0, Ne, n_up));
  return es.vectors.col(0);
}

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

RVector sm_h1_diag() {
  RVector d(999);
  d(0) = 1.0;
  for (int j = 0; j <= 997; ++j) d(j + 1) = 2.0 + j * 0.1 / 997.0;
  return d;
}

RMatrix gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  RMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
  return g;
}

RMatrix haar_orthogonal(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<RMatrix> qr(gaussian(rng, n));
  RMatrix q = qr.householderQ();
  const RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace

SyntheticBundle synthetic_pair(const std::string& name,
                               const std::map<std::string, double>& params) {
  SyntheticBundle b;
  b.name = name;
  if (name == "wilkinson") {
    const double e = param(params, "epsilon", 1e-3);
    b.h = HermitianMatrix::diagonal(RVector{{2.0, e}});
    b.s = HermitianMatrix::diagonal(RVector{{1.0, e}});
    b.epsilon = e;
  } else if (name == "bad_threshold") {
    const double e = param(params, "epsilon", 1e-2);
    RMatrix h{{1.0, e}, {e, e * e}};
    b.h = HermitianMatrix(h);
    b.s = HermitianMatrix::diagonal(RVector{{1.0, e * e}});
    b.epsilon = e;
  } else if (name == "reorder") {
    const double eta = param(params, "eta", 1e-2);
    b.h = HermitianMatrix::diagonal(RVector{{20.0, 1.0}});
    b.s = HermitianMatrix::diagonal(RVector{{1.0, 1.0 - eta / 2}});
    b.h_tilde = b.h;
    b.s_tilde = HermitianMatrix::diagonal(RVector{{1.0, 1.0 + eta / 2}});
  } else if (name == "sm_H1") {
    b.h = HermitianMatrix::diagonal(sm_h1_diag());
  } else if (name == "sm_H2") {
    RVector d(1000);
    d.head(999) = sm_h1_diag();
    d(999) = 1000.0;
    b.h = HermitianMatrix::diagonal(d);
  } else if (name == "sm_xi1" || name == "sm_xi2") {
    const double w = name == "sm_xi1" ? 1e-4 : 0.5;
    RVector v = RVector::Constant(999, std::sqrt(w / 998.0));
    v(0) = std::sqrt(1.0 - w);
    b.vec = v.cast<cplx>();
  } else if (name == "sm_xi3") {
    RVector v = RVector::Constant(1000, std::sqrt(1e-4 / 998.0));
    v(0) = std::sqrt(1.0 - 1e-4 - 1e-8);
    v(999) = 1e-4;
    b.vec = v.cast<cplx>();
  } else if (name == "sm_xi4") {
    RVector v(1000);
    v(0) = 1.0;
    for (int j = 2; j <= 1000; ++j) v(j - 1) = 0.01 / j;
    v /= v.norm();
    b.vec = v.cast<cplx>();
  } else if (name == "sm_tightness") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(param(params, "seed", 0)));
    const RMatrix g = gaussian(rng, 5);
    const RMatrix a = (g + g.transpose()) / 2;
    const RVector sd{{1.0, 0.1, 3e-10, 2e-10, 1e-10}};
    const RVector sq = sd.cwiseSqrt();
    b.h = HermitianMatrix(RMatrix(sq.asDiagonal() * a * sq.asDiagonal()));
    b.s = HermitianMatrix::diagonal(sd);
    const RMatrix gam = gaussian(rng, 5);
    b.delta_s = HermitianMatrix(RMatrix(1e-12 * (gam + gam.transpose()) / 2));
    b.h_tilde = b.h;
    b.s_tilde = b.s + *b.delta_s;
    b.epsilon = 1.5e-10;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(g + g.transpose(), Eigen::EigenvaluesOnly);
    b.info["mu"] = 0.5 * es.eigenvalues().maxCoeff();
  } else if (name == "sm_thresh_only") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(param(params, "seed", 0)));
    const int n = 100;
    const double kappa = param(params, "kappa", 1e3);
    RVector sv(n);
    for (int i = 0; i < n; ++i) sv(i) = std::pow(kappa, -static_cast<double>(i) / (n - 1));
    const RMatrix u = haar_orthogonal(rng, n);
    const RMatrix v = haar_orthogonal(rng, n);
    const RMatrix r = u * sv.asDiagonal() * v.transpose();
    RVector grade(n), ladder(n);
    for (int j = 1; j <= n; ++j) {
      grade(j - 1) = 1.0 / (static_cast<double>(j) * j);
      ladder(j - 1) = j;
    }
    const RMatrix k = grade.asDiagonal() * r;
    b.h = HermitianMatrix(RMatrix(k.transpose() * ladder.asDiagonal() * k));
    b.s = HermitianMatrix(RMatrix(k.transpose() * k));
    // Exact ground pair: E0 = 1 with S-normalized c0 = K^{-1} e_1.
    const RVector c0 = k.fullPivLu().solve(RVector::Unit(n, 0));
    b.vec = c0.cast<cplx>();
    b.info["E0"] = 1.0;
    b.info["E_max"] = n;
    b.info["c0_norm"] = c0.norm();
  } else {
    throw UnknownSynthetic("synthetic_pair: unknown name '" + name + "'");
  }
  return b;
}

ModelInstance build_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::tfim:
      return {tfim_hamiltonian(spec.L, spec.g), tfim_initial_state(spec.L, spec.tfim_state)};
    case ModelKind::hubbard:
      return {hubbard_hamiltonian(spec.L, spec.U, spec.Ne, spec.n_up),
              hubbard_initial_state(spec.L, spec.Ne, spec.n_up)};
    case ModelKind::synthetic: {
      SyntheticBundle op = synthetic_pair(spec.synthetic_name);
      SyntheticBundle xi = synthetic_pair(spec.xi_name);
      if (op.h.dim() != xi.vec.size()) {
        throw ShapeError("build_model: operator and initial vector sizes differ");
      }
      return {op.h, xi.vec};
    }
  }
  throw InvalidInput("build_model: unknown kind");
}

std::string to_string(TfimState s) {
  switch (s) {
    case TfimState::all_up: return "all_up";
    case TfimState::all_down: return "all_down";
    case TfimState::cat: return "cat";
  }
  return "all_up";
}

TfimState tfim_state_from_string(const std::string& s) {
  if (s == "all_up") return TfimState::all_up;
  if (s == "all_down") return TfimState::all_down;
  if (s == "cat") return TfimState::cat;
  throw InvalidInput("unknown TFIM initial state '" + s + "'");
}

}  // namespace qsd
