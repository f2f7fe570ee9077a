#include "qsd/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("HermitianMatrix: not square");
  m_ = (m + m.adjoint()) * 0.5;
}

HermitianMatrix::HermitianMatrix(const RMatrix& m)
    : HermitianMatrix(CMatrix(m.cast<cplx>())) {}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) {
  return HermitianMatrix(CMatrix(CMatrix::Zero(n, n)));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
  return HermitianMatrix(CMatrix(CMatrix::Identity(n, n)));
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  CMatrix m = CMatrix::Zero(d.size(), d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) m(i, i) = d(i);
  return HermitianMatrix(m);
}

HermitianMatrix HermitianMatrix::toeplitz(const CVector& r) {
  const Eigen::Index n = r.size();
  CMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      m(j, k) = k >= j ? r(k - j) : std::conj(r(j - k));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) m(j, j) = r(0).real();
  HermitianMatrix out;
  out.m_ = std::move(m);
  return out;
}

bool HermitianMatrix::is_real() const {
  return (m_.imag().array() == 0.0).all();
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw ShapeError("HermitianMatrix: dimension mismatch");
  HermitianMatrix out;
  out.m_ = m_ + o.m_;
  return out;
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw ShapeError("HermitianMatrix: dimension mismatch");
  HermitianMatrix out;
  out.m_ = m_ - o.m_;
  return out;
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  HermitianMatrix out;
  out.m_ = m_ * s;
  return out;
}

void fix_phases(CMatrix& v, double tol) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, k));
      if (a > tol) {
        v.col(k) *= std::conj(v(i, k)) / a;
        v(i, k) = a;
        break;
      }
    }
  }
}

EigenSystem hermitian_eig(const HermitianMatrix& m) {
  const CMatrix& a = m.mat();
  if (!a.allFinite()) throw InvalidInput("hermitian_eig: non-finite entry");
  EigenSystem out;
  if (m.dim() == 0) return out;
  if (m.is_real()) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(a.real());
    if (es.info() != Eigen::Success) throw InvalidInput("hermitian_eig: no convergence");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    if (es.info() != Eigen::Success) throw InvalidInput("hermitian_eig: no convergence");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  fix_phases(out.vectors);
  return out;
}

GenEigSolution gen_eig_definite(const HermitianMatrix& h,
                                const HermitianMatrix& s,
                                std::optional<double> tol_pd) {
  if (h.dim() != s.dim()) throw ShapeError("gen_eig_definite: dimension mismatch");
  const EigenSystem es = hermitian_eig(s);
  const Eigen::Index n = s.dim();
  GenEigSolution out;
  if (n == 0) return out;
  const double norm_s = es.values.cwiseAbs().maxCoeff();
  const double tol = tol_pd ? *tol_pd : 1e-14 * norm_s;
  if (es.values(0) <= tol) {
    throw NotDefinite("gen_eig_definite: lambda_min(S) = " +
                      std::to_string(es.values(0)));
  }
  const RVector inv_sqrt = es.values.cwiseSqrt().cwiseInverse();
  CMatrix x = es.vectors * inv_sqrt.asDiagonal();
  const HermitianMatrix m(CMatrix(x.adjoint() * h.mat() * x));
  const EigenSystem red = hermitian_eig(m);

  out.values = red.values;
  out.vectors = x * red.vectors;
  out.angles = out.values.array().atan();
  out.cond_d.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto c = out.vectors.col(j);
    const double sn = std::sqrt(std::abs(c.dot(s.mat() * c)));
    c /= sn;
    const CVector u = c / c.norm();
    const double hq = u.dot(h.mat() * u).real();
    const double sq = u.dot(s.mat() * u).real();
    out.cond_d(j) = std::hypot(hq, sq);
  }
  return out;
}

CVector gen_eig_unstructured(const HermitianMatrix& h,
                             const HermitianMatrix& s) {
  if (h.dim() != s.dim()) throw ShapeError("gen_eig_unstructured: dimension mismatch");
  Eigen::PartialPivLU<CMatrix> lu(s.mat());
  const CMatrix a = lu.solve(h.mat());
  if (!a.allFinite()) throw NotDefinite("gen_eig_unstructured: singular S");
  Eigen::ComplexEigenSolver<CMatrix> ces(a, false);
  if (ces.info() != Eigen::Success) throw InvalidInput("gen_eig_unstructured: no convergence");
  return ces.eigenvalues();
}

std::pair<HermitianMatrix, HermitianMatrix> conjugate_pair(
    const HermitianMatrix& a, const HermitianMatrix& b, const CMatrix& w) {
  if (w.rows() != w.cols() || w.rows() != a.dim() || a.dim() != b.dim()) {
    throw ShapeError("conjugate_pair: shape mismatch");
  }
  Eigen::JacobiSVD<CMatrix> svd(w);
  const RVector sv = svd.singularValues();
  if (sv.size() > 0 && sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw SingularConjugation("conjugate_pair: W is numerically singular");
  }
  return {HermitianMatrix(CMatrix(w.adjoint() * a.mat() * w)),
          HermitianMatrix(CMatrix(w.adjoint() * b.mat() * w))};
}

double spectral_norm(const HermitianMatrix& m) {
  if (m.dim() == 0) return 0.0;
  const CMatrix& a = m.mat();
  if (m.is_real()) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(a.real(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double frobenius_norm(const HermitianMatrix& m) { return m.mat().norm(); }
double frobenius_norm(const CMatrix& m) { return m.norm(); }

}  // namespace qsd
