#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>

namespace qsd {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Dense complex matrix that is exactly Hermitian. The constructor replaces
// the input by (M + M*)/2, which is bitwise Hermitian with a real diagonal.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m);
  explicit HermitianMatrix(const RMatrix& m);

  static HermitianMatrix zero(Eigen::Index n);
  static HermitianMatrix identity(Eigen::Index n);
  static HermitianMatrix diagonal(const RVector& d);
  // Hermitian-Toeplitz matrix with M(j,k) = r(k-j) for k >= j.
  static HermitianMatrix toeplitz(const CVector& first_row);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& mat() const { return m_; }
  cplx operator()(Eigen::Index j, Eigen::Index k) const { return m_(j, k); }
  bool is_real() const;

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  CMatrix m_;
};

struct EigenSystem {
  RVector values;   // ascending
  CMatrix vectors;  // unit columns
};

struct GenEigSolution {
  RVector values;   // E_j ascending
  CMatrix vectors;  // c_j with c_j* S c_j = 1
  RVector angles;   // atan(E_j)
  RVector cond_d;   // |x*(H + iS)x| for x = c_j / |c_j|
};

EigenSystem hermitian_eig(const HermitianMatrix& m);

// Solves H c = E S c for positive definite S. tol_pd defaults to
// 1e-14 * |S|; NotDefinite is thrown when lambda_min(S) <= tol_pd.
GenEigSolution gen_eig_definite(const HermitianMatrix& h,
                                const HermitianMatrix& s,
                                std::optional<double> tol_pd = std::nullopt);

// Eigenvalues of S^{-1} H for a general (possibly indefinite) pencil, via LU
// and a complex Schur decomposition. Used only for the untreated baseline.
CVector gen_eig_unstructured(const HermitianMatrix& h,
                             const HermitianMatrix& s);

std::pair<HermitianMatrix, HermitianMatrix> conjugate_pair(
    const HermitianMatrix& a, const HermitianMatrix& b, const CMatrix& w);

double spectral_norm(const HermitianMatrix& m);
double spectral_norm(const CMatrix& m);
double frobenius_norm(const HermitianMatrix& m);
double frobenius_norm(const CMatrix& m);

// Rotates each column so its first entry with modulus > tol is real positive.
void fix_phases(CMatrix& v, double tol = 1e-12);

}  // namespace qsd
