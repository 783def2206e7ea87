// Copyright 2026 The sppt-analysis Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sppt {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

enum class ErrorCode {
  NotSquare,
  NotHermitian,
  NotPsd,
  NonFinite,
  BadDimensions,
  NotNormalized,
  SingularTransform,
  BadParameter,
  DimensionMismatch,
  NotFullRank,
  NotPpt,
  SingularX1,
  NotNormal,
  NotSppt,
  InvalidDecomposition,
  ParseError,
};

inline const char *to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotFullRank: return "NotFullRank";
    case ErrorCode::NotPpt: return "NotPpt";
    case ErrorCode::SingularX1: return "SingularX1";
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::NotSppt: return "NotSppt";
    case ErrorCode::InvalidDecomposition: return "InvalidDecomposition";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Error raised by every checked operation in the library. The code identifies
/// which precondition failed; the message carries the numbers involved.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Default tolerances. All are relative to a matrix norm.
namespace tol {
inline constexpr double kHermitian = 1e-9;  // ||M - M^dag||_F <= kHermitian * ||M||_F
inline constexpr double kPsd = 1e-9;        // min eig >= -kPsd * ||M||_F
inline constexpr double kRankCutoff = 1e-12;  // sigma_i > kRankCutoff * sigma_max
}  // namespace tol

inline double fro_norm(const CMat &m) { return m.norm(); }

inline bool all_finite(const CMat &m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline CMat kron(const CMat &a, const CMat &b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMat outer(const CVec &x) { return x * x.adjoint(); }

inline void require_square(const CMat &m, const char *what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::NotSquare, std::string(what) + " is " + std::to_string(m.rows()) +
                                          "x" + std::to_string(m.cols()));
}

inline double hermiticity_defect(const CMat &m) { return (m - m.adjoint()).norm(); }

inline bool is_hermitian(const CMat &m, double rtol = tol::kHermitian) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= rtol * m.norm();
}

inline void require_hermitian(const CMat &m, double rtol, const char *what) {
  require_square(m, what);
  const double defect = hermiticity_defect(m);
  if (defect > rtol * m.norm())
    throw Error(ErrorCode::NotHermitian, std::string(what) + ": ||M - M^dag||_F = " +
                                             std::to_string(defect));
}

struct EigResult {
  RVec values;   // ascending
  CMat vectors;  // orthonormal columns, vectors.col(i) belongs to values(i)
};

/// Spectral decomposition of a hermitian matrix. The input is symmetrized
/// before factorization so eigenvalues come out exactly real.
inline EigResult herm_eig(const CMat &m, double rtol = tol::kHermitian) {
  require_hermitian(m, rtol, "herm_eig input");
  const CMat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym, Eigen::ComputeEigenvectors);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RVec herm_eigenvalues(const CMat &m) {
  const CMat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

struct SvdResult {
  CMat u;      // rows x rows unitary
  RVec sigma;  // descending, length min(rows, cols)
  CMat v;      // cols x cols unitary
};

/// Full singular value decomposition m = u * diag(sigma) * v^dag.
inline SvdResult svd(const CMat &m) {
  Eigen::JacobiSVD<CMat> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

/// Reassembles u * diag(sigma) * v^dag for a possibly rectangular m.
inline CMat svd_reconstruct(const SvdResult &s) {
  CMat sig = CMat::Zero(s.u.cols(), s.v.cols());
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) sig(i, i) = s.sigma(i);
  return s.u * sig * s.v.adjoint();
}

struct PsdCheck {
  bool is_psd = false;
  double min_eig = 0.0;
};

inline PsdCheck psd_check(const CMat &m, double tol = tol::kPsd) {
  require_hermitian(m, tol::kHermitian, "psd_check input");
  const double min_eig = herm_eigenvalues(m)(0);
  return {min_eig >= -tol * m.norm(), min_eig};
}

/// Hermitian PSD square root. Eigenvalues in [-tol*||m||, 0) are clamped to
/// zero; anything more negative is treated as genuine indefiniteness.
inline CMat sqrt_psd(const CMat &m, double tol = tol::kPsd) {
  const EigResult eig = herm_eig(m);
  const double floor = -tol * m.norm();
  if (eig.values(0) < floor)
    throw Error(ErrorCode::NotPsd, "sqrt_psd: min eigenvalue " + std::to_string(eig.values(0)));
  RVec root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

/// Moore-Penrose pseudoinverse of a PSD matrix; eigenvalues at or below
/// cutoff * lambda_max are treated as exact zeros.
inline CMat pinv_psd(const CMat &m, double cutoff = tol::kRankCutoff, double tol = tol::kPsd) {
  const EigResult eig = herm_eig(m);
  if (eig.values(0) < -tol * m.norm())
    throw Error(ErrorCode::NotPsd, "pinv_psd: min eigenvalue " + std::to_string(eig.values(0)));
  const double top = eig.values(eig.values.size() - 1);
  RVec inv = RVec::Zero(eig.values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    if (top > 0.0 && eig.values(i) > cutoff * top) inv(i) = 1.0 / eig.values(i);
  return eig.vectors * inv.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

inline int rank_from_singular_values(const RVec &sigma, double cutoff) {
  if (sigma.size() == 0) return 0;
  const double top = sigma.maxCoeff();
  if (!(top > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff * top) ++r;
  return r;
}

inline int rank_of(const CMat &m, double cutoff = tol::kRankCutoff) {
  Eigen::JacobiSVD<CMat> solver(m);
  return rank_from_singular_values(solver.singularValues(), cutoff);
}

inline double min_singular_value(const CMat &m) {
  Eigen::JacobiSVD<CMat> solver(m);
  const RVec &s = solver.singularValues();
  if (m.rows() != m.cols()) return 0.0;
  return s(s.size() - 1);
}

/// Orthonormal basis (as columns) of the eigenspaces of a hermitian PSD
/// matrix split at cutoff * ||m||_F: the first member spans the eigenvalues
/// above the cutoff, the second the ones at or below it.
struct SpectralSplit {
  CMat range;
  CMat kernel;
};

inline SpectralSplit spectral_split(const CMat &m, double cutoff) {
  const EigResult eig = herm_eig(m);
  const double threshold = cutoff * m.norm();
  Eigen::Index n_kernel = 0;
  while (n_kernel < eig.values.size() && eig.values(n_kernel) <= threshold) ++n_kernel;
  const Eigen::Index n = eig.values.size();
  SpectralSplit out;
  out.kernel = eig.vectors.leftCols(n_kernel);
  // Range columns ordered by descending eigenvalue.
  out.range = eig.vectors.rightCols(n - n_kernel).rowwise().reverse();
  return out;
}

}  // namespace sppt
