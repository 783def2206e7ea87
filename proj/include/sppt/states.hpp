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

#include <string>

#include "sppt/linalg.hpp"

namespace sppt {

/// A (possibly unnormalized) density operator on C^2 (x) C^d.
///
/// Index layout: rows/cols 0..d-1 hold |0> (x) qudit, d..2d-1 hold |1> (x) qudit,
/// with |0> = (1,0)^t and |1> = (0,1)^t. Values are built through make_state
/// when they come from outside; library operations construct them directly.
struct QubitQuditState {
  int d = 0;
  CMat rho;
  bool normalized = false;

  double trace() const { return rho.trace().real(); }
};

/// The three d x d blocks of rho = [[a, b], [b^dag, c]].
struct BlockView {
  CMat a;  // <0|rho|0>
  CMat b;  // <0|rho|1>
  CMat c;  // <1|rho|1>
};

inline QubitQuditState make_state(int d, const CMat &entries, bool normalized) {
  if (d < 1 || entries.rows() != 2 * d || entries.cols() != 2 * d)
    throw Error(ErrorCode::BadDimensions, "expected a " + std::to_string(2 * d) + "x" +
                                              std::to_string(2 * d) + " matrix, got " +
                                              std::to_string(entries.rows()) + "x" +
                                              std::to_string(entries.cols()));
  if (!all_finite(entries)) throw Error(ErrorCode::NonFinite, "state has NaN or Inf entries");
  require_hermitian(entries, tol::kHermitian, "state");
  const PsdCheck psd = psd_check(entries, tol::kPsd);
  if (!psd.is_psd)
    throw Error(ErrorCode::NotPsd, "state min eigenvalue " + std::to_string(psd.min_eig));
  const cplx tr = entries.trace();
  if (normalized && std::abs(tr - cplx(1.0, 0.0)) > tol::kPsd * std::max(1.0, entries.norm()))
    throw Error(ErrorCode::NotNormalized, "trace is " + std::to_string(tr.real()));
  return {d, entries, normalized};
}

inline BlockView blocks(const CMat &rho, int d) {
  return {rho.topLeftCorner(d, d), rho.topRightCorner(d, d), rho.bottomRightCorner(d, d)};
}

inline BlockView blocks(const QubitQuditState &s) { return blocks(s.rho, s.d); }

inline CMat reassemble(const BlockView &v) {
  const Eigen::Index d = v.a.rows();
  CMat rho(2 * d, 2 * d);
  rho.topLeftCorner(d, d) = v.a;
  rho.topRightCorner(d, d) = v.b;
  rho.bottomLeftCorner(d, d) = v.b.adjoint();
  rho.bottomRightCorner(d, d) = v.c;
  return rho;
}

/// Transpose on the qubit factor: (A, B, C) -> (A, B^dag, C). Exact, no
/// arithmetic on entries, so applying it twice restores the input bitwise.
inline CMat partial_transpose(const CMat &rho, int d) {
  CMat out = rho;
  out.topRightCorner(d, d) = rho.bottomLeftCorner(d, d);
  out.bottomLeftCorner(d, d) = rho.topRightCorner(d, d);
  return out;
}

inline CMat partial_transpose(const QubitQuditState &s) { return partial_transpose(s.rho, s.d); }

inline double min_pt_eigenvalue(const QubitQuditState &s) {
  return herm_eigenvalues(partial_transpose(s))(0);
}

inline bool is_ppt(const QubitQuditState &s, double tol = tol::kPsd) {
  return min_pt_eigenvalue(s) >= -tol * s.rho.norm();
}

/// (1 (x) v)^dag rho (1 (x) v); the result is left unnormalized.
inline QubitQuditState local_qudit_transform(const QubitQuditState &s, const CMat &v) {
  if (v.rows() != s.d || v.cols() != s.d)
    throw Error(ErrorCode::DimensionMismatch, "transform must be d x d");
  const Eigen::JacobiSVD<CMat> sv(v);
  const RVec &sigma = sv.singularValues();
  if (!(sigma(sigma.size() - 1) > tol::kRankCutoff * sigma(0)))
    throw Error(ErrorCode::SingularTransform, "transform is singular");
  const CMat big = kron(CMat::Identity(2, 2), v);
  CMat rho = big.adjoint() * s.rho * big;
  return {s.d, 0.5 * (rho + rho.adjoint()), false};
}

/// Swap |0> and |1> on the qubit: (A, B, C) -> (C, B^dag, A).
inline CMat qubit_flip(const CMat &rho, int d) {
  const BlockView v = blocks(rho, d);
  return reassemble({v.c, v.b.adjoint(), v.a});
}

inline QubitQuditState scaled(const QubitQuditState &s, double factor) {
  return {s.d, s.rho * factor, false};
}

}  // namespace sppt
