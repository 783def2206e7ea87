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

#include <limits>
#include <optional>
#include <string>

#include "sppt/linalg.hpp"
#include "sppt/states.hpp"

namespace sppt {

/// Factors of the block upper-triangular X = [[x1, s*x1], [0, x2]] with
/// rho = X^dag X. The state has a strong PPT iff x1^dag s^dag s x1 equals
/// x1^dag s s^dag x1; then rho^{T_A} = Y^dag Y with Y = [[x1, s^dag x1], [0, x2]].
struct SpptFactors {
  CMat x1;
  CMat s;
  CMat x2;

  int d() const { return static_cast<int>(x1.rows()); }
};

inline void require_factor_shapes(const SpptFactors &f) {
  const Eigen::Index d = f.x1.rows();
  for (const CMat *m : {&f.x1, &f.s, &f.x2})
    if (m->rows() != d || m->cols() != d || d == 0)
      throw Error(ErrorCode::DimensionMismatch, "factors must be square and of equal size");
}

/// rho = X^dag X with blocks (x1^dag x1, x1^dag s x1, x1^dag s^dag s x1 + x2^dag x2).
inline QubitQuditState assemble_state(const SpptFactors &f) {
  require_factor_shapes(f);
  const CMat sx1 = f.s * f.x1;
  const BlockView v{f.x1.adjoint() * f.x1, f.x1.adjoint() * sx1,
                    sx1.adjoint() * sx1 + f.x2.adjoint() * f.x2};
  return {f.d(), reassemble(v), false};
}

/// The Y matrix whose Gram matrix is the partial transpose when the SPPT
/// condition holds.
inline CMat pt_factor_y(const SpptFactors &f) {
  require_factor_shapes(f);
  const Eigen::Index d = f.x1.rows();
  CMat y = CMat::Zero(2 * d, 2 * d);
  y.topLeftCorner(d, d) = f.x1;
  y.topRightCorner(d, d) = f.s.adjoint() * f.x1;
  y.bottomRightCorner(d, d) = f.x2;
  return y;
}

inline CMat sppt_residual_matrix(const CMat &x1, const CMat &s) {
  if (x1.rows() != s.rows() || x1.cols() != s.cols() || x1.rows() != x1.cols())
    throw Error(ErrorCode::DimensionMismatch, "x1 and s must be square and of equal size");
  const CMat sx1 = s * x1;
  const CMat sdx1 = s.adjoint() * x1;
  return sx1.adjoint() * sx1 - sdx1.adjoint() * sdx1;
}

/// ||x1^dag s^dag s x1 - x1^dag s s^dag x1||_F.
inline double sppt_residual(const CMat &x1, const CMat &s) {
  return sppt_residual_matrix(x1, s).norm();
}

inline double sppt_residual(const SpptFactors &f) { return sppt_residual(f.x1, f.s); }

/// Canonical factors of a PPT state whose a-block is invertible:
/// x1 = a^{1/2}, s = a^{-1/2} b a^{-1/2}, x2 = (c - b^dag a^{-1} b)^{1/2}.
inline SpptFactors extract_factors_full_rank(const QubitQuditState &st,
                                             double tol = tol::kPsd,
                                             double rank_cutoff = tol::kRankCutoff) {
  const BlockView v = blocks(st);
  const int rank = rank_of(v.a, rank_cutoff);
  if (rank != st.d)
    throw Error(ErrorCode::NotFullRank, "rank(a) = " + std::to_string(rank) + " < d = " +
                                            std::to_string(st.d));
  const EigResult eig = herm_eig(v.a);
  const CVec root = eig.values.cwiseSqrt().cast<cplx>();
  const CVec inv_root = eig.values.cwiseSqrt().cwiseInverse().cast<cplx>();
  const CMat a_half = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
  const CMat a_inv_half = eig.vectors * inv_root.asDiagonal() * eig.vectors.adjoint();
  const CMat a_inv = a_inv_half * a_inv_half;

  const double scale = st.rho.norm();
  CMat schur = v.c - v.b.adjoint() * a_inv * v.b;
  schur = 0.5 * (schur + schur.adjoint());
  CMat schur_pt = v.c - v.b * a_inv * v.b.adjoint();
  schur_pt = 0.5 * (schur_pt + schur_pt.adjoint());
  const double m1 = herm_eigenvalues(schur)(0);
  const double m2 = herm_eigenvalues(schur_pt)(0);
  if (m1 < -tol * scale || m2 < -tol * scale)
    throw Error(ErrorCode::NotPpt, "Schur complement min eigenvalues " + std::to_string(m1) +
                                       ", " + std::to_string(m2));
  const EigResult se = herm_eig(schur);
  const CMat x2 = se.vectors * se.values.cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal() *
                  se.vectors.adjoint();
  return {a_half, a_inv_half * v.b * a_inv_half, x2};
}

enum class SpptStatus { Sppt, NotSppt, Undecided };

inline const char *to_string(SpptStatus s) {
  switch (s) {
    case SpptStatus::Sppt: return "Sppt";
    case SpptStatus::NotSppt: return "NotSppt";
    case SpptStatus::Undecided: return "Undecided";
  }
  return "Unknown";
}

struct SpptVerdict {
  SpptStatus status = SpptStatus::Undecided;
  double residual = 0.0;   // Frobenius norm of the tested identity's defect
  double threshold = 0.0;  // residual <= threshold counts as zero
  std::optional<CMat> residual_matrix;  // b^dag a^+ b - b a^+ b^dag when computed
  std::optional<SpptFactors> factors;   // the factorization actually tested
  std::string tested;  // "provided", "canonical-full-rank", "canonical-compressed" or "none"
  int rank_a = 0;
  std::string note;
};

struct SpptCheckOptions {
  double tol = 1e-9;  // relative to ||rho||_F
  double rank_cutoff = tol::kRankCutoff;
  std::optional<SpptFactors> hint;
};

namespace detail {

inline SpptVerdict block_identity_test(const BlockView &v, const CMat &a_inv, double threshold) {
  SpptVerdict out;
  const CMat diff = v.b.adjoint() * a_inv * v.b - v.b * a_inv * v.b.adjoint();
  out.residual_matrix = diff;
  out.residual = diff.norm();
  out.threshold = threshold;
  return out;
}

}  // namespace detail

/// Decides SPPT for PPT states with invertible a-block and tests the canonical
/// compressed factorization otherwise. Singular a-blocks never yield NotSppt:
/// a failed canonical factorization does not rule out other ones.
inline SpptVerdict sppt_check(const QubitQuditState &st, const SpptCheckOptions &opt = {}) {
  const double scale = st.rho.norm();
  const double threshold = opt.tol * scale;
  const BlockView v = blocks(st);
  const int d = st.d;
  const int rank_a = rank_of(v.a, opt.rank_cutoff);

  const double min_pt = min_pt_eigenvalue(st);
  if (min_pt < -opt.tol * scale) {
    SpptVerdict out;
    out.status = SpptStatus::Undecided;
    out.threshold = threshold;
    out.rank_a = rank_a;
    out.tested = "none";
    out.note = "NPT: partial transpose min eigenvalue " + std::to_string(min_pt);
    return out;
  }

  std::string hint_note;
  if (opt.hint) {
    const SpptFactors &h = *opt.hint;
    if (h.d() == d) {
      const double mismatch = (assemble_state(h).rho - st.rho).norm();
      const double res = sppt_residual(h);
      if (mismatch <= threshold && res <= threshold) {
        SpptVerdict out;
        out.status = SpptStatus::Sppt;
        out.residual = res;
        out.threshold = threshold;
        out.factors = h;
        out.tested = "provided";
        out.rank_a = rank_a;
        out.note = "provided factorization reproduces rho and satisfies the SPPT identity";
        return out;
      }
      hint_note = "provided factors rejected (reconstruction defect " + std::to_string(mismatch) +
                  ", SPPT residual " + std::to_string(res) + "); ";
    } else {
      hint_note = "provided factors have wrong dimension; ";
    }
  }

  if (rank_a == d) {
    const CMat a_inv = pinv_psd(v.a, 0.0, std::numeric_limits<double>::infinity());
    SpptVerdict out = detail::block_identity_test(v, a_inv, threshold);
    out.rank_a = rank_a;
    out.tested = "canonical-full-rank";
    if (out.residual <= threshold) {
      out.status = SpptStatus::Sppt;
      out.factors = extract_factors_full_rank(st, opt.tol, opt.rank_cutoff);
      out.note = hint_note + "b^dag a^-1 b = b a^-1 b^dag holds";
    } else {
      out.status = SpptStatus::NotSppt;
      out.note = hint_note + "b^dag a^-1 b != b a^-1 b^dag";
    }
    return out;
  }

  // Singular a: compress onto range(a) on the qudit side and test the
  // canonical factorization x1 = a^{1/2}, s = a^{+1/2} b a^{+1/2}.
  SpptVerdict out;
  out.rank_a = rank_a;
  out.threshold = threshold;
  out.tested = "canonical-compressed";
  if (rank_a == 0) {
    out.status = SpptStatus::Sppt;
    out.factors = SpptFactors{CMat::Zero(d, d), CMat::Zero(d, d), sqrt_psd(v.c, std::numeric_limits<double>::infinity())};
    out.residual = 0.0;
    out.note = hint_note + "a = 0: rho = |1><1| (x) c";
    return out;
  }
  const EigResult eig = herm_eig(v.a);
  const CMat iso = eig.vectors.rightCols(rank_a);  // d x k isometry onto range(a)
  const CMat proj = iso * iso.adjoint();
  const double leak = (v.b - proj * v.b * proj).norm();
  const BlockView comp{iso.adjoint() * v.a * iso, iso.adjoint() * v.b * iso,
                       iso.adjoint() * v.c * iso};
  const CMat a_inv = pinv_psd(comp.a, 0.0, std::numeric_limits<double>::infinity());
  SpptVerdict test = detail::block_identity_test(comp, a_inv, threshold);
  out.residual = test.residual;
  out.residual_matrix = test.residual_matrix;
  if (leak > threshold) {
    out.status = SpptStatus::Undecided;
    out.note = hint_note + "b has weight outside range(a) (" + std::to_string(leak) + ")";
    return out;
  }
  if (test.residual > threshold) {
    out.status = SpptStatus::Undecided;
    out.note = hint_note +
               "canonical compressed factorization violates the SPPT identity; singular a "
               "leaves other factorizations open";
    return out;
  }
  // Both roots from the same rank_a eigenpairs, so noise in the kernel of a
  // is never inverted.
  const RVec lam = eig.values.tail(rank_a);
  const CMat a_half = iso * lam.cwiseSqrt().cast<cplx>().asDiagonal() * iso.adjoint();
  const CMat a_pinv_half =
      iso * lam.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() * iso.adjoint();
  const CMat s = a_pinv_half * v.b * a_pinv_half;
  const CMat sx1 = s * a_half;
  CMat tail = v.c - sx1.adjoint() * sx1;
  tail = 0.5 * (tail + tail.adjoint());
  const EigResult te = herm_eig(tail);
  if (te.values(0) < -opt.tol * scale) {
    out.status = SpptStatus::Undecided;
    out.note = hint_note + "canonical tail c - b^dag a^+ b is not PSD";
    return out;
  }
  const CMat x2 = te.vectors * te.values.cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal() *
                  te.vectors.adjoint();
  SpptFactors f{a_half, s, x2};
  const double mismatch = (assemble_state(f).rho - st.rho).norm();
  if (mismatch > threshold) {
    out.status = SpptStatus::Undecided;
    out.note = hint_note + "canonical compressed factors do not reproduce rho";
    return out;
  }
  out.residual = sppt_residual(f);
  if (out.residual > threshold) {
    out.status = SpptStatus::Undecided;
    out.note = hint_note + "canonical compressed factors violate the SPPT identity";
    return out;
  }
  out.status = SpptStatus::Sppt;
  out.factors = f;
  out.note = hint_note + "canonical compressed factorization satisfies the SPPT identity";
  return out;
}

}  // namespace sppt
