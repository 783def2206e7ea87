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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sppt/linalg.hpp"
#include "sppt/sppt_core.hpp"
#include "sppt/states.hpp"

namespace sppt {

using Rng = std::mt19937_64;

inline CMat ginibre(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return m;
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of diag(R)
/// pushed into Q.
inline CMat haar_unitary(Eigen::Index n, Rng &rng) {
  const CMat g = ginibre(n, n, rng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(n, n);
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx rii = r(i, i);
    const double mag = std::abs(rii);
    if (mag > 0.0) q.col(i) *= rii / mag;
  }
  return q;
}

inline CVec random_unit_vector(Eigen::Index n, Rng &rng) {
  CVec v = ginibre(n, 1, rng).col(0);
  return v / v.norm();
}

// --- named states ---------------------------------------------------------

inline QubitQuditState gen_rho1() {
  CMat r11(3, 3), r12(3, 3), r22(3, 3);
  r11 << 3, 0, 0,
         0, 4, 2,
         0, 2, 3;
  r12 << 0, 0, 0,
         0, 0, 1,
         1, -1, 0;
  r22 << 2, 1, -1,
         1, 6, 1,
         -1, 1, 3;
  return {3, reassemble({r11, r12, r22}), false};
}

/// rho1 padded to 2 (x) 4 with an extra |0>|3> term.
inline QubitQuditState gen_rho2() {
  const BlockView v = blocks(gen_rho1());
  CMat a = CMat::Zero(4, 4), b = CMat::Zero(4, 4), c = CMat::Zero(4, 4);
  a.topLeftCorner(3, 3) = v.a;
  a(3, 3) = 1.0;
  b.topLeftCorner(3, 3) = v.b;
  c.topLeftCorner(3, 3) = v.c;
  return {4, reassemble({a, b, c}), false};
}

struct Rho0 {
  QubitQuditState state;
  SpptFactors factors;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::string note;
};

inline void require_open_unit_interval(double b) {
  if (!(b > 0.0 && b < 1.0))
    throw Error(ErrorCode::BadParameter, "b must lie in (0, 1), got " + std::to_string(b));
}

/// The 2 (x) 5 SPPT entangled family: x1 = diag(1,1,1,1,0), x2 = 0, and s
/// with beta1 = sqrt((1-b)/(2b)), beta2 = sqrt((1+b)/(2b)).
inline Rho0 gen_rho0(double b) {
  require_open_unit_interval(b);
  Rho0 out;
  out.beta1 = std::sqrt((1.0 - b) / (2.0 * b));
  out.beta2 = std::sqrt((1.0 + b) / (2.0 * b));
  out.gamma1 = (b + 1.0) / (2.0 * b);
  out.gamma2 = std::sqrt(1.0 - b * b) / (2.0 * b);

  CMat x1 = CMat::Identity(5, 5);
  x1(4, 4) = 0.0;
  CMat s = CMat::Zero(5, 5);
  s(0, 1) = 1.0;
  s(0, 4) = out.beta1;
  s(1, 2) = 1.0;
  s(2, 3) = 1.0;
  s(3, 4) = out.beta2;
  s(4, 0) = out.beta2;
  s(4, 3) = out.beta1;
  out.factors = {x1, s, CMat::Zero(5, 5)};
  out.state = assemble_state(out.factors);
  out.note =
      "gamma2 = sqrt(1-b^2)/(2b) = beta1*beta2, the value produced by the assembly; "
      "the form sqrt(b^2-1)/(2b) would be imaginary on 0<b<1";
  return out;
}

/// The 2 (x) 4 PPT entangled state obtained by reducing rho0(b):
/// a = 1, b = upper shift, c = [[g1,0,0,g2],[0,1,0,0],[0,0,1,0],[g2,0,0,g1]].
inline QubitQuditState gen_horodecki_2x4(double b) {
  require_open_unit_interval(b);
  const double g1 = (b + 1.0) / (2.0 * b);
  const double g2 = std::sqrt(1.0 - b * b) / (2.0 * b);
  CMat a = CMat::Identity(4, 4);
  CMat shift = CMat::Zero(4, 4);
  for (int i = 0; i < 3; ++i) shift(i, i + 1) = 1.0;
  CMat c = CMat::Identity(4, 4);
  c(0, 0) = g1;
  c(3, 3) = g1;
  c(0, 3) = g2;
  c(3, 0) = g2;
  return {4, reassemble({a, shift, c}), false};
}

inline QubitQuditState maximally_mixed(int d) {
  if (d < 1) throw Error(ErrorCode::BadParameter, "d must be >= 1");
  return {d, CMat::Identity(2 * d, 2 * d) / static_cast<double>(2 * d), true};
}

/// |psi> = (|0>|0> + |1>|1>)/sqrt(2) on 2 (x) 2.
inline QubitQuditState bell_state() {
  CVec psi = CVec::Zero(4);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(3) = 1.0 / std::sqrt(2.0);
  return {2, outer(psi), true};
}

inline QubitQuditState product_state(const CVec &e, const CVec &f) {
  const CVec ef = kron(e, f);
  return {static_cast<int>(f.size()), outer(ef), false};
}

struct RandomSppt {
  QubitQuditState state;
  SpptFactors factors;
};

/// Random SPPT instance. x1 = U diag(sigma) V^dag with `rank` singular values
/// drawn from [0.5, 1.5]. With normal_s, s = W diag(z) W^dag. Otherwise s is
/// built in the U basis, s~ = U^dag s U, so that the top-left rank x rank block
/// of s~^dag s~ - s~ s~^dag vanishes: s~11 is non-normal whenever the
/// complement is large enough to compensate, and normal otherwise.
inline RandomSppt random_sppt(int d, int rank, bool normal_s, std::uint64_t seed) {
  if (d < 1 || rank < 1 || rank > d)
    throw Error(ErrorCode::BadParameter, "need 1 <= rank <= d");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  const CMat u = haar_unitary(d, rng);
  const CMat v = haar_unitary(d, rng);
  CVec sigma = CVec::Zero(d);
  for (int i = 0; i < rank; ++i) sigma(i) = unif(rng);
  const CMat x1 = u * sigma.asDiagonal() * v.adjoint();

  CMat s;
  if (normal_s) {
    const CMat w = haar_unitary(d, rng);
    const CVec z = ginibre(d, 1, rng).col(0);
    s = w * z.asDiagonal() * w.adjoint();
  } else {
    const int k = rank;
    const int m = d - k;
    CMat st = CMat::Zero(d, d);
    if (m >= k) {
      const CMat s11 = ginibre(k, k, rng);
      const CMat g = ginibre(k, m, rng);
      const CMat comm = s11 * s11.adjoint() - s11.adjoint() * s11;
      const double lo = herm_eigenvalues(comm)(0);
      const double gmin = herm_eigenvalues(g * g.adjoint())(0);
      const double c2 = (std::max(0.0, -lo) + 0.5) / gmin;
      const CMat s12 = std::sqrt(c2) * g;
      CMat target = comm + s12 * s12.adjoint();  // = s21^dag s21
      target = 0.5 * (target + target.adjoint());
      CMat s21 = CMat::Zero(m, k);
      s21.topRows(k) = sqrt_psd(target);
      s21 = haar_unitary(m, rng) * s21;
      st.topLeftCorner(k, k) = s11;
      st.topRightCorner(k, m) = s12;
      st.bottomLeftCorner(m, k) = s21;
    } else {
      const CMat w = haar_unitary(k, rng);
      const CVec z = ginibre(k, 1, rng).col(0);
      st.topLeftCorner(k, k) = w * z.asDiagonal() * w.adjoint();
      if (m > 0) {
        const CMat s12 = ginibre(k, m, rng);
        st.topRightCorner(k, m) = s12;
        st.bottomLeftCorner(m, k) = haar_unitary(m, rng) * s12.adjoint();
      }
    }
    if (m > 0) st.bottomRightCorner(m, m) = ginibre(m, m, rng);
    s = u * st * u.adjoint();
  }
  const CMat x2 = 0.5 * ginibre(d, d, rng);
  SpptFactors f{x1, s, x2};
  return {assemble_state(f), f};
}

struct RandomSeparable {
  QubitQuditState state;
  std::vector<CVec> qubit_vectors;
  std::vector<CVec> qudit_vectors;
  std::vector<double> weights;
};

/// Convex mixture of `terms` random pure product states with Dirichlet-like
/// weights, normalized to unit trace.
inline RandomSeparable random_separable(int d, int terms, std::uint64_t seed) {
  if (d < 1 || terms < 1) throw Error(ErrorCode::BadParameter, "need d >= 1 and terms >= 1");
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  RandomSeparable out;
  CMat rho = CMat::Zero(2 * d, 2 * d);
  double total = 0.0;
  for (int i = 0; i < terms; ++i) {
    out.qubit_vectors.push_back(random_unit_vector(2, rng));
    out.qudit_vectors.push_back(random_unit_vector(d, rng));
    out.weights.push_back(expo(rng) + 0.05);
    total += out.weights.back();
  }
  for (int i = 0; i < terms; ++i) {
    out.weights[i] /= total;
    rho += out.weights[i] * outer(kron(out.qubit_vectors[i], out.qudit_vectors[i]));
  }
  out.state = {d, 0.5 * (rho + rho.adjoint()), true};
  return out;
}

}  // namespace sppt
