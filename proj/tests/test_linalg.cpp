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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sppt/generators.hpp"
#include "sppt/linalg.hpp"

namespace sppt {
namespace {

CMat diag(std::initializer_list<double> v) {
  CMat m = CMat::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

TEST(HermEig, DiagonalIsSortedAscending) {
  const EigResult r = herm_eig(diag({2, 1}));
  EXPECT_DOUBLE_EQ(r.values(0), 1.0);
  EXPECT_DOUBLE_EQ(r.values(1), 2.0);
  EXPECT_NEAR(std::abs(r.vectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(r.vectors(0, 1)), 1.0, 1e-15);
}

TEST(HermEig, Identity) {
  const EigResult r = herm_eig(CMat::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(r.values(i), 1.0);
}

TEST(HermEig, PauliX) {
  CMat x(2, 2);
  x << 0, 1, 1, 0;
  const EigResult r = herm_eig(x);
  EXPECT_NEAR(r.values(0), -1.0, 1e-15);
  EXPECT_NEAR(r.values(1), 1.0, 1e-15);
}

TEST(HermEig, RejectsNonHermitianAndNonSquare) {
  CMat m(2, 2);
  m << 0, 1, 0, 0;
  try {
    herm_eig(m);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
  try {
    herm_eig(CMat::Zero(2, 3));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSquare);
  }
}

TEST(HermEig, RandomReconstructionAndOracleSpectrum) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 12; ++n) {
    const CMat m = oracle::random_hermitian(n, rng);
    const EigResult r = herm_eig(m);
    const CMat back = r.vectors * r.values.cast<cplx>().asDiagonal() * r.vectors.adjoint();
    EXPECT_LE((back - m).norm(), 1e-10 * m.norm());
    EXPECT_LE((r.vectors.adjoint() * r.vectors - CMat::Identity(n, n)).norm(), 1e-10);
    const auto ref = oracle::eigenvalues(m);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(r.values(i), ref[i], 1e-10 * m.norm());
  }
}

TEST(Svd, Examples) {
  EXPECT_EQ(svd(CMat::Identity(4, 4)).sigma, RVec::Ones(4));
  const SvdResult d = svd(diag({3, 0}));
  EXPECT_DOUBLE_EQ(d.sigma(0), 3.0);
  EXPECT_DOUBLE_EQ(d.sigma(1), 0.0);
  CMat n(2, 2);
  n << 0, 1, 0, 0;
  const SvdResult s = svd(n);
  EXPECT_NEAR(s.sigma(0), 1.0, 1e-15);
  EXPECT_NEAR(s.sigma(1), 0.0, 1e-15);
}

TEST(Svd, RandomReconstruction) {
  std::mt19937_64 rng(12);
  for (int r = 1; r <= 12; ++r)
    for (int c : {1, r, 12}) {
      const CMat m = oracle::random_matrix(r, c, rng);
      const SvdResult s = svd(m);
      EXPECT_LE((svd_reconstruct(s) - m).norm(), 1e-10 * m.norm());
      for (Eigen::Index i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma(i - 1), s.sigma(i));
      EXPECT_GE(s.sigma.minCoeff(), 0.0);
    }
}

TEST(PsdCheck, Examples) {
  PsdCheck p = psd_check(CMat::Identity(2, 2));
  EXPECT_TRUE(p.is_psd);
  EXPECT_DOUBLE_EQ(p.min_eig, 1.0);
  p = psd_check(diag({1, -1}));
  EXPECT_FALSE(p.is_psd);
  EXPECT_DOUBLE_EQ(p.min_eig, -1.0);
  CMat m(2, 2);
  m << 2, 1, 1, 2;
  p = psd_check(m);
  EXPECT_TRUE(p.is_psd);
  EXPECT_NEAR(p.min_eig, 1.0, 1e-15);
}

TEST(SqrtPsd, Examples) {
  EXPECT_LE((sqrt_psd(diag({4, 9})) - diag({2, 3})).norm(), 1e-15);
  EXPECT_LE((sqrt_psd(CMat::Identity(5, 5)) - CMat::Identity(5, 5)).norm(), 1e-15);
  CMat m(2, 2);
  m << 2, 1, 1, 2;
  const CMat r = sqrt_psd(m);
  EXPECT_LE((r * r - m).norm(), 1e-12);
}

TEST(SqrtPsd, ClampsNoiseRejectsIndefinite) {
  const CMat noisy = diag({1, -1e-12});
  EXPECT_GE(herm_eigenvalues(sqrt_psd(noisy)).minCoeff(), 0.0);
  try {
    sqrt_psd(diag({1, -1e-3}));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPsd);
  }
}

TEST(SqrtPsd, SquareReproducesRandomPsd) {
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 8; ++n) {
    const CMat g = oracle::random_matrix(n, n, rng);
    const CMat m = g * g.adjoint();
    const CMat r = sqrt_psd(m);
    EXPECT_LE((r * r - m).norm(), 1e-10 * m.norm());
    EXPECT_GE(oracle::min_eigenvalue(r), -1e-12);
  }
}

TEST(PinvPsd, Examples) {
  EXPECT_LE((pinv_psd(diag({2, 0})) - diag({0.5, 0})).norm(), 1e-15);
  EXPECT_LE((pinv_psd(CMat::Identity(3, 3)) - CMat::Identity(3, 3)).norm(), 1e-15);
}

TEST(PinvPsd, PenroseIdentitiesRankTwo) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat g = oracle::random_matrix(4, 2, rng);
    const CMat m = g * g.adjoint();
    const CMat p = pinv_psd(m);
    EXPECT_LE((m * p * m - m).norm(), 1e-9 * m.norm());
    EXPECT_LE((p * m * p - p).norm(), 1e-9 * p.norm());
    EXPECT_LE(((m * p).adjoint() - m * p).norm(), 1e-9);
    EXPECT_LE(((p * m).adjoint() - p * m).norm(), 1e-9);
  }
}

TEST(RankOf, Examples) {
  EXPECT_EQ(rank_of(CMat::Zero(3, 3)), 0);
  EXPECT_EQ(rank_of(diag({1, 1, 0, 0, 0})), 2);
  EXPECT_EQ(rank_of(gen_rho0(0.5).factors.x1), 4);
}

TEST(RankOf, InvariantUnderUnitaryConjugation) {
  std::mt19937_64 rng(15);
  for (int r = 0; r <= 6; ++r) {
    const CMat g = oracle::random_matrix(6, std::max(r, 1), rng) * (r == 0 ? 0.0 : 1.0);
    const CMat m = g * g.adjoint();
    const CMat u = oracle::random_unitary(6, rng);
    EXPECT_EQ(rank_of(m), r);
    EXPECT_EQ(rank_of(u * m * u.adjoint()), r);
  }
}

TEST(Kron, MatchesIndexOracle) {
  std::mt19937_64 rng(16);
  const CMat a = oracle::random_matrix(2, 3, rng);
  const CMat b = oracle::random_matrix(4, 2, rng);
  EXPECT_EQ(kron(a, b), oracle::kron(a, b));
}

TEST(SpectralSplit, SeparatesKernel) {
  const SpectralSplit s = spectral_split(diag({3, 0, 1, 0}), 1e-9);
  EXPECT_EQ(s.range.cols(), 2);
  EXPECT_EQ(s.kernel.cols(), 2);
  EXPECT_LE((diag({3, 0, 1, 0}) * s.kernel).norm(), 1e-15);
}

}  // namespace
}  // namespace sppt
