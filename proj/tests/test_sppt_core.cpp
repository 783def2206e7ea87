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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sppt/generators.hpp"
#include "sppt/sppt_core.hpp"

namespace sppt {
namespace {

CMat reference_rho1_difference() {
  CMat m(3, 3);
  m << 6, -6, -3, -6, 0, 0, -3, 0, -4;
  return m / 12.0;
}

TEST(AssembleState, Examples) {
  const int d = 3;
  const CMat i = CMat::Identity(d, d), z = CMat::Zero(d, d);
  EXPECT_EQ(assemble_state({i, i, z}).rho, reassemble({i, i, i}));

  std::mt19937_64 rng(31);
  const CMat x2 = oracle::random_matrix(d, d, rng);
  const CMat any = oracle::random_matrix(d, d, rng);
  EXPECT_LE((assemble_state({z, any, x2}).rho - reassemble({z, z, x2.adjoint() * x2})).norm(), 1e-14);
}

TEST(AssembleState, Rho0AtHalf) {
  const Rho0 r = gen_rho0(0.5);
  const BlockView v = blocks(assemble_state(r.factors));
  EXPECT_NEAR(v.c(0, 0).real(), 1.5, 1e-15);
  EXPECT_NEAR(v.c(0, 3).real(), std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(AssembleState, AlwaysPsd) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 6;
    const SpptFactors f{oracle::random_matrix(d, d, rng), oracle::random_matrix(d, d, rng),
                        oracle::random_matrix(d, d, rng)};
    const CMat rho = assemble_state(f).rho;
    EXPECT_GE(oracle::min_eigenvalue(rho), -1e-12 * rho.norm());
  }
}

TEST(AssembleState, DimensionMismatch) {
  try {
    assemble_state({CMat::Identity(2, 2), CMat::Identity(3, 3), CMat::Zero(2, 2)});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(SpptResidual, Examples) {
  EXPECT_EQ(sppt_residual(CMat::Identity(2, 2), CMat::Identity(2, 2)), 0.0);
  CMat n(2, 2);
  n << 0, 1, 0, 0;
  EXPECT_NEAR(sppt_residual(CMat::Identity(2, 2), n), std::sqrt(2.0), 1e-15);
  for (double b : {0.1, 0.2, 0.5, 0.8, 0.95}) EXPECT_LE(sppt_residual(gen_rho0(b).factors), 1e-12);
}

TEST(PtFactorY, GramEqualsPartialTransposeUnderSppt) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RandomSppt r = random_sppt(2 + seed % 4, 1 + seed % 2, seed % 2 == 0, seed);
    const CMat y = pt_factor_y(r.factors);
    const CMat pt = oracle::partial_transpose(r.state.rho, r.state.d);
    EXPECT_LE((y.adjoint() * y - pt).norm(), 1e-10 * r.state.rho.norm());
  }
}

TEST(ExtractFactors, MaximallyMixed) {
  const SpptFactors f = extract_factors_full_rank(maximally_mixed(3));
  const CMat expect = CMat::Identity(3, 3) / std::sqrt(6.0);
  EXPECT_LE((f.x1 - expect).norm(), 1e-15);
  EXPECT_LE(f.s.norm(), 1e-15);
  EXPECT_LE((f.x2 - expect).norm(), 1e-15);
}

TEST(ExtractFactors, RoundTripOnStates) {
  const QubitQuditState r1 = gen_rho1();
  EXPECT_LE((assemble_state(extract_factors_full_rank(r1)).rho - r1.rho).norm(), 1e-10 * r1.rho.norm());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const QubitQuditState s = random_sppt(4, 4, true, seed).state;
    EXPECT_LE((assemble_state(extract_factors_full_rank(s)).rho - s.rho).norm(), 1e-10 * s.rho.norm());
  }
}

TEST(ExtractFactors, ProductStateGivesScalarS) {
  CMat sigma(2, 2);
  sigma << 2.0, cplx(0.5, 0.25), cplx(0.5, -0.25), 1.0;
  std::mt19937_64 rng(33);
  const CMat g = oracle::random_matrix(3, 3, rng);
  const CMat tau = g * g.adjoint() + CMat::Identity(3, 3);
  const QubitQuditState s{3, oracle::kron(sigma, tau), false};
  const SpptFactors f = extract_factors_full_rank(s);
  EXPECT_LE((f.s - (sigma(0, 1) / sigma(0, 0)) * CMat::Identity(3, 3)).norm(), 1e-12);
}

TEST(ExtractFactors, Errors) {
  try {
    extract_factors_full_rank(gen_rho0(0.5).state);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFullRank);
  }
  // Full-rank a with a non-PSD Schur complement.
  CMat rho(2, 2);
  rho << 1.0, 2.0, 2.0, 1.0;
  try {
    extract_factors_full_rank({1, rho, false});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPpt);
  }
}

TEST(SpptCheck, Rho1ResidualMatrixMatchesReference) {
  const SpptVerdict v = sppt_check(gen_rho1());
  EXPECT_EQ(v.status, SpptStatus::NotSppt);
  ASSERT_TRUE(v.residual_matrix.has_value());
  const CMat expect = reference_rho1_difference();
  EXPECT_LE((*v.residual_matrix - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(v.residual, std::sqrt(142.0) / 12.0, 1e-12);

  // The same matrix with an LU inverse in place of the spectral one.
  const BlockView b = blocks(gen_rho1());
  const CMat ai = oracle::inverse(b.a);
  EXPECT_LE((b.b.adjoint() * ai * b.b - b.b * ai * b.b.adjoint() - expect).norm(), 1e-12);
}

TEST(SpptCheck, Rho2IsNotSppt) {
  EXPECT_EQ(sppt_check(gen_rho2()).status, SpptStatus::NotSppt);
}

TEST(SpptCheck, Rho0WithProvidedFactors) {
  for (double b : {0.2, 0.5, 0.8}) {
    const Rho0 r = gen_rho0(b);
    const SpptVerdict v = sppt_check(r.state, {1e-9, tol::kRankCutoff, r.factors});
    EXPECT_EQ(v.status, SpptStatus::Sppt);
    EXPECT_EQ(v.tested, "provided");
    ASSERT_TRUE(v.factors.has_value());
    EXPECT_LE(sppt_residual(*v.factors), v.threshold);
  }
}

TEST(SpptCheck, Rho0CanonicalIsNeverNotSppt) {
  const SpptVerdict v = sppt_check(gen_rho0(0.5).state);
  EXPECT_NE(v.status, SpptStatus::NotSppt);
  EXPECT_EQ(v.rank_a, 4);
}

TEST(SpptCheck, WrongHintFallsBack) {
  const Rho0 r = gen_rho0(0.5);
  const SpptVerdict v = sppt_check(gen_rho1(), {1e-9, tol::kRankCutoff, r.factors});
  EXPECT_EQ(v.status, SpptStatus::NotSppt);
}

TEST(SpptCheck, NptIsUndecided) {
  const SpptVerdict v = sppt_check(bell_state());
  EXPECT_EQ(v.status, SpptStatus::Undecided);
  EXPECT_NE(v.note.find("NPT"), std::string::npos);
}

TEST(SpptCheck, SpptVerdictCarriesValidFactors) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const RandomSppt r = random_sppt(3 + seed % 3, 1 + seed % 3, true, seed);
    const SpptVerdict v = sppt_check(r.state);
    if (v.status != SpptStatus::Sppt) continue;
    ASSERT_TRUE(v.factors.has_value());
    EXPECT_LE(sppt_residual(*v.factors), v.threshold);
    EXPECT_LE((assemble_state(*v.factors).rho - r.state.rho).norm(), v.threshold);
  }
}

TEST(SpptCheck, BlockIdentityAgreesWithCanonicalResidual) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 40; ++t) {
    const int d = 2 + t % 4;
    QubitQuditState s;
    if (t % 2 == 0) {
      s = random_sppt(d, d, true, 500 + t).state;
    } else {
      const CMat g = oracle::random_matrix(2 * d, 2 * d, rng);
      s = {d, g * g.adjoint(), false};
      if (!is_ppt(s)) continue;
    }
    const SpptVerdict v = sppt_check(s);
    const SpptFactors f = extract_factors_full_rank(s);
    const bool canonical = sppt_residual(f) <= 1e-9 * s.rho.norm();
    EXPECT_EQ(v.status == SpptStatus::Sppt, canonical) << "trial " << t;
  }
}

}  // namespace
}  // namespace sppt
