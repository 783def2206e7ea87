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

#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "sppt/generators.hpp"
#include "sppt/io.hpp"

namespace sppt {
namespace {

TEST(StateFile, RoundTripIsBitIdentical) {
  for (const QubitQuditState &s :
       {gen_rho0(0.37).state, gen_rho1(), random_sppt(5, 3, false, 1).state, maximally_mixed(3)}) {
    const std::string first = io::write_state(s);
    const QubitQuditState back = io::read_state(first);
    EXPECT_EQ(back.rho, s.rho);
    EXPECT_EQ(back.d, s.d);
    EXPECT_EQ(back.normalized, s.normalized);
    EXPECT_EQ(io::write_state(back), first);
  }
}

TEST(StateFile, SeventeenDigits) {
  EXPECT_EQ(io::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_real(1.0), "1");
}

TEST(StateFile, ParseErrors) {
  auto code = [](const std::string &text) {
    try {
      io::read_state(text);
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::InvalidDecomposition;
  };
  EXPECT_EQ(code("{"), ErrorCode::ParseError);
  EXPECT_EQ(code("{\"rho\": []}"), ErrorCode::ParseError);
  EXPECT_EQ(code("{\"d\": 1, \"rho\": [[[1, 0], [0]], [[0, 0], [1, 0]]]}"), ErrorCode::ParseError);
  EXPECT_EQ(code("{\"d\": 2, \"rho\": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"), ErrorCode::BadDimensions);
  EXPECT_EQ(code("{\"d\": 1, \"rho\": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}"), ErrorCode::NotHermitian);
  EXPECT_EQ(code("{\"d\": 1, \"normalized\": true, \"rho\": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"),
            ErrorCode::NotNormalized);
}

TEST(StateFile, DiskRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "sppt_io_test.json").string();
  const QubitQuditState s = gen_horodecki_2x4(0.25);
  io::write_state_file(path, s);
  EXPECT_EQ(io::read_state_file(path).rho, s.rho);
  std::remove(path.c_str());
}

TEST(Report, DecompositionReplays) {
  const QubitQuditState s = random_sppt(4, 4, true, 5).state;
  const ClassifyOptions o;
  const Verdict v = classify(s, o);
  const io::json rep = io::json::parse(io::report("mem", s, v, o).dump());
  EXPECT_EQ(rep["verdict"]["class"], "Separable");
  const SeparableDecomposition dec = io::decomposition_from_json(rep["verdict"]["certificate"]["decomposition"]);
  EXPECT_TRUE(validate_decomposition(dec, s.rho).ok);
  EXPECT_EQ(rep["tool_version"], io::kToolVersion);
  EXPECT_EQ(rep["tolerances"]["tol"], 1e-9);
}

TEST(Report, ReductionChainReplays) {
  const QubitQuditState s = gen_rho2();
  const ClassifyOptions o;
  const Verdict v = classify(s, o);
  const io::json rep = io::json::parse(io::report("mem", s, v, o).dump());
  ASSERT_EQ(rep["verdict"]["class"], "SeparableByTheorem");
  Verdict replay;
  replay.cls = VerdictClass::SeparableByTheorem;
  for (const auto &r : rep["verdict"]["certificate"]["reduction_chain"])
    replay.reductions.push_back(io::reduction_from_json(r));
  EXPECT_TRUE(validate_verdict(replay, s).ok);
}

TEST(Report, RangeCertificateSchema) {
  RangeSearchOptions ro;
  ro.grid = {90, 45};
  const io::json c = io::to_json(edge_check(gen_horodecki_2x4(0.5), ro));
  EXPECT_EQ(c["conclusion"], "NoneFound");
  EXPECT_EQ(c["kind"], "range-criterion search certificate");
  EXPECT_EQ(c["grid_spec"]["azimuthal"], 90);
  ASSERT_FALSE(c["minima"].empty());
  for (const auto &m : c["minima"]) {
    EXPECT_TRUE(m.contains("t_re"));
    EXPECT_TRUE(m.contains("t_im"));
    EXPECT_GT(m["residual"].get<double>(), 1e-6);
  }
}

TEST(Report, StableModuloTimings) {
  const QubitQuditState s = gen_rho1();
  const ClassifyOptions o;
  io::json a = io::report("x", s, classify(s, o), o);
  io::json b = io::report("x", s, classify(s, o), o);
  a.erase("timings_ms");
  b.erase("timings_ms");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Factors, JsonRoundTrip) {
  const SpptFactors f = gen_rho0(0.5).factors;
  const SpptFactors g = io::factors_from_json(io::json::parse(io::to_json(f).dump()));
  EXPECT_EQ(g.s, f.s);
  EXPECT_EQ(g.x1, f.x1);
}

}  // namespace
}  // namespace sppt
