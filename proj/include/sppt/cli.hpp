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
#include <ostream>
#include <string>

#include "sppt/generators.hpp"
#include "sppt/io.hpp"
#include "sppt/separability.hpp"

namespace sppt::cli {

// Exit codes: verdicts of any kind are operational success.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;

struct GenerateArgs {
  std::string name;
  double b = 0.5;
  int d = 4;
  int rank = 4;
  std::uint64_t seed = 1;
  bool non_normal = false;
  std::string out;  // empty: stdout
};

inline constexpr const char *kGenerateNames = "rho0, rho1, rho2, horodecki, random-sppt, bell, mixed";

inline QubitQuditState generate(const GenerateArgs &a) {
  if (a.name == "rho0") return gen_rho0(a.b).state;
  if (a.name == "rho1") return gen_rho1();
  if (a.name == "rho2") return gen_rho2();
  if (a.name == "horodecki") return gen_horodecki_2x4(a.b);
  if (a.name == "random-sppt") return random_sppt(a.d, a.rank, !a.non_normal, a.seed).state;
  if (a.name == "bell") return bell_state();
  if (a.name == "mixed") return maximally_mixed(a.d);
  throw Error(ErrorCode::BadParameter,
              "unknown state '" + a.name + "'; expected one of " + kGenerateNames);
}

inline int cmd_generate(const GenerateArgs &a, std::ostream &out, std::ostream &err) {
  try {
    const QubitQuditState s = generate(a);
    const std::string text = io::write_state(s);
    if (a.out.empty()) {
      out << text;
    } else {
      io::write_text_file(a.out, text);
      out << "wrote " << a.out << "\n";
    }
    (a.out.empty() ? err : out) << a.name << ": 2x" << s.d << ", trace "
                                << io::format_real(s.trace()) << "\n";
    return kExitOk;
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n"
        << "usage: generate {" << kGenerateNames
        << "} [--b B] [--d D] [--rank K] [--seed N] [--non-normal] [--out FILE]\n";
    return kExitInputError;
  }
}

/// "720x360" -> {720, 360}.
inline GridSpec parse_grid(const std::string &text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("missing x");
    std::size_t used_a = 0, used_p = 0;
    const std::string sa = text.substr(0, x), sp = text.substr(x + 1);
    GridSpec g{std::stoi(sa, &used_a), std::stoi(sp, &used_p)};
    if (used_a != sa.size() || used_p != sp.size() || g.azimuthal < 1 || g.polar < 1)
      throw std::invalid_argument("bad grid");
    return g;
  } catch (const std::exception &) {
    throw Error(ErrorCode::BadParameter, "grid must look like 720x360, got '" + text + "'");
  }
}

struct ClassifyArgs {
  std::string input;
  double tol = 1e-9;
  std::string grid;  // empty: module default
  int budget = 0;    // 0: module default (4d)
  std::string json;  // report path; "-" for stdout
};

inline ClassifyOptions classify_options(const ClassifyArgs &a) {
  ClassifyOptions o;
  o.tol = a.tol;
  o.subtraction.tol = a.tol;
  if (!a.grid.empty()) o.range.grid = parse_grid(a.grid);
  if (a.budget < 0) throw Error(ErrorCode::BadParameter, "budget must be >= 0");
  o.subtraction.budget = a.budget;
  return o;
}

inline int cmd_classify(const ClassifyArgs &a, std::ostream &out, std::ostream &err) {
  QubitQuditState s;
  ClassifyOptions o;
  try {
    o = classify_options(a);
    s = io::read_state_file(a.input);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  const Verdict v = classify(s, o);
  const VerdictCheck chk = validate_verdict(v, s, o.tol);
  out << "class: " << to_string(v.cls) << "\n"
      << "certificate: " << v.certificate_kind << " (" << (chk.ok ? "replayed" : "replay FAILED")
      << ": " << chk.detail << ")\n";
  for (const auto &t : v.trace_log) out << "  " << t.stage << ": " << t.outcome << "\n";
  if (!a.json.empty()) {
    const std::string text = io::report(a.input, s, v, o).dump(2) + "\n";
    if (a.json == "-") {
      out << text;
    } else {
      try {
        io::write_text_file(a.json, text);
      } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
      }
    }
  }
  return kExitOk;
}

inline int cmd_check(const std::string &which, const std::string &input, double tol,
                     std::ostream &out, std::ostream &err) {
  QubitQuditState s;
  try {
    if (which != "ppt" && which != "sppt")
      throw Error(ErrorCode::BadParameter, "check expects 'ppt' or 'sppt', got '" + which + "'");
    s = io::read_state_file(input);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (which == "ppt") {
    const double m = min_pt_eigenvalue(s);
    out << "min PT eigenvalue: " << io::format_real(m) << "\n"
        << (m >= -tol * s.rho.norm() ? "PPT" : "NPT") << "\n";
    return kExitOk;
  }
  const SpptVerdict v = sppt_check(s, {tol, tol::kRankCutoff, std::nullopt});
  out << "status: " << to_string(v.status) << "\n"
      << "residual: " << io::format_real(v.residual) << " (threshold "
      << io::format_real(v.threshold) << ", " << v.tested << ")\n";
  if (!v.note.empty()) out << "note: " << v.note << "\n";
  return kExitOk;
}

}  // namespace sppt::cli
