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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sppt/linalg.hpp"
#include "sppt/range_criterion.hpp"
#include "sppt/separability.hpp"
#include "sppt/sppt_core.hpp"
#include "sppt/states.hpp"

namespace sppt::io {

using json = nlohmann::json;

// State file: {"d": int, "normalized": bool, "rho": [[[re, im], ...], ...]},
// row-major, reals printed with 17 significant digits.

/// %.17g, with -0 written as 0 so that files round-trip textually.
inline std::string format_real(double x) {
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string write_state(const QubitQuditState &s) {
  std::string out = "{\n  \"d\": " + std::to_string(s.d) +
                    ",\n  \"normalized\": " + (s.normalized ? "true" : "false") + ",\n  \"rho\": [";
  const Eigen::Index n = s.rho.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    out += i ? ",\n    [" : "\n    [";
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out += ", ";
      out += "[" + format_real(s.rho(i, j).real()) + ", " + format_real(s.rho(i, j).imag()) + "]";
    }
    out += "]";
  }
  out += "\n  ]\n}\n";
  return out;
}

inline json matrix_to_json(const CMat &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMat matrix_from_json(const json &j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json &row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::ParseError, "ragged matrix row " + std::to_string(i));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json &z = row[c];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        throw Error(ErrorCode::ParseError, "entries must be [re, im] number pairs");
      m(i, c) = cplx(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

inline QubitQuditState read_state(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object() || !j.contains("d") || !j.contains("rho") || !j["d"].is_number_integer())
    throw Error(ErrorCode::ParseError, "state file needs integer \"d\" and \"rho\"");
  const bool normalized = j.value("normalized", false);
  return make_state(j["d"].get<int>(), matrix_from_json(j["rho"]), normalized);
}

inline std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline QubitQuditState read_state_file(const std::string &path) { return read_state(slurp(path)); }

inline void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << text;
}

inline void write_state_file(const std::string &path, const QubitQuditState &s) {
  write_text_file(path, write_state(s));
}

// --- certificates and reports ---------------------------------------------

inline json to_json(const SpptFactors &f) {
  return {{"x1", matrix_to_json(f.x1)}, {"s", matrix_to_json(f.s)}, {"x2", matrix_to_json(f.x2)}};
}

inline SpptFactors factors_from_json(const json &j) {
  return {matrix_from_json(j.at("x1")), matrix_from_json(j.at("s")), matrix_from_json(j.at("x2"))};
}

inline json to_json(const SpptVerdict &v) {
  json j{{"status", to_string(v.status)}, {"residual", v.residual}, {"threshold", v.threshold},
         {"tested", v.tested},            {"rank_a", v.rank_a},     {"note", v.note}};
  if (v.residual_matrix) j["residual_matrix"] = matrix_to_json(*v.residual_matrix);
  return j;
}

inline json to_json(const RangeSearchCertificate &c) {
  json minima = json::array();
  for (const auto &m : c.refined_minima)
    minima.push_back({{"t_re", m.at_infinity ? 0.0 : m.t.real()},
                      {"t_im", m.at_infinity ? 0.0 : m.t.imag()},
                      {"at_infinity", m.at_infinity},
                      {"residual", m.residual}});
  json found = json::array();
  for (const auto &p : c.found)
    found.push_back({{"e", matrix_to_json(p.e)},
                     {"f", matrix_to_json(p.f)},
                     {"residual_range", p.residual_range},
                     {"residual_pt_range", p.residual_pt_range}});
  return {{"kind", "range-criterion search certificate"},
          {"grid_spec",
           {{"parametrization", "e = (1, t)/sqrt(1 + |t|^2) plus e = (0, 1)"},
            {"azimuthal", c.grid.azimuthal},
            {"polar", c.grid.polar}}},
          {"exclusion_threshold", c.exclusion_threshold},
          {"worst_min_residual", c.worst_min_residual},
          {"kernel_dim", c.kernel_dim},
          {"pt_kernel_dim", c.pt_kernel_dim},
          {"minima", minima},
          {"found", found},
          {"conclusion", to_string(c.conclusion)}};
}

inline json to_json(const SeparableDecomposition &dec) {
  json terms = json::array();
  for (const auto &t : dec.terms)
    terms.push_back({{"qubit", matrix_to_json(t.qubit)}, {"qudit", matrix_to_json(t.qudit)}});
  return terms;
}

inline SeparableDecomposition decomposition_from_json(const json &j) {
  SeparableDecomposition dec;
  for (const auto &t : j) dec.terms.push_back({matrix_from_json(t.at("qubit")), matrix_from_json(t.at("qudit"))});
  return dec;
}

inline json to_json(const LocalReduction &r) {
  json j{{"method", r.method},
         {"d", r.d},
         {"k", r.k},
         {"qubit_flipped", r.qubit_flipped},
         {"qudit_unitary", matrix_to_json(r.qudit_unitary)},
         {"tail", matrix_to_json(r.tail)}};
  j["reduced"] = r.reduced ? matrix_to_json(r.reduced->rho) : json(nullptr);
  return j;
}

inline LocalReduction reduction_from_json(const json &j) {
  LocalReduction r;
  r.method = j.at("method").get<std::string>();
  r.d = j.at("d").get<int>();
  r.k = j.at("k").get<int>();
  r.qubit_flipped = j.at("qubit_flipped").get<bool>();
  r.qudit_unitary = matrix_from_json(j.at("qudit_unitary"));
  r.tail = matrix_from_json(j.at("tail"));
  if (!j.at("reduced").is_null()) r.reduced = QubitQuditState{r.k, matrix_from_json(j.at("reduced")), false};
  return r;
}

/// {class, certificate, residuals, trace_log}.
inline json to_json(const Verdict &v, const QubitQuditState &input) {
  json cert{{"kind", v.certificate_kind}};
  if (v.decomposition) cert["decomposition"] = to_json(*v.decomposition);
  if (!v.reductions.empty()) {
    json chain = json::array();
    for (const auto &r : v.reductions) chain.push_back(to_json(r));
    cert["reduction_chain"] = chain;
  }
  if (v.min_pt_eigenvalue) cert["min_pt_eigenvalue"] = *v.min_pt_eigenvalue;
  if (v.range_certificate && (v.cls == VerdictClass::EntangledRange || v.cls == VerdictClass::PptUndecided))
    cert["range"] = to_json(*v.range_certificate);

  json residuals = json::object();
  if (v.decomposition)
    residuals["decomposition"] = validate_decomposition(*v.decomposition, input.rho).residual;
  if (v.sppt) {
    residuals["sppt"] = v.sppt->residual;
    residuals["sppt_threshold"] = v.sppt->threshold;
  }
  if (v.range_certificate) residuals["range_worst_min"] = v.range_certificate->worst_min_residual;
  if (v.min_pt_eigenvalue) residuals["min_pt_eigenvalue"] = *v.min_pt_eigenvalue;

  json log = json::array();
  for (const auto &s : v.trace_log) log.push_back({{"stage", s.stage}, {"outcome", s.outcome}});

  json j{{"class", to_string(v.cls)}, {"certificate", cert}, {"residuals", residuals}, {"trace_log", log}};
  if (v.sppt) j["sppt"] = to_json(*v.sppt);
  return j;
}

inline constexpr const char *kToolVersion = "0.1.0";

inline json tolerances_json(const ClassifyOptions &o) {
  return {{"tol", o.tol},
          {"rank_cutoff", o.rank_cutoff},
          {"kernel_cutoff", o.range.kernel_cutoff},
          {"exclusion_threshold", o.range.exclusion_threshold},
          {"refine_tol", o.range.refine_tol},
          {"refine_max_iter", o.range.refine_max_iter},
          {"grid", {{"azimuthal", o.range.grid.azimuthal}, {"polar", o.range.grid.polar}}},
          {"subtraction_budget", o.subtraction.budget},
          {"subtraction_qualify_tol", o.subtraction.qualify_tol}};
}

/// Verdict wrapped with input descriptor, tool version, tolerances and timings.
inline json report(const std::string &input, const QubitQuditState &s, const Verdict &v,
                   const ClassifyOptions &o) {
  json timings = json::object();
  for (const auto &t : v.timings) timings[t.stage] = t.ms;
  return {{"input", {{"path", input}, {"d", s.d}, {"trace", s.trace()}}},
          {"verdict", to_json(v, s)},
          {"tool_version", kToolVersion},
          {"tolerances", tolerances_json(o)},
          {"timings_ms", timings}};
}

}  // namespace sppt::io
