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

#include <iostream>

#include <CLI11.hpp>

#include "sppt/cli.hpp"

int main(int argc, char **argv) {
  using namespace sppt::cli;
  CLI::App app{"SPPT and separability analysis of 2 x d states"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sppt::io::kToolVersion);

  GenerateArgs gen;
  auto *g = app.add_subcommand("generate", "write a state file");
  g->add_option("name", gen.name, kGenerateNames)->required();
  g->add_option("--b", gen.b, "family parameter in (0, 1)");
  g->add_option("--d", gen.d, "qudit dimension");
  g->add_option("--rank", gen.rank, "rank of x1 (random-sppt)");
  g->add_option("--seed", gen.seed, "seed (random-sppt)");
  g->add_flag("--non-normal", gen.non_normal, "draw s non-normal (random-sppt)");
  g->add_option("--out", gen.out, "output file (default stdout)");

  ClassifyArgs cls;
  auto *c = app.add_subcommand("classify", "run the classification pipeline");
  c->add_option("file", cls.input, "state file")->required();
  c->add_option("--tol", cls.tol, "relative tolerance");
  c->add_option("--grid", cls.grid, "range-search grid, AxP (default 720x360)");
  c->add_option("--budget", cls.budget, "subtraction iterations (default 4d)");
  c->add_option("--json", cls.json, "write JSON report to path ('-' for stdout)");

  std::string which, input;
  double tol = 1e-9;
  auto *k = app.add_subcommand("check", "PPT or SPPT test");
  k->add_option("which", which, "ppt or sppt")->required();
  k->add_option("file", input, "state file")->required();
  k->add_option("--tol", tol, "relative tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInputError;
  }
  if (*g) return cmd_generate(gen, std::cout, std::cerr);
  if (*c) return cmd_classify(cls, std::cout, std::cerr);
  return cmd_check(which, input, tol, std::cout, std::cerr);
}
