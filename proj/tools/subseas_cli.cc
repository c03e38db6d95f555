/*
 * Copyright 2026 The Subseas Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end over the subseas C API.
//
//   subseas generate --config demo.json --out out/scenario
//   subseas correct  --config correct.json --out out/abc --model abc
//   subseas evaluate --config evaluate.json --out out/eval
//   subseas explain  --config explain.json --out out/explain

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "subseas/subseas.h"

namespace {

using json = nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::string out;
  std::optional<long long> seed;
  std::optional<int> jobs;
  std::optional<std::string> model;
  std::optional<std::string> task;
};

int usage_error(const std::string& msg) {
  std::cerr << "subseas: " << msg << "\n";
  return 2;
}

void add_common(CLI::App* cmd, Flags& f, bool model, bool task) {
  cmd->add_option("--config", f.config, "JSON run configuration")->required();
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_option("--seed", f.seed, "top-level seed");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  if (model) cmd->add_option("--model", f.model, "dynpp|climpp|perpp|abc|qm|loess|opdebias|mmm|raw");
  if (task) cmd->add_option("--task", f.task, "tmp2m_34w, precip_56w, ...");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subseasonal forecast post-processing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ssf_version());
  Flags f;
  CLI::App* gen = app.add_subcommand("generate", "write a synthetic scenario");
  CLI::App* cor = app.add_subcommand("correct", "run a corrector over target dates");
  CLI::App* eva = app.add_subcommand("evaluate", "score forecasts against observations");
  CLI::App* exp = app.add_subcommand("explain", "opportunistic ABC workflow");
  add_common(gen, f, false, false);
  add_common(cor, f, true, true);
  add_common(eva, f, false, true);
  add_common(exp, f, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::ifstream in(f.config, std::ios::binary);
  if (!in) return usage_error("cannot read config " + f.config);
  std::stringstream buf;
  buf << in.rdbuf();
  json cfg;
  try {
    cfg = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    return usage_error(f.config + ": " + e.what());
  }
  if (!cfg.is_object()) return usage_error(f.config + ": config must be a JSON object");

  // Flags win over the file.
  if (f.seed) {
    if (*f.seed < 0) return usage_error("--seed must be non-negative");
    cfg["seed"] = *f.seed;
  }
  if (f.jobs) cfg["jobs"] = *f.jobs;
  if (f.model) cfg["model"] = *f.model;
  if (f.task) cfg["task"] = *f.task;
  if (!cfg.contains("base_dir")) {
    const auto dir = std::filesystem::absolute(f.config).parent_path();
    cfg["base_dir"] = dir.string();
  }
  const std::string text = cfg.dump();

  ssf_status s;
  if (gen->parsed()) {
    s = ssf_run_generate(text.c_str(), f.out.c_str());
  } else if (cor->parsed()) {
    s = ssf_run_correct(text.c_str(), f.out.c_str());
  } else if (eva->parsed()) {
    s = ssf_run_evaluate(text.c_str(), f.out.c_str());
  } else {
    s = ssf_run_explain(text.c_str(), f.out.c_str());
  }
  if (s != SSF_OK) std::cerr << "subseas: " << ssf_last_error() << "\n";
  return ssf_exit_code(s);
}
