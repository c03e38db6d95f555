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

#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "subseas/subseas.h"
#include "test_util.h"

namespace {

namespace fs = std::filesystem;
using subseas::testing::TempDir;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SUBSEAS_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// Relative path -> contents for every regular file except the lock file.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == ".subseas.lock") continue;
    out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

TEST(CApiTest, StatusAndMetrics) {
  EXPECT_EQ(ssf_exit_code(SSF_OK), 0);
  EXPECT_EQ(ssf_exit_code(SSF_ERR_CONFIG), 2);
  EXPECT_EQ(ssf_exit_code(SSF_ERR_USAGE), 2);
  EXPECT_EQ(ssf_exit_code(SSF_ERR_DATA), 1);
  EXPECT_STRNE(ssf_version(), "");

  const double a[] = {3, 4}, b[] = {4, 3}, zero[] = {0, 0};
  double s = 0;
  ASSERT_EQ(ssf_skill(a, b, zero, 2, &s), SSF_OK);
  EXPECT_NEAR(s, 0.96, 1e-12);
  EXPECT_EQ(ssf_skill(zero, b, zero, 2, &s), SSF_UNDEFINED);
  EXPECT_STRNE(ssf_last_error(), "");
  EXPECT_EQ(ssf_skill(nullptr, b, zero, 2, &s), SSF_ERR_USAGE);

  const double m[] = {0.0, 2.0};
  double c = 0;
  ASSERT_EQ(ssf_crps(m, 2, 1.0, &c), SSF_OK);
  EXPECT_NEAR(c, 0.5, 1e-15);  // mean|X-y| = 1, half mean pair gap = 0.5
  EXPECT_EQ(ssf_crps(m, 0, 1.0, &c), SSF_ERR_DOMAIN);
  EXPECT_EQ(ssf_day_diff(1000, 1000 - 365), 0.0);
  EXPECT_EQ(ssf_day_diff(1000, 1000 - 30), 30.0);
}

TEST(CApiTest, FieldAndArchiveHandles) {
  TempDir dir("capi");
  spit(dir.path() / "obs.csv",
       "date,lat,lon,value\n"
       "2001-01-01,40,-100,1.5\n"
       "2001-01-01,41,-100,\n"
       "2001-01-02,40,-100,2\n"
       "2001-01-02,41,-100,3\n");
  ssf_field* f = nullptr;
  ASSERT_EQ(ssf_field_load(dir.str("obs.csv").c_str(), &f), SSF_OK) << ssf_last_error();
  EXPECT_EQ(ssf_field_num_dates(f), 2u);
  EXPECT_EQ(ssf_field_num_points(f), 2u);
  int64_t d = 0;
  ASSERT_EQ(ssf_field_date(f, 1, &d), SSF_OK);
  EXPECT_EQ(d, 11324);
  double v = 0;
  ASSERT_EQ(ssf_field_value(f, 0, 1, &v), SSF_OK);
  EXPECT_TRUE(std::isnan(v));
  ASSERT_EQ(ssf_field_value(f, 1, 1, &v), SSF_OK);
  EXPECT_EQ(v, 3.0);
  EXPECT_EQ(ssf_field_value(f, 5, 0, &v), SSF_ERR_USAGE);
  ASSERT_EQ(ssf_field_store(f, dir.str("copy.csv").c_str()), SSF_OK);
  EXPECT_EQ(slurp(dir.path() / "copy.csv"), slurp(dir.path() / "obs.csv"));

  spit(dir.path() / "fc.csv",
       "issuance_date,target_date,lead_days,member,lat,lon,value,era\n"
       "2001-01-01,2001-01-16,15,0,40,-100,1,forecast\n"
       "2001-01-01,2001-01-16,15,0,41,-100,2,forecast\n");
  ssf_archive* a = nullptr;
  ASSERT_EQ(ssf_archive_load(dir.str("fc.csv").c_str(), f, &a), SSF_OK) << ssf_last_error();
  EXPECT_EQ(ssf_archive_size(a), 1u);
  ssf_archive_free(a);
  ssf_field_free(f);

  EXPECT_EQ(ssf_field_load(dir.str("absent.csv").c_str(), &f), SSF_ERR_IO);
  spit(dir.path() / "bad.csv", "date,lat,lon,value\n2001-01-01,40,-100,x\n");
  EXPECT_EQ(ssf_field_load(dir.str("bad.csv").c_str(), &f), SSF_ERR_DATA);
  EXPECT_NE(std::string(ssf_last_error()).find("bad.csv:2:"), std::string::npos);
  EXPECT_EQ(ssf_field_load(nullptr, &f), SSF_ERR_USAGE);
}

TEST(CApiTest, ConfigErrorsWriteNothing) {
  TempDir dir("cfg");
  const std::string out = dir.str("out");
  EXPECT_EQ(ssf_run_correct("{not json", out.c_str()), SSF_ERR_CONFIG);
  const std::string missing = R"({"task": "tmp2m_34w", "model": "dynpp", "obs": ")" +
                              dir.str("nope.csv") + R"(", "archive": ")" + dir.str("nope2.csv") +
                              R"(", "climatology_base": [2000, 2002], "eval_start": "2003-01-01",
                                 "eval_end": "2003-02-01"})";
  const ssf_status s = ssf_run_correct(missing.c_str(), out.c_str());
  EXPECT_EQ(ssf_exit_code(s), 2);
  EXPECT_NE(std::string(ssf_last_error()).find("nope.csv"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(ssf_run_generate(R"({"scenario": {"grid_rows": 2}, "colour": 1})", out.c_str()),
            SSF_ERR_CONFIG);
  EXPECT_NE(std::string(ssf_last_error()).find("colour"), std::string::npos);
  EXPECT_EQ(ssf_run_generate(R"({"scenario": {"rho": 3}})", out.c_str()), SSF_ERR_CONFIG);
  EXPECT_FALSE(fs::exists(out));
}

TEST(CliTest, UsageErrorsExitTwo) {
  TempDir dir("cli");
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("generate --out " + dir.str("o")), 2);
  EXPECT_EQ(run("generate --config " + dir.str("none.json") + " --out " + dir.str("o")), 2);
  spit(dir.path() / "c.json",
       R"({"task": "tmp2m_34w", "obs": "missing.csv", "archive": "missing.csv",
           "climatology_base": [2000, 2002], "eval_start": "2003-01-01", "eval_end": "2003-02-01"})");
  EXPECT_EQ(run("correct --config " + dir.str("c.json") + " --out " + dir.str("o") + " --model abc"), 2);
  EXPECT_EQ(run("correct --config " + dir.str("c.json") + " --out " + dir.str("o") + " --model nn"), 2);
  EXPECT_EQ(run("evaluate --config " + dir.str("c.json") + " --out " + dir.str("o") + " --model abc"), 2);
  EXPECT_EQ(run("generate --config " + dir.str("c.json") + " --out " + dir.str("o") + " --jobs 0"), 2);
  EXPECT_FALSE(fs::exists(dir.path() / "o"));
  EXPECT_EQ(run("--version"), 0);
}

void run_demo(const fs::path& work) {
  for (const char* cfg : {"generate.json", "correct_abc.json", "correct_opdebias.json",
                          "evaluate.json", "explain.json"}) {
    fs::copy_file(fs::path(SUBSEAS_DEMO_DIR) / cfg, work / cfg);
  }
  const std::string w = work.string() + "/";
  ASSERT_EQ(run("generate --config " + w + "generate.json --out " + w + "scenario"), 0);
  ASSERT_EQ(run("correct --config " + w + "correct_abc.json --out " + w + "abc"), 0);
  ASSERT_EQ(run("correct --config " + w + "correct_opdebias.json --out " + w + "opdebias"), 0);
  ASSERT_EQ(run("evaluate --config " + w + "evaluate.json --out " + w + "eval"), 0);
  ASSERT_EQ(run("explain --config " + w + "explain.json --out " + w + "explain"), 0);
}

TEST(CliTest, DemoIsDeterministicAndMatchesGoldens) {
  TempDir a("demo-a"), b("demo-b");
  run_demo(a.path());
  run_demo(b.path());
  const auto ta = tree(a.path()), tb = tree(b.path());
  ASSERT_EQ(ta.size(), tb.size());
  for (const auto& [name, bytes] : ta) EXPECT_TRUE(tb.at(name) == bytes) << name;

  const fs::path golden = fs::path(SUBSEAS_DEMO_DIR) / "golden";
  EXPECT_EQ(ta.at("eval/summary.json"), slurp(golden / "summary.json"));
  EXPECT_EQ(ta.at("explain/explain.json"), slurp(golden / "explain.json"));
  std::ifstream sums(golden / "checksums.txt");
  std::string hex, name;
  size_t n = 0;
  while (sums >> hex >> name) {
    ASSERT_TRUE(ta.count(name)) << name;
    EXPECT_EQ(std::stoull(hex, nullptr, 16), fnv1a(ta.at(name))) << name;
    ++n;
  }
  EXPECT_EQ(n, ta.size() - 5);  // configs are inputs, not outputs

  // Seed override changes the scenario, jobs does not.
  TempDir c("demo-c");
  fs::copy_file(fs::path(SUBSEAS_DEMO_DIR) / "generate.json", c.path() / "generate.json");
  const std::string w = c.path().string() + "/";
  ASSERT_EQ(run("generate --config " + w + "generate.json --out " + w + "s4 --jobs 4"), 0);
  ASSERT_EQ(run("generate --config " + w + "generate.json --out " + w + "s9 --seed 9"), 0);
  EXPECT_EQ(slurp(c.path() / "s4/obs.csv"), ta.at("scenario/obs.csv"));
  EXPECT_NE(slurp(c.path() / "s9/obs.csv"), ta.at("scenario/obs.csv"));
}

}  // namespace
