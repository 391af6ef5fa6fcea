// Copyright 2026 The awrs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <awrs/errors.hpp>
#include <awrs/harness.hpp>
#include <awrs/oracle.hpp>
#include <awrs/run.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome in_process(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = awrs::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary through the shell so the real exit status is observed.
Outcome spawn(const std::string& args) {
  const std::string cmd = std::string{AWRS_CLI_PATH} + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
    out.append(buf, n);
  }
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("awrs_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in{p, std::ios::binary};
  return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

std::map<std::string, double> posterior(const json& j) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.at("posterior_estimate").items()) {
    out[k] = v.get<double>();
  }
  return out;
}

TEST(Generate, TwoSymbolSmcAwrs) {
  const auto r = spawn("generate --model example-a1 --language '{aa,ba}' --method smc-awrs --n 10000 --seed 7");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("posterior_estimate").at("aa").get<double>(), 0.083, 0.01);
  EXPECT_NEAR(j.at("posterior_estimate").at("ba").get<double>(), 0.917, 0.01);
  EXPECT_EQ(j.at("sampler"), "awrs");
  EXPECT_TRUE(j.contains("wall_time"));
  std::uint64_t sum = 0;
  for (const auto& x : j.at("eval_counts").at("per_step")) {
    sum += x.get<std::uint64_t>();
  }
  EXPECT_EQ(sum, j.at("eval_counts").at("total").get<std::uint64_t>());
}

TEST(Generate, LmMethodHasUnitWeights) {
  const auto r = in_process({"generate", "--method", "lm", "--n", "50", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("g_hat").get<double>(), 1.0);
  for (const auto& [s, e] : j.at("ensemble").items()) {
    EXPECT_DOUBLE_EQ(e.at("weight").get<double>(), e.at("count").get<double>());
  }
}

TEST(Generate, LcdMaskAndArsAgree) {
  const auto a = in_process({"generate", "--method", "lcd-mask", "--language", "{aa,ba,ab}", "--n", "100000",
                             "--seed", "1"});
  const auto b = in_process({"generate", "--method", "lcd-ars", "--language", "{aa,ba,ab}", "--n", "100000",
                             "--seed", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_LT(awrs::total_variation(posterior(json::parse(a.out)), posterior(json::parse(b.out))), 0.01);
}

TEST(Generate, IsDeterministicAcrossWorkers) {
  const std::vector<std::string> base{"generate", "--method", "smc-awrs", "--language", "{aa,ba}", "--n", "500",
                                      "--seed", "11"};
  auto one = json::parse(in_process(base).out);
  auto args = base;
  args.insert(args.end(), {"--workers", "3"});
  auto three = json::parse(in_process(args).out);
  one.erase("wall_time");
  three.erase("wall_time");
  EXPECT_EQ(one, three);
}

TEST(Generate, WritesToFileAndReadsDescriptor) {
  const auto dir = scratch("descriptor");
  const auto desc = dir / "run.json";
  std::ofstream{desc} << R"({"model": "example-a1", "language": "{aa,ba}", "method": "smc-awrs",
                           "sampler": "cawrs", "theta0": 0.4, "theta1": 0.8, "N": 2000, "seed": 5})";
  const auto out = dir / "result.json";
  const auto r = in_process({"generate", "--config", desc.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(out));
  EXPECT_EQ(j.at("sampler"), "cawrs");
  EXPECT_EQ(j.at("num_particles"), 2000);
  EXPECT_NEAR(j.at("posterior_estimate").at("aa").get<double>(), 0.083, 0.03);
}

TEST(ExitCodes, ConfigErrors) {
  EXPECT_EQ(spawn("").code, 2);
  EXPECT_EQ(spawn("generate --method bogus").code, 2);
  EXPECT_EQ(spawn("generate --method smc-twist --language '{aa}' --theta0 0.3").code, 2);
  EXPECT_EQ(spawn("generate --n 0").code, 2);
  EXPECT_EQ(spawn("generate --model /nonexistent/model.json").code, 2);
  EXPECT_EQ(spawn("generate --sampler nope").code, 2);
  EXPECT_EQ(spawn("generate --no-such-flag").code, 2);
  EXPECT_EQ(spawn("experiment nope").code, 2);
}

TEST(ExitCodes, InferenceFailure) {
  const auto r = in_process({"generate", "--method", "smc-awrs", "--language", "{ab}", "--max-steps", "1",
                             "--n", "10"});
  EXPECT_EQ(r.code, 3);
  const auto j = json::parse(r.err);
  EXPECT_EQ(j.at("error"), "AllDead");
  EXPECT_EQ(spawn("generate --method sample-verify --language '{aa}' --n 5 --seed 1").code, 3);
}

TEST(Experiment, HeatmapByteIdenticalOnRepeat) {
  const auto d1 = scratch("heatmap1");
  const auto d2 = scratch("heatmap2");
  const std::string common = "experiment heatmap --vocab 10 --dense --runs 50 --seed 4 --out-dir ";
  ASSERT_EQ(spawn(common + d1.string()).code, 0);
  ASSERT_EQ(spawn(common + d2.string() + " --workers 2").code, 0);
  const auto a = slurp(d1 / "heatmap_dense.csv");
  EXPECT_EQ(a, slurp(d2 / "heatmap_dense.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), awrs::kCsvHeader);
  const auto meta = json::parse(slurp(d1 / "heatmap_dense.meta.json"));
  EXPECT_EQ(meta.at("experiment"), "heatmap_dense");
  EXPECT_TRUE(meta.contains("grids"));
}

TEST(Experiment, BiasAndVariance) {
  const auto dir = scratch("bias");
  const auto b = in_process({"experiment", "bias", "--vocab", "50", "--instances", "5", "--n-grid", "10,100",
                             "--seed", "1", "--out-dir", dir.string()});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(fs::exists(dir / "bias.csv"));
  const auto v = in_process({"experiment", "variance", "--vocab", "50", "--instances", "5", "--runs", "100",
                             "--seed", "1", "--out-dir", dir.string()});
  ASSERT_EQ(v.code, 0) << v.err;
  EXPECT_TRUE(fs::exists(dir / "variance.csv"));
  EXPECT_NEAR(json::parse(v.out).at("success_rate").get<double>(), 1.0, 0.0);
}

TEST(Experiment, OutputDirFromEnvironment) {
  const auto dir = scratch("env");
  ::setenv("AWRS_OUTPUT_DIR", dir.c_str(), 1);
  const auto r = in_process({"experiment", "heatmap", "--vocab", "10", "--runs", "5"});
  ::unsetenv("AWRS_OUTPUT_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "heatmap.csv"));
}

TEST(Descriptor, ValidationIsPerMethod) {
  awrs::cli::GenerateConfig c;
  c.language = "{aa,ba}";
  EXPECT_NO_THROW(awrs::cli::validate(c));
  c.budget = 3;
  EXPECT_THROW(awrs::cli::validate(c), awrs::ConfigError);
  c.sampler = "cwrs";
  EXPECT_NO_THROW(awrs::cli::validate(c));
  c.method = "lcd-ars";
  EXPECT_THROW(awrs::cli::validate(c), awrs::ConfigError);
  EXPECT_THROW((void)awrs::cli::parse_run_descriptor(json{{"N", "many"}}), std::exception);
}

}  // namespace
