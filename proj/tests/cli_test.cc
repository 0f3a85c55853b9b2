// Copyright 2026 The PixelRL Authors. All Rights Reserved.
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef PIXELRL_CLI_PATH
#error "PIXELRL_CLI_PATH must name the pixelrl executable"
#endif

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(PIXELRL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pixelrl_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("train --synthetic 2 --episodes zero"), 1);
  EXPECT_EQ(run("--task deblur train --synthetic 2"), 1);
  EXPECT_EQ(run("train --synthetic 2 --set nonsense=1"), 1);
}

TEST(CliTest, DataErrorsExitTwo) {
  const fs::path dir = scratch("data");
  EXPECT_EQ(run("train --data " + (dir / "absent").string()), 2);
  EXPECT_EQ(run("eval --synthetic 1 --model " + (dir / "absent.pxrl").string()), 2);
  std::ofstream(dir / "bad.cfg") << "episodes 3\n";
  EXPECT_EQ(run("--config " + (dir / "bad.cfg").string() + " train --synthetic 1"), 2);
}

TEST(CliTest, TrainEvalVisualizeRoundTrip) {
  const fs::path dir = scratch("flow");
  const std::string common = "--seed 2 --out " + (dir / "run").string();
  ASSERT_EQ(run(common + " train --synthetic 2 --synthetic-size 24 --episodes 2 --batch 1"
                         " --crop 16 --width 4 --gru false"),
            0);
  const std::string model = (dir / "run" / "model.pxrl").string();
  ASSERT_TRUE(fs::exists(model));
  EXPECT_TRUE(fs::exists(dir / "run" / "metrics.csv"));
  EXPECT_EQ(run("--out " + (dir / "eval").string() +
                " eval --synthetic 2 --synthetic-size 16 --model " + model),
            0);
  EXPECT_TRUE(fs::exists(dir / "eval" / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "eval" / "actions.csv"));
  EXPECT_EQ(run("--task denoise_sp --out " + (dir / "eval2").string() +
                " eval --synthetic 1 --model " + model),
            2);
  EXPECT_EQ(run("--out " + (dir / "vis").string() + " visualize --synthetic 1 --model " +
                model),
            0);
  EXPECT_TRUE(fs::exists(dir / "vis" / "legend.txt"));
}

TEST(CliTest, VerifyPasses) { EXPECT_EQ(run("verify --returns --optimality"), 0); }

}  // namespace
