// Copyright 2026 The dimbook Authors
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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace dimbook {
namespace {

namespace fs = std::filesystem;

struct Run {
  int status = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.status = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dimbook-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string model() const { return testing::acme_model_path().string(); }
  fs::path dir_;
};

TEST_F(Cli, Check) {
  const auto ok = run({"check", model()});
  EXPECT_EQ(ok.status, cli::kOk) << ok.err;
  EXPECT_NE(ok.out.find("0 errors, 0 warnings"), std::string::npos);

  const auto json = run({"check", model(), "--json"});
  EXPECT_EQ(json.status, cli::kOk);
  EXPECT_TRUE(nlohmann::json::parse(json.out)["diagnostics"].empty());

  write_file(path("bad.dsm"), "dimension D initial D { a \"A\" }\ncalc \"X\" over D = [Y]\n");
  const auto bad = run({"check", path("bad.dsm")});
  EXPECT_EQ(bad.status, cli::kDiagnostics);
  EXPECT_NE((bad.out + bad.err).find("unresolved-reference"), std::string::npos);

  EXPECT_EQ(run({"check", path("missing.dsm")}).status, cli::kUsageOrIo);
}

TEST_F(Cli, Usage) {
  EXPECT_EQ(run({}).status, cli::kUsageOrIo);
  EXPECT_EQ(run({"frobnicate"}).status, cli::kUsageOrIo);
  EXPECT_EQ(run({"compile", model()}).status, cli::kUsageOrIo);
  EXPECT_EQ(run({"compile", model(), "-o", path("a.xlsx"), "--tol", "-1"}).status,
            cli::kUsageOrIo);
  EXPECT_EQ(run({"--help"}).status, cli::kOk);
}

TEST_F(Cli, CompileWritesWorkbookAndView) {
  const auto r = run({"compile", model(), "-o", path("acme.xlsx"), "--formula-view",
                      path("acme.view")});
  ASSERT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_EQ(read_file(path("acme.xlsx")).substr(0, 2), "PK");
  EXPECT_EQ(read_file(path("acme.view")), render_formula_view(testing::acme().workbook));

  write_file(path("bad.cfg"), "report \"Nope\"\n");
  EXPECT_EQ(run({"compile", model(), "-o", path("b.xlsx"), "--report", path("bad.cfg")}).status,
            cli::kUsageOrIo);
  EXPECT_FALSE(fs::exists(path("b.xlsx")));
  EXPECT_EQ(run({"compile", model(), "-o", path("no-such-dir/c.xlsx")}).status, cli::kUsageOrIo);
}

TEST_F(Cli, VerifyDetectsTamperedWorkbook) {
  ASSERT_EQ(run({"compile", model(), "-o", path("acme.xlsx"), "--formula-view",
                 path("acme.view")})
                .status,
            cli::kOk);
  const auto good = run({"verify", model(), "--workbook", path("acme.view")});
  EXPECT_EQ(good.status, cli::kOk) << good.out << good.err;
  EXPECT_NE(good.out.find("PASS"), std::string::npos);

  std::string view = read_file(path("acme.view"));
  const std::string from = "=SUMIF(8:8,9:9,7:7)";
  view.replace(view.find(from), from.size(), "=SUMIF(8:8,9:9,7:7)*1.01");
  write_file(path("tampered.view"), view);
  const auto bad = run({"verify", model(), "--workbook", path("tampered.view"), "--json"});
  EXPECT_EQ(bad.status, cli::kVerificationFailed);
  EXPECT_EQ(nlohmann::json::parse(bad.out)["passed"], false);

  EXPECT_EQ(run({"verify", model()}).status, cli::kOk);
  EXPECT_EQ(run({"verify", model(), "--workbook", path("none.view")}).status, cli::kUsageOrIo);
}

TEST_F(Cli, Eval) {
  const auto r = run({"eval", model(), "--var", "Price", "--csv"});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 9);
  EXPECT_NE(r.out.find("G,D,121.8"), std::string::npos);
  EXPECT_EQ(run({"eval", model()}).status, cli::kOk);
  EXPECT_EQ(run({"eval", model(), "--var", "Nope"}).status, cli::kUsageOrIo);
}

TEST_F(Cli, Impact) {
  const auto r = run({"impact", model(), "--dimension", "Sector", "--add", "1"});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_NE(r.out.find("480 -> 600"), std::string::npos);
  const auto j = run({"impact", model(), "--dimension", "Region", "--remove", "E", "--json"});
  EXPECT_EQ(j.status, cli::kOk);
  EXPECT_EQ(nlohmann::json::parse(j.out)["new_members"], 4);
  EXPECT_EQ(run({"impact", model(), "--dimension", "Colour", "--add", "1"}).status,
            cli::kUsageOrIo);
  EXPECT_EQ(run({"impact", model(), "--dimension", "Region", "--remove", "Q"}).status,
            cli::kUsageOrIo);
  EXPECT_EQ(run({"impact", model(), "--dimension", "Region"}).status, cli::kUsageOrIo);
  EXPECT_EQ(
      run({"impact", model(), "--dimension", "Region", "--add", "1", "--remove", "E"}).status,
      cli::kUsageOrIo);
}

}  // namespace
}  // namespace dimbook
