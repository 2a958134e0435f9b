#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "aslpv/builtin_examples.h"
#include "aslpv/io.h"
#include "aslpv/simulation.h"

namespace aslpv {
namespace {

namespace fs = std::filesystem;

const std::string kData = ASLPV_DATA_DIR;
const std::string kExample1 = kData + "/models/example1.json";
const std::string kExample2 = kData + "/models/example2.json";
const std::string kExample3 = kData + "/models/example3.json";
const std::string kSchedP = kData + "/scheduling/p.json";

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("aslpv_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    fs::create_directories(dir_);
    unsetenv(cli::kSeedEnv);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_model(const std::string& name, const AsLpvSsa& s) {
    write_text_file(path(name), model_to_json(s, {1.0, 0.75}).dump(2));
    return path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"validate"}).code, 2);
  EXPECT_EQ(run({"validate", "--model", path("missing.json")}).code, 2);
  write_text_file(path("bad.json"), "{\"pdim\": 2,");
  EXPECT_EQ(run({"validate", "--model", path("bad.json")}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kExample3, "--scheduling", kSchedP, "--T", "0",
                 "--out", path("t.csv")})
                .code,
            2);
  EXPECT_EQ(run({"psi", "--model", kExample3, "--words", "13"}).code, 2);
  EXPECT_EQ(run({"reproduce", "4"}).code, 2);
}

TEST_F(CliTest, ValidateReportsStability) {
  EXPECT_EQ(run({"validate", "--model", kExample1, "--scheduling", kSchedP}).code, 0);
  AsLpvSsa s = examples::system(3);
  s.A = {2.0 * Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2)};
  const CliResult r = run({"--json", "validate", "--model", write_model("unstable.json", s)});
  EXPECT_EQ(r.code, 1);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["ms_stable"], false);
}

TEST_F(CliTest, CheckFlags) {
  const CliResult ex3 = run({"--json", "check", "--model", kExample3});
  EXPECT_EQ(ex3.code, 0);
  const Json j = Json::parse(ex3.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_FALSE(ex3.out.empty());
  EXPECT_EQ(run({"check", "--model", kExample2, "--stably-invertable"}).code, 1);
  EXPECT_EQ(run({"check", "--model", kExample2, "--minimal"}).code, 0);

  AsLpvSsa blind = examples::system(3);
  blind.C.setZero();
  const CliResult r = run({"--json", "check", "--model", write_model("blind.json", blind),
                     "--minimal"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("false"), std::string::npos);
}

TEST_F(CliTest, MinimizeRoundTrip) {
  const std::string out = path("min.json");
  const CliResult r = run({"minimize", "--model", kExample1, "--algorithm", "assoc", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const ModelDocument doc = model_from_json(read_json_file(out));
  EXPECT_EQ(doc.system.n(), 2);
  ASSERT_TRUE(doc.provenance.has_value());
  EXPECT_EQ((*doc.provenance)["n_input"], 3);
  EXPECT_EQ((*doc.provenance)["n_min"], 2);
  EXPECT_EQ((*doc.provenance)["input_sha256"],
            sha256_hex(read_text_file(kExample1)));
  EXPECT_EQ(run({"check", "--model", out}).code, 0);

  const std::string out2 = path("min2.json");
  EXPECT_EQ(run({"minimize", "--model", out, "--algorithm", "stable-inv",
                 "--recompute-noise", "--out", out2})
                .code,
            0);
  EXPECT_EQ(model_from_json(read_json_file(out2)).system.n(), 2);
  EXPECT_EQ(run({"minimize", "--model", kExample2, "--algorithm", "stable-inv", "--out",
                 path("no.json")})
                .code,
            1);
}

TEST_F(CliTest, SimulateIsByteReproducible) {
  const std::vector<std::string> base{"simulate", "--model",  kExample3, "--scheduling",
                                      kSchedP,    "--T",      "1000",    "--seed",
                                      "42"};
  auto with_out = [&](const std::string& name) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(path(name));
    return args;
  };
  ASSERT_EQ(run(with_out("a.csv")).code, 0);
  ASSERT_EQ(run(with_out("b.csv")).code, 0);
  const std::string a = read_text_file(path("a.csv"));
  EXPECT_EQ(a, read_text_file(path("b.csv")));

  const SchedulingSpec spec = examples::scheduling();
  const Trajectory expected = simulate(examples::system(3), spec,
                                       gen_scheduling(spec, 1000, 42), derive_seed(42, 2));
  EXPECT_EQ(a, trajectory_to_csv(expected));

  const Json sidecar = read_json_file(path("a.csv") + ".json");
  EXPECT_EQ(sidecar["T"], 1000);
  EXPECT_EQ(sidecar["seed"], 42);
  EXPECT_EQ(sidecar["model_sha256"], sha256_hex(read_text_file(kExample3)));

  setenv(cli::kSeedEnv, "42", 1);
  std::vector<std::string> env_args(base.begin(), base.end() - 2);
  env_args.push_back("--out");
  env_args.push_back(path("c.csv"));
  ASSERT_EQ(run(env_args).code, 0);
  EXPECT_EQ(read_text_file(path("c.csv")), a);
}

TEST_F(CliTest, SimulateRequiresScheduling) {
  EXPECT_EQ(run({"simulate", "--model", kExample3, "--T", "10", "--out", path("x.csv")}).code,
            2);
}

TEST_F(CliTest, PsiModelAndTrajectory) {
  const CliResult eps = run({"--json", "psi", "--model", kExample3, "--words", "e"});
  ASSERT_EQ(eps.code, 0) << eps.err;
  const Json j = Json::parse(eps.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_NE(eps.out.find("1.0"), std::string::npos);

  ASSERT_EQ(run({"simulate", "--model", kExample3, "--scheduling", kSchedP, "--T", "20000",
                 "--out", path("t.csv")})
                .code,
            0);
  const CliResult cmp = run({"--json", "psi", "--model", kExample3, "--trajectory", path("t.csv"),
                       "--max-len", "2"});
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  const Json c = Json::parse(cmp.out);
  EXPECT_TRUE(c.contains("max_abs_z"));

  // Without a sidecar the scheduling must be supplied explicitly.
  fs::copy_file(path("t.csv"), path("bare.csv"));
  EXPECT_EQ(run({"psi", "--trajectory", path("bare.csv"), "--words", "1"}).code, 2);
  EXPECT_EQ(run({"psi", "--trajectory", path("bare.csv"), "--scheduling", kSchedP,
                 "--words", "1"})
                .code,
            0);
}

TEST_F(CliTest, JsonErrorsCarrySchemaVersion) {
  write_text_file(path("bad.json"), "[]");
  const CliResult r = run({"--json", "validate", "--model", path("bad.json")});
  EXPECT_EQ(r.code, 2);
  const Json j = Json::parse(r.out.empty() ? r.err : r.out);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["ok"], false);
  EXPECT_EQ(j["exit_code"], 2);
}

TEST_F(CliTest, ReproduceExampleThree) {
  const CliResult r = run({"reproduce", "3", "--T", "20000"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("example 3: PASS"), std::string::npos);
}

}  // namespace
}  // namespace aslpv
