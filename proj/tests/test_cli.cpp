#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "tnlab/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tnlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = tnlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const json& check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"]) {
    if (c["name"] == name) return c;
  }
  ADD_FAILURE() << "no check " << name;
  static const json missing;
  return missing;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tnlab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, VerifyAmbientSphere) {
  const Outcome o = run_cli({"verify", "--geometry", "sphere", "--suite", "ambient", "--samples", "1000",
                             "--seed", "42"});
  EXPECT_EQ(o.code, tnlab::cli::kExitPass) << o.err;
  const json r = o.report();
  EXPECT_EQ(r["schema"], 1);
  EXPECT_TRUE(r["pass"].get<bool>());
  ASSERT_FALSE(r["checks"].empty());
  for (const auto& c : r["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c.dump();
    EXPECT_TRUE(c.contains("value"));
    EXPECT_TRUE(c.contains("tolerance"));
  }
}

TEST(Cli, TorusResidualOnBandedGrid) {
  const Outcome o = run_cli({"family", "--geometry", "sphere", "--B2", "1", "--C2", "0", "--task", "residual",
                             "--grid", "64x64", "--exclude", "1.0:0.05"});
  EXPECT_EQ(o.code, tnlab::cli::kExitPass) << o.err;
  const json r = o.report();
  bool found = false;
  for (const auto& c : r["checks"]) {
    if (c["name"].get<std::string>().find("residual") != std::string::npos) {
      found = true;
      EXPECT_LE(c["value"].get<double>(), 1e-6);
      EXPECT_EQ(c["tolerance"].get<double>(), 1e-6);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, ExportWritesObjUnderOutputDir) {
  const fs::path dir = scratch_dir("export");
  setenv("TNLAB_OUTPUT_DIR", dir.c_str(), 1);
  const Outcome o = run_cli({"export", "--B2", "1", "--C2", "0", "--format", "obj", "--out", "torus.obj"});
  unsetenv("TNLAB_OUTPUT_DIR");
  EXPECT_EQ(o.code, tnlab::cli::kExitPass) << o.err;
  ASSERT_TRUE(fs::exists(dir / "torus.obj"));
  std::ifstream f(dir / "torus.obj");
  std::string line;
  int v = 0, faces = 0;
  while (std::getline(f, line)) {
    v += line.rfind("v ", 0) == 0;
    faces += line.rfind("f ", 0) == 0;
  }
  EXPECT_EQ(v, 2 * 32 * 32);
  EXPECT_EQ(faces, 31 * 32);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({"verify", "--suite", "bogus"}).code, tnlab::cli::kExitConfig);
  EXPECT_EQ(run_cli({"residual", "--grid", "0x5"}).code, tnlab::cli::kExitConfig);
  EXPECT_EQ(run_cli({"export", "--B2", "1", "--C2", "-3"}).code, tnlab::cli::kExitConfig);
  EXPECT_EQ(run_cli({"verify", "--suite", "ambient", "--samples", "5", "--tol", "nope=1"}).code,
            tnlab::cli::kExitConfig);
  EXPECT_EQ(run_cli({"nosuchcommand"}).code, tnlab::cli::kExitConfig);
  EXPECT_EQ(run_cli({"export", "--B2", "1", "--C2", "0", "--out", "/proc/tnlab-unwritable/t.obj"}).code,
            tnlab::cli::kExitIo);
  EXPECT_EQ(run_cli({"--help"}).code, tnlab::cli::kExitPass);
}

// An impossible tolerance makes a passing check fail: exit 1, and the report
// records the override.
TEST(Cli, ToleranceOverride) {
  const Outcome o = run_cli({"family", "--geometry", "sphere", "--B2", "1", "--C2", "0", "--task", "profile",
                             "--tol", "min_psi=1e9"});
  EXPECT_EQ(o.code, tnlab::cli::kExitCheckFailed) << o.out << o.err;
  const json report = o.report();
  const json& c = check(report, "min_psi");
  EXPECT_EQ(c["tolerance"].get<double>(), 1e9);
  EXPECT_FALSE(c["pass"].get<bool>());
}

TEST(Cli, ConfigFileWithFlagPrecedence) {
  const fs::path dir = scratch_dir("config");
  const fs::path ini = dir / "run.ini";
  {
    std::ofstream f(ini);
    f << "[family]\ngeometry=flat\nA2=1\nB2=0\ntask=area\ngrid=8x8\nr-min=0.5\nr-max=1.5\n";
  }
  const Outcome a = run_cli({"--config", ini.string(), "family"});
  EXPECT_EQ(a.code, tnlab::cli::kExitPass) << a.out << a.err;
  const json ra = a.report();
  EXPECT_EQ(ra["config"]["geometry"], "flat");
  EXPECT_EQ(ra["config"]["task"], "area");
  EXPECT_EQ(ra["config"]["grid"]["size"], "8x8");

  const Outcome b = run_cli({"--config", ini.string(), "family", "--grid", "12x8"});
  EXPECT_EQ(b.code, tnlab::cli::kExitPass) << b.err;
  EXPECT_EQ(b.report()["config"]["grid"]["size"], "12x8");
}

TEST(Cli, ReportFileMatchesStdout) {
  const fs::path dir = scratch_dir("report");
  const fs::path path = dir / "r.json";
  const Outcome o = run_cli({"verify", "--suite", "lines3d", "--samples", "20", "--report", path.string()});
  EXPECT_EQ(o.code, tnlab::cli::kExitPass) << o.err;
  std::ifstream f(path);
  std::stringstream text;
  text << f.rdbuf();
  EXPECT_EQ(text.str(), o.out);
}

TEST(Cli, DeterministicReports) {
  const std::vector<std::string> args{"verify", "--suite", "all", "--samples", "20", "--seed", "7"};
  json a = run_cli(args).report();
  json b = run_cli(args).report();
  a.erase("timestamp");
  b.erase("timestamp");
  EXPECT_EQ(a.dump(), b.dump());
  json c = run_cli({"verify", "--suite", "all", "--samples", "20", "--seed", "8"}).report();
  c.erase("timestamp");
  EXPECT_NE(a.dump(), c.dump());
}
