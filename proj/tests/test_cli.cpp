#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rtsa/cli.hpp"

using namespace rtsa;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rtsa");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_cfg(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rtsa_cli_" + name);
  fs::remove_all(p);
  return p;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("check passes for the built-in problems under both noise models") {
  const auto dir = scratch("check");
  for (const char* problem : {"linear", "cubic", "convex_potential"})
    for (const char* noise : {"additive", "state_scaled"}) {
      CAPTURE(problem);
      CAPTURE(noise);
      const auto p = write_cfg(dir, "c.cfg",
                               std::string("problem = ") + problem + "\ndim = 2\nnoise.kind = " + noise + "\n");
      const auto r = cli({"check", "--config", p.string()});
      CHECK(r.code == 0);
      CHECK(contains(r.out, "H1  pass"));
      CHECK(contains(r.out, "H2  pass"));
      CHECK(contains(r.out, "H3  pass"));
    }
  fs::remove_all(dir);
}

TEST_CASE("check flags the repulsive field") {
  const auto r = cli({"check", "--config", std::string(RTSA_TEST_DATA_DIR) + "/repulsive_check.cfg"});
  CHECK(r.code == 3);
  CHECK(contains(r.out, "H1  FAIL"));
  CHECK(contains(r.out, "violation at x = ("));
}

TEST_CASE("usage and config errors exit 1") {
  auto r = cli({"run", "--config", "/no/such/file.cfg"});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "/no/such/file.cfg"));
  r = cli({"run", "--config", "x.cfg", "--frobnicate"});
  CHECK(r.code == 1);
  r = cli({});
  CHECK(r.code == 1);

  const auto dir = scratch("bad");
  const auto p = write_cfg(dir, "bad.cfg", "gain.alpha = 0.4\n");
  r = cli({"check", "--config", p.string()});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "gain.alpha must be in (0.5, 1]"));
  fs::remove_all(dir);
}

TEST_CASE("run, report and compare") {
  const auto dir = scratch("run");
  const auto cfg = write_cfg(dir, "c.cfg",
                             "problem = cubic\nn_trajectories = 8\nn_steps = 2000\nrecord = thinned\n"
                             "diagnostics.tolerances = 0.1, 0.5\n");
  const auto out = dir / "out";
  auto r = cli({"run", "--config", cfg.string(), "--out", out.string(), "--workers", "2", "--seed", "9"});
  REQUIRE(r.code == 0);
  for (const char* f : {"summary.csv", "timings.csv", "ensemble.json", "manifest.json", "traces/traj_7.csv"})
    CHECK(fs::exists(out / f));
  std::ifstream manifest(out / "manifest.json");
  std::stringstream ms;
  ms << manifest.rdbuf();
  CHECK(contains(ms.str(), "master_seed = 9\\n"));

  r = cli({"report", "--in", out.string(), "--tol", "0.1,0.5"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "0.1"));

  r = cli({"report", "--in", (dir / "missing").string()});
  CHECK(r.code == 2);

  const auto paired = dir / "paired";
  r = cli({"compare", "--config", cfg.string(), "--out", paired.string()});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "paired comparison"));
  CHECK(fs::exists(paired / "traces" / "traj_0_rm.csv"));
  fs::remove_all(dir);
}
