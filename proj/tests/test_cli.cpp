// End-to-end checks of the pinnbench binary: exit codes, overrides, and
// cross-process determinism of the results CSV.

#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pinn/evaluation.hpp"
#include "pinn/samplers.hpp"

namespace fs = std::filesystem;

namespace {

int run_tool(const std::string& args) {
  const std::string cmd = std::string(PINNBENCH_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "pinn_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_tiny_config(const fs::path& dir, const std::string& out_dir) {
  const fs::path path = dir / "tiny.json";
  std::ofstream out(path);
  out << R"({
    "problem": "burgers",
    "net": {"hidden": [6]},
    "points": {"n_r": 32, "n_bc": 8, "n_ic": 8},
    "schedule": {"blocks": 1, "adam_iters": 30, "lbfgs_iters": 5, "resample_period": 10},
    "sampler": {"kind": "pacmann", "optimizer": "adam", "stepsize": 1e-4, "num_steps": 2},
    "seeds": [3, 4],
    "log_every": 10,
    "output_dir": ")"
      << out_dir << R"("
  })";
  return path.string();
}

std::string strip_wall_time_column(const std::string& csv_path) {
  std::ifstream in(csv_path);
  std::stringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    out << line.substr(0, last_comma) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("missing config file exits with code 2") {
  CHECK(run_tool("run --config /definitely/not/here.json") == 2);
}

TEST_CASE("config with unknown keys exits with code 2") {
  const fs::path dir = work_dir();
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"problem": "burgers", "turbo": true})";
  CHECK(run_tool("run --config " + bad.string()) == 2);
}

TEST_CASE("seed override changes exactly the seed field") {
  const fs::path dir = work_dir();
  const std::string out_dir = (dir / "seed_override").string();
  const std::string config = write_tiny_config(dir, out_dir);
  REQUIRE(run_tool("run --config " + config + " --seed 7") == 0);
  auto records = pinn::read_results_csv(out_dir + "/results.csv");
  REQUIRE(records.size() == 1);
  CHECK(records[0].seed == 7);
  CHECK(records[0].n_collocation == 32);  // everything else untouched
  CHECK(records[0].stepsize == 1e-4);
}

TEST_CASE("two invocations produce identical results apart from wall time") {
  const fs::path dir = work_dir();
  const std::string out_a = (dir / "det_a").string();
  const std::string out_b = (dir / "det_b").string();
  const std::string config = write_tiny_config(dir, out_a);
  REQUIRE(run_tool("run --config " + config) == 0);
  REQUIRE(run_tool("run --config " + config + " --out " + out_b) == 0);
  CHECK(strip_wall_time_column(out_a + "/results.csv") ==
        strip_wall_time_column(out_b + "/results.csv"));
}

TEST_CASE("snapshots command rederives the per-event point clouds") {
  const fs::path dir = work_dir();
  const std::string out_dir = (dir / "snaps").string();
  const std::string config = write_tiny_config(dir, out_dir);
  REQUIRE(run_tool("run --config " + config) == 0);
  REQUIRE(run_tool("snapshots --run " + out_dir) == 0);

  // one initial snapshot plus one per resampling event
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(out_dir + "/snapshots"))
    files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() == 1 + 1 * (30 / 10));

  // the first snapshot is the initial Hammersley layout, inside the box
  long iteration = -1;
  auto first = pinn::read_point_cloud_csv(files.front().string(), &iteration);
  CHECK(iteration == 0);
  const pinn::DomainBox box{{-1.0, 0.0}, {1.0, 1.0}};
  auto expected = pinn::hammersley(32, box);
  CHECK(first.points == expected.points);
  for (const auto& file : files) {
    auto cloud = pinn::read_point_cloud_csv(file.string());
    cloud.validate(box);
  }
}

TEST_CASE("gendata writes a deterministic observation set") {
  const fs::path dir = work_dir();
  const std::string a = (dir / "obs_a.csv").string();
  const std::string b = (dir / "obs_b.csv").string();
  REQUIRE(run_tool("gendata --problem navier_stokes --out " + a + " --seed 5 --rows 200") == 0);
  REQUIRE(run_tool("gendata --problem navier_stokes --out " + b + " --seed 5 --rows 200") == 0);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(sa.rfind("t,x,y,u,v,p\n", 0) == 0);
  CHECK(std::count(sa.begin(), sa.end(), '\n') == 201);
}
