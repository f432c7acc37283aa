#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "csynth/contracts/contracts.hpp"
#include "csynth/io/json.hpp"
#include "csynth/synthesis/synthesis.hpp"
#include "csynth/sysmodel/network.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace csynth;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CSYNTH_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 512> buf{};
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("csynth_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string config(const std::string& name) { return std::string(CSYNTH_SOURCE_DIR) + "/configs/" + name; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage and config errors exit with 2") {
  CHECK(run("synth --config /nonexistent/net.json").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("synth").code == 2);
  CHECK(run("synth --config " + config("case2.json") + " --method gradient").code == 2);
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{\"mode\": \"finite\", \"subsystems\": [}";
  CHECK(run("synth --config " + bad.string()).code == 2);
  std::ofstream(bad, std::ios::trunc) << R"({"mode": "infinite", "subsystems": [{"id": 0, "A": [[1]]}]})";
  CHECK(run("synth --config " + bad.string()).code == 2);
  CHECK(run("verify --result /nonexistent").code == 2);
  CHECK(run("bench --sizes 7").code == 2);
}

TEST_CASE("unsatisfiable instance exits with 1 and a hint") {
  const fs::path cfg = scratch("toy.json");
  std::ofstream(cfg) << R"({"mode": "infinite", "subsystems": [{"id": 0, "A": [[1]], "B": [[1]],
    "X": {"center": [0], "generators": [[1]]}, "U": {"center": [0], "generators": [[0.1]]},
    "D": {"center": [0], "generators": [[5]]}}]})";
  const fs::path out = scratch("toy_out");
  for (const char* method : {"compositional", "centralized"}) {
    const Run r = run("synth --config " + cfg.string() + " --method " + method + " --out " + out.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("increase k") != std::string::npos);
    const auto report = io::read_json_file(out / "report.json");
    CHECK(report.at("status").get<std::string>() == "failed");
  }
}

TEST_CASE("finite synthesis, verification and plot data") {
  const fs::path out = scratch("case2");
  const Run s = run("synth --config " + config("case2.json") + " --out " + out.string());
  REQUIRE(s.code == 0);
  CHECK(io::read_json_file(out / "report.json").at("status").get<std::string>() == "correct");

  const Run ver = run("verify --result " + out.string() + " --samples 200 --traj-csv " + (out / "traj.csv").string());
  CHECK(ver.code == 0);
  CHECK(io::read_json_file(out / "verify.json").at("violations").get<long long>() == 0);
  CHECK(fs::exists(out / "traj.csv"));

  const Run p = run("plotdata --result " + out.string() + " --what viable-sets");
  REQUIRE(p.code == 0);
  const auto net = sysmodel::load_network(out / "network.json");
  int files = 0;
  for (int i = 0; i < net.size(); ++i)
    for (int t = 0; t <= net.horizon; ++t) {
      const fs::path f = out / "plots" /
                         ("omega_" + std::to_string(net.subsystems[static_cast<std::size_t>(i)].id) + "_t" +
                          std::to_string(t) + ".csv");
      REQUIRE(fs::exists(f));
      ++files;
      std::istringstream in(read_file(f));
      std::string line;
      std::getline(in, line);
      CHECK(line == "x,y");
      while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const Eigen::Vector2d x(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        CHECK(oracle::zonogon_contains(net.X(i, t), x, 1e-6));
      }
    }
  CHECK(files == 3 * 16);

  // a single grid point is the potential at the result's parameters
  const Run g = run("plotdata --result " + out.string() + " --what potential-slice --dims 1:1,2:1 --grid 1");
  REQUIRE(g.code == 0);
  std::istringstream in(read_file(out / "plots" / "potential_slice.csv"));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const double v_cli = std::stod(line.substr(line.rfind(',') + 1));
  const auto tmpl = contracts::default_template(net);
  const auto res = synthesis::read_result(out, net, tmpl);
  contracts::PotentialOptions po;
  po.k = res.k;
  po.reduction_order = res.reduction_order;
  po.finite_mode = res.finite_mode;
  const double v = contracts::potential(net, tmpl, res.params, po).value;
  CHECK(v_cli == doctest::Approx(v).epsilon(1e-9));

  CHECK(run("plotdata --result " + out.string() + " --what potential-slice").code == 2);
  CHECK(run("plotdata --result " + out.string() + " --what potential-slice --dims 9:1,1:1").code == 2);
}

TEST_CASE("verify refuses a failed result") {
  const fs::path cfg = scratch("toy2.json");
  std::ofstream(cfg) << R"({"mode": "infinite", "subsystems": [{"id": 0, "A": [[1]], "B": [[1]],
    "X": {"center": [0], "generators": [[1]]}, "U": {"center": [0], "generators": [[0.1]]},
    "D": {"center": [0], "generators": [[5]]}}]})";
  const fs::path out = scratch("toy2_out");
  REQUIRE(run("synth --config " + cfg.string() + " --method centralized --out " + out.string()).code == 1);
  CHECK(run("verify --result " + out.string()).code == 1);
}

TEST_CASE("gen-random matches the library generator") {
  const fs::path a = scratch("gen_a.json");
  const fs::path b = scratch("gen_b.json");
  REQUIRE(run("gen-random --n 6 --lambda 0.3 --seed 4 --out " + a.string()).code == 0);
  const auto lib = sysmodel::network_to_json(sysmodel::random_network(6, 0.3, 4));
  CHECK(io::read_json_file(a) == lib);
  // the shipped template carries the default data, so only counts change
  REQUIRE(run("gen-random --template " + config("case3-template.json") + " --n 6 --lambda 0.3 --seed 4 --out " +
              b.string())
              .code == 0);
  CHECK(io::read_json_file(b) == lib);
  REQUIRE(run("gen-random --dim 12 --lambda 0.3 --seed 4 --out " + b.string()).code == 0);
  CHECK(io::read_json_file(b) == lib);
}

TEST_CASE("bench appends rows and records time outs") {
  const fs::path csv = scratch("bench.csv");
  REQUIRE(run("bench --sizes 10 --methods compositional,centralized-decentralized --out " + csv.string()).code == 0);
  REQUIRE(run("bench --sizes 100 --methods centralized-dense --timeout 0.001 --out " + csv.string()).code == 0);
  std::istringstream in(read_file(csv));
  std::string line;
  int headers = 0, rows = 0, ok = 0, timeouts = 0;
  while (std::getline(in, line)) {
    if (line.rfind("dimension,", 0) == 0) {
      ++headers;
      continue;
    }
    ++rows;
    if (line.find(",ok,") != std::string::npos) ++ok;
    if (line.find(",time out,") != std::string::npos) ++timeouts;
  }
  CHECK(headers == 1);
  CHECK(rows == 3);
  CHECK(ok == 2);
  CHECK(timeouts == 1);
}
