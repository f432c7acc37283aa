// contract_synth: synthesis, verification, random networks, benchmarks and
// plot data for coupled linear networks.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csynth/contracts/contracts.hpp"
#include "csynth/geom/polygon.hpp"
#include "csynth/io/json.hpp"
#include "csynth/runtime/runtime.hpp"
#include "csynth/synthesis/synthesis.hpp"
#include "csynth/sysmodel/network.hpp"

namespace fs = std::filesystem;
using namespace csynth;
using io::Json;
using sysmodel::Network;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

// Bad input from the command line or a file; exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected an integer, got \"" + s + "\"");
  }
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a number, got \"" + s + "\"");
  }
}

Json read_config(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
  return io::read_json_file(path);
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out = "result";
  std::optional<std::string> mode;
  std::optional<int> horizon;
  std::optional<std::string> method;
  std::optional<std::vector<int>> k;
  std::optional<double> beta;
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<double> step;
  std::optional<int> reduce_order;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool random_start = false;
  bool no_line_search = false;
  bool polyak = false;
};

template <typename T>
void fill(std::optional<T>& dst, const Json& section, const char* key) {
  if (!dst && section.contains(key)) dst = section.at(key).get<T>();
}

std::string hint_text(const std::string& hint, const std::vector<int>& k) {
  const int next = k.empty() ? 0 : 2 * k.front();
  const std::string kflag = next > 0 ? " (e.g. --k " + std::to_string(next) + ")" : "";
  if (hint == "increase-k") return "increase k" + kflag;
  if (hint == "increase-k-or-reduction-order")
    return "increase k" + kflag + " or --reduce-order, or rerun with --random-start / another --seed";
  if (hint == "time-out") return "solver time limit reached; raise the limit or increase k";
  return hint;
}

int cmd_synth(SynthArgs a) {
  Json cfg = read_config(a.config);
  const Json section = cfg.contains("synthesis") ? cfg.at("synthesis") : Json::object();
  fill(a.method, section, "method");
  fill(a.beta, section, "beta");
  fill(a.max_iter, section, "max_iter");
  fill(a.tol, section, "tol");
  fill(a.step, section, "step");
  fill(a.reduce_order, section, "reduce_order");
  fill(a.seed, section, "seed");
  fill(a.threads, section, "threads");
  if (!a.k && section.contains("k")) {
    const Json& kj = section.at("k");
    a.k = kj.is_array() ? kj.get<std::vector<int>>() : std::vector<int>{kj.get<int>()};
  }
  if (section.value("random_start", false)) a.random_start = true;
  if (!section.value("line_search", true)) a.no_line_search = true;
  if (section.value("polyak", false)) a.polyak = true;

  if (a.mode) cfg["mode"] = *a.mode;
  if (a.horizon) cfg["horizon"] = *a.horizon;
  cfg.erase("synthesis");
  const Network net = sysmodel::network_from_json(cfg);
  const auto tmpl = contracts::default_template(net);

  synthesis::Method method;
  try {
    method = synthesis::method_from_string(a.method.value_or("compositional"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.k)
    for (int v : *a.k)
      if (v < 1) throw UsageError("--k must be >= 1");
  if (a.beta && !(*a.beta >= 0.0 && *a.beta < 1.0)) throw UsageError("--beta must be in [0, 1)");
  if (a.beta && *a.beta > 0.0 && net.mode == sysmodel::Mode::Finite)
    throw UsageError("--beta applies to infinite mode only");

  synthesis::SynthesisResult res;
  if (method == synthesis::Method::Centralized) {
    synthesis::CentralizedConfig cc;
    if (a.k) cc.k = *a.k;
    cc.reduction_order = a.reduce_order.value_or(0);
    cc.beta = a.beta.value_or(0.0);
    if (cc.reduction_order < 0) throw UsageError("--reduce-order must be >= 0");
    res = synthesis::centralized_synthesize(net, tmpl, cc);
  } else {
    synthesis::DescentConfig dc;
    if (a.k) dc.k = *a.k;
    if (a.max_iter) dc.max_iters = *a.max_iter;
    if (a.tol) dc.tol = *a.tol;
    if (a.step) dc.step = *a.step;
    if (a.reduce_order) dc.reduction_order = *a.reduce_order;
    if (a.seed) dc.seed = *a.seed;
    if (a.threads) dc.threads = *a.threads;
    dc.beta = a.beta.value_or(0.0);
    dc.random_start = a.random_start;
    dc.line_search = !a.no_line_search;
    dc.polyak_trial = a.polyak;
    try {
      dc.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    res = synthesis::compositional_synthesize(net, tmpl, dc);
  }

  fs::create_directories(a.out);
  synthesis::write_result(res, net, a.out);
  sysmodel::save_network(net, fs::path(a.out) / "network.json");

  std::cout << "status:      " << synthesis::to_string(res.status) << "\n"
            << "method:      " << synthesis::to_string(res.method) << "\n"
            << "mode:        " << sysmodel::to_string(net.mode) << "\n";
  if (res.method == synthesis::Method::Compositional) {
    std::cout << "potential:   " << res.potential << "\n"
              << "iterations:  " << res.iterations << "\n";
  }
  std::cout << "k:          ";
  for (int v : res.k) std::cout << ' ' << v;
  std::cout << "\n"
            << "solver time: " << res.timings.solver_seconds << " s\n"
            << "wall time:   " << res.timings.wall_seconds << " s\n"
            << "output:      " << a.out << "\n";
  if (!res.correct()) {
    if (!res.message.empty()) std::cout << "message:     " << res.message << "\n";
    std::cout << "hint:        " << hint_text(res.hint.empty() ? "increase-k" : res.hint, res.k) << "\n";
    return kExitFailed;
  }
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string result;
  int samples = 10000;
  int steps = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string traj_csv;
};

struct LoadedResult {
  Network net;
  contracts::ContractTemplate tmpl;
  synthesis::SynthesisResult res;
};

LoadedResult load_result(const std::string& dir) {
  const fs::path net_path = fs::path(dir) / "network.json";
  if (!fs::exists(net_path)) throw UsageError("not a result directory (no network.json): " + dir);
  LoadedResult out{sysmodel::load_network(net_path), {}, {}};
  out.tmpl = contracts::default_template(out.net);
  out.res = synthesis::read_result(dir, out.net, out.tmpl);
  return out;
}

int cmd_verify(const VerifyArgs& a) {
  const LoadedResult lr = load_result(a.result);
  if (!lr.res.correct() || lr.res.solutions.empty()) {
    std::cout << "result is not correct; nothing to verify\n";
    return kExitFailed;
  }
  runtime::VerifyOptions vo;
  vo.samples = a.samples;
  vo.steps = a.steps;
  vo.seed = a.seed;
  vo.threads = a.threads;
  const runtime::VerifyReport rep = runtime::verify_invariance(lr.net, lr.res.solutions, vo);
  io::write_json_file(fs::path(a.result) / "verify.json", runtime::report_to_json(rep, lr.net));
  if (!a.traj_csv.empty()) {
    runtime::DecentralizedController ctrl(lr.net, lr.res.solutions);
    const auto tr = runtime::simulate(lr.net, ctrl, rep.steps, a.seed);
    runtime::write_trajectory_csv(tr, lr.net, a.traj_csv);
  }
  std::cout << "samples:           " << rep.samples << " x " << rep.steps << " steps\n"
            << "violations:        " << rep.violations << "\n"
            << "vertex checks:     " << rep.vertex_checks << " (" << rep.vertex_violations << " violations)\n"
            << "seconds:           " << rep.seconds << "\n"
            << (rep.passed() ? (rep.vacuous ? "PASSED (vacuous)" : "PASSED") : "FAILED") << "\n";
  for (const auto& v : rep.examples)
    std::cout << "  subsystem " << lr.net.subsystems[static_cast<std::size_t>(v.subsystem)].id << " left its "
              << v.what << " set at t=" << v.t << "\n";
  return rep.passed() ? 0 : kExitFailed;
}

// ---------------------------------------------------------------- gen-random

struct GenArgs {
  std::optional<int> n;
  std::optional<int> dim;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::string template_path;
  std::string out;
};

// Replaces the per-subsystem data, keeping the coupling pattern and weights.
void apply_subsystem_template(Network& net, const Json& j) {
  const std::string w = "subsystem";
  const auto read_set = [&](const char* key) { return io::zonotope_from_json(j.at(key), w + "." + key); };
  for (auto& s : net.subsystems) {
    if (j.contains("A")) s.a = {io::matrix_from_json(j.at("A"), w + ".A")};
    if (j.contains("B")) s.b = {io::matrix_from_json(j.at("B"), w + ".B")};
    if (j.contains("X")) s.x_bound = {read_set("X")};
    if (j.contains("U")) s.u_bound = {read_set("U")};
    if (j.contains("D")) s.d_set = {read_set("D")};
    s.n = static_cast<int>(s.a[0].rows());
    s.m = static_cast<int>(s.b[0].cols());
  }
  for (auto& s : net.subsystems)
    for (auto& c : s.couplings) {
      const auto& src = net.subsystems[static_cast<std::size_t>(c.source)];
      c.a = {Eigen::MatrixXd::Constant(s.n, src.n, c.a[0](0, 0))};
      c.b = {Eigen::MatrixXd::Zero(s.n, src.m)};
    }
  net.validate();
}

int cmd_gen_random(const GenArgs& a) {
  Json gen = Json::object();
  Json sub;
  if (!a.template_path.empty()) {
    const Json t = read_config(a.template_path);
    if (t.contains("generator")) gen = t.at("generator");
    if (t.contains("subsystem")) sub = t.at("subsystem");
  }
  int count = gen.value("subsystems", 5);
  if (a.n) count = *a.n;
  if (a.dim) {
    if (*a.dim % 2 != 0) throw UsageError("--dim must be even (two states per subsystem)");
    count = *a.dim / 2;
  }
  if (count < 1) throw UsageError("need at least one subsystem");
  const double lambda = a.lambda.value_or(gen.value("lambda", 1.0));
  const std::uint64_t seed = a.seed.value_or(gen.value("seed", std::uint64_t{1}));
  sysmodel::RandomNetworkOptions ro;
  ro.field_size = gen.value("field", ro.field_size);
  ro.neighbor_distance = gen.value("neighbor_distance", ro.neighbor_distance);
  Network net = sysmodel::random_network(count, lambda, seed, ro);
  if (!sub.is_null()) apply_subsystem_template(net, sub);
  sysmodel::save_network(net, a.out);
  int links = 0;
  for (const auto& s : net.subsystems) links += static_cast<int>(s.couplings.size());
  std::cout << "wrote " << a.out << ": " << net.size() << " subsystems, " << links / 2 << " neighbour pairs\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string sizes = "10,20,40,100";
  std::string lambdas;
  std::uint64_t seed = 1;
  double timeout = 600.0;
  std::string methods = "compositional,centralized-decentralized,centralized-dense";
  std::string out = "bench.csv";
  int k = 0;
};

// Default coupling strength per total dimension.
double default_lambda(int dim) {
  static const std::map<int, double> table = {{10, 1.0},     {20, 0.1},     {40, 0.1},     {100, 0.1},
                                              {200, 0.05},   {400, 0.05},   {500, 0.05},   {1000, 0.01},
                                              {2000, 0.001}, {4000, 0.001}, {10000, 1e-4}, {20000, 1e-5}};
  const auto it = table.lower_bound(dim);
  return it == table.end() ? 1e-5 : it->second;
}

struct BenchRow {
  int dim = 0;
  int subsystems = 0;
  double lambda = 0.0;
  std::string method;
  std::string status;
  double solver_seconds = 0.0;
  double wall_seconds = 0.0;
  int iterations = 0;
  double per_iteration = 0.0;
};

const char* kBenchHeader =
    "dimension,subsystems,lambda,method,seed,status,solver_seconds,wall_seconds,iterations,per_iteration_seconds";

BenchRow bench_one(const Network& net, const std::string& method, const BenchArgs& a) {
  BenchRow row;
  row.dim = net.total_state_dim();
  row.subsystems = net.size();
  row.method = method;
  const auto tmpl = contracts::default_template(net);
  lp::SolverOptions solver;
  solver.time_limit_seconds = a.timeout;
  if (method == "compositional") {
    synthesis::DescentConfig dc;
    if (a.k > 0) dc.k = {a.k};
    dc.time_budget_seconds = a.timeout;
    dc.solver = solver;
    const auto r = synthesis::compositional_synthesize(net, tmpl, dc);
    row.status = r.correct() ? "ok" : (r.hint == "time-out" ? "time out" : "failed");
    row.solver_seconds = r.timings.solver_seconds;
    row.wall_seconds = r.timings.wall_seconds;
    row.iterations = r.iterations;
    double sum = 0.0;
    for (const auto& e : r.trace) sum += e.solve_seconds;
    row.per_iteration = r.trace.empty() ? 0.0 : sum / static_cast<double>(r.trace.size());
  } else if (method == "centralized-decentralized") {
    synthesis::CentralizedConfig cc;
    if (a.k > 0) cc.k = {a.k};
    cc.solver = solver;
    const auto r = synthesis::centralized_synthesize(net, tmpl, cc);
    row.status = r.correct() ? "ok" : (r.hint == "time-out" ? "time out" : "failed");
    row.solver_seconds = r.timings.solver_seconds;
    row.wall_seconds = r.timings.wall_seconds;
    row.iterations = 1;
    row.per_iteration = row.solver_seconds;
  } else if (method == "centralized-dense") {
    const auto r = synthesis::centralized_dense(net, 0, solver);
    row.status = r.feasible ? "ok" : (r.time_limit_reached ? "time out" : "failed");
    row.solver_seconds = r.solver_seconds;
    row.wall_seconds = r.wall_seconds;
    row.iterations = 1;
    row.per_iteration = row.solver_seconds;
  } else {
    throw UsageError("unknown method \"" + method + "\"");
  }
  return row;
}

int cmd_bench(const BenchArgs& a) {
  std::vector<int> sizes;
  for (const auto& s : split(a.sizes, ',')) sizes.push_back(to_int(s, "--sizes"));
  std::vector<double> lambdas;
  for (const auto& s : split(a.lambdas, ',')) lambdas.push_back(to_double(s, "--lambda-schedule"));
  if (!lambdas.empty() && lambdas.size() != sizes.size())
    throw UsageError("--lambda-schedule needs one value per size");
  const auto methods = split(a.methods, ',');
  for (const auto& m : methods)
    if (m != "compositional" && m != "centralized-decentralized" && m != "centralized-dense")
      throw UsageError("unknown method \"" + m + "\"");
  for (int d : sizes)
    if (d < 2 || d % 2 != 0) throw UsageError("sizes are total state dimensions and must be even");

  const bool fresh = !fs::exists(a.out) || fs::file_size(a.out) == 0;
  std::ofstream csv(a.out, std::ios::app);
  if (!csv) throw UsageError("cannot write " + a.out);
  if (fresh) csv << kBenchHeader << "\n";

  std::cout << std::left << std::setw(6) << "dim" << std::setw(9) << "lambda" << std::setw(28) << "method"
            << std::setw(10) << "status" << std::setw(12) << "solver[s]" << std::setw(12) << "wall[s]"
            << std::setw(7) << "iters" << "per-iter[s]\n";
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const double lambda = lambdas.empty() ? default_lambda(sizes[s]) : lambdas[s];
    const Network net = sysmodel::random_network(sizes[s] / 2, lambda, a.seed);
    for (const auto& m : methods) {
      BenchRow row = bench_one(net, m, a);
      row.lambda = lambda;
      csv << row.dim << ',' << row.subsystems << ',' << row.lambda << ',' << row.method << ',' << a.seed << ','
          << row.status << ',' << row.solver_seconds << ',' << row.wall_seconds << ',' << row.iterations << ','
          << row.per_iteration << "\n";
      csv.flush();
      std::cout << std::left << std::setw(6) << row.dim << std::setw(9) << row.lambda << std::setw(28) << row.method
                << std::setw(10) << row.status << std::setw(12) << row.solver_seconds << std::setw(12)
                << row.wall_seconds << std::setw(7) << row.iterations << row.per_iteration << std::endl;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- plotdata

struct PlotArgs {
  std::string result;
  std::string what;
  std::string dims;
  int grid = 41;
  std::string out;
};

// "i:c" with 1-based coordinate c, optionally "i:c@t".
struct AlphaCoord {
  int id = 0;
  int coord = 0;
  int t = 0;
};

AlphaCoord parse_alpha_coord(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--dims entries look like i:coord, got \"" + s + "\"");
  AlphaCoord c;
  c.id = to_int(s.substr(0, colon), "--dims");
  std::string rest = s.substr(colon + 1);
  if (const auto at = rest.find('@'); at != std::string::npos) {
    c.t = to_int(rest.substr(at + 1), "--dims");
    rest = rest.substr(0, at);
  }
  c.coord = to_int(rest, "--dims");
  return c;
}

int index_of_id(const Network& net, int id) {
  for (int i = 0; i < net.size(); ++i)
    if (net.subsystems[static_cast<std::size_t>(i)].id == id) return i;
  throw UsageError("no subsystem with id " + std::to_string(id));
}

int plot_viable_sets(const LoadedResult& lr, const PlotArgs& a, const fs::path& out) {
  std::optional<std::pair<int, int>> coords;
  if (!a.dims.empty()) {
    const auto parts = split(a.dims, ',');
    if (parts.size() != 2) throw UsageError("--dims needs two entries");
    std::pair<int, int> p;
    for (int k = 0; k < 2; ++k) {
      const auto& e = parts[static_cast<std::size_t>(k)];
      const auto colon = e.find(':');
      const int c = to_int(colon == std::string::npos ? e : e.substr(colon + 1), "--dims");
      (k == 0 ? p.first : p.second) = c - 1;
    }
    coords = p;
  }
  int files = 0;
  for (int i = 0; i < lr.net.size(); ++i) {
    const auto& sub = lr.net.subsystems[static_cast<std::size_t>(i)];
    const auto& sol = lr.res.solutions[static_cast<std::size_t>(i)];
    if (!coords && sub.n != 2)
      throw UsageError("subsystem " + std::to_string(sub.id) + " has " + std::to_string(sub.n) +
                       " states; pass --dims to pick two coordinates");
    const int a0 = coords ? coords->first : 0;
    const int a1 = coords ? coords->second : 1;
    if (a0 < 0 || a1 < 0 || a0 >= sub.n || a1 >= sub.n || a0 == a1) throw UsageError("--dims out of range");
    const int last = sol.invariant() ? 0 : sol.horizon();
    for (int t = 0; t <= last; ++t) {
      for (const char* kind : {"omega", "x"}) {
        const geom::Zonotope z = std::string(kind) == "omega" ? sol.omega(t) : lr.net.X(i, t);
        Eigen::MatrixXd g(2, z.num_generators());
        g.row(0) = z.generators().row(a0);
        g.row(1) = z.generators().row(a1);
        const geom::Zonotope proj(Eigen::Vector2d(z.center()(a0), z.center()(a1)), g);
        std::ofstream os(out / (std::string(kind) + "_" + std::to_string(sub.id) + "_t" + std::to_string(t) + ".csv"));
        geom::write_polygon_csv(os, geom::polygon_vertices_2d(proj));
        ++files;
      }
    }
  }
  std::cout << "wrote " << files << " polygon files to " << out.string() << "\n";
  return 0;
}

int plot_potential_slice(const LoadedResult& lr, const PlotArgs& a, const fs::path& out) {
  if (a.dims.empty()) throw UsageError("potential-slice needs --dims \"i:coord,j:coord\"");
  const auto parts = split(a.dims, ',');
  if (parts.size() != 2) throw UsageError("--dims needs two entries");
  const auto& p = lr.res.params;
  int flat[2];
  for (int k = 0; k < 2; ++k) {
    const AlphaCoord c = parse_alpha_coord(parts[static_cast<std::size_t>(k)]);
    const int i = index_of_id(lr.net, c.id);
    const int size = p.layout.size(i, c.t, contracts::Channel::State);
    if (c.coord < 1 || c.coord > size)
      throw UsageError("subsystem " + std::to_string(c.id) + " has " + std::to_string(size) +
                       " state parameters at t=" + std::to_string(c.t));
    flat[k] = p.layout.offset(i, c.t, contracts::Channel::State) + c.coord - 1;
  }
  if (flat[0] == flat[1]) throw UsageError("--dims entries must differ");
  if (a.grid < 1) throw UsageError("--grid must be >= 1");

  contracts::PotentialOptions po;
  po.k = lr.res.k;
  po.reduction_order = lr.res.reduction_order;
  po.finite_mode = lr.res.finite_mode;
  po.beta = lr.res.beta;
  std::ofstream os(out / "potential_slice.csv");
  os << "a1,a2,V\n" << std::setprecision(12);
  contracts::ContractParams q = p;
  const auto value_at = [&](int k, int g) {
    if (a.grid == 1) return p.alpha(flat[k]);
    return p.alpha_max(flat[k]) * g / (a.grid - 1);
  };
  for (int g0 = 0; g0 < a.grid; ++g0)
    for (int g1 = 0; g1 < a.grid; ++g1) {
      q.alpha(flat[0]) = value_at(0, g0);
      q.alpha(flat[1]) = value_at(1, g1);
      const double v = contracts::potential(lr.net, lr.tmpl, q, po).value;
      os << q.alpha(flat[0]) << ',' << q.alpha(flat[1]) << ',' << v << "\n";
    }
  std::cout << "wrote " << a.grid * a.grid << " points to " << (out / "potential_slice.csv").string() << "\n";
  return 0;
}

int cmd_plotdata(const PlotArgs& a) {
  const LoadedResult lr = load_result(a.result);
  const fs::path out = a.out.empty() ? fs::path(a.result) / "plots" : fs::path(a.out);
  fs::create_directories(out);
  if (a.what == "viable-sets") {
    if (lr.res.solutions.empty()) {
      std::cout << "result has no viable sets\n";
      return kExitFailed;
    }
    return plot_viable_sets(lr, a, out);
  }
  return plot_potential_slice(lr, a, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contract-based synthesis of decentralized controllers for coupled linear networks"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "synthesize viable sets and controllers from a network config");
  synth->add_option("--config", sa.config, "network config (JSON)")->required();
  synth->add_option("--out", sa.out, "result directory")->capture_default_str();
  synth->add_option("--mode", sa.mode, "override the config mode")->check(CLI::IsMember({"finite", "infinite"}));
  synth->add_option("--horizon", sa.horizon, "override the horizon (finite mode)")->check(CLI::PositiveNumber);
  synth->add_option("--method", sa.method, "compositional (default) or centralized")
      ->check(CLI::IsMember({"centralized", "compositional"}));
  synth->add_option("--k", sa.k, "generators per subsystem; one value or one per subsystem")->delimiter(',');
  synth->add_option("--beta", sa.beta, "contraction factor in [0, 1), infinite mode");
  synth->add_option("--max-iter", sa.max_iter, "descent iterations")->check(CLI::NonNegativeNumber);
  synth->add_option("--tol", sa.tol, "stop when V <= tol");
  synth->add_option("--step", sa.step, "initial step size");
  synth->add_option("--reduce-order", sa.reduce_order, "boxing order of the assumed disturbance, 0 keeps it");
  synth->add_option("--seed", sa.seed, "seed for random start and gradient sampling");
  synth->add_option("--threads", sa.threads, "worker threads (0: CONTRACT_SYNTH_THREADS or all cores)");
  synth->add_flag("--random-start", sa.random_start, "start from a random alpha in the box");
  synth->add_flag("--no-line-search", sa.no_line_search, "fixed step instead of backtracking");
  synth->add_flag("--polyak", sa.polyak, "try the step V / |g|^2 before backtracking");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of a synthesized result");
  verify->add_option("--result", va.result, "result directory")->required();
  verify->add_option("--samples", va.samples, "trajectories")->capture_default_str()->check(CLI::NonNegativeNumber);
  verify->add_option("--steps", va.steps, "steps per trajectory (0: horizon or 100)")->capture_default_str();
  verify->add_option("--seed", va.seed, "master seed")->capture_default_str();
  verify->add_option("--threads", va.threads, "worker threads");
  verify->add_option("--traj-csv", va.traj_csv, "also write one trajectory as CSV");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen-random", "random planar network");
  gen->add_option("--n,--subsystems", ga.n, "number of subsystems")->check(CLI::PositiveNumber);
  gen->add_option("--dim", ga.dim, "total state dimension (two per subsystem)")->check(CLI::PositiveNumber);
  gen->add_option("--lambda", ga.lambda, "coupling strength");
  gen->add_option("--seed", ga.seed, "seed of the subsystem positions");
  gen->add_option("--template", ga.template_path, "generator and subsystem defaults (JSON)");
  gen->add_option("--out", ga.out, "output network file")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "synthesis times on random networks");
  bench->add_option("--sizes", ba.sizes, "total state dimensions")->capture_default_str();
  bench->add_option("--lambda-schedule", ba.lambdas, "lambda per size (default: the published pairings)");
  bench->add_option("--seed", ba.seed, "network seed")->capture_default_str();
  bench->add_option("--timeout", ba.timeout, "seconds per method and size")->capture_default_str();
  bench->add_option("--methods", ba.methods, "methods to run")->capture_default_str();
  bench->add_option("--k", ba.k, "generators per subsystem (0: automatic)");
  bench->add_option("--out", ba.out, "CSV file, appended to")->capture_default_str();

  PlotArgs pa;
  auto* plot = app.add_subcommand("plotdata", "CSV data for viable sets and potential slices");
  plot->add_option("--result", pa.result, "result directory")->required();
  plot->add_option("--what", pa.what, "viable-sets or potential-slice")
      ->required()
      ->check(CLI::IsMember({"viable-sets", "potential-slice"}));
  plot->add_option("--dims", pa.dims, "\"i:coord,j:coord\" (1-based coordinates)");
  plot->add_option("--grid", pa.grid, "grid points per axis")->capture_default_str();
  plot->add_option("--out", pa.out, "output directory (default: RESULT/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(sa);
    if (*verify) return cmd_verify(va);
    if (*gen) return cmd_gen_random(ga);
    if (*bench) return cmd_bench(ba);
    if (*plot) return cmd_plotdata(pa);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sysmodel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const io::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
