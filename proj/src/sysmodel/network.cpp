#include "csynth/sysmodel/network.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace csynth::sysmodel {

using io::Json;

const char* to_string(Mode m) { return m == Mode::Finite ? "finite" : "infinite"; }

Mode mode_from_string(const std::string& s) {
  if (s == "finite") return Mode::Finite;
  if (s == "infinite") return Mode::Infinite;
  throw ConfigError("unknown mode \"" + s + "\" (expected finite or infinite)");
}

namespace {

template <class T>
const T& at_step(const std::vector<T>& v, int t, const char* what) {
  const std::size_t k = v.size() == 1 ? 0 : static_cast<std::size_t>(t);
  if (t < 0 || k >= v.size()) throw std::out_of_range(std::string(what) + ": time index out of range");
  return v[k];
}

std::string sub_name(const Subsystem& s) { return "subsystem " + std::to_string(s.id); }

}  // namespace

int Network::total_state_dim() const {
  int n = 0;
  for (const auto& s : subsystems) n += s.n;
  return n;
}

int Network::total_input_dim() const {
  int m = 0;
  for (const auto& s : subsystems) m += s.m;
  return m;
}

const Eigen::MatrixXd& Network::A(int i, int t) const { return at_step(subsystems.at(i).a, t, "A"); }
const Eigen::MatrixXd& Network::B(int i, int t) const { return at_step(subsystems.at(i).b, t, "B"); }
const Zonotope& Network::X(int i, int t) const { return at_step(subsystems.at(i).x_bound, t, "X"); }
const Zonotope& Network::U(int i, int t) const { return at_step(subsystems.at(i).u_bound, t, "U"); }
const Zonotope& Network::D(int i, int t) const { return at_step(subsystems.at(i).d_set, t, "D"); }

const Eigen::MatrixXd& Network::coupling_A(int i, std::size_t c, int t) const {
  return at_step(subsystems.at(i).couplings.at(c).a, t, "coupling A");
}

const Eigen::MatrixXd& Network::coupling_B(int i, std::size_t c, int t) const {
  return at_step(subsystems.at(i).couplings.at(c).b, t, "coupling B");
}

bool Network::state_is_coupled_out(int i, int t) const {
  for (int r = 0; r < size(); ++r)
    for (std::size_t c = 0; c < subsystems[r].couplings.size(); ++c)
      if (subsystems[r].couplings[c].source == i && !coupling_A(r, c, t).isZero(0.0)) return true;
  return false;
}

bool Network::input_is_coupled_out(int i, int t) const {
  for (int r = 0; r < size(); ++r)
    for (std::size_t c = 0; c < subsystems[r].couplings.size(); ++c)
      if (subsystems[r].couplings[c].source == i && !coupling_B(r, c, t).isZero(0.0)) return true;
  return false;
}

Eigen::MatrixXd Network::aggregated_A(int t) const {
  std::vector<int> off(subsystems.size() + 1, 0);
  for (std::size_t i = 0; i < subsystems.size(); ++i) off[i + 1] = off[i] + subsystems[i].n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(off.back(), off.back());
  for (int i = 0; i < size(); ++i) {
    const auto& s = subsystems[static_cast<std::size_t>(i)];
    a.block(off[i], off[i], s.n, s.n) = A(i, t);
    for (std::size_t c = 0; c < s.couplings.size(); ++c) {
      const int j = s.couplings[c].source;
      a.block(off[i], off[j], s.n, subsystems[j].n) += coupling_A(i, c, t);
    }
  }
  return a;
}

Eigen::MatrixXd Network::aggregated_B(int t) const {
  std::vector<int> roff(subsystems.size() + 1, 0), coff(subsystems.size() + 1, 0);
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    roff[i + 1] = roff[i] + subsystems[i].n;
    coff[i + 1] = coff[i] + subsystems[i].m;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(roff.back(), coff.back());
  for (int i = 0; i < size(); ++i) {
    const auto& s = subsystems[static_cast<std::size_t>(i)];
    b.block(roff[i], coff[i], s.n, s.m) = B(i, t);
    for (std::size_t c = 0; c < s.couplings.size(); ++c) {
      const int j = s.couplings[c].source;
      b.block(roff[i], coff[j], s.n, subsystems[j].m) += coupling_B(i, c, t);
    }
  }
  return b;
}

void Network::validate() const {
  if (mode == Mode::Finite && horizon < 1) throw ConfigError("finite mode needs horizon >= 1");
  const int h = steps();
  const std::size_t nx = mode == Mode::Finite ? static_cast<std::size_t>(horizon) + 1 : 1;
  auto check_len = [&](std::size_t len, std::size_t want, const Subsystem& s, const char* what) {
    if (len != want && len != 1)
      throw ConfigError(sub_name(s) + ": " + what + " has " + std::to_string(len) +
                        " entries, expected 1 or " + std::to_string(want));
  };
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    const Subsystem& s = subsystems[i];
    if (i > 0 && subsystems[i - 1].id >= s.id) throw ConfigError("subsystem ids must be unique");
    if (s.n < 1) throw ConfigError(sub_name(s) + ": state dimension must be >= 1");
    if (s.m < 0) throw ConfigError(sub_name(s) + ": negative input dimension");
    check_len(s.a.size(), static_cast<std::size_t>(h), s, "A");
    check_len(s.b.size(), static_cast<std::size_t>(h), s, "B");
    check_len(s.x_bound.size(), nx, s, "X");
    check_len(s.u_bound.size(), static_cast<std::size_t>(h), s, "U");
    check_len(s.d_set.size(), static_cast<std::size_t>(h), s, "D");
    for (int t = 0; t < h; ++t) {
      const std::string at = sub_name(s) + ", t=" + std::to_string(t);
      const auto& a = A(static_cast<int>(i), t);
      const auto& b = B(static_cast<int>(i), t);
      if (a.rows() != s.n || a.cols() != s.n)
        throw ConfigError(at + ": A must be " + std::to_string(s.n) + "x" + std::to_string(s.n));
      if (b.rows() != s.n || b.cols() != s.m)
        throw ConfigError(at + ": B must be " + std::to_string(s.n) + "x" + std::to_string(s.m));
      if (!a.allFinite() || !b.allFinite()) throw ConfigError(at + ": non-finite dynamics entry");
      if (U(static_cast<int>(i), t).dim() != s.m) throw ConfigError(at + ": U has wrong dimension");
      if (D(static_cast<int>(i), t).dim() != s.n) throw ConfigError(at + ": D has wrong dimension");
    }
    for (std::size_t t = 0; t < nx; ++t)
      if (X(static_cast<int>(i), static_cast<int>(t)).dim() != s.n)
        throw ConfigError(sub_name(s) + ", t=" + std::to_string(t) + ": X has wrong dimension");
    int last = -1;
    for (std::size_t c = 0; c < s.couplings.size(); ++c) {
      const Coupling& cp = s.couplings[c];
      if (cp.source < 0 || cp.source >= size())
        throw ConfigError(sub_name(s) + ": coupling to unknown subsystem");
      if (cp.source == static_cast<int>(i)) throw ConfigError(sub_name(s) + ": self coupling");
      if (cp.source <= last) throw ConfigError(sub_name(s) + ": duplicate coupling");
      last = cp.source;
      const Subsystem& src = subsystems[static_cast<std::size_t>(cp.source)];
      check_len(cp.a.size(), static_cast<std::size_t>(h), s, "coupling A");
      check_len(cp.b.size(), static_cast<std::size_t>(h), s, "coupling B");
      for (int t = 0; t < h; ++t) {
        const std::string at = sub_name(s) + ", coupling from " + sub_name(src) + ", t=" + std::to_string(t);
        const auto& a = coupling_A(static_cast<int>(i), c, t);
        const auto& b = coupling_B(static_cast<int>(i), c, t);
        if (a.rows() != s.n || a.cols() != src.n)
          throw ConfigError(at + ": A must be " + std::to_string(s.n) + "x" + std::to_string(src.n) +
                            ", got " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
        if (b.rows() != s.n || b.cols() != src.m)
          throw ConfigError(at + ": B must be " + std::to_string(s.n) + "x" + std::to_string(src.m) +
                            ", got " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
      }
    }
  }
}

// ---------------------------------------------------------------- JSON

namespace {

int nesting_depth(const Json& j) {
  int d = 0;
  const Json* cur = &j;
  while (cur->is_array() && !cur->empty()) {
    ++d;
    cur = &(*cur)[0];
  }
  return cur->is_array() ? d + 1 : d;
}

std::vector<Eigen::MatrixXd> read_matrices(const Json& j, const std::string& where, int rows_hint) {
  std::vector<Eigen::MatrixXd> out;
  if (j.is_array() && nesting_depth(j) >= 3) {
    for (std::size_t t = 0; t < j.size(); ++t)
      out.push_back(io::matrix_from_json(j[t], where + "[" + std::to_string(t) + "]", rows_hint));
  } else {
    out.push_back(io::matrix_from_json(j, where, rows_hint));
  }
  return out;
}

std::vector<Zonotope> read_zonotopes(const Json& j, const std::string& where) {
  std::vector<Zonotope> out;
  if (j.is_array()) {
    for (std::size_t t = 0; t < j.size(); ++t)
      out.push_back(io::zonotope_from_json(j[t], where + "[" + std::to_string(t) + "]"));
    if (out.empty()) throw ConfigError(where + ": empty list of sets");
  } else {
    out.push_back(io::zonotope_from_json(j, where));
  }
  return out;
}

Json write_matrices(const std::vector<Eigen::MatrixXd>& v) {
  if (v.size() == 1) return io::matrix_to_json(v[0]);
  Json out = Json::array();
  for (const auto& m : v) out.push_back(io::matrix_to_json(m));
  return out;
}

Json write_zonotopes(const std::vector<Zonotope>& v) {
  if (v.size() == 1) return io::zonotope_to_json(v[0]);
  Json out = Json::array();
  for (const auto& z : v) out.push_back(io::zonotope_to_json(z));
  return out;
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

}  // namespace

Network network_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigError("network: expected a JSON object");
    Network net;
    net.mode = mode_from_string(j.value("mode", std::string("infinite")));
    if (net.mode == Mode::Finite) {
      if (!j.contains("horizon") || !j.at("horizon").is_number_integer())
        throw ConfigError("finite mode needs an integer \"horizon\"");
      net.horizon = j.at("horizon").get<int>();
      if (net.horizon < 1) throw ConfigError("horizon must be >= 1");
    }
    const Json& subs = require(j, "subsystems", "network");
    if (!subs.is_array() || subs.empty()) throw ConfigError("\"subsystems\" must be a non-empty list");

    struct RawCoupling {
      int to;
      Json a, b;
    };
    std::vector<std::pair<Subsystem, std::vector<RawCoupling>>> raw;
    for (std::size_t k = 0; k < subs.size(); ++k) {
      const Json& sj = subs[k];
      const std::string where = "subsystems[" + std::to_string(k) + "]";
      Subsystem s;
      s.id = sj.contains("id") ? sj.at("id").get<int>() : static_cast<int>(k);
      const std::string w = "subsystem " + std::to_string(s.id);
      s.a = read_matrices(require(sj, "A", w), w + ".A", -1);
      s.n = static_cast<int>(s.a.front().rows());
      s.x_bound = read_zonotopes(require(sj, "X", w), w + ".X");
      s.d_set = sj.contains("D") ? read_zonotopes(sj.at("D"), w + ".D")
                                 : std::vector<Zonotope>{Zonotope(Eigen::VectorXd::Zero(s.n))};
      if (sj.contains("B")) {
        s.b = read_matrices(sj.at("B"), w + ".B", s.n);
        s.m = static_cast<int>(s.b.front().cols());
      } else {
        s.b = {Eigen::MatrixXd(s.n, 0)};
      }
      s.u_bound = sj.contains("U") ? read_zonotopes(sj.at("U"), w + ".U")
                                   : std::vector<Zonotope>{Zonotope(Eigen::VectorXd::Zero(s.m))};
      std::vector<RawCoupling> cps;
      if (sj.contains("couplings")) {
        for (const Json& cj : sj.at("couplings")) {
          RawCoupling rc;
          rc.to = require(cj, "to", w + ".couplings").get<int>();
          rc.a = cj.value("A", Json());
          rc.b = cj.value("B", Json());
          cps.push_back(std::move(rc));
        }
      }
      raw.emplace_back(std::move(s), std::move(cps));
    }
    std::sort(raw.begin(), raw.end(), [](const auto& x, const auto& y) { return x.first.id < y.first.id; });
    std::map<int, int> index;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (!index.emplace(raw[k].first.id, static_cast<int>(k)).second)
        throw ConfigError("duplicate subsystem id " + std::to_string(raw[k].first.id));
    }
    for (auto& [s, cps] : raw) {
      const std::string w = "subsystem " + std::to_string(s.id);
      for (const RawCoupling& rc : cps) {
        auto it = index.find(rc.to);
        if (it == index.end())
          throw ConfigError(w + ": coupling references unknown subsystem " + std::to_string(rc.to));
        const Subsystem& src = raw[static_cast<std::size_t>(it->second)].first;
        Coupling c;
        c.source = it->second;
        const std::string cw = w + ".couplings[to=" + std::to_string(rc.to) + "]";
        c.a = rc.a.is_null() ? std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(s.n, src.n)}
                             : read_matrices(rc.a, cw + ".A", s.n);
        c.b = rc.b.is_null() ? std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(s.n, src.m)}
                             : read_matrices(rc.b, cw + ".B", s.n);
        s.couplings.push_back(std::move(c));
      }
      std::sort(s.couplings.begin(), s.couplings.end(),
                [](const Coupling& x, const Coupling& y) { return x.source < y.source; });
      for (std::size_t c = 1; c < s.couplings.size(); ++c)
        if (s.couplings[c].source == s.couplings[c - 1].source)
          throw ConfigError(w + ": duplicate coupling entry");
    }
    for (auto& [s, cps] : raw) net.subsystems.push_back(std::move(s));
    net.validate();
    return net;
  } catch (const io::ParseError& e) {
    throw ConfigError(e.what());
  } catch (const geom::DimensionError& e) {
    throw ConfigError(e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed network JSON: ") + e.what());
  }
}

Json network_to_json(const Network& net) {
  Json j;
  j["mode"] = to_string(net.mode);
  if (net.mode == Mode::Finite) j["horizon"] = net.horizon;
  Json subs = Json::array();
  for (const Subsystem& s : net.subsystems) {
    Json sj;
    sj["id"] = s.id;
    sj["A"] = write_matrices(s.a);
    sj["B"] = write_matrices(s.b);
    Json cps = Json::array();
    for (const Coupling& c : s.couplings) {
      cps.push_back({{"to", net.subsystems[static_cast<std::size_t>(c.source)].id},
                     {"A", write_matrices(c.a)},
                     {"B", write_matrices(c.b)}});
    }
    sj["couplings"] = std::move(cps);
    sj["X"] = write_zonotopes(s.x_bound);
    sj["U"] = write_zonotopes(s.u_bound);
    sj["D"] = write_zonotopes(s.d_set);
    subs.push_back(std::move(sj));
  }
  j["subsystems"] = std::move(subs);
  return j;
}

Network load_network(const std::filesystem::path& path) {
  Json j;
  try {
    j = io::read_json_file(path);
  } catch (const io::ParseError& e) {
    throw ConfigError(e.what());
  }
  return network_from_json(j);
}

void save_network(const Network& net, const std::filesystem::path& path) {
  io::write_json_file(path, network_to_json(net));
}

// ---------------------------------------------------------------- random

std::vector<Eigen::Vector2d> random_network_points(int num_subsystems, std::uint64_t seed,
                                                   double field_size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, field_size);
  std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(std::max(num_subsystems, 0)));
  for (auto& p : pts) {
    p.x() = coord(rng);
    p.y() = coord(rng);
  }
  return pts;
}

Network planar_network(const std::vector<Eigen::Vector2d>& points, double lambda,
                       double neighbor_distance) {
  if (points.empty()) throw ConfigError("random network needs at least one subsystem");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  Network net;
  net.mode = Mode::Infinite;
  Eigen::MatrixXd a(2, 2), b(2, 1), gx(2, 3);
  a << 1.0, 1.2, 0.0, 1.0;
  b << 0.0, 0.2;
  gx << 10.0, 0.0, 10.0, 0.0, 10.0, -10.0;
  const Zonotope x_bound(Eigen::Vector2d::Zero(), gx);
  const Zonotope u_bound(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 10.0));
  const Zonotope d_set(Eigen::Vector2d::Zero(), 0.2 * Eigen::Matrix2d::Identity());
  const int count = static_cast<int>(points.size());
  for (int i = 0; i < count; ++i) {
    Subsystem s;
    s.id = i;
    s.n = 2;
    s.m = 1;
    s.a = {a};
    s.b = {b};
    s.x_bound = {x_bound};
    s.u_bound = {u_bound};
    s.d_set = {d_set};
    for (int j = 0; j < count; ++j) {
      if (j == i) continue;
      const double dist = (points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]).norm();
      if (!(dist < neighbor_distance)) continue;
      Coupling c;
      c.source = j;
      c.a = {Eigen::MatrixXd::Constant(2, 2, lambda / (1.0 + dist))};
      c.b = {Eigen::MatrixXd::Zero(2, 1)};
      s.couplings.push_back(std::move(c));
    }
    net.subsystems.push_back(std::move(s));
  }
  net.validate();
  return net;
}

Network random_network(int num_subsystems, double lambda, std::uint64_t seed,
                       const RandomNetworkOptions& options) {
  if (num_subsystems < 1) throw ConfigError("random network needs at least one subsystem");
  return planar_network(random_network_points(num_subsystems, seed, options.field_size), lambda,
                        options.neighbor_distance);
}

}  // namespace csynth::sysmodel
