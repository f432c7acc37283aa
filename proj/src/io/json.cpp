#include "csynth/io/json.hpp"

#include <fstream>

namespace csynth::io {

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) throw ParseError(where + ": expected a list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(where + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& where, int rows_hint) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array()) throw ParseError(where + ": expected a matrix (list of rows)");
  if (j.empty()) return Eigen::MatrixXd(std::max(rows_hint, 0), 0);
  if (j[0].is_number()) {
    const Eigen::VectorXd row = vector_from_json(j, where);
    return row.transpose();
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw ParseError(where + ": expected rows to be lists");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const std::string at = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(at + ": ragged matrix row");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw ParseError(at + ": expected a number");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Json zonotope_to_json(const geom::Zonotope& z) {
  Json gens = Json::array();
  for (int r = 0; r < z.dim(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < z.num_generators(); ++c) row.push_back(z.generators()(r, c));
    gens.push_back(std::move(row));
  }
  return Json{{"center", vector_to_json(z.center())}, {"generators", std::move(gens)}};
}

geom::Zonotope zonotope_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("center") || !j.contains("generators"))
    throw ParseError(where + ": zonotope needs \"center\" and \"generators\"");
  Eigen::VectorXd c = vector_from_json(j.at("center"), where + ".center");
  const Json& g = j.at("generators");
  Eigen::MatrixXd gm;
  // a column vector given as [[a],[b]] or an n x 0 matrix given as [[],[]]
  if (g.is_array() && !g.empty() && g[0].is_number() && c.size() > 1) {
    gm = vector_from_json(g, where + ".generators");  // single generator column
  } else {
    gm = matrix_from_json(g, where + ".generators", static_cast<int>(c.size()));
  }
  if (gm.rows() != c.size())
    throw ParseError(where + ": generators have " + std::to_string(gm.rows()) +
                     " rows but center has length " + std::to_string(c.size()));
  try {
    return {std::move(c), std::move(gm)};
  } catch (const std::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace csynth::io
