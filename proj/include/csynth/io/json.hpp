#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "csynth/geom/zonotope.hpp"

namespace csynth::io {

using Json = nlohmann::json;

/// Malformed input document; the message carries the JSON path.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json vector_to_json(const Eigen::VectorXd& v);
/// Row-major list of rows.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& where);
/// Accepts a list of rows; a bare number is read as a 1x1 matrix and a flat
/// list as a single row. `rows_hint` disambiguates n x 0 matrices.
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& where, int rows_hint = -1);

/// {"center": [...], "generators": [[row-major n x p]]}
Json zonotope_to_json(const geom::Zonotope& z);
geom::Zonotope zonotope_from_json(const Json& j, const std::string& where);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace csynth::io
