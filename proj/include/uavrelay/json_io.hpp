#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace uavrelay::io {

using nlohmann::json;

// Matrices are stored row-major as {"rows", "cols", "re", "im"} or {"rows", "cols", "data"}.
json complex_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd complex_from_json(const json& j);
json real_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd real_from_json(const json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// Shortest round-tripping decimal representation of a double.
std::string format_double(double v);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace uavrelay::io
