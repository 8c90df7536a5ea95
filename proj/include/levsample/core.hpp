#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace levsample {

using Index = Eigen::Index;
/// Real n x p matrix in Eigen's column-major storage.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Seed = std::uint64_t;

inline constexpr std::string_view kVersion = "0.3.0";

/// Malformed experiment configuration or command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or sketch lost rank where full rank was required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument naming `what` if any entry is NaN or infinite.
void require_finite(const DenseMatrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

}  // namespace levsample
