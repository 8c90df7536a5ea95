#pragma once

#include <optional>

#include "levsample/core.hpp"

namespace levsample {

/// Design and response, plus the generating model when it is known.
struct RegressionProblem {
  DenseMatrix X;
  Vector y;
  std::optional<Vector> beta0;
  std::optional<double> sigma2;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  /// Throws std::invalid_argument on mismatched lengths or non-finite data.
  void validate() const;
  /// validate() plus presence of beta0 (length p) and sigma2 >= 0.
  void validate_ground_truth() const;
};

}  // namespace levsample
