#include "levsample/problem.hpp"

namespace levsample {

void RegressionProblem::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("problem: empty design");
  if (y.size() != X.rows()) throw std::invalid_argument("problem: length(y) != rows(X)");
  require_finite(X, "problem X");
  require_finite(y, "problem y");
}

void RegressionProblem::validate_ground_truth() const {
  validate();
  if (!beta0) throw std::invalid_argument("problem: beta0 required for unconditional study");
  if (beta0->size() != X.cols()) throw std::invalid_argument("problem: length(beta0) != cols(X)");
  if (!sigma2) throw std::invalid_argument("problem: sigma2 required for unconditional study");
  if (!(*sigma2 >= 0.0)) throw std::invalid_argument("problem: sigma2 must be >= 0");
}

}  // namespace levsample
