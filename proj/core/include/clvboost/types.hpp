#pragma once

#include <Eigen/Dense>

namespace clvboost {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace clvboost
