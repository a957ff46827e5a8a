#pragma once

#include <Eigen/Core>

namespace coldpref {

// Row-major so that a data point is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace coldpref
