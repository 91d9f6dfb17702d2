#pragma once

#include <Eigen/Core>
#include <string_view>

namespace sharp::nn {

// Row-major dense matrix of doubles. Bias and scale vectors are 1 x n.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Throws NumericFault naming `where` if any entry is NaN or Inf.
void check_finite(const Tensor2& t, std::string_view where);

}  // namespace sharp::nn
