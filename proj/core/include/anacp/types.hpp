#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace anacp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// On-disk feature layout: N x d row-major 32-bit floats.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ClassId = std::uint32_t;

}  // namespace anacp
