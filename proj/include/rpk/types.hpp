#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace rpk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Feature matrices are row-major: samplers and distance scans walk rows.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Label = std::uint32_t;

// Test-side label for a point whose cluster holds no training points.
inline constexpr std::int32_t kNoCluster = -1;

inline constexpr const char* kVersion = "0.3.0";

}  // namespace rpk
