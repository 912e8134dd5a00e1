/* Copyright 2026 The SCDNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SCDNN_LINALG_HPP_
#define SCDNN_LINALG_HPP_

#include <cstddef>

#include <Eigen/Core>

namespace scdnn::linalg {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

inline MatrixMap view(double* data, std::size_t rows, std::size_t cols) {
  return MatrixMap(data, static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

inline ConstMatrixMap view(const double* data, std::size_t rows,
                           std::size_t cols) {
  return ConstMatrixMap(data, static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

}  // namespace scdnn::linalg

#endif  // SCDNN_LINALG_HPP_
