// Copyright 2026 The axpath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace axpath {

using Vector = std::vector<double>;

/// Dense row-major matrix. Rows are the natural unit everywhere in this
/// library (one row per node, one row per path).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out += in * w, where in has w.rows() entries and out has w.cols() entries.
/// Zero inputs are skipped; bag-of-words features are mostly zero.
inline void accumulate_row_times(std::span<const double> in, const Matrix& w,
                                 std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double a = in[i];
    if (a == 0.0) continue;
    const auto wr = w.row(i);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * wr[k];
  }
}

/// Returns a * b.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) accumulate_row_times(a.row(r), b, out.row(r));
  return out;
}

}  // namespace axpath
