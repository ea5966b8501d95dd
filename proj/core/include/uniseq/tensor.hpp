#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace uniseq {

/// Dense row-major tensor of 64-bit floats. Scalars are rank 0 with one
/// element; matrices are rank 2. product(shape) == data.size() always.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);                       // rank 1
  static Tensor matrix(std::size_t rows, std::size_t cols);            // zero-filled
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rank() const { return shape.size(); }
  std::size_t numel() const;
  bool is_scalar() const { return shape.empty(); }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool all_finite() const;
  std::string shape_str() const;
};

inline bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape && a.data == b.data;
}

}  // namespace uniseq
