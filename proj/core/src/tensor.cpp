#include "uniseq/tensor.hpp"

#include <cmath>
#include <sstream>

#include "uniseq/errors.hpp"

namespace uniseq {

static std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  for (std::size_t d : shape)
    if (d == 0) throw ShapeError("zero dimension in tensor shape");
  Tensor t;
  t.data.assign(product(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data = {v};
  return t;
}

Tensor Tensor::row(std::vector<double> values) {
  Tensor t;
  t.shape = {values.size()};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) { return zeros({rows, cols}); }

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("from_rows: no rows");
  Tensor t = matrix(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw ShapeError("from_rows: ragged rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.at(r, c) = rows[r][c];
  }
  return t;
}

std::size_t Tensor::numel() const { return data.size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() on rank-" + std::to_string(rank()) + " tensor");
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() on rank-" + std::to_string(rank()) + " tensor");
  return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

}  // namespace uniseq
