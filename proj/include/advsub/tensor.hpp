#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "advsub/error.hpp"

namespace advsub {

// Numeric type for every tensor in the toolkit. Define ADVSUB_REAL_FLOAT32 to
// build in single precision; gradient-check tolerances must be relaxed then.
#ifdef ADVSUB_REAL_FLOAT32
using real = float;
#else
using real = double;
#endif

using Shape = std::vector<std::size_t>;

inline std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

/// Dense row-major n-dimensional array of reals.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, real fill = real{0})
      : shape_(std::move(shape)), values_(shape_product(shape_), fill) {
    check_dims();
  }

  Tensor(Shape shape, std::vector<real> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    check_dims();
    require(values_.size() == shape_product(shape_), ErrorKind::kInvalidInput,
            "tensor of shape " + shape_string(shape_) + " needs " +
                std::to_string(shape_product(shape_)) + " values, got " +
                std::to_string(values_.size()));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  real* data() noexcept { return values_.data(); }
  const real* data() const noexcept { return values_.data(); }
  std::span<real> values() noexcept { return values_; }
  std::span<const real> values() const noexcept { return values_; }

  real& operator[](std::size_t i) noexcept { return values_[i]; }
  real operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Elements per index of the leading axis.
  std::size_t row_size() const noexcept {
    return shape_.empty() || shape_[0] == 0 ? 0 : values_.size() / shape_[0];
  }
  std::span<real> row(std::size_t i) noexcept {
    const std::size_t n = row_size();
    return std::span<real>(values_).subspan(i * n, n);
  }
  std::span<const real> row(std::size_t i) const noexcept {
    const std::size_t n = row_size();
    return std::span<const real>(values_).subspan(i * n, n);
  }

  Tensor reshaped(Shape shape) const {
    require(shape_product(shape) == size(), ErrorKind::kInvalidInput,
            "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), values_);
  }

  void fill(real value) { std::fill(values_.begin(), values_.end(), value); }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](real v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  void check_dims() const {
    for (std::size_t d : shape_) {
      require(d > 0, ErrorKind::kInvalidInput,
              "tensor dimensions must be positive, got " + shape_string(shape_));
    }
  }

  Shape shape_;
  std::vector<real> values_;
};

/// Stacks the given rows of `source` (indexed on its leading axis) into a new
/// tensor whose leading dimension is `indices.size()`.
inline Tensor gather_rows(const Tensor& source, std::span<const std::size_t> indices) {
  require(source.rank() >= 1 && !indices.empty(), ErrorKind::kInvalidInput,
          "gather_rows needs a non-empty index list");
  Shape shape = source.shape();
  shape[0] = indices.size();
  Tensor out(shape);
  const std::size_t n = source.row_size();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    require(indices[k] < source.dim(0), ErrorKind::kInvalidInput,
            "row index " + std::to_string(indices[k]) + " out of range");
    auto src = source.row(indices[k]);
    std::copy(src.begin(), src.end(), out.data() + k * n);
  }
  return out;
}

inline real max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorKind::kInvalidInput, "shape mismatch");
  real m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace advsub
