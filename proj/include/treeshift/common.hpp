#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace treeshift {

// Error categories double as process exit codes in the CLI and as status codes
// in the C API.
enum class ErrorCode : int {
  Parse = 2,
  Validation = 3,
  Numeric = 4,
  Resource = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense square matrix, row-major. Throughout the library rows index the
/// CHILD symbol and columns index the PARENT symbol: m(a, b) is the entry for
/// "child a under parent b".
template <class T>
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    Matrix m(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (rows[a].size() != rows.size()) throw std::invalid_argument("matrix is not square");
      for (std::size_t b = 0; b < rows.size(); ++b) m(a, b) = rows[a][b];
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  T& operator()(std::size_t child, std::size_t parent) { return data_[child * n_ + parent]; }
  const T& operator()(std::size_t child, std::size_t parent) const { return data_[child * n_ + parent]; }

  Matrix transposed() const {
    Matrix t(n_);
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b) t(b, a) = (*this)(a, b);
    return t;
  }

  std::vector<std::vector<T>> rows() const {
    std::vector<std::vector<T>> out(n_, std::vector<T>(n_));
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b) out[a][b] = (*this)(a, b);
    return out;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

using BoolMatrix = Matrix<std::uint8_t>;
using RealMatrix = Matrix<double>;

/// Nonnegative weights stored as logarithms; -inf marks a zero entry.
using WeightMatrix = RealMatrix;

inline WeightMatrix to_log_weights(const RealMatrix& w) {
  WeightMatrix out(w.size(), kNegInf);
  for (std::size_t a = 0; a < w.size(); ++a)
    for (std::size_t b = 0; b < w.size(); ++b)
      if (w(a, b) > 0.0) out(a, b) = std::log(w(a, b));
  return out;
}

inline WeightMatrix to_log_weights(const BoolMatrix& adj) {
  WeightMatrix out(adj.size(), kNegInf);
  for (std::size_t a = 0; a < adj.size(); ++a)
    for (std::size_t b = 0; b < adj.size(); ++b)
      if (adj(a, b)) out(a, b) = 0.0;
  return out;
}

/// Streaming log-sum-exp accumulator (single pass, rescales on a new maximum).
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
  LogSumExp acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

/// Configurable resource limits shared by the modules.
struct Limits {
  std::size_t max_alphabet = 64;
  std::uint64_t max_tree_nodes = std::uint64_t{1} << 27;
  std::uint64_t max_sample_nodes = std::uint64_t{1} << 25;
  std::uint64_t max_block_listing = 100'000'000;
  std::uint64_t max_type_classes = 1'000'000;
};

}  // namespace treeshift
