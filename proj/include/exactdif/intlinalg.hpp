#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "exactdif/config.hpp"

namespace exactdif {

using BigInt = boost::multiprecision::cpp_int;

/// Dense row-major matrix of arbitrary-precision integers.
class IntegerMatrix {
 public:
  IntegerMatrix() = default;
  IntegerMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

  static IntegerMatrix identity(std::size_t n);
  static IntegerMatrix from(const ConfigurationMatrix& config);
  static IntegerMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  BigInt& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  IntegerMatrix transpose() const;
  IntegerMatrix operator*(const IntegerMatrix& other) const;
  friend bool operator==(const IntegerMatrix&, const IntegerMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<BigInt> e_;
};

struct HermiteForm {
  IntegerMatrix h;  ///< row Hermite normal form of the input
  IntegerMatrix u;  ///< unimodular, u * input == h
  std::size_t rank = 0;
};

/// Row-style Hermite normal form: echelon, positive pivots, entries above a
/// pivot reduced into [0, pivot).
HermiteForm hnf(const IntegerMatrix& m);

std::size_t rank(const IntegerMatrix& m);

/// Integer vectors spanning ker(config) over Z. The basis is saturated (any
/// integer kernel vector is an integer combination) and has
/// cols - rank(config) elements. Vectors are size-reduced pairwise.
std::vector<std::vector<std::int64_t>> kernel_lattice(const IntegerMatrix& m);
std::vector<std::vector<std::int64_t>> kernel_lattice(const ConfigurationMatrix& config);

}  // namespace exactdif
