#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace toric {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Symmetric derivative tensors stored densely, index (i,j,k) -> 4i+2j+k.
using Tensor3 = std::array<double, 8>;
using Tensor4 = std::array<double, 16>;

constexpr int ix3(int i, int j, int k) { return 4 * i + 2 * j + k; }
constexpr int ix4(int i, int j, int k, int l) { return 8 * i + 4 * j + 2 * k + l; }

// Anything the caller could fix by changing the mathematical input.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace toric
