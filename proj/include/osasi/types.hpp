#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace osasi {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct IngestionError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};

/// Dimensions of a stacked MIMO FIR: P input channels, L taps per filter,
/// Q output channels. The stacked coefficient vector has length R = P*L*Q.
struct FirDims {
  int inputs = 1;   // P
  int taps = 1;     // L
  int outputs = 1;  // Q

  Index stacked() const {
    return static_cast<Index>(inputs) * taps * outputs;
  }

  /// Index of (input p, tap l, output q) in the stacked vector. The layout
  /// q + Q*(l + L*p) is vec of the transposed PL x Q transmission matrix,
  /// so (x(n)^T kron I_Q) h equals H^T x(n) for every input vector x(n).
  Index index(int p, int l, int q) const {
    return static_cast<Index>(q) +
           static_cast<Index>(outputs) * (static_cast<Index>(l) + static_cast<Index>(taps) * p);
  }

  bool operator==(const FirDims& other) const = default;

  void validate() const {
    if (inputs < 1 || taps < 1 || outputs < 1)
      throw DimensionError("FirDims: all dimensions must be positive");
  }
};

}  // namespace osasi
