#pragma once

#include "osasi/types.hpp"

#include <unsupported/Eigen/FFT>

namespace osasi {

/// Real-input FFT of a fixed size. Forward is unnormalized, inverse applies
/// the 1/n factor, so inverse(forward(x)) == x. Instances cache plans and are
/// not thread safe; use one per thread of execution.
class RealFft {
 public:
  explicit RealFft(Index n) : n_(n) {
    if (n < 2) throw DimensionError("RealFft: transform size must be >= 2");
  }

  Index size() const { return n_; }

  CVector forward(const Eigen::Ref<const Vector>& x) {
    if (x.size() != n_) throw DimensionError("RealFft::forward: size mismatch");
    CVector out(n_);
    buffer_ = x;
    impl_.fwd(out, buffer_);
    return out;
  }

  Vector inverse(const Eigen::Ref<const CVector>& spectrum) {
    if (spectrum.size() != n_) throw DimensionError("RealFft::inverse: size mismatch");
    Vector out(n_);
    cbuffer_ = spectrum;
    impl_.inv(out, cbuffer_);
    return out;
  }

 private:
  Index n_;
  Eigen::FFT<double> impl_;
  Vector buffer_;
  CVector cbuffer_;
};

}  // namespace osasi
