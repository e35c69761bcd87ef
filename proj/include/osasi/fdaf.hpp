#pragma once

#include "osasi/fft.hpp"
#include "osasi/signal.hpp"
#include "osasi/types.hpp"

#include <cstdint>
#include <vector>

namespace osasi {

struct FdafParams {
  double mu = 1.0;         // step size
  double nu = 0.9;         // recursive PSD averaging factor
  double delta_max = 1.0;  // dynamic regularization ceiling
  double delta_0 = 1.0;    // dynamic regularization knee

  void validate() const {
    if (mu < 0.0 || mu > 1.0) throw ConfigError("FdafParams: mu must be in [0, 1]");
    if (nu < 0.0 || nu >= 1.0) throw ConfigError("FdafParams: nu must be in [0, 1)");
    if (delta_max < 0.0 || delta_0 <= 0.0)
      throw ConfigError("FdafParams: regularization parameters must be positive");
  }
};

/// Running state of the frequency-domain adaptive filter: the recursive
/// input PSD estimate and the transform of the most recent coefficient
/// vector. The coefficients themselves are owned by the caller so that
/// projections applied between blocks take effect inside the filter.
struct FdafState {
  FirDims dims;
  FdafParams params;
  Matrix psd;                        // 2L x P, recursive |X|^2 average
  std::vector<CVector> coeff_spectra;  // P*Q scratch transforms (p*Q + q)
  std::int64_t block_index = 0;      // m, blocks processed so far
  RealFft fft;

  FdafState(const FirDims& d, const FdafParams& p)
      : dims(d), params(p), fft(2 * static_cast<Index>(d.taps)) {}

  Index fft_size() const { return 2 * static_cast<Index>(dims.taps); }
};

struct FdafStep {
  FirStack delta;  // mu-scaled, gradient-constrained update
  Matrix y_hat;    // L x Q a-priori block estimate
};

/// Fresh state: zero-equivalent coefficient scratch, PSD at a small
/// positive floor.
FdafState fdaf_init(const FirDims& dims, const FdafParams& params);

/// One adaptation step on a block: estimates the block output of `current`
/// by overlap-save, forms the block error against y_block, updates the PSD
/// recursion and returns the normalized, regularized, gradient-constrained
/// update. The caller applies `current += delta`.
FdafStep fdaf_step(FdafState& state, const Eigen::Ref<const Matrix>& history,
                   const Eigen::Ref<const Matrix>& y_block, const FirStack& current);

/// Same step with the per-input 2L-point history transforms precomputed,
/// so one forward transform per block can be shared with the evidence
/// computation.
FdafStep fdaf_step(FdafState& state, const std::vector<CVector>& input_spectra,
                   const Eigen::Ref<const Matrix>& y_block, const FirStack& current);

}  // namespace osasi
