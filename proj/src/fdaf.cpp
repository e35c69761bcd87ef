#include "osasi/fdaf.hpp"

#include <cmath>

namespace osasi {

FdafState fdaf_init(const FirDims& dims, const FdafParams& params) {
  dims.validate();
  params.validate();
  FdafState state(dims, params);
  state.psd = Matrix::Constant(state.fft_size(), dims.inputs, 1e-8);
  state.coeff_spectra.assign(static_cast<std::size_t>(dims.inputs) * dims.outputs,
                             CVector::Zero(state.fft_size()));
  return state;
}

FdafStep fdaf_step(FdafState& state, const Eigen::Ref<const Matrix>& history,
                   const Eigen::Ref<const Matrix>& y_block, const FirStack& current) {
  if (history.rows() != state.fft_size() || history.cols() != state.dims.inputs)
    throw DimensionError("fdaf_step: history must be 2L x P");
  std::vector<CVector> spectra(static_cast<std::size_t>(state.dims.inputs));
  for (int p = 0; p < state.dims.inputs; ++p)
    spectra[static_cast<std::size_t>(p)] = state.fft.forward(history.col(p));
  return fdaf_step(state, spectra, y_block, current);
}

FdafStep fdaf_step(FdafState& state, const std::vector<CVector>& input_spectra,
                   const Eigen::Ref<const Matrix>& y_block, const FirStack& current) {
  const FirDims& d = state.dims;
  const int block = d.taps;
  const Index n_fft = state.fft_size();
  if (static_cast<int>(input_spectra.size()) != d.inputs)
    throw DimensionError("fdaf_step: need one input spectrum per channel");
  if (y_block.rows() != block || y_block.cols() != d.outputs)
    throw DimensionError("fdaf_step: observed block must be L x Q");
  if (!(current.dims == d)) throw DimensionError("fdaf_step: coefficient dims mismatch");

  // Transform the caller-owned coefficients; the time-domain equivalent of
  // each spectrum has its last L taps zero by construction.
  for (int p = 0; p < d.inputs; ++p)
    for (int q = 0; q < d.outputs; ++q)
      state.coeff_spectra[static_cast<std::size_t>(p) * d.outputs + q] =
          fir_spectrum(current.taps_of(p, q), block, state.fft);

  // A-priori block estimate (overlap-save output of the current filter).
  Matrix y_hat(block, d.outputs);
  for (int q = 0; q < d.outputs; ++q) {
    CVector acc = CVector::Zero(n_fft);
    for (int p = 0; p < d.inputs; ++p)
      acc += input_spectra[static_cast<std::size_t>(p)].cwiseProduct(
          state.coeff_spectra[static_cast<std::size_t>(p) * d.outputs + q]);
    y_hat.col(q) = state.fft.inverse(acc).tail(block);
  }

  // Block error, transformed with the first half of the frame zeroed.
  std::vector<CVector> error_spec(static_cast<std::size_t>(d.outputs));
  for (int q = 0; q < d.outputs; ++q) {
    Vector padded = Vector::Zero(n_fft);
    padded.tail(block) = y_block.col(q) - y_hat.col(q);
    error_spec[static_cast<std::size_t>(q)] = state.fft.forward(padded);
  }

  // PSD recursion and its bias-corrected value. Dividing by 1 - nu^m makes
  // the divisor track the block periodogram from the first block onward;
  // the two coincide as m grows.
  state.block_index += 1;
  const double correction = 1.0 - std::pow(state.params.nu, static_cast<double>(state.block_index));
  Matrix corrected(n_fft, d.inputs);
  for (int p = 0; p < d.inputs; ++p) {
    state.psd.col(p) = state.params.nu * state.psd.col(p) +
                       (1.0 - state.params.nu) *
                           input_spectra[static_cast<std::size_t>(p)].cwiseAbs2();
    corrected.col(p) = state.psd.col(p) / correction;
  }

  FdafStep step;
  step.y_hat = std::move(y_hat);
  step.delta = FirStack::zeros(d);
  for (int p = 0; p < d.inputs; ++p) {
    const Vector& s = corrected.col(p);
    const double s_mean = s.mean();
    // delta(f) = delta_max * exp(-S(f) / (delta_0 * mean S)): strong
    // regularization exactly where excitation power is weak.
    Vector divisor(n_fft);
    for (Index f = 0; f < n_fft; ++f) {
      const double reg =
          s_mean > 0.0
              ? state.params.delta_max * std::exp(-s(f) / (state.params.delta_0 * s_mean))
              : state.params.delta_max;
      divisor(f) = s(f) + reg;
    }
    for (int q = 0; q < d.outputs; ++q) {
      const CVector gradient =
          input_spectra[static_cast<std::size_t>(p)]
              .conjugate()
              .cwiseProduct(error_spec[static_cast<std::size_t>(q)])
              .cwiseQuotient(divisor.cast<Complex>());
      // Gradient constraint: keep only the first L time-domain taps.
      const Vector update = state.fft.inverse(gradient).head(block);
      for (int l = 0; l < block; ++l)
        step.delta.at(p, l, q) = state.params.mu * update(l);
    }
  }
  return step;
}

}  // namespace osasi
