#pragma once

#include "osasi/fft.hpp"
#include "osasi/types.hpp"

#include <cstdint>
#include <string>

namespace osasi {

/// A block of equal-length sample sequences, one channel per column.
struct MultichannelSignal {
  Matrix samples;  // frames x channels
  double sample_rate = 0.0;

  MultichannelSignal() = default;
  MultichannelSignal(Matrix samples_, double sample_rate_)
      : samples(std::move(samples_)), sample_rate(sample_rate_) {
    if (sample_rate <= 0.0)
      throw ConfigError("MultichannelSignal: sample rate must be positive");
  }

  Index frames() const { return samples.rows(); }
  Index channels() const { return samples.cols(); }
};

/// The stacked adaptive-filter coefficient vector h in R^R, R = P*L*Q,
/// with the vec layout documented in FirDims::index.
struct FirStack {
  FirDims dims;
  Vector coeffs;

  static FirStack zeros(const FirDims& dims) {
    dims.validate();
    return FirStack{dims, Vector::Zero(dims.stacked())};
  }

  Scalar& at(int p, int l, int q) { return coeffs(dims.index(p, l, q)); }
  Scalar at(int p, int l, int q) const { return coeffs(dims.index(p, l, q)); }

  /// Taps of the (p, q) sub-filter as a contiguous vector.
  Vector taps_of(int p, int q) const {
    Vector t(dims.taps);
    for (int l = 0; l < dims.taps; ++l) t(l) = at(p, l, q);
    return t;
  }

  void validate() const {
    dims.validate();
    if (coeffs.size() != dims.stacked())
      throw DimensionError("FirStack: coefficient length does not match dims");
  }
};

/// Stack a PL x Q transmission matrix into coefficient-vector form.
FirStack vec_fir(const Eigen::Ref<const Matrix>& transmission, const FirDims& dims);

/// Inverse of vec_fir; returns the PL x Q transmission matrix.
Matrix unvec_fir(const FirStack& fir);

/// Sliding 2L-sample input window per channel, zero-padded before the first
/// block. Block b (0-based) covers input samples [b*L, b*L + L).
class BlockStream {
 public:
  BlockStream(int block_length, int channels)
      : block_length_(block_length),
        history_(Matrix::Zero(2 * static_cast<Index>(block_length), channels)) {
    if (block_length < 1 || channels < 1)
      throw DimensionError("BlockStream: block length and channels must be positive");
  }

  void push(const Eigen::Ref<const Matrix>& block) {
    if (block.rows() != block_length_ || block.cols() != history_.cols())
      throw DimensionError("BlockStream::push: block shape mismatch");
    history_.topRows(block_length_) = history_.bottomRows(block_length_);
    history_.bottomRows(block_length_) = block;
    ++count_;
  }

  /// Most recent 2L samples per channel (oldest first).
  const Matrix& history() const { return history_; }
  int block_length() const { return block_length_; }
  std::int64_t blocks() const { return count_; }

 private:
  int block_length_;
  std::int64_t count_ = 0;
  Matrix history_;
};

/// 2L-point transform of an FIR with at most L taps (zero-padded).
CVector fir_spectrum(const Eigen::Ref<const Vector>& taps, int block_length, RealFft& fft);
CVector fir_spectrum(const Eigen::Ref<const Vector>& taps, int block_length);

/// Last L samples of ifft(input_spectrum .* fir_spectrum): the valid linear
/// convolution outputs of one overlap-save block.
Vector overlap_save_apply(const CVector& input_spectrum, const CVector& fir_spectrum, RealFft& fft);

/// Overlap-save convolution of one block: history holds the most recent 2L
/// input samples, fir_spec is a 2L-point transform of an L-tap FIR. Returns
/// the L convolution outputs aligned with the newest L input samples.
Vector overlap_save_convolve(const Eigen::Ref<const Vector>& history, const CVector& fir_spec);

/// Run a whole signal through a stacked MIMO FIR (zero initial state),
/// block-by-block via overlap-save. Output has one column per FIR output.
MultichannelSignal apply_fir_stack(const FirStack& fir, const MultichannelSignal& x);

enum class ExcitationKind {
  kWhiteNoise,  // zero mean, unit variance Gaussian
  kAr1,         // one-pole colored noise with on/off amplitude modulation
  kWavFile,     // mono WAV file, no resampling
};

struct ExcitationSpec {
  ExcitationKind kind = ExcitationKind::kWhiteNoise;
  double duration_s = 1.0;
  double ar_pole = 0.9;
  double modulation_period_s = 1.0;  // first half on, second half off
  std::string wav_path;
};

/// Deterministic excitation generator; equal seeds give equal signals.
MultichannelSignal generate_excitation(const ExcitationSpec& spec, double sample_rate,
                                       std::uint64_t seed, int channels = 1);

/// Read a mono 16-bit PCM or 32-bit float WAV file.
MultichannelSignal read_wav(const std::string& path);

}  // namespace osasi
