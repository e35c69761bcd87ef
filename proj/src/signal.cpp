#include "osasi/signal.hpp"

#include "osasi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace osasi {

FirStack vec_fir(const Eigen::Ref<const Matrix>& transmission, const FirDims& dims) {
  dims.validate();
  if (transmission.rows() != static_cast<Index>(dims.inputs) * dims.taps ||
      transmission.cols() != dims.outputs)
    throw DimensionError("vec_fir: transmission matrix shape does not match dims");
  FirStack out = FirStack::zeros(dims);
  for (int p = 0; p < dims.inputs; ++p)
    for (int l = 0; l < dims.taps; ++l)
      for (int q = 0; q < dims.outputs; ++q)
        out.at(p, l, q) = transmission(static_cast<Index>(p) * dims.taps + l, q);
  return out;
}

Matrix unvec_fir(const FirStack& fir) {
  fir.validate();
  const FirDims& d = fir.dims;
  Matrix out(static_cast<Index>(d.inputs) * d.taps, d.outputs);
  for (int p = 0; p < d.inputs; ++p)
    for (int l = 0; l < d.taps; ++l)
      for (int q = 0; q < d.outputs; ++q)
        out(static_cast<Index>(p) * d.taps + l, q) = fir.at(p, l, q);
  return out;
}

CVector fir_spectrum(const Eigen::Ref<const Vector>& taps, int block_length, RealFft& fft) {
  const Index n = 2 * static_cast<Index>(block_length);
  if (taps.size() > block_length)
    throw DimensionError("fir_spectrum: FIR longer than the block length");
  if (fft.size() != n) throw DimensionError("fir_spectrum: FFT size must be 2L");
  Vector padded = Vector::Zero(n);
  padded.head(taps.size()) = taps;
  return fft.forward(padded);
}

CVector fir_spectrum(const Eigen::Ref<const Vector>& taps, int block_length) {
  RealFft fft(2 * static_cast<Index>(block_length));
  return fir_spectrum(taps, block_length, fft);
}

Vector overlap_save_apply(const CVector& input_spectrum, const CVector& fir_spectrum,
                          RealFft& fft) {
  if (input_spectrum.size() != fir_spectrum.size())
    throw DimensionError("overlap_save_apply: spectrum sizes differ");
  if (fft.size() != input_spectrum.size())
    throw DimensionError("overlap_save_apply: FFT size mismatch");
  const CVector product = input_spectrum.cwiseProduct(fir_spectrum);
  const Vector full = fft.inverse(product);
  return full.tail(full.size() / 2);
}

Vector overlap_save_convolve(const Eigen::Ref<const Vector>& history, const CVector& fir_spec) {
  if (history.size() != fir_spec.size())
    throw DimensionError("overlap_save_convolve: history and transform sizes differ");
  if (history.size() % 2 != 0)
    throw DimensionError("overlap_save_convolve: window length must be 2L");
  RealFft fft(history.size());
  return overlap_save_apply(fft.forward(history), fir_spec, fft);
}

MultichannelSignal apply_fir_stack(const FirStack& fir, const MultichannelSignal& x) {
  fir.validate();
  const FirDims& d = fir.dims;
  if (x.channels() != d.inputs)
    throw DimensionError("apply_fir_stack: input channel count does not match FIR inputs");

  const Index frames = x.frames();
  const int block = d.taps;
  const Index n_fft = 2 * static_cast<Index>(block);
  RealFft fft(n_fft);

  // Transform each (p, q) sub-filter once.
  std::vector<CVector> filter_spec(static_cast<std::size_t>(d.inputs) * d.outputs);
  for (int p = 0; p < d.inputs; ++p)
    for (int q = 0; q < d.outputs; ++q)
      filter_spec[static_cast<std::size_t>(p) * d.outputs + q] =
          fir_spectrum(fir.taps_of(p, q), block, fft);

  Matrix out = Matrix::Zero(frames, d.outputs);
  BlockStream stream(block, d.inputs);
  const Index n_blocks = (frames + block - 1) / block;
  for (Index b = 0; b < n_blocks; ++b) {
    Matrix in_block = Matrix::Zero(block, d.inputs);
    const Index take = std::min<Index>(block, frames - b * block);
    in_block.topRows(take) = x.samples.middleRows(b * block, take);
    stream.push(in_block);

    std::vector<CVector> in_spec(static_cast<std::size_t>(d.inputs));
    for (int p = 0; p < d.inputs; ++p) in_spec[p] = fft.forward(stream.history().col(p));

    for (int q = 0; q < d.outputs; ++q) {
      CVector acc = CVector::Zero(n_fft);
      for (int p = 0; p < d.inputs; ++p)
        acc += in_spec[p].cwiseProduct(filter_spec[static_cast<std::size_t>(p) * d.outputs + q]);
      const Vector y = fft.inverse(acc).tail(block);
      out.col(q).segment(b * block, take) = y.head(take);
    }
  }
  return {std::move(out), x.sample_rate};
}

namespace {

Matrix white_noise(Index frames, int channels, std::uint64_t seed) {
  Matrix out(frames, channels);
  for (int c = 0; c < channels; ++c) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(c)));
    for (Index n = 0; n < frames; ++n) out(n, c) = rng.normal();
  }
  return out;
}

}  // namespace

MultichannelSignal generate_excitation(const ExcitationSpec& spec, double sample_rate,
                                       std::uint64_t seed, int channels) {
  if (spec.duration_s <= 0.0) throw ConfigError("generate_excitation: duration must be positive");
  if (sample_rate <= 0.0) throw ConfigError("generate_excitation: sample rate must be positive");
  if (channels < 1) throw ConfigError("generate_excitation: channel count must be positive");
  const Index frames = static_cast<Index>(std::llround(spec.duration_s * sample_rate));

  switch (spec.kind) {
    case ExcitationKind::kWhiteNoise:
      return {white_noise(frames, channels, seed), sample_rate};

    case ExcitationKind::kAr1: {
      if (std::abs(spec.ar_pole) >= 1.0)
        throw ConfigError("generate_excitation: AR(1) pole must satisfy |pole| < 1");
      if (spec.modulation_period_s <= 0.0)
        throw ConfigError("generate_excitation: modulation period must be positive");
      Matrix out = white_noise(frames, channels, seed);
      for (int c = 0; c < channels; ++c) {
        double state = 0.0;
        for (Index n = 0; n < frames; ++n) {
          state = spec.ar_pole * state + out(n, c);
          out(n, c) = state;
        }
      }
      // On/off gating: first half of each period on, second half off.
      const double period = spec.modulation_period_s * sample_rate;
      for (Index n = 0; n < frames; ++n) {
        const double phase = std::fmod(static_cast<double>(n), period);
        if (phase >= 0.5 * period) out.row(n).setZero();
      }
      return {std::move(out), sample_rate};
    }

    case ExcitationKind::kWavFile: {
      if (channels != 1)
        throw IngestionError("generate_excitation: WAV excitation is mono only");
      MultichannelSignal wav = read_wav(spec.wav_path);
      if (wav.sample_rate != sample_rate)
        throw IngestionError("generate_excitation: WAV sample rate does not match scenario");
      if (wav.frames() < frames)
        throw IngestionError("generate_excitation: WAV file shorter than requested duration");
      return {wav.samples.topRows(frames), sample_rate};
    }
  }
  throw ConfigError("generate_excitation: unknown excitation kind");
}

}  // namespace osasi
