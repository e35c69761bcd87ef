#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "osasi/rng.hpp"
#include "osasi/signal.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace osasi;

namespace {

Vector random_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// O(L^2) oracle: linear convolution outputs aligned with the newest L
// samples of a 2L window. Output j corresponds to window position L + j.
Vector direct_convolve(const Vector& history, const Vector& taps) {
  const Index block = history.size() / 2;
  Vector out = Vector::Zero(block);
  for (Index j = 0; j < block; ++j)
    for (Index k = 0; k < taps.size(); ++k) {
      const Index pos = block + j - k;
      if (pos >= 0) out(j) += taps(k) * history(pos);
    }
  return out;
}

}  // namespace

TEST_CASE("overlap-save with a unit impulse returns the newest samples") {
  Rng rng(1);
  const int block = 16;
  const Vector history = random_vector(rng, 2 * block);
  Vector impulse = Vector::Zero(block);
  impulse(0) = 1.0;
  const Vector out = overlap_save_convolve(history, fir_spectrum(impulse, block));
  CHECK((out - history.tail(block)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("overlap-save of zeros is zero") {
  Rng rng(2);
  const int block = 32;
  const Vector out =
      overlap_save_convolve(Vector::Zero(2 * block), fir_spectrum(random_vector(rng, block), block));
  CHECK(out.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("overlap-save matches direct convolution over random pairs") {
  Rng rng(3);
  double worst = 0.0;
  for (int block : {8, 64, 512}) {
    RealFft fft(2 * block);
    for (int rep = 0; rep < 67; ++rep) {
      const Vector history = random_vector(rng, 2 * block);
      const Vector taps = random_vector(rng, block);
      const Vector fast = overlap_save_apply(fft.forward(history), fir_spectrum(taps, block, fft), fft);
      worst = std::max(worst, (fast - direct_convolve(history, taps)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("overlap-save rejects mismatched window") {
  Rng rng(4);
  const Vector taps = random_vector(rng, 8);
  CHECK_THROWS_AS(overlap_save_convolve(Vector::Zero(10), fir_spectrum(taps, 8)), DimensionError);
}

TEST_CASE("vec of a scalar filter") {
  Matrix h(1, 1);
  h << 3.0;
  const FirStack fir = vec_fir(h, FirDims{1, 1, 1});
  CHECK(fir.coeffs.size() == 1);
  CHECK(fir.coeffs(0) == 3.0);
}

TEST_CASE("vec layout interleaves outputs per tap") {
  Matrix h(2, 2);
  h << 1.0, 2.0, 3.0, 4.0;  // tap 0 -> (a, b), tap 1 -> (c, d)
  const FirStack fir = vec_fir(h, FirDims{1, 2, 2});
  CHECK(fir.coeffs(0) == 1.0);
  CHECK(fir.coeffs(1) == 2.0);
  CHECK(fir.coeffs(2) == 3.0);
  CHECK(fir.coeffs(3) == 4.0);
}

TEST_CASE("vec/unvec round trip is exact") {
  Rng rng(5);
  const FirDims dims{2, 3, 2};
  Matrix h(dims.inputs * dims.taps, dims.outputs);
  for (Index r = 0; r < h.rows(); ++r)
    for (Index c = 0; c < h.cols(); ++c) h(r, c) = rng.normal();
  const Matrix back = unvec_fir(vec_fir(h, dims));
  CHECK((back.array() == h.array()).all());
}

TEST_CASE("layout satisfies the Kronecker identity") {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const FirDims dims{2, 4, 3};
    Matrix h(dims.inputs * dims.taps, dims.outputs);
    for (Index r = 0; r < h.rows(); ++r)
      for (Index c = 0; c < h.cols(); ++c) h(r, c) = rng.normal();
    const FirStack fir = vec_fir(h, dims);
    const Vector x = random_vector(rng, dims.inputs * dims.taps);

    // (x^T kron I_Q) h via the explicit Kronecker block structure.
    Vector via_kron = Vector::Zero(dims.outputs);
    for (Index j = 0; j < x.size(); ++j)
      for (int q = 0; q < dims.outputs; ++q)
        via_kron(q) += x(j) * fir.coeffs(j * dims.outputs + q);

    const Vector via_matrix = h.transpose() * x;
    CHECK((via_kron - via_matrix).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("vec rejects mismatched shapes") {
  CHECK_THROWS_AS(vec_fir(Matrix::Zero(3, 2), FirDims{1, 2, 2}), DimensionError);
}

TEST_CASE("apply_fir_stack pass-through routing") {
  Rng rng(7);
  const FirDims dims{1, 8, 1};
  FirStack fir = FirStack::zeros(dims);
  fir.at(0, 0, 0) = 1.0;
  MultichannelSignal x(random_vector(rng, 100), 8000.0);
  const MultichannelSignal y = apply_fir_stack(fir, x);
  CHECK((y.samples - x.samples).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("apply_fir_stack delay filters") {
  Rng rng(8);
  const FirDims dims{1, 8, 2};
  FirStack fir = FirStack::zeros(dims);
  fir.at(0, 0, 0) = 1.0;  // channel 0: identity
  fir.at(0, 1, 1) = 1.0;  // channel 1: one-sample delay
  MultichannelSignal x(random_vector(rng, 64), 8000.0);
  const MultichannelSignal y = apply_fir_stack(fir, x);
  CHECK((y.samples.col(0) - x.samples.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(y.samples(0, 1)) < 1e-12);
  CHECK((y.samples.col(1).tail(63) - x.samples.col(0).head(63)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("apply_fir_stack matches the per-sample evaluation") {
  Rng rng(9);
  const FirDims dims{2, 6, 2};
  Matrix h(dims.inputs * dims.taps, dims.outputs);
  for (Index r = 0; r < h.rows(); ++r)
    for (Index c = 0; c < h.cols(); ++c) h(r, c) = rng.normal();
  const FirStack fir = vec_fir(h, dims);

  Matrix x(40, dims.inputs);
  for (Index r = 0; r < x.rows(); ++r)
    for (Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal();
  const MultichannelSignal y = apply_fir_stack(fir, MultichannelSignal(x, 8000.0));

  // y_q(n) = sum_p sum_l h_pq(l) x_p(n - l), zero initial state.
  for (Index n = 0; n < x.rows(); ++n)
    for (int q = 0; q < dims.outputs; ++q) {
      double expected = 0.0;
      for (int p = 0; p < dims.inputs; ++p)
        for (int l = 0; l < dims.taps; ++l)
          if (n - l >= 0) expected += fir.at(p, l, q) * x(n - l, p);
      CHECK(std::abs(y.samples(n, q) - expected) <= 1e-10);
    }
}

TEST_CASE("apply_fir_stack rejects channel mismatch") {
  const FirStack fir = FirStack::zeros(FirDims{2, 4, 1});
  CHECK_THROWS_AS(apply_fir_stack(fir, MultichannelSignal(Matrix::Zero(10, 1), 8000.0)),
                  DimensionError);
}

TEST_CASE("block stream zero-pads before the first block") {
  BlockStream stream(4, 1);
  CHECK(stream.history().cwiseAbs().maxCoeff() == 0.0);
  Matrix block(4, 1);
  block << 1, 2, 3, 4;
  stream.push(block);
  CHECK(stream.blocks() == 1);
  CHECK(stream.history().col(0).head(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(stream.history()(4, 0) == 1.0);
  CHECK(stream.history()(7, 0) == 4.0);
}

TEST_CASE("white excitation statistics") {
  const ExcitationSpec spec{ExcitationKind::kWhiteNoise, 1.0, 0.9, 1.0, {}};
  const MultichannelSignal x = generate_excitation(spec, 8000.0, 11);
  CHECK(x.frames() == 8000);
  CHECK(std::abs(x.samples.col(0).mean()) < 0.05);

  const MultichannelSignal again = generate_excitation(spec, 8000.0, 11);
  CHECK((x.samples.array() == again.samples.array()).all());
}

TEST_CASE("ar1 with pole zero equals gated white noise") {
  const ExcitationSpec wgn{ExcitationKind::kWhiteNoise, 2.0, 0.9, 1.0, {}};
  const ExcitationSpec ar{ExcitationKind::kAr1, 2.0, 0.0, 1.0, {}};
  Matrix expected = generate_excitation(wgn, 8000.0, 12).samples;
  for (Index n = 0; n < expected.rows(); ++n)
    if (std::fmod(static_cast<double>(n), 8000.0) >= 4000.0) expected.row(n).setZero();
  const MultichannelSignal gated = generate_excitation(ar, 8000.0, 12);
  CHECK((gated.samples.array() == expected.array()).all());
}

TEST_CASE("ar1 pole shows up as lag-1 autocorrelation") {
  const ExcitationSpec spec{ExcitationKind::kAr1, 12.5, 0.9, 1.0, {}};
  const Vector x = generate_excitation(spec, 8000.0, 13).samples.col(0);
  double cov = 0.0, var = 0.0;
  for (Index n = 1; n < x.size(); ++n) {
    cov += x(n) * x(n - 1);
    var += x(n) * x(n);
  }
  CHECK(std::abs(cov / var - 0.9) < 0.02);
}

TEST_CASE("wav ingestion") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "osasi_wav_test";
  fs::create_directories(dir);
  const std::string path = (dir / "tone.wav").string();

  // Hand-built 4-sample mono PCM16 file at 8 kHz.
  const std::int16_t pcm[4] = {0, 16384, -16384, 32767};
  std::ofstream out(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  out.write("RIFF", 4);
  u32(36 + 8);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(1);     // PCM
  u16(1);     // mono
  u32(8000);  // rate
  u32(8000 * 2);
  u16(2);
  u16(16);
  out.write("data", 4);
  u32(8);
  out.write(reinterpret_cast<const char*>(pcm), 8);
  out.close();

  const MultichannelSignal wav = read_wav(path);
  CHECK(wav.sample_rate == 8000.0);
  CHECK(wav.frames() == 4);
  CHECK(wav.samples(0, 0) == 0.0);
  CHECK(wav.samples(1, 0) == doctest::Approx(0.5));
  CHECK(wav.samples(2, 0) == doctest::Approx(-0.5));

  // Excitation path enforces rate match and duration.
  ExcitationSpec spec{ExcitationKind::kWavFile, 4.0 / 8000.0, 0.9, 1.0, path};
  const MultichannelSignal x = generate_excitation(spec, 8000.0, 0);
  CHECK(x.frames() == 4);
  spec.duration_s = 1.0;
  CHECK_THROWS_AS(generate_excitation(spec, 8000.0, 0), IngestionError);
  spec.duration_s = 4.0 / 8000.0;
  CHECK_THROWS_AS(generate_excitation(spec, 16000.0, 0), IngestionError);
  spec.wav_path = (dir / "missing.wav").string();
  CHECK_THROWS_AS(generate_excitation(spec, 8000.0, 0), IngestionError);
}
