#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "osasi/fdaf.hpp"
#include "osasi/metrics.hpp"
#include "osasi/rng.hpp"

#include <cmath>
#include <iostream>
#include <vector>

using namespace osasi;

namespace {

Vector random_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Expected a-priori block output of `fir` for the given 2L history.
Matrix expected_output(const FirStack& fir, const Matrix& history) {
  const int block = fir.dims.taps;
  Matrix out(block, fir.dims.outputs);
  for (int q = 0; q < fir.dims.outputs; ++q) {
    Vector acc = Vector::Zero(block);
    for (int p = 0; p < fir.dims.inputs; ++p)
      acc += overlap_save_convolve(history.col(p), fir_spectrum(fir.taps_of(p, q), block));
    out.col(q) = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("fresh state exports a zero filter and rejects bad parameters") {
  const FirDims dims{1, 16, 2};
  FdafState state = fdaf_init(dims, FdafParams{});
  CHECK(state.psd.minCoeff() > 0.0);
  for (const auto& spec : state.coeff_spectra) CHECK(spec.cwiseAbs().maxCoeff() == 0.0);
  CHECK(FirStack::zeros(dims).coeffs.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(fdaf_init(dims, FdafParams{1.0, 1.5, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(fdaf_init(dims, FdafParams{-0.5, 0.9, 1.0, 1.0}), ConfigError);
}

TEST_CASE("zero observation error gives exactly zero update") {
  Rng rng(1);
  const FirDims dims{1, 16, 2};
  FdafState state = fdaf_init(dims, FdafParams{});
  FirStack current = FirStack::zeros(dims);
  for (Index i = 0; i < current.coeffs.size(); ++i) current.coeffs(i) = rng.normal();

  Matrix history(32, 1);
  history.col(0) = random_vector(rng, 32);
  const Matrix y = expected_output(current, history);
  const FdafStep step = fdaf_step(state, history, y, current);
  CHECK((step.y_hat - y).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(step.delta.coeffs.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero step size freezes the filter") {
  Rng rng(2);
  const FirDims dims{1, 8, 1};
  FdafState state = fdaf_init(dims, FdafParams{0.0, 0.9, 1.0, 1.0});
  const FirStack current = FirStack::zeros(dims);
  Matrix history(16, 1);
  history.col(0) = random_vector(rng, 16);
  Matrix y(8, 1);
  y.col(0) = random_vector(rng, 8);
  const FdafStep step = fdaf_step(state, history, y, current);
  CHECK(step.delta.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coefficient transforms keep their last L taps zero") {
  Rng rng(3);
  const FirDims dims{1, 16, 2};
  FdafState state = fdaf_init(dims, FdafParams{});
  FirStack current = FirStack::zeros(dims);
  RealFft fft(32);
  for (int b = 0; b < 5; ++b) {
    Matrix history(32, 1);
    history.col(0) = random_vector(rng, 32);
    Matrix y(16, 2);
    for (int q = 0; q < 2; ++q) y.col(q) = random_vector(rng, 16);
    const FdafStep step = fdaf_step(state, history, y, current);
    current.coeffs += step.delta.coeffs;
    for (const auto& spec : state.coeff_spectra)
      CHECK(fft.inverse(spec).tail(16).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("psd recursion converges geometrically to the input power") {
  const FirDims dims{1, 16, 1};
  FdafState state = fdaf_init(dims, FdafParams{});
  const FirStack current = FirStack::zeros(dims);
  const Matrix y = Matrix::Zero(16, 1);

  BlockStream stream(16, 1);
  std::vector<double> error;
  const double target = 32.0 * 32.0;  // |X(0)|^2 of an all-ones 2L frame
  for (int b = 0; b < 40; ++b) {
    stream.push(Matrix::Ones(16, 1));
    fdaf_step(state, stream.history(), y, current);
    error.push_back(std::abs(state.psd(0, 0) - target));
  }
  for (int b = 10; b < 30; ++b) {
    const double ratio = error[static_cast<std::size_t>(b + 1)] / error[static_cast<std::size_t>(b)];
    CHECK(ratio == doctest::Approx(0.9).epsilon(0.02));
  }
  // 0.9^6.6 ~ 0.5: the error halves every ~6.6 blocks.
  CHECK(error[20] / error[13] == doctest::Approx(0.5).epsilon(0.05));
}

// Regression-pinned convergence speed of the noiseless identification run.
constexpr int kConvergenceBlocks = 8;

TEST_CASE("noiseless identification converges below -40 dB") {
  Rng rng(4);
  const int block = 16;
  const FirDims dims{1, block, 1};

  FirStack truth = FirStack::zeros(dims);
  for (int l = 0; l < 8; ++l) truth.at(0, l, 0) = rng.normal();

  const int blocks = 200;
  MultichannelSignal x(random_vector(rng, blocks * block), 8000.0);
  const MultichannelSignal d = apply_fir_stack(truth, x);

  FdafState state = fdaf_init(dims, FdafParams{});
  FirStack estimate = FirStack::zeros(dims);
  BlockStream stream(block, 1);

  int first_below = -1;
  double previous_db = 1e9;
  for (int b = 0; b < blocks; ++b) {
    stream.push(x.samples.middleRows(b * block, block));
    const FdafStep step =
        fdaf_step(state, stream.history(), d.samples.middleRows(b * block, block), estimate);
    estimate.coeffs += step.delta.coeffs;
    const double db = db10(system_mismatch_block(truth, estimate));
    if (first_below < 0 && db < -40.0) first_below = b + 1;
    // Monotone within 1 dB hysteresis until far below the target.
    if (previous_db > -60.0) CHECK(db <= previous_db + 1.0);
    previous_db = db;
  }
  REQUIRE(first_below > 0);
  CHECK(first_below <= 200);
  CHECK(first_below == kConvergenceBlocks);
}

TEST_CASE("dimension mismatches are rejected") {
  const FirDims dims{1, 8, 1};
  FdafState state = fdaf_init(dims, FdafParams{});
  const FirStack current = FirStack::zeros(dims);
  CHECK_THROWS_AS(fdaf_step(state, Matrix::Zero(12, 1), Matrix::Zero(8, 1), current),
                  DimensionError);
  CHECK_THROWS_AS(fdaf_step(state, Matrix::Zero(16, 1), Matrix::Zero(4, 1), current),
                  DimensionError);
}
