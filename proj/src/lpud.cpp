#include "osasi/lpud.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace osasi {

NoiseModel NoiseModel::isotropic(int outputs, double variance) {
  if (outputs < 1) throw ConfigError("NoiseModel: need at least one output");
  if (variance <= 0.0) throw ConfigError("NoiseModel: variance must be positive");
  return NoiseModel{Matrix::Identity(outputs, outputs) * variance};
}

void NoiseModel::validate() const {
  if (covariance.rows() != covariance.cols())
    throw DimensionError("NoiseModel: covariance must be square");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw NumericalError("NoiseModel: covariance not symmetric");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw NumericalError("NoiseModel: covariance not positive definite");
}

namespace {

std::vector<CVector> stack_spectra(const Vector& stacked, const FirDims& dims, RealFft& fft) {
  FirStack fir{dims, stacked};
  std::vector<CVector> out(static_cast<std::size_t>(dims.inputs) * dims.outputs);
  for (int p = 0; p < dims.inputs; ++p)
    for (int q = 0; q < dims.outputs; ++q)
      out[static_cast<std::size_t>(p) * dims.outputs + q] =
          fir_spectrum(fir.taps_of(p, q), dims.taps, fft);
  return out;
}

/// L x Q overlap-save responses of one stacked filter to the block input.
Matrix filter_response(const std::vector<CVector>& filter_spec,
                       const std::vector<CVector>& input_spectra, const FirDims& dims,
                       RealFft& fft) {
  const int block = dims.taps;
  Matrix out(block, dims.outputs);
  for (int q = 0; q < dims.outputs; ++q) {
    CVector acc = CVector::Zero(fft.size());
    for (int p = 0; p < dims.inputs; ++p)
      acc += input_spectra[static_cast<std::size_t>(p)].cwiseProduct(
          filter_spec[static_cast<std::size_t>(p) * dims.outputs + q]);
    out.col(q) = fft.inverse(acc).tail(block);
  }
  return out;
}

double gaussian_terms_full(const Matrix& covariance, const Vector& residual) {
  const Index q = covariance.rows();
  if (q == 1) {
    const double r = covariance(0, 0);
    if (!(r > 0.0)) throw NumericalError("block_log_evidence: covariance not positive");
    return std::log(r) + residual(0) * residual(0) / r;
  }
  if (q == 2) {
    const double a = covariance(0, 0);
    const double b = covariance(0, 1);
    const double c = covariance(1, 1);
    const double det = a * c - b * b;
    if (!(det > 0.0) || !(a > 0.0))
      throw NumericalError("block_log_evidence: covariance not positive definite");
    const double e0 = residual(0);
    const double e1 = residual(1);
    return std::log(det) + (c * e0 * e0 - 2.0 * b * e0 * e1 + a * e1 * e1) / det;
  }
  if (q == 3) {
    const Eigen::Matrix3d m = covariance;
    const double det = m.determinant();
    if (!(det > 0.0) || !(m(0, 0) > 0.0))
      throw NumericalError("block_log_evidence: covariance not positive definite");
    const Eigen::Vector3d solved = m.inverse() * Eigen::Vector3d(residual);
    return std::log(det) + residual.dot(solved);
  }
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw NumericalError("block_log_evidence: covariance not positive definite");
  const Matrix l = llt.matrixL();
  double log_det = 0.0;
  for (Index i = 0; i < q; ++i) log_det += 2.0 * std::log(l(i, i));
  const Vector solved = llt.solve(residual);
  return log_det + residual.dot(solved);
}

}  // namespace

EigenfilterBank build_eigenfilter_bank(const SubspaceUnion& u, const std::vector<int>& k_per_model) {
  u.validate();
  if (k_per_model.size() != u.models.size())
    throw ConfigError("build_eigenfilter_bank: need one K per model");

  EigenfilterBank bank;
  bank.dims = u.dims;
  bank.fft_size = 2 * static_cast<Index>(u.dims.taps);
  RealFft fft(bank.fft_size);

  for (std::size_t i = 0; i < u.models.size(); ++i) {
    const AffineSubspaceModel& m = u.models[i];
    const int k = k_per_model[i];
    if (k < 0 || k > m.dim())
      throw ConfigError("build_eigenfilter_bank: K must be in [0, D_i]");
    EigenfilterBank::ModelFilters filters;
    filters.offset = stack_spectra(m.offset, u.dims, fft);
    filters.eigen.reserve(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
      const Vector scaled = m.basis.col(r) * std::sqrt(m.eigenvalues(r));
      filters.eigen.push_back(stack_spectra(scaled, u.dims, fft));
    }
    bank.models.push_back(std::move(filters));
  }
  return bank;
}

EigenfilterBank build_eigenfilter_bank(const SubspaceUnion& u, int k) {
  return build_eigenfilter_bank(u, std::vector<int>(u.models.size(), k));
}

double block_log_evidence_spec(const EigenfilterBank& bank, int model,
                               const std::vector<CVector>& input_spectra,
                               const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise,
                               RealFft& fft, bool diagonal) {
  if (model < 0 || model >= bank.model_count())
    throw ConfigError("block_log_evidence: model index out of range");
  const FirDims& d = bank.dims;
  const int block = d.taps;
  if (y_block.rows() != block || y_block.cols() != d.outputs)
    throw DimensionError("block_log_evidence: observed block must be L x Q");
  if (noise.covariance.rows() != d.outputs)
    throw DimensionError("block_log_evidence: noise covariance must be Q x Q");

  const EigenfilterBank::ModelFilters& filters = bank.models[static_cast<std::size_t>(model)];
  const Matrix mean_response = filter_response(filters.offset, input_spectra, d, fft);
  std::vector<Matrix> eigen_response;
  eigen_response.reserve(filters.eigen.size());
  for (const auto& spec : filters.eigen)
    eigen_response.push_back(filter_response(spec, input_spectra, d, fft));

  double total = 0.0;
  if (diagonal) {
    for (int n = 0; n < block; ++n) {
      for (int q = 0; q < d.outputs; ++q) {
        double r = noise.covariance(q, q);
        for (const auto& resp : eigen_response) r += resp(n, q) * resp(n, q);
        if (!(r > 0.0)) throw NumericalError("block_log_evidence_diag: nonpositive variance");
        const double e = y_block(n, q) - mean_response(n, q);
        total += std::log(r) + e * e / r;
      }
    }
  } else {
    Matrix covariance(d.outputs, d.outputs);
    Vector residual(d.outputs);
    for (int n = 0; n < block; ++n) {
      covariance = noise.covariance;
      for (const auto& resp : eigen_response)
        covariance.noalias() += resp.row(n).transpose() * resp.row(n);
      residual = (y_block.row(n) - mean_response.row(n)).transpose();
      total += gaussian_terms_full(covariance, residual);
    }
  }
  return -0.5 * total;
}

double block_log_evidence(const EigenfilterBank& bank, int model,
                          const Eigen::Ref<const Matrix>& history,
                          const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise) {
  if (history.rows() != bank.fft_size || history.cols() != bank.dims.inputs)
    throw DimensionError("block_log_evidence: history must be 2L x P");
  RealFft fft(bank.fft_size);
  std::vector<CVector> spectra(static_cast<std::size_t>(bank.dims.inputs));
  for (int p = 0; p < bank.dims.inputs; ++p) spectra[static_cast<std::size_t>(p)] = fft.forward(history.col(p));
  return block_log_evidence_spec(bank, model, spectra, y_block, noise, fft, false);
}

double block_log_evidence_diag(const EigenfilterBank& bank, int model,
                               const Eigen::Ref<const Matrix>& history,
                               const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise) {
  if (history.rows() != bank.fft_size || history.cols() != bank.dims.inputs)
    throw DimensionError("block_log_evidence: history must be 2L x P");
  RealFft fft(bank.fft_size);
  std::vector<CVector> spectra(static_cast<std::size_t>(bank.dims.inputs));
  for (int p = 0; p < bank.dims.inputs; ++p) spectra[static_cast<std::size_t>(p)] = fft.forward(history.col(p));
  return block_log_evidence_spec(bank, model, spectra, y_block, noise, fft, true);
}

void update_tracker(EvidenceTracker& tracker, const Eigen::Ref<const Vector>& block_values) {
  if (block_values.size() != tracker.estimates.size())
    throw DimensionError("update_tracker: need one value per model");
  if (!tracker.initialized) {
    tracker.estimates = block_values;
    tracker.initialized = true;
  } else {
    tracker.estimates =
        tracker.lambda * tracker.estimates + (1.0 - tracker.lambda) * block_values;
  }
  int best = 0;
  for (Index i = 1; i < tracker.estimates.size(); ++i)
    if (tracker.estimates(i) > tracker.estimates(best)) best = static_cast<int>(i);
  tracker.selected = best;
}

LpudStepResult lpud_step(FirStack& coeffs, EvidenceTracker& tracker, const EigenfilterBank& bank,
                         const SubspaceUnion& u, FdafState& state,
                         const std::vector<CVector>& input_spectra,
                         const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise,
                         bool diagonal_evidence) {
  if (tracker.model_count() != bank.model_count() || bank.model_count() != u.model_count())
    throw DimensionError("lpud_step: tracker, bank and union disagree on model count");
  if (!(coeffs.dims == u.dims)) throw DimensionError("lpud_step: coefficient dims mismatch");

  Vector evidences(bank.model_count());
  for (int i = 0; i < bank.model_count(); ++i)
    evidences(i) = block_log_evidence_spec(bank, i, input_spectra, y_block, noise, state.fft,
                                           diagonal_evidence);

  const int previous = tracker.selected;
  update_tracker(tracker, evidences);
  const int selected = tracker.selected;
  const AffineSubspaceModel& model = u.models[static_cast<std::size_t>(selected)];

  LpudStepResult result;
  result.selected = selected;
  result.switched = selected != previous;
  if (result.switched) coeffs.coeffs = project(model, coeffs.coeffs);

  FdafStep step = fdaf_step(state, input_spectra, y_block, coeffs);
  coeffs.coeffs += project_update(model, step.delta.coeffs);

  result.y_hat = std::move(step.y_hat);
  result.evidences = tracker.estimates;
  return result;
}

LpudStepResult lpud_step(FirStack& coeffs, EvidenceTracker& tracker, const EigenfilterBank& bank,
                         const SubspaceUnion& u, FdafState& state,
                         const Eigen::Ref<const Matrix>& history,
                         const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise,
                         bool diagonal_evidence) {
  if (history.rows() != state.fft_size() || history.cols() != u.dims.inputs)
    throw DimensionError("lpud_step: history must be 2L x P");
  std::vector<CVector> spectra(static_cast<std::size_t>(u.dims.inputs));
  for (int p = 0; p < u.dims.inputs; ++p)
    spectra[static_cast<std::size_t>(p)] = state.fft.forward(history.col(p));
  return lpud_step(coeffs, tracker, bank, u, state, spectra, y_block, noise, diagonal_evidence);
}

}  // namespace osasi
