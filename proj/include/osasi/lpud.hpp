#pragma once

#include "osasi/fdaf.hpp"
#include "osasi/subspace.hpp"
#include "osasi/types.hpp"

#include <vector>

namespace osasi {

/// Observation noise covariance (Q x Q, symmetric positive definite).
struct NoiseModel {
  Matrix covariance;

  static NoiseModel isotropic(int outputs, double variance);
  void validate() const;
};

/// Precomputed 2L-point transforms of each model's offset filters and of
/// its first K scaled eigenfilters u_r * sqrt(d_r), reshaped to P x Q FIRs.
/// Built once; lets the per-block evidence be evaluated with overlap-save
/// convolutions of the shared input spectrum.
struct EigenfilterBank {
  struct ModelFilters {
    std::vector<CVector> offset;               // P*Q spectra (p*Q + q)
    std::vector<std::vector<CVector>> eigen;   // K entries of P*Q spectra
  };

  FirDims dims;
  Index fft_size = 0;  // 2L
  std::vector<ModelFilters> models;

  int model_count() const { return static_cast<int>(models.size()); }
  int eigenfilter_count(int model) const {
    return static_cast<int>(models[static_cast<std::size_t>(model)].eigen.size());
  }
};

EigenfilterBank build_eigenfilter_bank(const SubspaceUnion& u, const std::vector<int>& k_per_model);
EigenfilterBank build_eigenfilter_bank(const SubspaceUnion& u, int k);

/// Recursive average of per-block log evidences and the current optimum.
struct EvidenceTracker {
  Vector estimates;  // one per model
  double lambda = 0.99;
  bool initialized = false;
  int selected = -1;  // -1 until the first update

  EvidenceTracker(int model_count, double lambda_)
      : estimates(Vector::Zero(model_count)), lambda(lambda_) {
    if (lambda < 0.0 || lambda > 1.0)
      throw ConfigError("EvidenceTracker: lambda must be in [0, 1]");
  }
  int model_count() const { return static_cast<int>(estimates.size()); }
};

/// Log evidence of one observation block under model i, up to the
/// model-independent -(Q/2) log 2pi constant per sample. For each sample n
/// the evidence covariance is the noise covariance plus the sum of outer
/// products of the eigenfilter responses, and the per-sample contribution
/// is -(log det R + e^T R^{-1} e) / 2 with e the residual against the
/// offset-filter response. All filter responses come from overlap-save
/// convolution of the 2L input window.
double block_log_evidence(const EigenfilterBank& bank, int model,
                          const Eigen::Ref<const Matrix>& history,
                          const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise);

/// Channel-decoupled variant: only the diagonal entries of the per-sample
/// evidence covariance are used. Identical to the full form for Q = 1 and
/// whenever the covariance is diagonal.
double block_log_evidence_diag(const EigenfilterBank& bank, int model,
                               const Eigen::Ref<const Matrix>& history,
                               const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise);

/// Shared-spectrum form used by the orchestration loop.
double block_log_evidence_spec(const EigenfilterBank& bank, int model,
                               const std::vector<CVector>& input_spectra,
                               const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise,
                               RealFft& fft, bool diagonal);

/// First update seeds the estimates with the block values; afterwards
/// E_i <- lambda E_i + (1 - lambda) v_i. The optimum is the argmax, ties
/// broken by the lowest index.
void update_tracker(EvidenceTracker& tracker, const Eigen::Ref<const Vector>& block_values);

struct LpudStepResult {
  Matrix y_hat;      // L x Q a-priori estimate of the base filter
  int selected = 0;  // i*(m)
  bool switched = false;
  Vector evidences;  // tracker estimates after the update
};

/// One block of the projection-denoised update loop:
///   1. update the evidence estimates of all models,
///   2. select the optimum model,
///   3. on a selection change (including the first block) project the
///      coefficients onto the selected affine subspace,
///   4. compute the base adaptive-filter update,
///   5. project the update onto the selected subspace directions,
///   6. apply it.
LpudStepResult lpud_step(FirStack& coeffs, EvidenceTracker& tracker, const EigenfilterBank& bank,
                         const SubspaceUnion& u, FdafState& state,
                         const std::vector<CVector>& input_spectra,
                         const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise,
                         bool diagonal_evidence = false);

LpudStepResult lpud_step(FirStack& coeffs, EvidenceTracker& tracker, const EigenfilterBank& bank,
                         const SubspaceUnion& u, FdafState& state,
                         const Eigen::Ref<const Matrix>& history,
                         const Eigen::Ref<const Matrix>& y_block, const NoiseModel& noise,
                         bool diagonal_evidence = false);

}  // namespace osasi
