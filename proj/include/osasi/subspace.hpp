#pragma once

#include "osasi/rir.hpp"
#include "osasi/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace osasi {

/// One local affine model M_i = { offset + basis * b }: sample mean of a
/// cluster, orthonormal principal directions and the prior variances along
/// them. The cluster covariance is represented implicitly as
/// basis * diag(eigenvalues) * basis^T; it is never formed densely.
struct AffineSubspaceModel {
  Vector offset;       // R
  Matrix basis;        // R x D, orthonormal columns
  Vector eigenvalues;  // D, descending, >= 0
  int cluster_size = 0;

  int dim() const { return static_cast<int>(basis.cols()); }
  void validate() const;
};

/// Union of local models sharing the stacked-filter dimensions.
struct SubspaceUnion {
  FirDims dims;
  std::vector<AffineSubspaceModel> models;
  std::vector<int> assignments;  // training-sample -> model index
  std::uint64_t seed = 0;
  int kmeans_iterations = 0;

  int model_count() const { return static_cast<int>(models.size()); }
  void validate() const;
};

struct KmeansResult {
  std::vector<int> assignments;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding on the rows of data. Ties go to
/// the lowest cluster index; an emptied cluster is reseeded to the point
/// farthest from its assigned centroid. Deterministic per seed.
KmeansResult kmeans_cluster(const Eigen::Ref<const Matrix>& data, int clusters,
                            std::uint64_t seed, int max_iters = 100);

/// Sample mean plus top-dim eigenpairs of the sample covariance, computed
/// through a thin SVD of the centered rows. Basis columns are sign-fixed so
/// their largest-magnitude entry is positive.
AffineSubspaceModel fit_local_model(const Eigen::Ref<const Matrix>& cluster_rows, int dim);

/// Cluster the dataset and fit one local model per cluster; clusters = 1
/// yields the single global model. The scalar form treats dim as a ceiling
/// and lowers it to G_i - 1 for clusters too small to support it; the
/// per-cluster form is strict unless clamp_dims is set.
SubspaceUnion learn_union(const RirDataset& dataset, int clusters, int dim, std::uint64_t seed,
                          int max_iters = 100);
SubspaceUnion learn_union(const RirDataset& dataset, int clusters, const std::vector<int>& dims,
                          std::uint64_t seed, int max_iters = 100, bool clamp_dims = false);

/// Orthogonal projection onto the affine subspace:
/// offset + basis (basis^T (v - offset)). Two thin products, O(R D).
template <typename Derived>
Vector project(const AffineSubspaceModel& model, const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != model.offset.size())
    throw DimensionError("project: vector length does not match model");
  return model.offset + model.basis * (model.basis.transpose() * (v - model.offset));
}

/// Linear projection of an update onto the subspace directions (no offset).
template <typename Derived>
Vector project_update(const AffineSubspaceModel& model, const Eigen::MatrixBase<Derived>& delta) {
  if (delta.size() != model.offset.size())
    throw DimensionError("project_update: vector length does not match model");
  return model.basis * (model.basis.transpose() * delta);
}

/// Directory layout: manifest.json + mean_###.f64 / basis_###.f64 /
/// eigvals_###.f64 per model (row-major little-endian float64).
void save_union(const SubspaceUnion& u, const std::string& dir);
SubspaceUnion load_union(const std::string& dir);

}  // namespace osasi
