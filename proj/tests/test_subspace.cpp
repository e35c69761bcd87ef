#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "osasi/rng.hpp"
#include "osasi/subspace.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <vector>

using namespace osasi;

namespace {

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

// Two Gaussian blobs whose separation dwarfs their spread.
Matrix two_blobs(Rng& rng, int per_blob, Index dim, double separation, std::vector<int>* truth) {
  Matrix data(2 * per_blob, dim);
  for (int i = 0; i < 2 * per_blob; ++i) {
    const int blob = i < per_blob ? 0 : 1;
    if (truth) truth->push_back(blob);
    for (Index c = 0; c < dim; ++c)
      data(i, c) = rng.normal() + (blob == 0 ? 0.0 : separation);
  }
  return data;
}

// Dense covariance eigendecomposition oracle, top-`dim` pairs descending.
std::pair<Matrix, Vector> dense_pca(const Matrix& rows, int dim) {
  const Vector mean = rows.colwise().mean().transpose();
  const Matrix centered = rows.rowwise() - mean.transpose();
  const Matrix covariance = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  Matrix basis(rows.cols(), dim);
  Vector values(dim);
  for (int k = 0; k < dim; ++k) {
    basis.col(k) = solver.eigenvectors().col(rows.cols() - 1 - k);
    values(k) = solver.eigenvalues()(rows.cols() - 1 - k);
  }
  return {basis, values};
}

void normalize_sign(Matrix& basis) {
  for (Index c = 0; c < basis.cols(); ++c) {
    Index at = 0;
    basis.col(c).cwiseAbs().maxCoeff(&at);
    if (basis(at, c) < 0.0) basis.col(c) = -basis.col(c);
  }
}

// Synthetic dataset wrapper so learn_union can be exercised without room
// simulation (tails and positions are irrelevant to learning).
RirDataset wrap_dataset(const Matrix& samples, const FirDims& dims) {
  RirDataset ds;
  ds.scenario.rir_length = dims.taps;
  ds.scenario.mic_positions.resize(static_cast<std::size_t>(dims.outputs),
                                   Eigen::Vector3d(3.0, 2.0, 1.5));
  ds.dims = dims;
  ds.samples = samples;
  ds.tails = Matrix::Zero(samples.rows(), 0);
  ds.source_positions = Matrix::Zero(samples.rows(), 3);
  return ds;
}

}  // namespace

TEST_CASE("single cluster assigns everything to cluster zero") {
  Rng rng(1);
  const Matrix data = random_matrix(rng, 20, 5);
  const KmeansResult result = kmeans_cluster(data, 1, 7);
  for (int a : result.assignments) CHECK(a == 0);
}

TEST_CASE("well-separated blobs are recovered up to label permutation") {
  Rng rng(2);
  std::vector<int> truth;
  const Matrix data = two_blobs(rng, 30, 3, 100.0, &truth);
  const KmeansResult result = kmeans_cluster(data, 2, 5);
  const int first = result.assignments[0];
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int expected = truth[i] == truth[0] ? first : 1 - first;
    CHECK(result.assignments[i] == expected);
  }
}

TEST_CASE("k-means is deterministic per seed") {
  Rng rng(3);
  const Matrix data = random_matrix(rng, 50, 8);
  const KmeansResult a = kmeans_cluster(data, 4, 99);
  const KmeansResult b = kmeans_cluster(data, 4, 99);
  CHECK(a.assignments == b.assignments);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("k-means never leaves a cluster empty") {
  Rng rng(4);
  const Matrix data = random_matrix(rng, 40, 4);
  const KmeansResult result = kmeans_cluster(data, 8, 123);
  std::vector<int> sizes(8, 0);
  for (int a : result.assignments) ++sizes[static_cast<std::size_t>(a)];
  for (int s : sizes) CHECK(s > 0);
}

TEST_CASE("k-means rejects more clusters than samples") {
  Rng rng(5);
  const Matrix data = random_matrix(rng, 3, 2);
  CHECK_THROWS_AS(kmeans_cluster(data, 4, 0), ConfigError);
}

TEST_CASE("identical samples give zero variance around the sample") {
  Matrix rows(5, 6);
  Rng rng(6);
  const Vector one = Vector::NullaryExpr(6, [&](Index) { return rng.normal(); });
  for (Index r = 0; r < rows.rows(); ++r) rows.row(r) = one.transpose();
  const AffineSubspaceModel model = fit_local_model(rows, 2);
  CHECK((model.offset - one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(model.eigenvalues.cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("rank-one cluster matches the analytic eigenvalue") {
  Rng rng(7);
  const Index r = 16;
  const int count = 10;
  Vector mean = Vector::NullaryExpr(r, [&](Index) { return rng.normal(); });
  Vector direction = Vector::NullaryExpr(r, [&](Index) { return rng.normal(); });
  direction.normalize();
  const double alpha = 2.5;
  Matrix rows(count, r);
  for (int i = 0; i < count; ++i)
    rows.row(i) = (mean + (i % 2 == 0 ? alpha : -alpha) * direction).transpose();

  const AffineSubspaceModel model = fit_local_model(rows, 1);
  CHECK((model.offset - mean).cwiseAbs().maxCoeff() < 1e-10);
  // Sample variance of +/- alpha: alpha^2 * G / (G - 1).
  CHECK(model.eigenvalues(0) ==
        doctest::Approx(alpha * alpha * count / (count - 1.0)).epsilon(1e-10));
  Matrix expected = direction;
  normalize_sign(expected);
  CHECK((model.basis.col(0) - expected.col(0)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("thin-SVD fit matches the dense eigendecomposition oracle") {
  Rng rng(8);
  const Matrix rows = random_matrix(rng, 20, 32);
  const int dim = 5;
  const AffineSubspaceModel model = fit_local_model(rows, dim);
  auto [basis, values] = dense_pca(rows, dim);
  normalize_sign(basis);
  CHECK((model.eigenvalues - values).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((model.basis - basis).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("fit rejects insufficient data and oversized dimension") {
  Rng rng(9);
  CHECK_THROWS_AS(fit_local_model(random_matrix(rng, 1, 4), 1), InsufficientDataError);
  CHECK_THROWS_AS(fit_local_model(random_matrix(rng, 5, 4), 5), ConfigError);
}

TEST_CASE("full-rank hull reconstructs every training sample") {
  Rng rng(10);
  const FirDims dims{1, 4, 2};
  const Matrix samples = random_matrix(rng, 6, dims.stacked());
  const SubspaceUnion u = learn_union(wrap_dataset(samples, dims), 1, 5, 3);
  for (Index g = 0; g < samples.rows(); ++g) {
    const Vector projected = project(u.models[0], samples.row(g).transpose());
    CHECK((projected - samples.row(g).transpose()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("two-blob union recovers per-blob means") {
  Rng rng(11);
  std::vector<int> truth;
  const FirDims dims{1, 4, 2};
  const Matrix samples = two_blobs(rng, 25, dims.stacked(), 50.0, &truth);
  const SubspaceUnion u = learn_union(wrap_dataset(samples, dims), 2, 3, 17);

  Vector mean0 = samples.topRows(25).colwise().mean().transpose();
  Vector mean1 = samples.bottomRows(25).colwise().mean().transpose();
  const int m0 = u.assignments[0];
  CHECK((u.models[m0].offset - mean0).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((u.models[1 - m0].offset - mean1).cwiseAbs().maxCoeff() < 1e-6);

  // Reconstruction dominance: own-model residuals are smaller on average.
  for (int blob = 0; blob < 2; ++blob) {
    const int own = blob == 0 ? m0 : 1 - m0;
    double own_res = 0.0, other_res = 0.0;
    for (int i = 0; i < 25; ++i) {
      const Vector s = samples.row(blob * 25 + i).transpose();
      own_res += (s - project(u.models[own], s)).squaredNorm();
      other_res += (s - project(u.models[1 - own], s)).squaredNorm();
    }
    CHECK(own_res < other_res);
  }
}

TEST_CASE("global model specializes the union at one cluster") {
  Rng rng(12);
  const FirDims dims{1, 8, 1};
  const Matrix samples = random_matrix(rng, 12, dims.stacked());
  const RirDataset ds = wrap_dataset(samples, dims);
  const SubspaceUnion u = learn_union(ds, 1, 4, 5);
  const AffineSubspaceModel direct = fit_local_model(samples, 4);
  CHECK((u.models[0].offset - direct.offset).cwiseAbs().maxCoeff() == 0.0);
  CHECK((u.models[0].basis - direct.basis).cwiseAbs().maxCoeff() == 0.0);
  CHECK((u.models[0].eigenvalues - direct.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection fixpoints and oracle") {
  Rng rng(13);
  const Matrix rows = random_matrix(rng, 20, 32);
  const AffineSubspaceModel model = fit_local_model(rows, 5);

  CHECK((project(model, model.offset) - model.offset).cwiseAbs().maxCoeff() < 1e-12);

  const Vector beta = Vector::NullaryExpr(5, [&](Index) { return rng.normal(); });
  const Vector on_subspace = model.offset + model.basis * beta;
  CHECK((project(model, on_subspace) - on_subspace).cwiseAbs().maxCoeff() < 1e-10);

  // Dense P = V (V^T V)^-1 V^T oracle, materialized only at this scale.
  const Matrix gram = model.basis.transpose() * model.basis;
  const Matrix projector = model.basis * gram.inverse() * model.basis.transpose();
  for (int rep = 0; rep < 100; ++rep) {
    const Vector v = Vector::NullaryExpr(32, [&](Index) { return rng.normal(); });
    const Vector expected = model.offset + projector * (v - model.offset);
    CHECK((project(model, v) - expected).cwiseAbs().maxCoeff() <= 1e-10);

    // Idempotence and residual orthogonality.
    const Vector once = project(model, v);
    CHECK((project(model, once) - once).cwiseAbs().maxCoeff() <= 1e-10);
    const Vector residual = v - once;
    CHECK((model.basis.transpose() * residual).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("update projection is linear and idempotent") {
  Rng rng(14);
  const Matrix rows = random_matrix(rng, 16, 24);
  const AffineSubspaceModel model = fit_local_model(rows, 4);

  const Vector beta = Vector::NullaryExpr(4, [&](Index) { return rng.normal(); });
  const Vector inside = model.basis * beta;
  CHECK((project_update(model, inside) - inside).cwiseAbs().maxCoeff() < 1e-10);

  Vector v = Vector::NullaryExpr(24, [&](Index) { return rng.normal(); });
  const Vector orthogonal = v - project_update(model, v);
  CHECK(project_update(model, orthogonal).cwiseAbs().maxCoeff() < 1e-10);

  const Vector once = project_update(model, v);
  CHECK((project_update(model, once) - once).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(project_update(model, Vector::Zero(7)), DimensionError);
}

TEST_CASE("learned bases are orthonormal") {
  Rng rng(15);
  const FirDims dims{1, 16, 2};
  // Four well-populated blobs so every cluster can support the fit.
  Matrix samples = random_matrix(rng, 80, dims.stacked());
  for (int i = 0; i < 80; ++i) samples.row(i).array() += 20.0 * (i / 20);
  const SubspaceUnion u = learn_union(wrap_dataset(samples, dims), 4, 3, 77);
  for (const auto& m : u.models) {
    const Matrix gram = m.basis.transpose() * m.basis;
    CHECK((gram - Matrix::Identity(m.dim(), m.dim())).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("union persistence round trip") {
  namespace fs = std::filesystem;
  Rng rng(16);
  const FirDims dims{1, 8, 2};
  Matrix samples = random_matrix(rng, 30, dims.stacked());
  for (int i = 0; i < 30; ++i) samples.row(i).array() += 15.0 * (i / 10);
  const SubspaceUnion u = learn_union(wrap_dataset(samples, dims), 3, 4, 21);

  const std::string dir = (fs::temp_directory_path() / "osasi_union_test").string();
  fs::remove_all(dir);
  save_union(u, dir);
  const SubspaceUnion back = load_union(dir);
  CHECK(back.model_count() == u.model_count());
  CHECK(back.assignments == u.assignments);
  CHECK(back.seed == u.seed);
  CHECK(back.kmeans_iterations == u.kmeans_iterations);
  for (int i = 0; i < u.model_count(); ++i) {
    CHECK((back.models[i].offset.array() == u.models[i].offset.array()).all());
    CHECK((back.models[i].basis.array() == u.models[i].basis.array()).all());
    CHECK((back.models[i].eigenvalues.array() == u.models[i].eigenvalues.array()).all());
    CHECK(back.models[i].cluster_size == u.models[i].cluster_size);
  }
  fs::remove_all(dir);
}
