#include "osasi/subspace.hpp"

#include "osasi/io.hpp"
#include "osasi/json_util.hpp"
#include "osasi/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

namespace osasi {

void AffineSubspaceModel::validate() const {
  const Index r = offset.size();
  if (basis.rows() != r) throw DimensionError("AffineSubspaceModel: basis rows != R");
  if (eigenvalues.size() != basis.cols())
    throw DimensionError("AffineSubspaceModel: eigenvalue count != basis columns");
  if (dim() > 0) {
    const Matrix gram = basis.transpose() * basis;
    const double dev = (gram - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    if (dev > 1e-10) throw NumericalError("AffineSubspaceModel: basis not orthonormal");
  }
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) < -1e-12) throw NumericalError("AffineSubspaceModel: negative eigenvalue");
    if (i > 0 && eigenvalues(i) > eigenvalues(i - 1) + 1e-12)
      throw NumericalError("AffineSubspaceModel: eigenvalues not descending");
  }
}

void SubspaceUnion::validate() const {
  dims.validate();
  if (models.empty()) throw ConfigError("SubspaceUnion: no models");
  for (const auto& m : models) {
    m.validate();
    if (m.offset.size() != dims.stacked())
      throw DimensionError("SubspaceUnion: model dimension != R");
  }
  for (int a : assignments)
    if (a < 0 || a >= model_count()) throw ConfigError("SubspaceUnion: assignment out of range");
}

namespace {

int nearest_center(const Eigen::Ref<const Matrix>& data, const Matrix& centers, Index row) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c) {
    const double d = (data.row(row) - centers.row(c)).squaredNorm();
    if (d < best_dist) {  // strict: ties keep the lowest index
      best_dist = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

KmeansResult kmeans_cluster(const Eigen::Ref<const Matrix>& data, int clusters,
                            std::uint64_t seed, int max_iters) {
  const Index count = data.rows();
  if (clusters < 1) throw ConfigError("kmeans_cluster: need at least one cluster");
  if (count < clusters) throw ConfigError("kmeans_cluster: fewer samples than clusters");

  Rng rng(seed);
  Matrix centers(clusters, data.cols());

  // k-means++ seeding.
  centers.row(0) = data.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(count))));
  Vector dist2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < clusters; ++c) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      pick = count - 1;
      for (Index g = 0; g < count; ++g) {
        cum += dist2(g);
        if (cum > target) {
          pick = g;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(count)));
    }
    centers.row(c) = data.row(pick);
    dist2 = dist2.cwiseMin((data.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assignments(static_cast<std::size_t>(count), -1);
  int iters = 0;
  for (; iters < max_iters; ++iters) {
    bool changed = false;
    for (Index g = 0; g < count; ++g) {
      const int a = nearest_center(data, centers, g);
      if (a != assignments[static_cast<std::size_t>(g)]) {
        assignments[static_cast<std::size_t>(g)] = a;
        changed = true;
      }
    }

    // Reseed empty clusters to the sample farthest from its own centroid.
    std::vector<Index> sizes(static_cast<std::size_t>(clusters), 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    for (int c = 0; c < clusters; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      double far_dist = -1.0;
      for (Index g = 0; g < count; ++g) {
        const int a = assignments[static_cast<std::size_t>(g)];
        if (sizes[static_cast<std::size_t>(a)] <= 1) continue;
        const double d = (data.row(g) - centers.row(a)).squaredNorm();
        if (d > far_dist) {
          far_dist = d;
          far = g;
        }
      }
      --sizes[static_cast<std::size_t>(assignments[static_cast<std::size_t>(far)])];
      assignments[static_cast<std::size_t>(far)] = c;
      sizes[static_cast<std::size_t>(c)] = 1;
      centers.row(c) = data.row(far);
      changed = true;
    }

    if (!changed) break;

    centers.setZero();
    std::vector<Index> counts(static_cast<std::size_t>(clusters), 0);
    for (Index g = 0; g < count; ++g) {
      centers.row(assignments[static_cast<std::size_t>(g)]) += data.row(g);
      ++counts[static_cast<std::size_t>(assignments[static_cast<std::size_t>(g)])];
    }
    for (int c = 0; c < clusters; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }

  return {std::move(assignments), iters};
}

AffineSubspaceModel fit_local_model(const Eigen::Ref<const Matrix>& cluster_rows, int dim) {
  const Index count = cluster_rows.rows();
  const Index r = cluster_rows.cols();
  if (count < 2) throw InsufficientDataError("fit_local_model: need at least two samples");
  if (dim < 0 || dim > std::min<Index>(count - 1, r))
    throw ConfigError("fit_local_model: dim must be <= min(G_i - 1, R)");

  AffineSubspaceModel model;
  model.cluster_size = static_cast<int>(count);
  model.offset = cluster_rows.colwise().mean().transpose();

  const Matrix centered = cluster_rows.rowwise() - model.offset.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  model.basis = svd.matrixV().leftCols(dim);
  model.eigenvalues =
      svd.singularValues().head(dim).array().square() / static_cast<double>(count - 1);

  // Sign convention: the largest-magnitude entry of each column is positive.
  for (Index c = 0; c < model.basis.cols(); ++c) {
    Index at = 0;
    model.basis.col(c).cwiseAbs().maxCoeff(&at);
    if (model.basis(at, c) < 0.0) model.basis.col(c) = -model.basis.col(c);
  }

  model.validate();
  return model;
}

SubspaceUnion learn_union(const RirDataset& dataset, int clusters, int dim, std::uint64_t seed,
                          int max_iters) {
  return learn_union(dataset, clusters, std::vector<int>(static_cast<std::size_t>(clusters), dim),
                     seed, max_iters, true);
}

SubspaceUnion learn_union(const RirDataset& dataset, int clusters, const std::vector<int>& dims,
                          std::uint64_t seed, int max_iters, bool clamp_dims) {
  dataset.validate();
  if (static_cast<int>(dims.size()) != clusters)
    throw ConfigError("learn_union: need one target dimension per cluster");

  SubspaceUnion u;
  u.dims = dataset.dims;
  u.seed = seed;
  KmeansResult km = kmeans_cluster(dataset.samples, clusters, seed, max_iters);
  u.assignments = std::move(km.assignments);
  u.kmeans_iterations = km.iterations;

  u.models.reserve(static_cast<std::size_t>(clusters));
  for (int c = 0; c < clusters; ++c) {
    std::vector<Index> member_rows;
    for (Index g = 0; g < dataset.samples.rows(); ++g)
      if (u.assignments[static_cast<std::size_t>(g)] == c) member_rows.push_back(g);
    Matrix member(static_cast<Index>(member_rows.size()), dataset.samples.cols());
    for (Index i = 0; i < member.rows(); ++i)
      member.row(i) = dataset.samples.row(member_rows[static_cast<std::size_t>(i)]);
    // The target dimension is a ceiling: a small cluster gets the largest
    // dimension its sample count supports.
    int dim = dims[static_cast<std::size_t>(c)];
    if (clamp_dims)
      dim = std::min<int>(dim, std::max<int>(0, static_cast<int>(member.rows()) - 1));
    u.models.push_back(fit_local_model(member, dim));
  }

  u.validate();
  return u;
}

void save_union(const SubspaceUnion& u, const std::string& dir) {
  u.validate();
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["dims"] = Json{{"inputs", u.dims.inputs}, {"taps", u.dims.taps}, {"outputs", u.dims.outputs}};
  manifest["seed"] = u.seed;
  manifest["kmeans_iterations"] = u.kmeans_iterations;
  manifest["assignments"] = u.assignments;
  Json models = Json::array();
  for (const auto& m : u.models)
    models.push_back(Json{{"dim", m.dim()}, {"cluster_size", m.cluster_size}});
  manifest["models"] = models;
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");

  char name[64];
  for (std::size_t i = 0; i < u.models.size(); ++i) {
    const auto& m = u.models[i];
    std::snprintf(name, sizeof(name), "/mean_%03zu.f64", i);
    write_f64(dir + name, m.offset);
    std::snprintf(name, sizeof(name), "/basis_%03zu.f64", i);
    write_f64(dir + name, m.basis);
    std::snprintf(name, sizeof(name), "/eigvals_%03zu.f64", i);
    write_f64(dir + name, m.eigenvalues);
  }
}

SubspaceUnion load_union(const std::string& dir) {
  const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
  SubspaceUnion u;
  const Json& dims = manifest.at("dims");
  u.dims = FirDims{dims.at("inputs").get<int>(), dims.at("taps").get<int>(),
                   dims.at("outputs").get<int>()};
  u.seed = manifest.at("seed").get<std::uint64_t>();
  u.kmeans_iterations = manifest.at("kmeans_iterations").get<int>();
  u.assignments = manifest.at("assignments").get<std::vector<int>>();

  char name[64];
  const Json& models = manifest.at("models");
  for (std::size_t i = 0; i < models.size(); ++i) {
    AffineSubspaceModel m;
    const int dim = models.at(i).at("dim").get<int>();
    m.cluster_size = models.at(i).at("cluster_size").get<int>();
    std::snprintf(name, sizeof(name), "/mean_%03zu.f64", i);
    m.offset = read_f64(dir + name, u.dims.stacked(), 1);
    std::snprintf(name, sizeof(name), "/basis_%03zu.f64", i);
    m.basis = read_f64(dir + name, u.dims.stacked(), dim);
    std::snprintf(name, sizeof(name), "/eigvals_%03zu.f64", i);
    m.eigenvalues = dim > 0 ? Vector(read_f64(dir + name, dim, 1)) : Vector();
    u.models.push_back(std::move(m));
  }

  u.validate();
  return u;
}

}  // namespace osasi
