#include "osasi/metrics.hpp"

namespace osasi {

double erle_linear(const Eigen::Ref<const Matrix>& d, const Eigen::Ref<const Matrix>& y_hat,
                   Index begin, Index end) {
  if (d.rows() != y_hat.rows() || d.cols() != y_hat.cols())
    throw DimensionError("erle: signal shapes differ");
  if (begin < 0 || end > d.rows() || begin >= end)
    throw DimensionError("erle: empty or out-of-range sample window");

  double sum = 0.0;
  for (Index n = begin; n < end; ++n)
    for (Index q = 0; q < d.cols(); ++q) {
      const double num = d(n, q) * d(n, q);
      const double err = d(n, q) - y_hat(n, q);
      const double den = std::max(err * err, 1e-12);
      sum += num / den;
    }
  return sum / (static_cast<double>(end - begin) * static_cast<double>(d.cols()));
}

double erle(const Eigen::Ref<const Matrix>& d, const Eigen::Ref<const Matrix>& y_hat, Index begin,
            Index end) {
  return db10_capped(erle_linear(d, y_hat, begin, end));
}

double system_mismatch_block(const FirStack& truth, const FirStack& estimate) {
  if (!(truth.dims == estimate.dims)) throw DimensionError("system_mismatch: dims differ");
  const FirDims& d = truth.dims;
  double sum = 0.0;
  for (int p = 0; p < d.inputs; ++p)
    for (int q = 0; q < d.outputs; ++q) {
      double num = 0.0;
      double den = 0.0;
      for (int l = 0; l < d.taps; ++l) {
        const double t = truth.at(p, l, q);
        const double e = t - estimate.at(p, l, q);
        num += e * e;
        den += t * t;
      }
      if (den <= 0.0) throw NumericalError("system_mismatch: true channel has zero norm");
      sum += num / den;
    }
  return sum / (static_cast<double>(d.inputs) * d.outputs);
}

double system_mismatch_avg(const std::vector<double>& trace, Index begin, Index end) {
  if (begin < 0 || end > static_cast<Index>(trace.size()) || begin >= end)
    throw DimensionError("system_mismatch_avg: empty or out-of-range block window");
  double sum = 0.0;
  for (Index m = begin; m < end; ++m) sum += trace[static_cast<std::size_t>(m)];
  return sum / static_cast<double>(end - begin);
}

}  // namespace osasi
