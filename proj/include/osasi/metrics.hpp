#pragma once

#include "osasi/signal.hpp"
#include "osasi/types.hpp"

#include <vector>

namespace osasi {

inline constexpr double kDbCap = 80.0;

inline double db10(double linear) {
  return 10.0 * std::log10(linear);
}

/// 10 log10 clamped to [-kDbCap, kDbCap]; absorbs degenerate floors.
inline double db10_capped(double linear) {
  if (!(linear > 0.0)) return -kDbCap;
  const double db = db10(linear);
  return db < -kDbCap ? -kDbCap : (db > kDbCap ? kDbCap : db);
}

/// Mean over samples [begin, end) and channels of d^2 / (d - y_hat)^2 with
/// the denominator floored at 1e-12. Linear; convert with db10_capped.
double erle_linear(const Eigen::Ref<const Matrix>& d, const Eigen::Ref<const Matrix>& y_hat,
                   Index begin, Index end);

/// Echo return loss enhancement of the estimator over the sample range, dB.
double erle(const Eigen::Ref<const Matrix>& d, const Eigen::Ref<const Matrix>& y_hat, Index begin,
            Index end);

/// Block system mismatch: mean over (p, q) of
/// ||h_pq - h_hat_pq||^2 / ||h_pq||^2. Linear.
double system_mismatch_block(const FirStack& truth, const FirStack& estimate);

/// Temporal average of a mismatch trace over blocks [begin, end). Linear.
double system_mismatch_avg(const std::vector<double>& trace, Index begin, Index end);

}  // namespace osasi
