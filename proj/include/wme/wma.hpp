#pragma once

// Weighted-majority kernels: score normalization, EMA weight smoothing and
// the class vote.

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdlib>

#include "wme/targets.hpp"

namespace wme {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Shift scores by their minimum and normalize onto the simplex; uniform
/// when every score ties.
template <typename Derived>
VectorX<typename Derived::Scalar> normalize_scores(const Eigen::MatrixBase<Derived>& raw) {
  using S = typename Derived::Scalar;
  const Eigen::Index n = raw.size();
  const S lo = raw.minCoeff();
  if (raw.maxCoeff() == lo) return VectorX<S>::Constant(n, S(1) / S(n));
  const VectorX<S> shifted = raw.array() - lo;
  return shifted / shifted.sum();
}

/// EMA smoothing factor for a window of the given length.
template <typename Scalar = double>
constexpr Scalar ema_alpha(Eigen::Index window_len) {
  return Scalar(2) / Scalar(window_len + 1);
}

/// w <- alpha * s + (1 - alpha) * w, alpha = 2 / (window_len + 1), then
/// renormalized to sum 1.
template <typename D1, typename D2>
VectorX<typename D1::Scalar> ema_update(const Eigen::MatrixBase<D1>& prev, const Eigen::MatrixBase<D2>& scores,
                                        Eigen::Index window_len) {
  using S = typename D1::Scalar;
  const S alpha = ema_alpha<S>(window_len);
  const VectorX<S> next = alpha * scores + (S(1) - alpha) * prev;
  return next / next.sum();
}

using VoteMass = Eigen::Matrix<double, kClassCount, 1>;

struct Vote {
  ClassLabel label;
  VoteMass mass = VoteMass::Zero();
  bool tie = false;
};

/// Relative tolerance under which two class masses count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Weighted-majority vote. Class c collects the weight of every expert
/// predicting c; the heaviest class wins. Ties (masses within
/// kTieTolerance of the total) go to the class nearest 2, then the lower one.
template <typename DC, typename DW>
Vote vote(const Eigen::MatrixBase<DC>& classes, const Eigen::MatrixBase<DW>& weights) {
  Vote v;
  for (Eigen::Index j = 0; j < classes.size(); ++j) v.mass(classes(j)) += static_cast<double>(weights(j));
  const double tol = kTieTolerance * std::abs(v.mass.sum());
  const double best = v.mass.maxCoeff();
  int chosen = -1;
  int contenders = 0;
  for (int c = 0; c < kClassCount; ++c) {
    if (v.mass(c) < best - tol) continue;
    ++contenders;
    if (chosen < 0 || std::abs(c - kNeutralClass) < std::abs(chosen - kNeutralClass)) chosen = c;
  }
  v.label = ClassLabel(chosen);
  v.tie = contenders > 1;
  return v;
}

}  // namespace wme
