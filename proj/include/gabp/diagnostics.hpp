#pragma once

#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"

namespace gabp {

struct DdResult {
  bool dominant;   // every column: |diag| strictly exceeds off-diagonal abs sum
  double margin;   // minimum column slack; negative when not dominant
};
DdResult check_diagonal_dominance(const SparseSymmetricMatrix& A);

struct ThresholdResult {
  bool satisfied;     // min_i Psi_i > threshold
  double threshold;   // max absolute row sum of S (k/sqrt(n) for +-1/sqrt(n) spreading)
};
ThresholdResult noise_threshold_check(const RectangularMatrix& S, const NoiseCovariance& psi);

struct Regularized {
  SparseSymmetricMatrix matrix;
  Vector added;   // signed diagonal change per column; zero where nothing changed
};
// Raises deficient diagonal magnitudes (sign preserved) until every column's
// slack is at least epsilon. Only the diagonal changes; the caller is told by
// how much, since the solved problem is now a different one.
Regularized regularize_dd(const SparseSymmetricMatrix& A, double epsilon);

struct WalkSummability {
  bool summable;             // spectral_radius < 1
  double spectral_radius;    // of |D^-1/2 A D^-1/2 - I|, by power iteration
};
// Requires nonzero diagonal entries.
WalkSummability walk_summability_check(const SparseSymmetricMatrix& A);

struct DiagnosticsReport {
  bool is_diagonally_dominant;
  double dd_margin;
  bool noise_threshold_satisfied;
  double noise_threshold_value;
  bool walk_summable;
  double spectral_radius_estimate;
};
// Full report on the augmented system for (S, Psi). Zero noise entries are
// substituted with the pseudoinverse perturbation eta so the normalized
// spectral radius is defined.
DiagnosticsReport diagnose(const RectangularMatrix& S, const NoiseCovariance& psi);

}  // namespace gabp
