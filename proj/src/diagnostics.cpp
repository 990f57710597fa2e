#include "gabp/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gabp/detectors.hpp"

namespace gabp {

namespace {

std::vector<double> column_abs_sums(const SparseSymmetricMatrix& A) {
  std::vector<double> sums(A.dim(), 0.0);
  for (const auto& e : A.off_diagonal()) {
    sums[e.i] += std::abs(e.value);
    sums[e.j] += std::abs(e.value);
  }
  return sums;
}

}  // namespace

DdResult check_diagonal_dominance(const SparseSymmetricMatrix& A) {
  const auto sums = column_abs_sums(A);
  double margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < A.dim(); ++j) {
    margin = std::min(margin, std::abs(A.diagonal(j)) - sums[j]);
  }
  return {margin > 0.0, margin};
}

ThresholdResult noise_threshold_check(const RectangularMatrix& S, const NoiseCovariance& psi) {
  if (psi.size() != S.rows()) {
    throw std::invalid_argument("noise covariance dimension does not match chip count");
  }
  double threshold = 0.0;
  for (int r = 0; r < S.rows(); ++r) {
    double row = 0.0;
    for (int c = 0; c < S.cols(); ++c) row += std::abs(S(r, c));
    threshold = std::max(threshold, row);
  }
  double min_psi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < psi.size(); ++i) min_psi = std::min(min_psi, psi[i]);
  return {min_psi > threshold, threshold};
}

Regularized regularize_dd(const SparseSymmetricMatrix& A, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const auto sums = column_abs_sums(A);
  Vector diag = A.diagonal_vector();
  Vector added(static_cast<std::size_t>(A.dim()));
  for (int j = 0; j < A.dim(); ++j) {
    const double old = diag[j];
    if (std::abs(old) - sums[j] >= epsilon) continue;
    const double sign = (old < 0.0) ? -1.0 : 1.0;
    double mag = sums[j] + epsilon;
    // Rounding in sums[j] + epsilon can land a hair short of the promised
    // margin; bump by ulps until the recomputed slack clears it.
    while (mag - sums[j] < epsilon) {
      mag = std::nextafter(mag, std::numeric_limits<double>::infinity());
    }
    diag[j] = sign * mag;
    added[j] = diag[j] - old;
  }
  return {SparseSymmetricMatrix(A.dim(), std::move(diag),
                                std::vector<OffDiagonal>(A.off_diagonal())),
          std::move(added)};
}

WalkSummability walk_summability_check(const SparseSymmetricMatrix& A) {
  const int m = A.dim();
  for (int i = 0; i < m; ++i) {
    if (A.diagonal(i) == 0.0) {
      throw std::invalid_argument("zero diagonal at index " + std::to_string(i) +
                                  "; normalized off-diagonal matrix undefined");
    }
  }
  if (A.off_diagonal().empty()) return {true, 0.0};

  std::vector<double> scale(m);
  for (int i = 0; i < m; ++i) scale[i] = 1.0 / std::sqrt(std::abs(A.diagonal(i)));

  // Power iteration on M_ij = |A_ij| / sqrt(|A_ii| |A_jj|). M is symmetric
  // and entrywise nonnegative, so ||Mv|| / ||v|| settles to the spectral
  // radius even when eigenvalues come in +- pairs (bipartite supports).
  std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m)));
  std::vector<double> w(m);
  double rho = 0.0;
  int stable = 0;
  for (int it = 0; it < 20000; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (const auto& e : A.off_diagonal()) {
      const double mij = std::abs(e.value) * scale[e.i] * scale[e.j];
      w[e.i] += mij * v[e.j];
      w[e.j] += mij * v[e.i];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return {true, 0.0};
    const double next = norm;   // ||M v|| with ||v|| = 1
    for (int i = 0; i < m; ++i) v[i] = w[i] / norm;
    if (it >= 50 && std::abs(next - rho) <= 1e-13 * std::max(1.0, next)) {
      if (++stable >= 3) {
        rho = next;
        break;
      }
    } else {
      stable = 0;
    }
    rho = next;
  }
  return {rho < 1.0, rho};
}

DiagnosticsReport diagnose(const RectangularMatrix& S, const NoiseCovariance& psi) {
  Vector diag = psi.diagonal();
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0) diag[i] = kPinvEta;
  }
  const NoiseCovariance effective{std::move(diag)};
  const auto A = build_augmented(S, effective);
  const auto dd = check_diagonal_dominance(A);
  const auto thr = noise_threshold_check(S, psi);
  const auto ws = walk_summability_check(A);
  return {dd.dominant, dd.margin, thr.satisfied, thr.threshold, ws.summable, ws.spectral_radius};
}

}  // namespace gabp
