#include "gabp/detectors.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace gabp {

Vector detect_mf(const RectangularMatrix& S, const Vector& y, Clipping clip) {
  if (y.size() != static_cast<std::size_t>(S.rows())) {
    throw std::invalid_argument("observation length does not match chip count");
  }
  Vector out(static_cast<std::size_t>(S.cols()));
  for (int u = 0; u < S.cols(); ++u) {
    double acc = 0.0;
    for (int c = 0; c < S.rows(); ++c) acc += S(c, u) * y[c];
    out[u] = acc;
  }
  return decide(out, clip);
}

AugmentedDetection detect_augmented(const RectangularMatrix& S, const NoiseCovariance& psi,
                                    const Vector& y, Clipping clip, const SolverConfig& config,
                                    double eta) {
  if (psi.size() != S.rows()) {
    throw std::invalid_argument("noise covariance length does not match chip count");
  }
  if (y.size() != static_cast<std::size_t>(S.rows())) {
    throw std::invalid_argument("observation length does not match chip count");
  }

  bool substituted = false;
  for (int i = 0; i < psi.size(); ++i) {
    if (psi[i] == 0.0) substituted = true;
  }
  NoiseCovariance effective = psi;
  SolverConfig cfg = config;
  if (substituted) {
    std::vector<double> lifted(static_cast<std::size_t>(psi.size()));
    for (int i = 0; i < psi.size(); ++i) lifted[static_cast<std::size_t>(i)] = psi[i] == 0.0 ? eta : psi[i];
    effective = NoiseCovariance(Vector(std::move(lifted)));
    // near-singular noise block: absolute message deltas never settle, scaled ones do
    cfg.tolerance_mode = ToleranceMode::scaled;
  }

  const SparseSymmetricMatrix A = build_augmented(S, effective);
  const Vector b = build_augmented_rhs(y, S.cols());
  SolveResult solve = run(A, b, cfg);

  AugmentedDetection det;
  Vector raw(static_cast<std::size_t>(S.cols()));
  for (int u = 0; u < S.cols(); ++u) raw[u] = solve.means[u];
  det.clipped = decide(raw, clip);
  det.raw = std::move(raw);
  det.solve = std::move(solve);
  return det;
}

MmseDetection detect_mmse(const RectangularMatrix& S, const NoiseCovariance& psi, const Vector& y,
                          Clipping clip, const SolverConfig& config) {
  for (int i = 0; i < psi.size(); ++i) {
    if (psi[i] == 0.0) {
      throw std::invalid_argument("mmse detection needs strictly positive noise variance at chip " +
                                  std::to_string(i));
    }
  }
  AugmentedDetection aug = detect_augmented(S, psi, y, clip, config);
  MmseDetection det;
  det.estimates = std::move(aug.clipped);
  det.diagnostics = std::move(aug.solve);
  return det;
}

Vector detect_decorrelator(const RectangularMatrix& S, const Vector& y, Clipping clip,
                           const SolverConfig& config) {
  const NoiseCovariance zero = NoiseCovariance::uniform(S.rows(), 0.0);
  return detect_augmented(S, zero, y, clip, config).clipped;
}

Vector detect_pseudoinverse(const RectangularMatrix& S, const Vector& y,
                            const SolverConfig& config) {
  const NoiseCovariance zero = NoiseCovariance::uniform(S.rows(), 0.0);
  return detect_augmented(S, zero, y, Clipping::identity, config).raw;
}

}  // namespace gabp
