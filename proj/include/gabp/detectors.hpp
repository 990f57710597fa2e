#pragma once

#include "gabp/engine.hpp"
#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"

namespace gabp {

enum class DetectorKind { matched_filter, decorrelator, mmse, pseudoinverse };

struct DetectorSpec {
  DetectorKind kind = DetectorKind::mmse;
  Clipping clipping = Clipping::sign;
};

// Diagonal substituted for zero noise variances: the augmented system needs
// A_ii != 0, and the induced solution error is O(eta).
inline constexpr double kPinvEta = 1e-9;

// Matched filter: per-user correlation S^T y, interference ignored. Takes raw
// chip observations; the matched-filter bank is applied here.
Vector detect_mf(const RectangularMatrix& S, const Vector& y, Clipping clip);

struct AugmentedDetection {
  Vector raw;            // first k inferred means, unclipped
  Vector clipped;
  SolveResult solve;     // full augmented-system result, dimension k + n
};

// Shared augmented-system path: builds [[I,S^T],[S,-Psi]] with rhs (0, y),
// runs the solver, splits out the user block. Zero Psi entries are replaced
// by eta and the tolerance mode is forced to scaled in that case (see
// ToleranceMode).
AugmentedDetection detect_augmented(const RectangularMatrix& S, const NoiseCovariance& psi,
                                    const Vector& y, Clipping clip, const SolverConfig& config,
                                    double eta = kPinvEta);

struct MmseDetection {
  Vector estimates;        // clipped user decisions
  SolveResult diagnostics; // augmented solve, dimension k + n
};

// MMSE detector through the augmented construction; S^T S is never formed.
// Requires strictly positive noise variances (use detect_pseudoinverse at
// Psi = 0).
MmseDetection detect_mmse(const RectangularMatrix& S, const NoiseCovariance& psi,
                          const Vector& y, Clipping clip, const SolverConfig& config);

// Zero-forcing / decorrelator: the Psi -> 0 limit of the augmented path,
// realized with the eta perturbation. Matches (S^T S)^-1 S^T y for full
// column rank.
Vector detect_decorrelator(const RectangularMatrix& S, const Vector& y, Clipping clip,
                           const SolverConfig& config);

// Least-squares solution S^+ y via the same eta-perturbed path, unclipped.
Vector detect_pseudoinverse(const RectangularMatrix& S, const Vector& y,
                            const SolverConfig& config);

}  // namespace gabp
