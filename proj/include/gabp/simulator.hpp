#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gabp/detectors.hpp"
#include "gabp/engine.hpp"
#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"

namespace gabp {

enum class SymbolAlphabet { binary, gaussian };

struct Scenario {
  int users = 1;
  int chips = 1;
  // Spreading drawn as +-1/sqrt(n) when absent.
  std::optional<RectangularMatrix> spreading;
  // Per-chip variances; empty means uniform sigma2 on every chip.
  Vector noise_diagonal;
  double sigma2 = 0.0;
  SymbolAlphabet symbols = SymbolAlphabet::binary;
  int num_frames = 1;
  std::uint64_t rng_seed = 0;
};

struct Frame {
  Vector x;   // transmitted symbols, length k
  Vector y;   // received chips, length n
};

struct GeneratedScenario {
  RectangularMatrix S;
  NoiseCovariance psi;
  std::vector<Frame> frames;
};

// Deterministic given rng_seed: the spreading matrix comes from one derived
// stream, each frame from its own (so frames can be processed in parallel
// without changing results). Chip i noise is zero-mean Gaussian with
// variance Psi_i.
GeneratedScenario generate_scenario(const Scenario& cfg);

struct TrialRecord {
  DetectorKind detector;
  long bit_errors = 0;
  long bits_sent = 0;
  int iterations = 0;
  bool converged = true;
  double wall_time_sec = 0.0;   // excluded from every determinism contract
  long message_slots = 0;
  // Max |gabp - dense oracle| over users, before clipping; 0 for the matched
  // filter, which is computed directly.
  double oracle_gap = 0.0;
};

// Runs every detector on every frame. Bit errors are counted against the
// transmitted symbols for the binary alphabet (bits_sent stays 0 for
// gaussian symbols). Each record carries the dense-oracle audit gap.
std::vector<TrialRecord> run_trials(const GeneratedScenario& scenario,
                                    const std::vector<DetectorSpec>& detectors,
                                    const SolverConfig& config);

// Classical Jacobi iteration with the engine's tolerance semantics, for
// iteration-count comparisons. Starts from x_i = b_i / A_ii. Divergence into
// non-finite values stops the run with converged=false and the last finite
// iterate. Posterior precisions do not exist here; the precisions field is
// left empty.
SolveResult jacobi_baseline(const SparseSymmetricMatrix& A, const Vector& b,
                            const SolverConfig& config);

struct MessageAccounting {
  long directed_slots;     // 2 * stored off-diagonal pairs; 2nk for dense S
  long dense_equivalent;   // 2 * dim^2, the all-pairs cost it replaces
};
MessageAccounting message_accounting(const SparseSymmetricMatrix& A);

// 95% score interval for e errors in b bits (z defaults to 1.96).
std::pair<double, double> wilson_interval(long errors, long bits, double z = 1.96);

// FNV-1a over the canonical scenario text; stable across runs and platforms.
std::string scenario_hash(const Scenario& cfg);

struct AggregateRow {
  std::string scenario_hash;
  std::string detector;   // mf | zf | mmse | pinv
  double ber = 0.0;
  double ber_ci_low = 0.0;
  double ber_ci_high = 0.0;
  double mean_iterations = 0.0;
  double convergence_rate = 1.0;
  long message_slots = 0;
};

// One row per detector, in first-appearance order of the records.
std::vector<AggregateRow> aggregate_trials(const Scenario& cfg,
                                           const std::vector<TrialRecord>& records);

const char* detector_name(DetectorKind kind);

// Header plus one row per aggregate; numbers at 17 significant digits; no
// timing columns, so equal seeds make byte-identical files.
void write_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

// Gnuplot two-column blocks (x = swept value, y = ber), one block per
// detector separated by blank lines, detector named in a # comment.
struct SweepPoint {
  double x;
  std::vector<AggregateRow> rows;
};
void write_plot_data(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace gabp
