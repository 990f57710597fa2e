#include "gabp/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gabp/io.hpp"
#include "gabp/rng.hpp"

namespace gabp {

namespace {

constexpr std::uint64_t kSpreadingTag = 0x53505245414431ULL;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Row-major dense Gaussian elimination with partial pivoting; audits every
// belief-propagation estimate against the direct inverse of the same system.
Vector solve_dense(const SparseSymmetricMatrix& A, const Vector& b) {
  const int m = A.dim();
  std::vector<double> M(static_cast<std::size_t>(m) * (m + 1), 0.0);
  auto at = [&](int r, int c) -> double& { return M[static_cast<std::size_t>(r) * (m + 1) + c]; };
  for (int i = 0; i < m; ++i) {
    at(i, i) = A.diagonal(i);
    at(i, m) = b[i];
  }
  for (const OffDiagonal& e : A.off_diagonal()) {
    at(e.i, e.j) = e.value;
    at(e.j, e.i) = e.value;
  }
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
    }
    if (at(pivot, col) == 0.0) {
      throw std::runtime_error("singular system in direct elimination at column " +
                               std::to_string(col));
    }
    if (pivot != col) {
      for (int c = col; c <= m; ++c) std::swap(at(pivot, c), at(col, c));
    }
    for (int r = col + 1; r < m; ++r) {
      const double f = at(r, col) / at(col, col);
      if (f == 0.0) continue;
      for (int c = col; c <= m; ++c) at(r, c) -= f * at(col, c);
    }
  }
  Vector x(static_cast<std::size_t>(m));
  for (int r = m - 1; r >= 0; --r) {
    double acc = at(r, m);
    for (int c = r + 1; c < m; ++c) acc -= at(r, c) * x[c];
    x[r] = acc / at(r, r);
  }
  return x;
}

// What the detector assumes about the noise, as opposed to what the channel
// actually did: zf/pinv invert without regularization (Psi = 0).
NoiseCovariance detector_noise(const NoiseCovariance& channel, DetectorKind kind) {
  if (kind == DetectorKind::mmse) return channel;
  return NoiseCovariance::uniform(channel.size(), 0.0);
}

NoiseCovariance lift_zeros(const NoiseCovariance& psi) {
  std::vector<double> lifted(static_cast<std::size_t>(psi.size()));
  for (int i = 0; i < psi.size(); ++i) {
    lifted[static_cast<std::size_t>(i)] = psi[i] == 0.0 ? kPinvEta : psi[i];
  }
  return NoiseCovariance(Vector(std::move(lifted)));
}

std::string hash_hex(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace

GeneratedScenario generate_scenario(const Scenario& cfg) {
  if (cfg.users < 1) throw std::invalid_argument("need at least one user");
  if (cfg.chips < 1) throw std::invalid_argument("need at least one chip");
  if (cfg.num_frames < 0) throw std::invalid_argument("frame count cannot be negative");
  if (cfg.spreading &&
      (cfg.spreading->rows() != cfg.chips || cfg.spreading->cols() != cfg.users)) {
    throw std::invalid_argument("spreading matrix does not match users/chips");
  }
  if (cfg.noise_diagonal.size() != 0 &&
      cfg.noise_diagonal.size() != static_cast<std::size_t>(cfg.chips)) {
    throw std::invalid_argument("noise diagonal length does not match chip count");
  }
  if (cfg.noise_diagonal.size() == 0 && cfg.sigma2 < 0.0) {
    throw std::invalid_argument("sigma2 cannot be negative");
  }

  NoiseCovariance psi = cfg.noise_diagonal.size() != 0
                            ? NoiseCovariance(cfg.noise_diagonal)
                            : NoiseCovariance::uniform(cfg.chips, cfg.sigma2);

  RectangularMatrix S(cfg.chips, cfg.users);
  if (cfg.spreading) {
    S = *cfg.spreading;
  } else {
    Rng rng(splitmix64(cfg.rng_seed ^ kSpreadingTag));
    const double amp = 1.0 / std::sqrt(static_cast<double>(cfg.chips));
    for (int c = 0; c < cfg.chips; ++c) {
      for (int u = 0; u < cfg.users; ++u) S(c, u) = rng.sign() * amp;
    }
  }

  GeneratedScenario out{std::move(S), std::move(psi), {}};
  out.frames.reserve(static_cast<std::size_t>(cfg.num_frames));
  for (int f = 0; f < cfg.num_frames; ++f) {
    Rng rng(splitmix64(cfg.rng_seed + kGolden * static_cast<std::uint64_t>(f + 1)));
    Frame frame;
    std::vector<double> x(static_cast<std::size_t>(cfg.users));
    for (int u = 0; u < cfg.users; ++u) {
      x[u] = cfg.symbols == SymbolAlphabet::binary ? rng.sign() : rng.gaussian();
    }
    std::vector<double> y(static_cast<std::size_t>(cfg.chips), 0.0);
    for (int c = 0; c < cfg.chips; ++c) {
      double acc = 0.0;
      for (int u = 0; u < cfg.users; ++u) acc += out.S(c, u) * x[u];
      const double sd = std::sqrt(out.psi[c]);
      y[c] = acc + (sd == 0.0 ? 0.0 : sd * rng.gaussian());
    }
    frame.x = Vector(std::move(x));
    frame.y = Vector(std::move(y));
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::vector<TrialRecord> run_trials(const GeneratedScenario& scenario,
                                    const std::vector<DetectorSpec>& detectors,
                                    const SolverConfig& config) {
  const int k = scenario.S.cols();
  const bool binary = [&] {
    for (const Frame& f : scenario.frames) {
      for (std::size_t i = 0; i < f.x.size(); ++i) {
        if (f.x[i] != 1.0 && f.x[i] != -1.0) return false;
      }
    }
    return true;
  }();

  std::vector<TrialRecord> records;
  records.reserve(detectors.size() * scenario.frames.size());
  for (const DetectorSpec& spec : detectors) {
    if (spec.kind == DetectorKind::mmse) {
      for (int i = 0; i < scenario.psi.size(); ++i) {
        if (scenario.psi[i] == 0.0) {
          throw std::invalid_argument("mmse detection needs strictly positive noise variance");
        }
      }
    }
    const NoiseCovariance det_psi = detector_noise(scenario.psi, spec.kind);
    const NoiseCovariance oracle_psi = lift_zeros(det_psi);
    const long slots = spec.kind == DetectorKind::matched_filter
                           ? 0
                           : message_accounting(build_augmented(scenario.S, oracle_psi))
                                 .directed_slots;

    for (const Frame& frame : scenario.frames) {
      TrialRecord rec;
      rec.detector = spec.kind;
      rec.message_slots = slots;

      Vector raw(static_cast<std::size_t>(k));
      const auto t0 = std::chrono::steady_clock::now();
      if (spec.kind == DetectorKind::matched_filter) {
        raw = detect_mf(scenario.S, frame.y, Clipping::identity);
      } else {
        AugmentedDetection det =
            detect_augmented(scenario.S, det_psi, frame.y, Clipping::identity, config);
        rec.iterations = det.solve.iterations;
        rec.converged = det.solve.converged;
        raw = std::move(det.raw);

        const Vector exact = solve_dense(build_augmented(scenario.S, oracle_psi),
                                         build_augmented_rhs(frame.y, k));
        double gap = 0.0;
        for (int u = 0; u < k; ++u) gap = std::max(gap, std::abs(raw[u] - exact[u]));
        rec.oracle_gap = gap;
      }
      const auto t1 = std::chrono::steady_clock::now();
      rec.wall_time_sec = std::chrono::duration<double>(t1 - t0).count();

      if (binary) {
        const Vector decided = decide(raw, Clipping::sign);
        for (int u = 0; u < k; ++u) {
          if (decided[u] != frame.x[u]) ++rec.bit_errors;
        }
        rec.bits_sent = k;
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

SolveResult jacobi_baseline(const SparseSymmetricMatrix& A, const Vector& b,
                            const SolverConfig& config) {
  const int m = A.dim();
  if (b.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("right-hand side length does not match matrix dimension");
  }
  for (int i = 0; i < m; ++i) {
    if (A.diagonal(i) == 0.0) {
      throw SolverError("zero diagonal at index " + std::to_string(i), 0, i, -1);
    }
  }

  std::vector<double> x(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) x[i] = b[i] / A.diagonal(i);

  SolveResult result;
  result.converged = false;
  std::vector<double> next(static_cast<std::size_t>(m));
  for (int it = 1; it <= config.max_iterations; ++it) {
    for (int i = 0; i < m; ++i) {
      double acc = b[i];
      for (const SparseSymmetricMatrix::Neighbor& nb : A.neighbors(i)) {
        acc -= nb.value * x[nb.node];
      }
      next[i] = acc / A.diagonal(i);
    }
    bool finite = true;
    double residual = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!std::isfinite(next[i])) {
        finite = false;
        break;
      }
      double delta = std::abs(next[i] - x[i]);
      if (config.tolerance_mode == ToleranceMode::scaled) delta /= 1.0 + std::abs(next[i]);
      residual = std::max(residual, delta);
    }
    if (!finite) break;   // keep the last finite iterate
    x.swap(next);
    result.iterations = it;
    result.residual_history.push_back(residual);
    if (residual <= config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.means = Vector(std::move(x));
  return result;
}

MessageAccounting message_accounting(const SparseSymmetricMatrix& A) {
  MessageAccounting acc;
  acc.directed_slots = 2 * static_cast<long>(A.off_diagonal().size());
  acc.dense_equivalent = 2L * A.dim() * A.dim();
  return acc;
}

std::pair<double, double> wilson_interval(long errors, long bits, double z) {
  if (bits <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(bits);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // the score interval always contains p; rounding must not break that
  return {std::min(p, std::max(0.0, center - half)), std::max(p, std::min(1.0, center + half))};
}

std::string scenario_hash(const Scenario& cfg) {
  std::ostringstream text;
  text << "users=" << cfg.users << ";chips=" << cfg.chips << ";sigma2="
       << format_g17(cfg.sigma2) << ";noise=";
  for (std::size_t i = 0; i < cfg.noise_diagonal.size(); ++i) {
    if (i) text << ',';
    text << format_g17(cfg.noise_diagonal[i]);
  }
  text << ";symbols=" << (cfg.symbols == SymbolAlphabet::binary ? "binary" : "gaussian")
       << ";frames=" << cfg.num_frames << ";seed=" << cfg.rng_seed << ";spreading=";
  if (cfg.spreading) {
    for (int r = 0; r < cfg.spreading->rows(); ++r) {
      for (int c = 0; c < cfg.spreading->cols(); ++c) {
        if (r || c) text << ',';
        text << format_g17((*cfg.spreading)(r, c));
      }
    }
  } else {
    text << "drawn";
  }
  return hash_hex(text.str());
}

const char* detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::matched_filter: return "mf";
    case DetectorKind::decorrelator: return "zf";
    case DetectorKind::mmse: return "mmse";
    case DetectorKind::pseudoinverse: return "pinv";
  }
  return "?";
}

std::vector<AggregateRow> aggregate_trials(const Scenario& cfg,
                                           const std::vector<TrialRecord>& records) {
  const std::string hash = scenario_hash(cfg);
  std::vector<DetectorKind> order;
  for (const TrialRecord& rec : records) {
    if (std::find(order.begin(), order.end(), rec.detector) == order.end()) {
      order.push_back(rec.detector);
    }
  }
  std::vector<AggregateRow> rows;
  rows.reserve(order.size());
  for (DetectorKind kind : order) {
    AggregateRow row;
    row.scenario_hash = hash;
    row.detector = detector_name(kind);
    long errors = 0;
    long bits = 0;
    long count = 0;
    long converged = 0;
    double iter_sum = 0.0;
    for (const TrialRecord& rec : records) {
      if (rec.detector != kind) continue;
      errors += rec.bit_errors;
      bits += rec.bits_sent;
      ++count;
      if (rec.converged) ++converged;
      iter_sum += rec.iterations;
      row.message_slots = rec.message_slots;
    }
    row.ber = bits > 0 ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
    const auto ci = wilson_interval(errors, bits);
    row.ber_ci_low = ci.first;
    row.ber_ci_high = ci.second;
    row.mean_iterations = count > 0 ? iter_sum / static_cast<double>(count) : 0.0;
    row.convergence_rate =
        count > 0 ? static_cast<double>(converged) / static_cast<double>(count) : 1.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "scenario_hash,detector,ber,ber_ci_low,ber_ci_high,mean_iterations,"
         "convergence_rate,message_slots\n";
  for (const AggregateRow& row : rows) {
    out << row.scenario_hash << ',' << row.detector << ',' << format_g17(row.ber) << ','
        << format_g17(row.ber_ci_low) << ',' << format_g17(row.ber_ci_high) << ','
        << format_g17(row.mean_iterations) << ',' << format_g17(row.convergence_rate) << ','
        << row.message_slots << '\n';
  }
}

void write_plot_data(std::ostream& out, const std::vector<SweepPoint>& points) {
  std::vector<std::string> order;
  for (const SweepPoint& pt : points) {
    for (const AggregateRow& row : pt.rows) {
      if (std::find(order.begin(), order.end(), row.detector) == order.end()) {
        order.push_back(row.detector);
      }
    }
  }
  bool first = true;
  for (const std::string& name : order) {
    if (!first) out << '\n';
    first = false;
    out << "# " << name << '\n';
    for (const SweepPoint& pt : points) {
      for (const AggregateRow& row : pt.rows) {
        if (row.detector == name) {
          out << format_g17(pt.x) << ' ' << format_g17(row.ber) << '\n';
        }
      }
    }
  }
}

}  // namespace gabp
