#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "gabp/engine.hpp"
#include "gabp/matrix.hpp"
#include "gabp/rng.hpp"
#include "gabp/vector.hpp"

// Times the parallel sweep kernel against the serial reference on fixed
// iteration budgets. Both kernels must produce bitwise-identical marginals;
// the benchmark aborts if they ever disagree.

namespace {

using Clock = std::chrono::steady_clock;

struct Case {
  std::string name;
  gabp::SparseSymmetricMatrix A;
  gabp::Vector b;
  int sweeps;
};

Case augmented_case(int users, int chips, int sweeps, std::uint64_t seed) {
  gabp::Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(chips));
  gabp::RectangularMatrix S(chips, users);
  for (int c = 0; c < chips; ++c) {
    for (int u = 0; u < users; ++u) S(c, u) = rng.sign() * scale;
  }
  const double noise = users * scale + 0.1;
  std::vector<double> y(static_cast<std::size_t>(chips));
  for (double& v : y) v = rng.gaussian();

  Case out{"augmented k=" + std::to_string(users) + " n=" + std::to_string(chips),
           gabp::build_augmented(S, gabp::NoiseCovariance::uniform(chips, noise)),
           gabp::build_augmented_rhs(gabp::Vector(std::move(y)), users), sweeps};
  return out;
}

Case dominant_case(int dim, int neighbors, int sweeps, std::uint64_t seed) {
  gabp::Rng rng(seed);
  std::vector<double> diag(static_cast<std::size_t>(dim));
  std::vector<gabp::OffDiagonal> off;
  for (int i = 0; i < dim; ++i) {
    for (int step = 1; step <= neighbors; ++step) {
      const int j = i + step;
      if (j >= dim) break;
      off.push_back({i, j, 2.0 * rng.uniform01() - 1.0});
    }
  }
  for (const gabp::OffDiagonal& e : off) {
    diag[static_cast<std::size_t>(e.i)] += std::abs(e.value);
    diag[static_cast<std::size_t>(e.j)] += std::abs(e.value);
  }
  for (double& d : diag) d += 0.5;
  std::vector<double> b(static_cast<std::size_t>(dim));
  for (double& v : b) v = rng.gaussian();
  return Case{"banded dominant dim=" + std::to_string(dim),
              gabp::SparseSymmetricMatrix(dim, gabp::Vector(std::move(diag)), std::move(off)),
              gabp::Vector(std::move(b)), sweeps};
}

double best_of(const Case& c, gabp::Kernel kernel, int reps, gabp::SolveResult& result) {
  gabp::SolverConfig config;
  config.kernel = kernel;
  config.max_iterations = c.sweeps;
  config.tolerance = 1e-300;   // never met: every rep does exactly c.sweeps sweeps
  double best = 1e100;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    gabp::SolveResult res = gabp::run(c.A, c.b, config);
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    result = std::move(res);
  }
  return best;
}

bool identical(const gabp::SolveResult& a, const gabp::SolveResult& b) {
  if (a.iterations != b.iterations || a.means.size() != b.means.size()) return false;
  for (std::size_t i = 0; i < a.means.size(); ++i) {
    if (a.means[i] != b.means[i] || a.precisions[i] != b.precisions[i]) return false;
  }
  return true;
}

}  // namespace

int main() {
  const Case cases[] = {
      augmented_case(96, 384, 60, 0xB0B1ULL),
      augmented_case(160, 640, 30, 0xB0B2ULL),
      dominant_case(20000, 6, 60, 0xB0B3ULL),
  };

  std::printf("workers %d\n", gabp::worker_count());
  std::printf("%-28s %10s %12s %12s %9s\n", "case", "sweeps", "serial_s", "parallel_s",
              "speedup");
  for (const Case& c : cases) {
    gabp::SolveResult serial, parallel;
    const double ts = best_of(c, gabp::Kernel::serial_reference, 2, serial);
    const double tp = best_of(c, gabp::Kernel::parallel, 2, parallel);
    if (!identical(serial, parallel)) {
      std::printf("kernel mismatch on %s\n", c.name.c_str());
      return 1;
    }
    std::printf("%-28s %10d %12.4f %12.4f %8.2fx\n", c.name.c_str(), c.sweeps, ts, tp,
                ts / tp);
  }
  return 0;
}
