#include "gabp/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gabp/vector.hpp"

namespace gabp {

void Vector::validate() const {
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i])) {
      throw std::invalid_argument("non-finite vector entry at index " + std::to_string(i));
    }
  }
}

SparseSymmetricMatrix::SparseSymmetricMatrix(int dim, Vector diagonal,
                                             std::vector<OffDiagonal> off_diagonal)
    : dim_(dim), diag_(std::move(diagonal)), off_(std::move(off_diagonal)) {
  if (dim_ <= 0) throw std::invalid_argument("matrix dimension must be positive");
  if (static_cast<int>(diag_.size()) != dim_) {
    throw std::invalid_argument("diagonal length " + std::to_string(diag_.size()) +
                                " does not match dimension " + std::to_string(dim_));
  }
  for (const auto& e : off_) {
    if (e.i < 0 || e.j >= dim_ || e.i >= e.j) {
      throw std::invalid_argument("off-diagonal entry (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ") must satisfy 0 <= i < j < dim");
    }
    if (e.value == 0.0) {
      throw std::invalid_argument("explicit zero stored at (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ")");
    }
    if (!std::isfinite(e.value)) {
      throw std::invalid_argument("non-finite entry at (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ")");
    }
  }
  std::sort(off_.begin(), off_.end(),
            [](const OffDiagonal& a, const OffDiagonal& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  for (std::size_t t = 1; t < off_.size(); ++t) {
    if (off_[t - 1].i == off_[t].i && off_[t - 1].j == off_[t].j) {
      throw std::invalid_argument("duplicate off-diagonal entry (" + std::to_string(off_[t].i) +
                                  ", " + std::to_string(off_[t].j) + ")");
    }
  }
  nbrs_.assign(dim_, {});
  for (const auto& e : off_) {
    nbrs_[e.i].push_back({e.j, e.value});
    nbrs_[e.j].push_back({e.i, e.value});
  }
  for (auto& list : nbrs_) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

double SparseSymmetricMatrix::at(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_) {
    throw std::out_of_range("matrix index out of range");
  }
  if (i == j) return diag_[i];
  const auto& list = nbrs_[i];
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const Neighbor& nb, int node) { return nb.node < node; });
  return (it != list.end() && it->node == j) ? it->value : 0.0;
}

RectangularMatrix::RectangularMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, 0.0) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
}

RectangularMatrix::RectangularMatrix(int rows, int cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), v_(std::move(row_major)) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
  if (v_.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("entry count does not match rows * cols");
  }
  for (double x : v_) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite matrix entry");
  }
}

NoiseCovariance::NoiseCovariance(Vector diagonal) : diag_(std::move(diagonal)) {
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    if (diag_[i] < 0.0) {
      throw std::invalid_argument("negative noise variance at chip " + std::to_string(i));
    }
  }
}

NoiseCovariance NoiseCovariance::uniform(int n, double variance) {
  if (n <= 0) throw std::invalid_argument("noise dimension must be positive");
  Vector d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[i] = variance;
  return NoiseCovariance(std::move(d));
}

bool NoiseCovariance::is_zero() const {
  for (double x : diag_) {
    if (x != 0.0) return false;
  }
  return true;
}

bool NoiseCovariance::is_uniform() const {
  for (double x : diag_) {
    if (x != diag_[0]) return false;
  }
  return true;
}

SparseSymmetricMatrix build_augmented(const RectangularMatrix& S, const NoiseCovariance& psi) {
  const int n = S.rows();
  const int k = S.cols();
  if (psi.size() != n) {
    throw std::invalid_argument("noise covariance has " + std::to_string(psi.size()) +
                                " entries for " + std::to_string(n) + " chips");
  }
  Vector diag(static_cast<std::size_t>(k + n));
  for (int u = 0; u < k; ++u) diag[u] = 1.0;
  for (int c = 0; c < n; ++c) diag[k + c] = -psi[c];
  std::vector<OffDiagonal> off;
  off.reserve(static_cast<std::size_t>(n) * k);
  for (int u = 0; u < k; ++u) {
    for (int c = 0; c < n; ++c) {
      const double s = S(c, u);
      if (s != 0.0) off.push_back({u, k + c, s});
    }
  }
  return SparseSymmetricMatrix(k + n, std::move(diag), std::move(off));
}

Vector build_augmented_rhs(const Vector& y, int users) {
  if (users < 0) throw std::invalid_argument("user count must be nonnegative");
  Vector out(static_cast<std::size_t>(users) + y.size());
  for (std::size_t c = 0; c < y.size(); ++c) out[users + c] = y[c];
  return out;
}

}  // namespace gabp
