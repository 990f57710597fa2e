#pragma once

#include <vector>

#include "gabp/vector.hpp"

namespace gabp {

// One stored entry represents both A(i,j) and A(j,i); i < j, value != 0.
struct OffDiagonal {
  int i;
  int j;
  double value;
};

// Symmetric matrix stored as diagonal plus undirected off-diagonal entries.
// Neighbor lists are precomputed because message passing walks N(i) in the
// inner loop.
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix(int dim, Vector diagonal, std::vector<OffDiagonal> off_diagonal);

  int dim() const { return dim_; }
  double diagonal(int i) const { return diag_[i]; }
  const Vector& diagonal_vector() const { return diag_; }
  const std::vector<OffDiagonal>& off_diagonal() const { return off_; }

  struct Neighbor {
    int node;
    double value;
  };
  // Sorted by node index.
  const std::vector<Neighbor>& neighbors(int i) const { return nbrs_[i]; }

  // Dense read; 0 for absent off-diagonal entries.
  double at(int i, int j) const;

 private:
  int dim_ = 0;
  Vector diag_;
  std::vector<OffDiagonal> off_;           // sorted by (i, j)
  std::vector<std::vector<Neighbor>> nbrs_;
};

// Dense rectangular matrix, rows = chips (n), cols = users (k). Column u is
// user u's signature sequence.
class RectangularMatrix {
 public:
  RectangularMatrix(int rows, int cols);
  RectangularMatrix(int rows, int cols, std::vector<double> row_major);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::vector<double>& values() const { return v_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

// Diagonal noise covariance, one variance per received chip. All-zero is
// legal (noiseless / pseudoinverse case).
class NoiseCovariance {
 public:
  explicit NoiseCovariance(Vector diagonal);
  static NoiseCovariance uniform(int n, double variance);

  int size() const { return static_cast<int>(diag_.size()); }
  double operator[](int i) const { return diag_[i]; }
  const Vector& diagonal() const { return diag_; }

  bool is_zero() const;
  // True when every entry equals the first bitwise.
  bool is_uniform() const;

 private:
  Vector diag_;
};

// Embeds the rectangular detection problem into the symmetric indefinite
// system [[I_k, S^T], [S, -Psi]] so message passing applies without ever
// forming S^T S. Dimension is k + n; users occupy indices 0..k-1, chips
// k..k+n-1. Exact-zero spreading entries are not stored.
SparseSymmetricMatrix build_augmented(const RectangularMatrix& S, const NoiseCovariance& psi);

// Observation vector for the augmented system: k zeros followed by y.
Vector build_augmented_rhs(const Vector& y, int users);

}  // namespace gabp
