#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"

namespace gabp {

// Thrown when the iteration hits a state it cannot continue from: a zero
// diagonal at setup, a zero cavity precision, or a non-finite message.
// Fields are -1 when not applicable.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string what, int iteration, int node_i, int node_j);
  int iteration() const { return iteration_; }
  int node_i() const { return node_i_; }
  int node_j() const { return node_j_; }

 private:
  int iteration_;
  int node_i_;
  int node_j_;
};

enum class Schedule { synchronous, sequential };

// Convergence is declared on the max change over both message families.
// absolute: |delta|; scaled: |delta| / (1 + |new value|). The scaled form
// exists for the pseudoinverse path, whose mean messages grow like 1/eta and
// can never settle under an absolute threshold.
enum class ToleranceMode { absolute, scaled };

enum class Kernel { parallel, serial_reference };

struct SolverConfig {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  Schedule schedule = Schedule::synchronous;
  double damping = 0.0;   // in [0,1); blends old into new for both families
  ToleranceMode tolerance_mode = ToleranceMode::absolute;
  Kernel kernel = Kernel::parallel;
};

// Directed-edge topology shared by message states over one matrix.
// Edge ids are lexicographic by (source, destination), which is also the
// sequential schedule's update order.
struct EdgeIndex {
  int dim = 0;
  int num_edges = 0;              // directed
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<double> coeff;      // A(src, dst)
  std::vector<int> reverse;       // id of (dst -> src)
  std::vector<int> in_start;      // incoming edge ids per node, grouped
  std::vector<int> in_edges;      //   ordered by source index
  std::vector<int> excl_start;    // per edge (i->j): incoming edges of i
  std::vector<int> excl_edges;    //   minus (j->i), ordered by source

  int edge_id(int i, int j) const;   // -1 when absent
};

std::shared_ptr<const EdgeIndex> build_edge_index(const SparseSymmetricMatrix& A);

// Precision/mean message pair per directed edge, plus the node priors they
// were initialized from.
struct MessageState {
  std::shared_ptr<const EdgeIndex> index;
  Vector prior_precision;          // P_ii = A_ii
  Vector prior_mean;               // mu_ii = b_i / A_ii
  std::vector<double> precision;   // P[e], e a directed edge id
  std::vector<double> mean;        // mu[e]

  double P(int i, int j) const;
  double mu(int i, int j) const;
};

// Node priors from (A, b), all edge messages zero. Rejects zero diagonals
// (the prior mean divides by A_ii), naming the offending index.
MessageState initialize(const SparseSymmetricMatrix& A, const Vector& b);

// One sweep over every directed edge (i->j):
//   P_cav  = P_ii + sum of P_ki over k in N(i) minus j
//   mu_cav = P_cav^-1 (P_ii mu_ii + sum of P_ki mu_ki)
//   P_ij   = -A_ij^2 / P_cav
//   mu_ij  = -P_ij^-1 A_ij mu_cav
// damped by config. Synchronous reads only the incoming state; sequential
// updates in place in edge-id order.
MessageState iterate_once(const SparseSymmetricMatrix& A, const Vector& b,
                          const MessageState& state, const SolverConfig& config = {});

struct SolveResult {
  Vector means;        // mu_i
  Vector precisions;   // P_i; reported, not certified
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;   // max message delta per iteration
};

// Iterates to a message fixed point, then infers marginals:
//   P_i = P_ii + sum of incoming P; mu_i = P_i^-1 (P_ii mu_ii + sum P mu).
// Non-convergence at max_iterations is reported, not thrown.
SolveResult run(const SparseSymmetricMatrix& A, const Vector& b, const SolverConfig& config = {});

// Marginal inference from an existing message state (the final step of run).
void infer(const MessageState& state, Vector& means, Vector& precisions);

enum class Clipping { identity, sign };

// Elementwise decision rule; sign maps 0 to +1 so decisions are
// deterministic.
Vector decide(const Vector& means, Clipping clip);

// Caps OpenMP workers for the parallel kernel. Results are identical for any
// worker count; this only trades time. Requires workers >= 1.
void set_worker_count(int workers);
int worker_count();

}  // namespace gabp
