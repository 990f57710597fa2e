#include "gabp/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <climits>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace gabp {

SolverError::SolverError(std::string what, int iteration, int node_i, int node_j)
    : std::runtime_error(std::move(what)), iteration_(iteration), node_i_(node_i), node_j_(node_j) {}

namespace {

void validate_config(const SolverConfig& config) {
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(config.damping >= 0.0 && config.damping < 1.0)) {
    throw std::invalid_argument("damping must lie in [0, 1)");
  }
}

std::string edge_text(const EdgeIndex& ix, int e) {
  return std::to_string(ix.src[e]) + "->" + std::to_string(ix.dst[e]);
}

struct SweepOutcome {
  double max_dp = 0.0;
  double max_dmu = 0.0;
  int zero_edge = INT_MAX;       // first edge whose cavity precision was exactly 0
  int nonfinite_edge = INT_MAX;  // first edge producing NaN/Inf
};

// One directed-edge update. Both kernels and both schedules run exactly this
// arithmetic, in the same per-edge order, so results are bitwise identical
// across worker counts.
inline void update_edge(const EdgeIndex& ix, int e, const double* p0, const double* n0,
                        const double* p_in, const double* mu_in, double damping, bool scaled,
                        double* p_out, double* mu_out, SweepOutcome& out) {
  const int i = ix.src[e];
  double psum = p0[i];
  double nsum = n0[i];
  for (int t = ix.excl_start[e]; t < ix.excl_start[e + 1]; ++t) {
    const int in = ix.excl_edges[t];
    psum += p_in[in];
    nsum += p_in[in] * mu_in[in];
  }
  if (psum == 0.0) {
    out.zero_edge = std::min(out.zero_edge, e);
    p_out[e] = p_in[e];
    mu_out[e] = mu_in[e];
    return;
  }
  const double a = ix.coeff[e];
  const double mu_cav = nsum / psum;
  double pn = -(a * a) / psum;
  double mn = -(a * mu_cav) / pn;
  if (damping != 0.0) {
    pn = damping * p_in[e] + (1.0 - damping) * pn;
    mn = damping * mu_in[e] + (1.0 - damping) * mn;
  }
  if (!std::isfinite(pn) || !std::isfinite(mn)) {
    out.nonfinite_edge = std::min(out.nonfinite_edge, e);
  }
  double dp = std::abs(pn - p_in[e]);
  double dmu = std::abs(mn - mu_in[e]);
  if (scaled) {
    dp /= 1.0 + std::abs(pn);
    dmu /= 1.0 + std::abs(mn);
  }
  out.max_dp = std::max(out.max_dp, dp);
  out.max_dmu = std::max(out.max_dmu, dmu);
  p_out[e] = pn;
  mu_out[e] = mn;
}

SweepOutcome sweep_serial(const EdgeIndex& ix, const double* p0, const double* n0,
                          const double* p_in, const double* mu_in, double damping, bool scaled,
                          double* p_out, double* mu_out) {
  SweepOutcome out;
  for (int e = 0; e < ix.num_edges; ++e) {
    update_edge(ix, e, p0, n0, p_in, mu_in, damping, scaled, p_out, mu_out, out);
  }
  return out;
}

SweepOutcome sweep_parallel(const EdgeIndex& ix, const double* p0, const double* n0,
                            const double* p_in, const double* mu_in, double damping, bool scaled,
                            double* p_out, double* mu_out) {
  double max_dp = 0.0;
  double max_dmu = 0.0;
  int zero_edge = INT_MAX;
  int nonfinite_edge = INT_MAX;
#pragma omp parallel for schedule(static) \
    reduction(max : max_dp, max_dmu) reduction(min : zero_edge, nonfinite_edge)
  for (int e = 0; e < ix.num_edges; ++e) {
    SweepOutcome local;
    update_edge(ix, e, p0, n0, p_in, mu_in, damping, scaled, p_out, mu_out, local);
    max_dp = std::max(max_dp, local.max_dp);
    max_dmu = std::max(max_dmu, local.max_dmu);
    zero_edge = std::min(zero_edge, local.zero_edge);
    nonfinite_edge = std::min(nonfinite_edge, local.nonfinite_edge);
  }
  SweepOutcome out;
  out.max_dp = max_dp;
  out.max_dmu = max_dmu;
  out.zero_edge = zero_edge;
  out.nonfinite_edge = nonfinite_edge;
  return out;
}

// Sequential schedule: freshest values, fixed edge-id order, one buffer.
SweepOutcome sweep_sequential(const EdgeIndex& ix, const double* p0, const double* n0,
                              double damping, bool scaled, double* p, double* mu) {
  SweepOutcome out;
  for (int e = 0; e < ix.num_edges; ++e) {
    update_edge(ix, e, p0, n0, p, mu, damping, scaled, p, mu, out);
  }
  return out;
}

SweepOutcome dispatch_sweep(const EdgeIndex& ix, const double* p0, const double* n0,
                            const SolverConfig& config, const double* p_in, const double* mu_in,
                            double* p_out, double* mu_out) {
  const bool scaled = config.tolerance_mode == ToleranceMode::scaled;
  if (config.schedule == Schedule::sequential) {
    if (p_out != p_in) {
      std::copy(p_in, p_in + ix.num_edges, p_out);
      std::copy(mu_in, mu_in + ix.num_edges, mu_out);
    }
    return sweep_sequential(ix, p0, n0, config.damping, scaled, p_out, mu_out);
  }
  if (config.kernel == Kernel::serial_reference) {
    return sweep_serial(ix, p0, n0, p_in, mu_in, config.damping, scaled, p_out, mu_out);
  }
  return sweep_parallel(ix, p0, n0, p_in, mu_in, config.damping, scaled, p_out, mu_out);
}

void throw_on_bad_edges(const EdgeIndex& ix, const SweepOutcome& out, int iteration) {
  if (out.zero_edge != INT_MAX) {
    throw SolverError("zero cavity precision on edge " + edge_text(ix, out.zero_edge) +
                          " at iteration " + std::to_string(iteration),
                      iteration, ix.src[out.zero_edge], ix.dst[out.zero_edge]);
  }
  if (out.nonfinite_edge != INT_MAX) {
    throw SolverError("non-finite message on edge " + edge_text(ix, out.nonfinite_edge) +
                          " at iteration " + std::to_string(iteration),
                      iteration, ix.src[out.nonfinite_edge], ix.dst[out.nonfinite_edge]);
  }
}

std::vector<double> prior_products(const MessageState& state) {
  std::vector<double> n0(state.prior_precision.size());
  for (std::size_t i = 0; i < n0.size(); ++i) {
    n0[i] = state.prior_precision[i] * state.prior_mean[i];
  }
  return n0;
}

}  // namespace

int EdgeIndex::edge_id(int i, int j) const {
  if (j < 0 || j >= dim) return -1;
  int lo = in_start[j];
  int hi = in_start[j + 1];
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (src[in_edges[mid]] < i) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return (lo < in_start[j + 1] && src[in_edges[lo]] == i) ? in_edges[lo] : -1;
}

std::shared_ptr<const EdgeIndex> build_edge_index(const SparseSymmetricMatrix& A) {
  auto ix = std::make_shared<EdgeIndex>();
  const int m = A.dim();
  ix->dim = m;
  for (int i = 0; i < m; ++i) {
    for (const auto& nb : A.neighbors(i)) {
      ix->src.push_back(i);
      ix->dst.push_back(nb.node);
      ix->coeff.push_back(nb.value);
    }
  }
  ix->num_edges = static_cast<int>(ix->src.size());

  // Incoming edges per node, ordered by source; edge ids are (src, dst)
  // lexicographic, so a scan in id order appends sources in ascending order.
  ix->in_start.assign(m + 1, 0);
  for (int e = 0; e < ix->num_edges; ++e) ix->in_start[ix->dst[e] + 1]++;
  for (int i = 0; i < m; ++i) ix->in_start[i + 1] += ix->in_start[i];
  ix->in_edges.resize(ix->num_edges);
  {
    std::vector<int> fill(ix->in_start.begin(), ix->in_start.end() - 1);
    for (int e = 0; e < ix->num_edges; ++e) ix->in_edges[fill[ix->dst[e]]++] = e;
  }

  ix->reverse.resize(ix->num_edges);
  for (int e = 0; e < ix->num_edges; ++e) {
    ix->reverse[e] = ix->edge_id(ix->dst[e], ix->src[e]);
  }

  // Exclusion list for (i->j): incoming edges of i minus (j->i). Summation
  // order is pinned here once; every kernel walks it identically.
  ix->excl_start.assign(ix->num_edges + 1, 0);
  for (int e = 0; e < ix->num_edges; ++e) {
    const int i = ix->src[e];
    ix->excl_start[e + 1] = ix->excl_start[e] + (ix->in_start[i + 1] - ix->in_start[i] - 1);
  }
  ix->excl_edges.resize(ix->excl_start[ix->num_edges]);
  for (int e = 0; e < ix->num_edges; ++e) {
    const int i = ix->src[e];
    int w = ix->excl_start[e];
    for (int t = ix->in_start[i]; t < ix->in_start[i + 1]; ++t) {
      const int in = ix->in_edges[t];
      if (in != ix->reverse[e]) ix->excl_edges[w++] = in;
    }
  }
  return ix;
}

double MessageState::P(int i, int j) const {
  const int e = index->edge_id(i, j);
  if (e < 0) throw std::out_of_range("no edge " + std::to_string(i) + "->" + std::to_string(j));
  return precision[e];
}

double MessageState::mu(int i, int j) const {
  const int e = index->edge_id(i, j);
  if (e < 0) throw std::out_of_range("no edge " + std::to_string(i) + "->" + std::to_string(j));
  return mean[e];
}

MessageState initialize(const SparseSymmetricMatrix& A, const Vector& b) {
  if (b.size() != static_cast<std::size_t>(A.dim())) {
    throw std::invalid_argument("rhs length does not match matrix dimension");
  }
  MessageState state;
  state.index = build_edge_index(A);
  state.prior_precision = Vector(b.size());
  state.prior_mean = Vector(b.size());
  for (int i = 0; i < A.dim(); ++i) {
    const double d = A.diagonal(i);
    if (d == 0.0) {
      throw SolverError("zero diagonal at index " + std::to_string(i), -1, i, -1);
    }
    state.prior_precision[i] = d;
    state.prior_mean[i] = b[i] / d;
  }
  state.precision.assign(state.index->num_edges, 0.0);
  state.mean.assign(state.index->num_edges, 0.0);
  return state;
}

MessageState iterate_once(const SparseSymmetricMatrix& A, const Vector& b,
                          const MessageState& state, const SolverConfig& config) {
  validate_config(config);
  if (b.size() != static_cast<std::size_t>(A.dim()) ||
      state.index->dim != A.dim()) {
    throw std::invalid_argument("state/matrix/rhs dimensions disagree");
  }
  const auto n0 = prior_products(state);
  MessageState next = state;
  const auto out = dispatch_sweep(*state.index, state.prior_precision.data(), n0.data(), config,
                                  state.precision.data(), state.mean.data(),
                                  next.precision.data(), next.mean.data());
  throw_on_bad_edges(*state.index, out, 1);
  return next;
}

void infer(const MessageState& state, Vector& means, Vector& precisions) {
  const EdgeIndex& ix = *state.index;
  means = Vector(static_cast<std::size_t>(ix.dim));
  precisions = Vector(static_cast<std::size_t>(ix.dim));
  for (int i = 0; i < ix.dim; ++i) {
    double psum = state.prior_precision[i];
    double nsum = state.prior_precision[i] * state.prior_mean[i];
    for (int t = ix.in_start[i]; t < ix.in_start[i + 1]; ++t) {
      const int e = ix.in_edges[t];
      psum += state.precision[e];
      nsum += state.precision[e] * state.mean[e];
    }
    const double mu = nsum / psum;
    if (!std::isfinite(mu) || !std::isfinite(psum)) {
      throw SolverError("non-finite inference at node " + std::to_string(i), -1, i, -1);
    }
    precisions[i] = psum;
    means[i] = mu;
  }
}

SolveResult run(const SparseSymmetricMatrix& A, const Vector& b, const SolverConfig& config) {
  validate_config(config);
  MessageState state = initialize(A, b);
  const EdgeIndex& ix = *state.index;
  const auto n0 = prior_products(state);

  SolveResult result;
  if (ix.num_edges == 0) {
    result.converged = true;
    infer(state, result.means, result.precisions);
    return result;
  }

  std::vector<double> p_next(ix.num_edges), mu_next(ix.num_edges);
  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto out = dispatch_sweep(ix, state.prior_precision.data(), n0.data(), config,
                                    state.precision.data(), state.mean.data(),
                                    p_next.data(), mu_next.data());
    state.precision.swap(p_next);
    state.mean.swap(mu_next);
    result.iterations = it;
    throw_on_bad_edges(ix, out, it);
    const double residual = std::max(out.max_dp, out.max_dmu);
    result.residual_history.push_back(residual);
    if (residual <= config.tolerance) {
      result.converged = true;
      break;
    }
  }
  infer(state, result.means, result.precisions);
  return result;
}

Vector decide(const Vector& means, Clipping clip) {
  if (clip == Clipping::identity) return means;
  Vector out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    out[i] = (means[i] < 0.0) ? -1.0 : 1.0;
  }
  return out;
}

void set_worker_count(int workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
  omp_set_num_threads(workers);
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace gabp
