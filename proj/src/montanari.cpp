#include "gabp/montanari.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace gabp {

namespace {

void check_signs(const RectangularMatrix& signs) {
  for (int r = 0; r < signs.rows(); ++r) {
    for (int c = 0; c < signs.cols(); ++c) {
      const double s = signs(r, c);
      if (s != 1.0 && s != -1.0) {
        throw std::invalid_argument("spreading sign at (" + std::to_string(r) + ", " +
                                    std::to_string(c) + ") must be exactly +-1");
      }
    }
  }
}

void check_state(const MontanariState& st, int users, int chips) {
  const std::size_t edges = static_cast<std::size_t>(users) * chips;
  if (st.users != users || st.chips != chips || st.lambda.size() != edges ||
      st.lambda_hat.size() != edges || st.gamma.size() != edges ||
      st.gamma_hat.size() != edges) {
    throw std::invalid_argument("message state does not match the bipartite graph");
  }
}

[[noreturn]] void zero_precision(const char* family, int from, int to) {
  throw SolverError(std::string("zero ") + family + " precision message on edge " +
                        std::to_string(from) + "->" + std::to_string(to),
                    -1, from, to);
}

}  // namespace

NotationMap make_notation_map(const RectangularMatrix& signs, double sigma2, const Vector& y) {
  check_signs(signs);
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (y.size() != static_cast<std::size_t>(signs.rows())) {
    throw std::invalid_argument("observation length does not match chip count");
  }
  return {signs, sigma2, y};
}

NotationMap make_notation_map(const RectangularMatrix& signs, const NoiseCovariance& psi,
                              const Vector& y) {
  if (!psi.is_uniform()) {
    throw std::invalid_argument(
        "these update rules assume one system-wide noise variance; per-chip noise is not "
        "representable");
  }
  if (psi.size() == 0) throw std::invalid_argument("empty noise covariance");
  return make_notation_map(signs, psi[0], y);
}

MontanariState montanari_initial_state(const NotationMap& map) {
  const int k = map.signs.cols();
  const int n = map.signs.rows();
  MontanariState st;
  st.users = k;
  st.chips = n;
  const std::size_t edges = static_cast<std::size_t>(k) * n;
  st.lambda.assign(edges, 1.0);
  st.lambda_hat.assign(edges, map.sigma2);
  st.gamma.assign(edges, 0.0);
  st.gamma_hat.resize(edges);
  for (int u = 0; u < k; ++u) {
    for (int c = 0; c < n; ++c) {
      st.gamma_hat[static_cast<std::size_t>(u) * n + c] = map.y[c];
    }
  }
  return st;
}

MontanariState montanari_iterate(const NotationMap& map, const MontanariState& state) {
  const int k = map.signs.cols();
  const int n = map.signs.rows();
  check_state(state, k, n);
  const double inv_n = 1.0 / n;

  MontanariState next = state;
  auto at = [n](int u, int c) { return static_cast<std::size_t>(u) * n + c; };

  for (int u = 0; u < k; ++u) {
    for (int c = 0; c < n; ++c) {
      double lam = 1.0;
      double gam = 0.0;
      for (int b = 0; b < n; ++b) {
        if (b == c) continue;
        const double lh = state.lambda_hat[at(u, b)];
        if (lh == 0.0) zero_precision("chip-to-user", b, u);
        const double s = map.signs(b, u);
        lam += inv_n * (s * s) / lh;
        gam += (s / lh) * state.gamma_hat[at(u, b)];
      }
      next.lambda[at(u, c)] = lam;
      next.gamma[at(u, c)] = gam;
    }
  }
  for (int c = 0; c < n; ++c) {
    for (int u = 0; u < k; ++u) {
      double lam = map.sigma2;
      double gam = map.y[c];
      for (int v = 0; v < k; ++v) {
        if (v == u) continue;
        const double lu = state.lambda[at(v, c)];
        if (lu == 0.0) zero_precision("user-to-chip", v, c);
        const double s = map.signs(c, v);
        lam += inv_n * (s * s) / lu;
        gam -= inv_n * (s / lu) * state.gamma[at(v, c)];
      }
      next.lambda_hat[at(u, c)] = lam;
      next.gamma_hat[at(u, c)] = gam;
    }
  }
  return next;
}

MontanariState montanari_iterate(const RectangularMatrix& signs, double sigma2, const Vector& y,
                                 const MontanariState& state) {
  return montanari_iterate(make_notation_map(signs, sigma2, y), state);
}

std::pair<Vector, Vector> montanari_infer(const MontanariState& state,
                                          const RectangularMatrix& signs, double sigma2) {
  check_signs(signs);
  (void)sigma2;
  const int k = signs.cols();
  const int n = signs.rows();
  check_state(state, k, n);
  const double inv_n = 1.0 / n;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  Vector means(static_cast<std::size_t>(k));
  Vector precisions(static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) {
    double L = 1.0;
    double G = 0.0;
    for (int b = 0; b < n; ++b) {
      const double lh = state.lambda_hat[static_cast<std::size_t>(u) * n + b];
      if (lh == 0.0) zero_precision("chip-to-user", b, u);
      const double s = signs(b, u);
      L += inv_n * (s * s) / lh;
      G += (s / lh) * state.gamma_hat[static_cast<std::size_t>(u) * n + b];
    }
    G *= inv_sqrt_n;
    if (L == 0.0) {
      throw SolverError("zero posterior precision for user " + std::to_string(u), -1, u, -1);
    }
    precisions[u] = L;
    means[u] = G / L;
  }
  return {std::move(means), std::move(precisions)};
}

SparseSymmetricMatrix mapped_augmented_system(const NotationMap& map) {
  const int n = map.signs.rows();
  const int k = map.signs.cols();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  RectangularMatrix scaled(n, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) scaled(r, c) = map.signs(r, c) * inv_sqrt_n;
  }
  return build_augmented(scaled, NoiseCovariance::uniform(n, map.sigma2));
}

Vector mapped_augmented_rhs(const NotationMap& map) {
  return build_augmented_rhs(map.y, map.signs.cols());
}

MontanariState translate_messages(const MessageState& state, const NotationMap& map) {
  const int k = map.signs.cols();
  const int n = map.signs.rows();
  const EdgeIndex& ix = *state.index;
  if (ix.dim != k + n || ix.num_edges != 2 * k * n) {
    throw std::invalid_argument("message state does not live on the mapped augmented system");
  }

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  MontanariState st;
  st.users = k;
  st.chips = n;
  const std::size_t edges = static_cast<std::size_t>(k) * n;
  st.lambda.resize(edges);
  st.lambda_hat.resize(edges);
  st.gamma.resize(edges);
  st.gamma_hat.resize(edges);
  for (int u = 0; u < k; ++u) {
    for (int c = 0; c < n; ++c) {
      const std::size_t t = static_cast<std::size_t>(u) * n + c;
      double prec = 1.0;
      double num = 0.0;
      for (int c2 = 0; c2 < n; ++c2) {
        if (c2 == c) continue;
        const int e = ix.edge_id(k + c2, u);
        prec += state.precision[e];
        num += state.precision[e] * state.mean[e];
      }
      st.lambda[t] = prec;
      st.gamma[t] = sqrt_n * num;

      double prec_hat = map.sigma2;
      double num_hat = map.y[c];
      for (int u2 = 0; u2 < k; ++u2) {
        if (u2 == u) continue;
        const int e = ix.edge_id(u2, k + c);
        prec_hat -= state.precision[e];
        num_hat += state.precision[e] * state.mean[e];
      }
      st.lambda_hat[t] = prec_hat;
      st.gamma_hat[t] = num_hat;
    }
  }
  return st;
}

MessageState translate_messages_back(const MontanariState& state, const NotationMap& map) {
  const int k = map.signs.cols();
  const int n = map.signs.rows();
  check_state(state, k, n);

  MessageState gabp = initialize(mapped_augmented_system(map), mapped_augmented_rhs(map));
  const MontanariState prior = montanari_initial_state(map);
  if (state.lambda == prior.lambda && state.lambda_hat == prior.lambda_hat &&
      state.gamma == prior.gamma && state.gamma_hat == prior.gamma_hat) {
    return gabp;   // engine start state; every cavity sum is empty or zero
  }

  const EdgeIndex& ix = *gabp.index;
  const double inv_n = 1.0 / n;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  auto at = [n](int u, int c) { return static_cast<std::size_t>(u) * n + c; };

  for (int u = 0; u < k; ++u) {
    if (n == 1) {
      if (state.lambda_hat[at(u, 0)] == 0.0) zero_precision("chip-to-user", 0, u);
      const int e = ix.edge_id(k, u);
      gabp.precision[e] = inv_n / state.lambda_hat[at(u, 0)];
      gabp.mean[e] = sqrt_n * map.signs(0, u) * state.gamma_hat[at(u, 0)];
      continue;
    }
    // n cavity sums over n-1 incoming chip messages determine the messages
    double prec_total = 0.0;
    double num_total = 0.0;
    for (int c = 0; c < n; ++c) {
      prec_total += state.lambda[at(u, c)] - 1.0;
      num_total += state.gamma[at(u, c)] / sqrt_n;
    }
    prec_total /= n - 1;
    num_total /= n - 1;
    for (int c = 0; c < n; ++c) {
      const int e = ix.edge_id(k + c, u);
      const double prec = prec_total - (state.lambda[at(u, c)] - 1.0);
      const double num = num_total - state.gamma[at(u, c)] / sqrt_n;
      gabp.precision[e] = prec;
      gabp.mean[e] = prec == 0.0 ? 0.0 : num / prec;
    }
  }
  for (int c = 0; c < n; ++c) {
    if (k == 1) {
      if (state.lambda[at(0, c)] == 0.0) zero_precision("user-to-chip", 0, c);
      const int e = ix.edge_id(0, k + c);
      gabp.precision[e] = -inv_n / state.lambda[at(0, c)];
      gabp.mean[e] = map.signs(c, 0) * state.gamma[at(0, c)];
      continue;
    }
    double prec_total = 0.0;
    double num_total = 0.0;
    for (int u = 0; u < k; ++u) {
      prec_total += map.sigma2 - state.lambda_hat[at(u, c)];
      num_total += state.gamma_hat[at(u, c)] - map.y[c];
    }
    prec_total /= k - 1;
    num_total /= k - 1;
    for (int u = 0; u < k; ++u) {
      const int e = ix.edge_id(u, k + c);
      const double prec = prec_total - (map.sigma2 - state.lambda_hat[at(u, c)]);
      const double num = num_total - (state.gamma_hat[at(u, c)] - map.y[c]);
      gabp.precision[e] = prec;
      gabp.mean[e] = prec == 0.0 ? 0.0 : num / prec;
    }
  }
  return gabp;
}

}  // namespace gabp
