#pragma once

#include <utility>
#include <vector>

#include "gabp/engine.hpp"
#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"

namespace gabp {

// Message state of the Montanari multiuser-detection rules on the complete
// k x n bipartite graph: per-edge precisions lambda (user->chip) and
// lambda_hat (chip->user), means gamma (user->chip) and gamma_hat
// (chip->user). Layout is [u * chips + c] for all four families.
struct MontanariState {
  int users = 0;
  int chips = 0;
  std::vector<double> lambda;
  std::vector<double> lambda_hat;
  std::vector<double> gamma;
  std::vector<double> gamma_hat;
};

// Fixed problem data for the Montanari iteration and its translation to the
// general engine: +-1 spreading signs, a single noise variance, and the
// observations. The equivalent symmetric system is build_augmented(S/sqrt(n),
// sigma2 I) with rhs (0, y); the off-diagonal product A_uc * A_cu = s^2/n is
// what keeps every message real.
struct NotationMap {
  RectangularMatrix signs;   // n rows, k cols, entries exactly +-1
  double sigma2 = 1.0;
  Vector y;
};

// Validates entries are exactly +-1 and sigma2 > 0.
NotationMap make_notation_map(const RectangularMatrix& signs, double sigma2, const Vector& y);
// Same, from a diagonal covariance; rejects non-uniform noise (these rules
// assume a single system-wide variance).
NotationMap make_notation_map(const RectangularMatrix& signs, const NoiseCovariance& psi,
                              const Vector& y);

// The iteration's starting point: lambda = 1, lambda_hat = sigma2, gamma = 0,
// gamma_hat = y. Corresponds to the zero message state of the general engine
// on the mapped system.
MontanariState montanari_initial_state(const NotationMap& map);

// One synchronous sweep of the four update rules (N = chips):
//   lambda(u->c)     = 1 + (1/N) sum over c' != c of s_{c'u}^2 / lambda_hat(c'->u)
//   lambda_hat(c->u) = sigma2 + (1/N) sum over u' != u of s_{cu'}^2 / lambda(u'->c)
//   gamma(u->c)      = sum over c' != c of (s_{c'u} / lambda_hat(c'->u)) gamma_hat(c'->u)
//   gamma_hat(c->u)  = y_c - (1/N) sum over u' != u of (s_{cu'} / lambda(u'->c)) gamma(u'->c)
// A zero precision in a denominator is an error naming the edge.
MontanariState montanari_iterate(const RectangularMatrix& signs, double sigma2, const Vector& y,
                                 const MontanariState& state);
MontanariState montanari_iterate(const NotationMap& map, const MontanariState& state);

// Per-user posterior precision L_i = 1 + (1/N) sum_b s_{bi}^2/lambda_hat(b->i)
// and mean G_i/L_i with G_i = (1/sqrt(N)) sum_b (s_{bi}/lambda_hat(b->i)) gamma_hat(b->i).
std::pair<Vector, Vector> montanari_infer(const MontanariState& state,
                                          const RectangularMatrix& signs, double sigma2);

// Translation between engine messages on the mapped augmented system and
// Montanari messages. Each Montanari value is a cavity aggregate of engine
// messages (node c stored at engine index users + c, N = chips):
//   lambda(u->c)     = 1 + sum over c' != c of P(c' -> u)
//   lambda_hat(c->u) = sigma2 - sum over u' != u of P(u' -> c)
//   gamma(u->c)      = sqrt(N) * sum over c' != c of P(c' -> u) mu(c' -> u)
//   gamma_hat(c->u)  = y_c + sum over u' != u of P(u' -> c) mu(u' -> c)
// This is the identification under which both engines stay in lockstep at
// the same sweep count: the all-zero engine state translates exactly to
// montanari_initial_state, with no special casing.
//
// The inverse recovers per-edge messages from the cavity sums by
// inclusion-exclusion (the n sums over n-1 terms determine the n terms when
// n >= 2, and likewise per chip for k >= 2). The single-chip and single-user
// families carry no cavity information; there the fixed-point-consistent
// per-edge identities P(c->u) = (1/N)/lambda_hat, mu(c->u) = sqrt(N) s
// gamma_hat, P(u->c) = -(1/N)/lambda, mu(u->c) = s gamma are used, and the
// initial state maps back to the zero state. Round trips are exact up to
// summation rounding (bit-exact on dyadic data).
MontanariState translate_messages(const MessageState& state, const NotationMap& map);
MessageState translate_messages_back(const MontanariState& state, const NotationMap& map);

// The mapped symmetric system and rhs the translation refers to.
SparseSymmetricMatrix mapped_augmented_system(const NotationMap& map);
Vector mapped_augmented_rhs(const NotationMap& map);

}  // namespace gabp
