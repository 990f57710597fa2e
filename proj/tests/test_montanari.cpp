#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "gabp/engine.hpp"
#include "gabp/montanari.hpp"
#include "gabp/rng.hpp"
#include "oracle.hpp"

using namespace gabp;

namespace {

double state_gap(const MontanariState& a, const MontanariState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.lambda.size(); ++i) {
    m = std::max(m, std::abs(a.lambda[i] - b.lambda[i]));
    m = std::max(m, std::abs(a.lambda_hat[i] - b.lambda_hat[i]));
    m = std::max(m, std::abs(a.gamma[i] - b.gamma[i]));
    m = std::max(m, std::abs(a.gamma_hat[i] - b.gamma_hat[i]));
  }
  return m;
}

RectangularMatrix random_signs(Rng& rng, int n, int k) {
  RectangularMatrix S(n, k);
  for (int c = 0; c < n; ++c)
    for (int u = 0; u < k; ++u) S(c, u) = rng.sign();
  return S;
}

Vector random_obs(Rng& rng, int n) {
  std::vector<double> y(n);
  for (auto& v : y) v = 2.0 * rng.uniform01() - 1.0;
  return Vector(std::move(y));
}

}  // namespace

TEST_CASE("notation map validation") {
  RectangularMatrix ok(2, 1, {1.0, -1.0});
  CHECK_NOTHROW(make_notation_map(ok, 1.0, Vector{0.1, 0.2}));
  RectangularMatrix frac(2, 1, {1.0, 0.5});
  CHECK_THROWS_AS(make_notation_map(frac, 1.0, Vector{0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(make_notation_map(ok, 0.0, Vector{0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(make_notation_map(ok, -1.0, Vector{0.1, 0.2}), std::invalid_argument);

  CHECK_NOTHROW(make_notation_map(ok, NoiseCovariance::uniform(2, 0.5), Vector{0.1, 0.2}));
  CHECK_THROWS_AS(make_notation_map(ok, NoiseCovariance(Vector{0.5, 0.6}), Vector{0.1, 0.2}),
                  std::invalid_argument);
}

TEST_CASE("initial state holds priors and raw observations") {
  RectangularMatrix signs(3, 2, {1, -1, -1, 1, 1, 1});
  NotationMap map = make_notation_map(signs, 2.0, Vector{0.5, -1.0, 0.25});
  MontanariState st = montanari_initial_state(map);
  REQUIRE(st.lambda.size() == 6);
  for (int u = 0; u < 2; ++u) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t e = static_cast<std::size_t>(u) * 3 + c;
      CHECK(st.lambda[e] == 1.0);
      CHECK(st.lambda_hat[e] == 2.0);
      CHECK(st.gamma[e] == 0.0);
      CHECK(st.gamma_hat[e] == map.y[c]);
    }
  }
}

TEST_CASE("single user, single chip: messages are static and inference exact") {
  RectangularMatrix signs(1, 1, {1.0});
  NotationMap map = make_notation_map(signs, 1.0, Vector{2.0});
  MontanariState st = montanari_initial_state(map);
  st = montanari_iterate(map, st);
  // cavity sums are empty, so the sweep reproduces the priors
  CHECK(st.lambda[0] == 1.0);
  CHECK(st.lambda_hat[0] == 1.0);
  CHECK(st.gamma[0] == 0.0);
  CHECK(st.gamma_hat[0] == 2.0);

  auto [means, precisions] = montanari_infer(st, signs, 1.0);
  CHECK(precisions[0] == doctest::Approx(2.0));   // 1 + 1/1
  CHECK(means[0] == doctest::Approx(1.0));        // 2 / (1 + 1)
}

TEST_CASE("fixed point matches the uniform-noise detector formula") {
  Rng rng(1001);
  const int k = 3;
  const int n = 9;
  const double sigma2 = 1.5;
  RectangularMatrix signs = random_signs(rng, n, k);
  Vector y = random_obs(rng, n);
  NotationMap map = make_notation_map(signs, sigma2, y);

  MontanariState st = montanari_initial_state(map);
  for (int t = 0; t < 300; ++t) st = montanari_iterate(map, st);
  auto [means, precisions] = montanari_infer(st, signs, sigma2);

  RectangularMatrix S(n, k);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int c = 0; c < n; ++c)
    for (int u = 0; u < k; ++u) S(c, u) = signs(c, u) * inv_sqrt_n;
  std::vector<double> x = oracle::normal_mmse_uniform(S, sigma2, y.values());
  for (int u = 0; u < k; ++u) {
    CHECK(means[u] == doctest::Approx(x[static_cast<std::size_t>(u)]).epsilon(1e-8));
  }
}

TEST_CASE("zero engine state translates to the initial bipartite state and back") {
  Rng rng(77);
  for (auto [k, n] : {std::pair{1, 1}, std::pair{1, 4}, std::pair{3, 1}, std::pair{3, 5}}) {
    RectangularMatrix signs = random_signs(rng, n, k);
    NotationMap map = make_notation_map(signs, 0.75, random_obs(rng, n));
    MessageState zero = initialize(mapped_augmented_system(map), mapped_augmented_rhs(map));

    MontanariState st = translate_messages(zero, map);
    CHECK(state_gap(st, montanari_initial_state(map)) == 0.0);

    MessageState back = translate_messages_back(montanari_initial_state(map), map);
    for (double p : back.precision) CHECK(p == 0.0);
    for (double m : back.mean) CHECK(m == 0.0);
  }
}

TEST_CASE("lockstep: the engine on the mapped system tracks the bipartite rules") {
  Rng rng(90210);
  for (auto [k, n] : {std::pair{2, 3}, std::pair{4, 4}, std::pair{5, 2}, std::pair{1, 6}}) {
    for (double sigma2 : {0.5, 2.0}) {
      RectangularMatrix signs = random_signs(rng, n, k);
      NotationMap map = make_notation_map(signs, sigma2, random_obs(rng, n));
      const SparseSymmetricMatrix A = mapped_augmented_system(map);
      const Vector b = mapped_augmented_rhs(map);

      MessageState engine = initialize(A, b);
      MontanariState mont = montanari_initial_state(map);
      for (int t = 0; t < 20; ++t) {
        engine = iterate_once(A, b, engine);
        mont = montanari_iterate(map, mont);
        CHECK(state_gap(translate_messages(engine, map), mont) < 1e-12);
      }
    }
  }
}

TEST_CASE("inference agrees one engine sweep ahead of the bipartite read") {
  // the bipartite inference folds a final half-step into its read, so its
  // estimate after T sweeps equals the engine's after T + 1
  Rng rng(3333);
  const int k = 4;
  const int n = 6;
  RectangularMatrix signs = random_signs(rng, n, k);
  NotationMap map = make_notation_map(signs, 1.0, random_obs(rng, n));
  const SparseSymmetricMatrix A = mapped_augmented_system(map);
  const Vector b = mapped_augmented_rhs(map);

  MessageState engine = initialize(A, b);
  MontanariState mont = montanari_initial_state(map);
  const int T = 15;
  for (int t = 0; t < T; ++t) {
    engine = iterate_once(A, b, engine);
    mont = montanari_iterate(map, mont);
  }
  engine = iterate_once(A, b, engine);

  Vector em, ep;
  infer(engine, em, ep);
  auto [mm, mp] = montanari_infer(mont, signs, 1.0);
  for (int u = 0; u < k; ++u) {
    CHECK(mm[u] == doctest::Approx(em[u]).epsilon(1e-12));
    CHECK(mp[u] == doctest::Approx(ep[u]).epsilon(1e-12));
  }
}

TEST_CASE("translation round trip is exact on dyadic data") {
  // powers-of-two precisions, dyadic means, n = 4 so the sqrt(n) factor is
  // exact: every recovery step is representable, so bits survive
  const int k = 2;
  const int n = 4;
  RectangularMatrix signs(n, k, {1, -1, -1, 1, 1, 1, -1, -1});
  NotationMap map = make_notation_map(signs, 0.5, Vector{1.0, -2.0, 0.5, 0.25});
  const SparseSymmetricMatrix A = mapped_augmented_system(map);
  MessageState st = initialize(A, mapped_augmented_rhs(map));

  const double pu[k][n] = {{-0.25, -0.125, -0.5, -0.0625}, {-0.03125, -0.25, -0.125, -0.5}};
  const double pc[k][n] = {{0.125, 0.25, 0.0625, 0.5}, {0.25, 0.03125, 0.125, 0.0625}};
  const double mu[k][n] = {{0.75, -1.5, 2.0, 0.25}, {-0.375, 1.25, -2.5, 0.5}};
  const double mc[k][n] = {{1.5, -0.75, 0.5, -2.0}, {0.625, -1.0, 3.0, -0.25}};
  for (int u = 0; u < k; ++u) {
    for (int c = 0; c < n; ++c) {
      const int uc = st.index->edge_id(u, k + c);
      const int cu = st.index->edge_id(k + c, u);
      st.precision[uc] = pu[u][c];
      st.mean[uc] = mu[u][c];
      st.precision[cu] = pc[u][c];
      st.mean[cu] = mc[u][c];
    }
  }

  MessageState back = translate_messages_back(translate_messages(st, map), map);
  for (std::size_t e = 0; e < st.precision.size(); ++e) {
    CHECK(back.precision[e] == st.precision[e]);
    CHECK(back.mean[e] == st.mean[e]);
  }
}

TEST_CASE("translation round trip after real sweeps stays tight") {
  Rng rng(515);
  for (auto [k, n] : {std::pair{2, 2}, std::pair{3, 7}, std::pair{6, 3}}) {
    RectangularMatrix signs = random_signs(rng, n, k);
    NotationMap map = make_notation_map(signs, 1.25, random_obs(rng, n));
    const SparseSymmetricMatrix A = mapped_augmented_system(map);
    const Vector b = mapped_augmented_rhs(map);
    MessageState st = initialize(A, b);
    for (int t = 0; t < 8; ++t) st = iterate_once(A, b, st);

    MessageState back = translate_messages_back(translate_messages(st, map), map);
    for (std::size_t e = 0; e < st.precision.size(); ++e) {
      CHECK(back.precision[e] ==
            doctest::Approx(st.precision[e]).epsilon(1e-12).scale(1.0));
      CHECK(back.mean[e] == doctest::Approx(st.mean[e]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("degenerate single-chip and single-user translations invert at fixed points") {
  // with one chip or one user the cavity sums drop a family's information,
  // so the inverse leans on per-edge identities that hold one sweep apart;
  // at a fixed point the offset vanishes and the round trip closes
  Rng rng(626);
  for (auto [k, n] : {std::pair{1, 5}, std::pair{4, 1}}) {
    RectangularMatrix signs = random_signs(rng, n, k);
    NotationMap map = make_notation_map(signs, 0.8, random_obs(rng, n));
    const SparseSymmetricMatrix A = mapped_augmented_system(map);
    const Vector b = mapped_augmented_rhs(map);
    MessageState st = initialize(A, b);
    for (int t = 0; t < 10; ++t) st = iterate_once(A, b, st);   // stars settle fast

    MessageState back = translate_messages_back(translate_messages(st, map), map);
    for (std::size_t e = 0; e < st.precision.size(); ++e) {
      CHECK(back.precision[e] ==
            doctest::Approx(st.precision[e]).epsilon(1e-10).scale(1.0));
      CHECK(back.mean[e] == doctest::Approx(st.mean[e]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("the 1x1 problem translates to a constant state by design") {
  // both cavity sums are empty: the bipartite state never moves, and the
  // inverse maps it to the engine's start state
  RectangularMatrix signs(1, 1, {-1.0});
  NotationMap map = make_notation_map(signs, 0.8, Vector{1.5});
  const SparseSymmetricMatrix A = mapped_augmented_system(map);
  const Vector b = mapped_augmented_rhs(map);
  MessageState st = initialize(A, b);
  for (int t = 0; t < 3; ++t) st = iterate_once(A, b, st);

  MontanariState translated = translate_messages(st, map);
  CHECK(state_gap(translated, montanari_initial_state(map)) == 0.0);
  MessageState back = translate_messages_back(translated, map);
  for (double p : back.precision) CHECK(p == 0.0);
  for (double m : back.mean) CHECK(m == 0.0);
}

TEST_CASE("zero bipartite precision is reported as a solver error") {
  RectangularMatrix signs(2, 2, {1, 1, -1, 1});
  NotationMap map = make_notation_map(signs, 1.0, Vector{0.5, 0.5});
  MontanariState st = montanari_initial_state(map);
  st.lambda_hat[0] = 0.0;
  CHECK_THROWS_AS(montanari_iterate(map, st), SolverError);
  CHECK_THROWS_AS(montanari_infer(st, signs, 1.0), SolverError);
}

TEST_CASE("mapped system uses scaled spreading and uniform noise") {
  RectangularMatrix signs(4, 2, {1, -1, 1, 1, -1, -1, 1, -1});
  NotationMap map = make_notation_map(signs, 0.7, Vector{1, 2, 3, 4});
  SparseSymmetricMatrix A = mapped_augmented_system(map);
  CHECK(A.dim() == 6);
  CHECK(A.at(0, 0) == 1.0);
  CHECK(A.at(2, 2) == -0.7);
  CHECK(A.at(5, 5) == -0.7);
  CHECK(A.at(0, 2) == doctest::Approx(0.5));    // +1 / sqrt(4)
  CHECK(A.at(1, 2) == doctest::Approx(-0.5));
  Vector rhs = mapped_augmented_rhs(map);
  CHECK(rhs[0] == 0.0);
  CHECK(rhs[1] == 0.0);
  CHECK(rhs[2] == 1.0);
  CHECK(rhs[5] == 4.0);
}
