#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "gabp/io.hpp"
#include "gabp/matrix.hpp"
#include "gabp/vector.hpp"
#include "oracle.hpp"

using namespace gabp;

TEST_CASE("vector construction rejects non-finite entries") {
  CHECK_THROWS_AS(Vector({1.0, std::nan(""), 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(Vector({std::numeric_limits<double>::infinity()}), std::invalid_argument);
  CHECK_THROWS_WITH(Vector({0.0, 1.0, std::nan("")}),
                    doctest::Contains("index 2"));
  Vector v{1.0, -2.5};
  CHECK(v.size() == 2);
  CHECK(v[1] == -2.5);
  CHECK(v == Vector({1.0, -2.5}));
}

TEST_CASE("symmetric matrix stores sorted pairs and mirrored neighbor lists") {
  SparseSymmetricMatrix A(3, Vector{2.0, 3.0, 4.0}, {{1, 2, -0.5}, {0, 2, 1.5}});
  CHECK(A.dim() == 3);
  CHECK(A.off_diagonal().size() == 2);
  CHECK(A.off_diagonal()[0].i == 0);
  CHECK(A.off_diagonal()[0].j == 2);
  CHECK(A.at(0, 2) == 1.5);
  CHECK(A.at(2, 0) == 1.5);
  CHECK(A.at(0, 1) == 0.0);
  CHECK(A.at(1, 1) == 3.0);
  CHECK_THROWS_AS(A.at(0, 3), std::out_of_range);

  REQUIRE(A.neighbors(2).size() == 2);
  CHECK(A.neighbors(2)[0].node == 0);
  CHECK(A.neighbors(2)[0].value == 1.5);
  CHECK(A.neighbors(2)[1].node == 1);
  CHECK(A.neighbors(0).size() == 1);
  CHECK(A.neighbors(1).size() == 1);
}

TEST_CASE("symmetric matrix construction validation") {
  CHECK_THROWS_AS(SparseSymmetricMatrix(0, Vector(), {}), std::invalid_argument);
  CHECK_THROWS_AS(SparseSymmetricMatrix(2, Vector{1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(SparseSymmetricMatrix(2, Vector{1.0, 1.0}, {{1, 0, 1.0}}),
                  std::invalid_argument);  // i >= j
  CHECK_THROWS_AS(SparseSymmetricMatrix(2, Vector{1.0, 1.0}, {{0, 0, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SparseSymmetricMatrix(2, Vector{1.0, 1.0}, {{0, 2, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SparseSymmetricMatrix(2, Vector{1.0, 1.0}, {{0, 1, 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(SparseSymmetricMatrix(3, Vector{1.0, 1.0, 1.0}, {{0, 1, 1.0}, {0, 1, 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("rectangular matrix row-major layout") {
  RectangularMatrix S(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(S(0, 0) == 1);
  CHECK(S(0, 2) == 3);
  CHECK(S(1, 0) == 4);
  S(1, 0) = -4;
  CHECK(S(1, 0) == -4);
  CHECK_THROWS_AS(RectangularMatrix(2, 2, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(RectangularMatrix(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(RectangularMatrix(1, 1, {std::nan("")}), std::invalid_argument);
}

TEST_CASE("noise covariance predicates") {
  NoiseCovariance z(Vector{0.0, 0.0});
  CHECK(z.is_zero());
  CHECK(z.is_uniform());
  NoiseCovariance u = NoiseCovariance::uniform(3, 0.25);
  CHECK(u.size() == 3);
  CHECK(u[2] == 0.25);
  CHECK(!u.is_zero());
  CHECK(u.is_uniform());
  NoiseCovariance mixed(Vector{0.1, 0.2});
  CHECK(!mixed.is_uniform());
  CHECK_THROWS_AS(NoiseCovariance(Vector{-0.1}), std::invalid_argument);
}

TEST_CASE("augmented system for a scalar channel with zero noise") {
  // S = [[1]], Psi = [0] embeds as [[1, 1], [1, 0]].
  RectangularMatrix S(1, 1, {1.0});
  SparseSymmetricMatrix R = build_augmented(S, NoiseCovariance(Vector{0.0}));
  CHECK(R.dim() == 2);
  CHECK(R.at(0, 0) == 1.0);
  CHECK(R.at(1, 1) == 0.0);
  CHECK(R.at(0, 1) == 1.0);
}

TEST_CASE("augmented system block layout") {
  // 2 chips, 3 users; users first, chips carry -Psi on the diagonal.
  RectangularMatrix S(2, 3, {0.5, 0.0, -1.0, 0.25, 2.0, 0.0});
  NoiseCovariance psi(Vector{0.3, 0.7});
  SparseSymmetricMatrix R = build_augmented(S, psi);
  CHECK(R.dim() == 5);
  for (int u = 0; u < 3; ++u) CHECK(R.at(u, u) == 1.0);
  CHECK(R.at(3, 3) == -0.3);
  CHECK(R.at(4, 4) == -0.7);
  CHECK(R.at(0, 3) == 0.5);
  CHECK(R.at(0, 4) == 0.25);
  CHECK(R.at(1, 4) == 2.0);
  CHECK(R.at(2, 3) == -1.0);
  // exact zeros in S never become stored edges
  CHECK(R.off_diagonal().size() == 4);
  CHECK(R.at(1, 3) == 0.0);
  // no user-user or chip-chip coupling
  CHECK(R.at(0, 1) == 0.0);
  CHECK(R.at(3, 4) == 0.0);

  CHECK_THROWS_AS(build_augmented(S, NoiseCovariance(Vector{0.1})), std::invalid_argument);
}

TEST_CASE("augmented rhs is zeros then observations") {
  Vector rhs = build_augmented_rhs(Vector{5.0}, 1);
  REQUIRE(rhs.size() == 2);
  CHECK(rhs[0] == 0.0);
  CHECK(rhs[1] == 5.0);

  Vector r2 = build_augmented_rhs(Vector{1.0, -2.0}, 3);
  REQUIRE(r2.size() == 5);
  CHECK(r2[0] == 0.0);
  CHECK(r2[2] == 0.0);
  CHECK(r2[3] == 1.0);
  CHECK(r2[4] == -2.0);
}

TEST_CASE("augmented solve matches the direct detector formula") {
  // x_hat = S^T (S S^T + Psi)^-1 y must equal the user block of the
  // augmented solution.
  Rng rng(99);
  RectangularMatrix S = oracle::random_pm1_spreading(rng, 6, 3, true);
  NoiseCovariance psi(Vector{1.0, 1.1, 0.9, 1.2, 1.05, 0.95});
  Vector y{0.3, -1.0, 0.2, 0.7, -0.4, 1.5};

  SparseSymmetricMatrix R = build_augmented(S, psi);
  std::vector<double> full =
      oracle::solve(oracle::dense_from(R), build_augmented_rhs(y, 3).values());
  std::vector<double> direct = oracle::mmse_estimate(S, psi.diagonal().values(), y.values());
  for (int u = 0; u < 3; ++u) CHECK(full[u] == doctest::Approx(direct[u]).epsilon(1e-12));
}

TEST_CASE("symmetric matrix text round trip") {
  SparseSymmetricMatrix A(3, Vector{1.0 / 3.0, -2.0, 1e-300},
                          {{0, 1, 0.1}, {1, 2, -7.25e8}});
  std::ostringstream out;
  write_symmetric(out, A);
  std::istringstream in(out.str());
  SparseSymmetricMatrix B = read_symmetric(in);
  CHECK(B.dim() == A.dim());
  for (int i = 0; i < 3; ++i) CHECK(B.diagonal(i) == A.diagonal(i));
  REQUIRE(B.off_diagonal().size() == 2);
  CHECK(B.at(0, 1) == 0.1);
  CHECK(B.at(1, 2) == -7.25e8);
}

TEST_CASE("symmetric reader accepts pairs in any order and zero diagonal") {
  std::istringstream in("dim 2\n1 0 3.5\n0 0 2\n");
  SparseSymmetricMatrix A = read_symmetric(in);
  CHECK(A.at(0, 1) == 3.5);
  CHECK(A.diagonal(0) == 2.0);
  CHECK(A.diagonal(1) == 0.0);  // unset diagonal reads as zero
}

TEST_CASE("reader rejects malformed input with 1-based line numbers") {
  auto expect_line = [](const std::string& text, int line) {
    std::istringstream in(text);
    try {
      read_symmetric(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("dim 2\n0 1 1.0\n0 1 2.0\n", 3);     // duplicate pair
  expect_line("dim 2\n1 0 1.0\n0 1 2.0\n", 3);     // duplicate, mirrored
  expect_line("dim 2\n0 0 1\n0 0 2\n", 3);         // duplicate diagonal
  expect_line("dim 2\n0 1 0.0\n", 2);              // explicit zero
  expect_line("dim 2\n0 2 1.0\n", 2);              // out of range
  expect_line("dim 2\n\n0 1 1.0\n", 2);            // blank line
  expect_line("dim 2\n0  1 1.0\n", 2);             // double space
  expect_line("dim 2\r\n0 1 1.0\n", 1);            // CRLF
  expect_line("dim 2\n0 1\n", 2);                  // missing value
  expect_line("dim 2\n0 1 abc\n", 2);              // not a number
  expect_line("dim 2\n0.5 1 1.0\n", 2);            // fractional index
  expect_line("size 2\n", 1);                      // wrong header
  expect_line("", 1);                              // empty input

  try {
    std::istringstream in("dim 2\n0 1 bad\n");
    read_symmetric(in);
  } catch (const ParseError& e) {
    CHECK(doctest::String(e.what()) == doctest::Contains("line 2"));
  }
}

TEST_CASE("rectangular matrix text round trip") {
  RectangularMatrix S(2, 3, {1.5, 0.0, -2.0, 0.0, 0.0, 1.0 / 7.0});
  std::ostringstream out;
  write_rectangular(out, S);
  std::istringstream in(out.str());
  RectangularMatrix T = read_rectangular(in);
  CHECK(T.rows() == 2);
  CHECK(T.cols() == 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(T(i, j) == S(i, j));
}

TEST_CASE("rectangular reader validation") {
  std::istringstream dup("rows 2 cols 2\n0 0 1\n0 0 2\n");
  CHECK_THROWS_AS(read_rectangular(dup), ParseError);
  std::istringstream head("rows 2 columns 2\n");
  CHECK_THROWS_AS(read_rectangular(head), ParseError);
  std::istringstream range("rows 2 cols 2\n2 0 1\n");
  CHECK_THROWS_AS(read_rectangular(range), ParseError);
}

TEST_CASE("vector text round trip") {
  Vector v{0.1, -1.0 / 3.0, 4.9e-324, 1.7976931348623157e308};
  std::ostringstream out;
  write_vector(out, v);
  std::istringstream in(out.str());
  Vector w = read_vector(in);
  REQUIRE(w.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(w[i] == v[i]);

  std::istringstream two("1.0 2.0\n");
  CHECK_THROWS_AS(read_vector(two), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_vector(empty), ParseError);
}

TEST_CASE("numeric formatting round-trips every double exactly") {
  const double cases[] = {0.0,       1.0,        0.1,   1.0 / 3.0, -2.5e-7,
                          3.14159e5, 4.9e-324,   1e300, 123456789.123456789,
                          0x1.fffffffffffffp+1023};
  for (double x : cases) {
    const std::string s = format_g17(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(format_g17(1.0) == "1");
  CHECK(format_g17(0.5) == "0.5");
}

TEST_CASE("missing file raises a parse error naming the path") {
  CHECK_THROWS_WITH_AS(read_vector_file("/nonexistent/v.txt"),
                       doctest::Contains("/nonexistent/v.txt"), ParseError);
}
