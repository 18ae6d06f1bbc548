#include <doctest.h>

#include <random>

#include "labelsearch/sparsemax.hpp"
#include "oracles.hpp"

using namespace labelsearch;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("sparsemax examples") {
  SUBCASE("dominant coordinate saturates") {
    const Vector p = sparsemax(vec({10, 0, 0}));
    CHECK(p(0) == 1.0);
    CHECK(p(1) == 0.0);
    CHECK(p(2) == 0.0);
  }
  SUBCASE("constant logits give the uniform distribution") {
    for (int k = 2; k <= 7; ++k) {
      const Vector p = sparsemax(Vector::Constant(k, 3.25));
      for (Index i = 0; i < k; ++i) CHECK(p(i) == doctest::Approx(1.0 / k).epsilon(1e-15));
    }
  }
  SUBCASE("(0.2, -0.2) matches a grid-search projection") {
    const auto grid = oracle::simplex_projection_grid_2d(0.2, -0.2, 1e-5);
    CHECK(grid[0] == doctest::Approx(0.7).epsilon(1e-4));
    const Vector p = sparsemax(vec({0.2, -0.2}));
    CHECK(p(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(p(0) - grid[0]) <= 1e-5);
  }
}

TEST_CASE("sparsemax equals support-enumeration projection on random vectors") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 10);
  std::normal_distribution<double> normal(0.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = size(rng);
    std::vector<double> z(static_cast<std::size_t>(k));
    for (double& x : z) x = normal(rng);
    const auto expected = oracle::simplex_projection(z);
    std::vector<double> got(z.size());
    sparsemax(z, got);
    for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(got[i] - expected[i]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("sparsemax is shift invariant and lands on the simplex") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Vector z(6);
    for (Index i = 0; i < 6; ++i) z(i) = normal(rng);
    const double c = 10.0 * normal(rng);
    const Vector p = sparsemax(z);
    const Vector shifted = sparsemax((z.array() + c).matrix());
    CHECK((p - shifted).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("sparsemax Jacobian") {
  SUBCASE("singleton support gives the zero matrix") {
    CHECK(sparsemax_jacobian(vec({10, 0, 0})).isZero());
  }
  SUBCASE("(0.2, -0.2) matches central differences") {
    const Vector z = vec({0.2, -0.2});
    const Matrix jac = sparsemax_jacobian(z);
    CHECK(jac(0, 0) == doctest::Approx(0.5));
    CHECK(jac(0, 1) == doctest::Approx(-0.5));
    for (Index out = 0; out < 2; ++out) {
      const auto fd = oracle::central_difference(
          [&](std::vector<double> x) { return sparsemax(vec({x[0], x[1]}))(out); }, {0.2, -0.2},
          1e-6);
      CHECK(std::abs(fd[0] - jac(out, 0)) <= 1e-6);
      CHECK(std::abs(fd[1] - jac(out, 1)) <= 1e-6);
    }
  }
  SUBCASE("random points: symmetric, zero row sums, matches differences where support is stable") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double h = 1e-6;
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const Index k = 2 + trial % 8;
      Vector z(k);
      for (Index i = 0; i < k; ++i) z(i) = normal(rng);
      const Matrix jac = sparsemax_jacobian(z);
      CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(jac.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);

      // Skip points whose support changes within +-h.
      const Vector p = sparsemax(z);
      bool stable = true;
      for (Index j = 0; j < k && stable; ++j) {
        for (double sign : {-1.0, 1.0}) {
          Vector zp = z;
          zp(j) += sign * h;
          const Vector q = sparsemax(zp);
          for (Index i = 0; i < k; ++i) stable = stable && ((q(i) > 0) == (p(i) > 0));
        }
      }
      if (!stable) continue;
      ++checked;
      std::vector<double> base(z.data(), z.data() + k);
      for (Index out = 0; out < k; ++out) {
        const auto fd = oracle::central_difference(
            [&](std::vector<double> x) {
              return sparsemax(Eigen::Map<Vector>(x.data(), k).eval())(out);
            },
            base, h);
        for (Index j = 0; j < k; ++j) CHECK(std::abs(fd[static_cast<std::size_t>(j)] - jac(out, j)) <= 1e-5);
      }
    }
    CHECK(checked > 200);
  }
}

TEST_CASE("sparsemax_backward equals J^T g") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector z(5), g(5);
    for (Index i = 0; i < 5; ++i) {
      z(i) = normal(rng);
      g(i) = normal(rng);
    }
    const Vector p = sparsemax(z);
    Vector out(5);
    sparsemax_backward(std::span<const double>(p.data(), 5), std::span<const double>(g.data(), 5),
                       std::span<double>(out.data(), 5));
    CHECK((out - sparsemax_jacobian(z).transpose() * g).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
