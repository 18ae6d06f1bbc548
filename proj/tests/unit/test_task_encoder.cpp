#include <doctest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "labelsearch/errors.hpp"
#include "labelsearch/sparsemax.hpp"
#include "labelsearch/task_encoder.hpp"
#include "oracles.hpp"

using namespace labelsearch;

TEST_CASE("orthonormalize examples") {
  SUBCASE("orthonormal input is a fixed point") {
    std::mt19937_64 rng(1);
    const Matrix q = orthonormalize(testing::random_matrix(3, 6, rng));
    CHECK((orthonormalize(q) - q).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("scaled orthogonal rows") {
    Matrix m(2, 2);
    m << 2, 0, 0, 3;
    CHECK(orthonormalize(m) == Matrix::Identity(2, 2));
  }
  SUBCASE("random 3x8 Gaussian") {
    std::mt19937_64 rng(2);
    CHECK(orthonormality_defect(orthonormalize(testing::random_matrix(3, 8, rng))) <= 1e-10);
  }
  SUBCASE("rank deficiency is a degenerate-parameter error") {
    Matrix m(2, 3);
    m << 1, 2, 3, 2, 4, 6;
    try {
      orthonormalize(m);
      FAIL("expected degenerate error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDegenerate);
    }
  }
}

TEST_CASE("orthonormalize keeps the row span and is orthonormal on 1000 draws") {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index k = 1 + trial % 6;
    const Matrix m = testing::random_matrix(k, 12, rng);
    const Matrix q = orthonormalize(m);
    worst = std::max(worst, orthonormality_defect(q));
    // Rows of M are reproduced by their projection onto span(Q).
    CHECK(((m * q.transpose()) * q - m).cwiseAbs().maxCoeff() <= 1e-9);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("Gram-Schmidt backward matches finite differences") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Index k = 2 + trial % 3;
    const Index d = 6;
    const Matrix m = testing::random_matrix(k, d, rng);
    const Matrix weight = testing::random_matrix(k, d, rng);
    // Scalar test function: sum of weight * sin(Q).
    auto f = [&](std::vector<double> x) {
      const Matrix q = orthonormalize(Eigen::Map<Matrix>(x.data(), k, d));
      return (weight.array() * q.array().sin()).sum();
    };
    GramSchmidt gs;
    const Matrix q = gs.forward(m);
    const Matrix grad = gs.backward((weight.array() * q.array().cos()).matrix());
    const auto fd = oracle::central_difference(f, std::vector<double>(m.data(), m.data() + m.size()), 1e-6);
    for (Index i = 0; i < m.size(); ++i) {
      CHECK(std::abs(grad.data()[i] - fd[static_cast<std::size_t>(i)]) <= 1e-4 * std::max(1.0, std::abs(fd[static_cast<std::size_t>(i)])));
    }
  }
}

TEST_CASE("ortho_rand") {
  const TaskEncoder a = ortho_rand(3, 8, 0);
  const TaskEncoder b = ortho_rand(3, 8, 0);
  CHECK(a == b);
  CHECK(orthonormality_defect(a.prototypes()) <= 1e-6);
  const TaskEncoder c = ortho_rand(3, 8, 1);
  CHECK((a.m - c.m).norm() > 0.0);
  CHECK_THROWS_AS(ortho_rand(9, 8, 0), Error);
}

TEST_CASE("encode") {
  SUBCASE("a sample equal to prototype k gets hard label k") {
    const TaskEncoder enc = ortho_rand(4, 10, 7, 0.1);
    const Matrix phi = enc.prototypes();  // rows are unit norm
    const Labeling lab = encode(enc, phi);
    CHECK(lab.hard == HardLabels{0, 1, 2, 3});
    // Logit gap is (1 - 0) / 0.1 = 10 > 1, so sparsemax is one-hot.
    CHECK((lab.probs - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("huge temperature gives uniform rows") {
    std::mt19937_64 rng(8);
    TaskEncoder enc = ortho_rand(5, 9, 3, 1e12);
    const Matrix phi = testing::random_matrix(20, 9, rng);
    const Labeling lab = encode(enc, phi);
    CHECK((lab.probs.array() - 0.2).abs().maxCoeff() <= 1e-9);
  }
  SUBCASE("rows lie on the simplex and dimension mismatch is rejected") {
    std::mt19937_64 rng(9);
    const TaskEncoder enc = ortho_rand(3, 5, 1);
    Matrix phi = testing::random_matrix(30, 5, rng);
    phi = phi.array().colwise() / phi.rowwise().norm().array();
    const Labeling lab = encode(enc, phi);
    CHECK(lab.probs.minCoeff() >= 0.0);
    CHECK((lab.probs.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
    CHECK_THROWS_AS(encode(enc, Matrix::Ones(2, 4)), Error);
  }
  SUBCASE("permuting prototypes permutes the hard labels") {
    std::mt19937_64 rng(10);
    const TaskEncoder enc = ortho_rand(4, 6, 2);
    Matrix phi = testing::random_matrix(50, 6, rng);
    phi = phi.array().colwise() / phi.rowwise().norm().array();
    const std::vector<int> perm{2, 0, 3, 1};
    TaskEncoder permuted = enc;
    for (int k = 0; k < 4; ++k) permuted.m.row(perm[static_cast<std::size_t>(k)]) = enc.m.row(k);
    const auto a = encode(enc, phi).hard;
    const auto b = encode(permuted, phi).hard;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == perm[static_cast<std::size_t>(a[i])]);
  }
}

TEST_CASE("argmax ties go to the lowest index") {
  Matrix p(2, 3);
  p << 0.4, 0.4, 0.2, 0.2, 0.4, 0.4;
  CHECK(argmax_rows(p) == HardLabels{0, 1});
}
