#include <doctest.h>

#include "findex/algebra.hpp"
#include "findex/rng.hpp"

using namespace findex;

TEST_CASE("shape arithmetic") {
  AlgebraShape s({2, 3, 1});
  CHECK(s.num_blocks() == 3);
  CHECK(s.ambient_dim() == 6);
  CHECK(s.linear_dim() == 14);
  CHECK(s.block_offset(0) == 0);
  CHECK(s.block_offset(1) == 2);
  CHECK(s.block_offset(2) == 5);
  CHECK(s.str() == "M2+M3+M1");
  CHECK_THROWS_AS(AlgebraShape({2, 0}), ShapeError);
  CHECK_THROWS_AS(AlgebraShape(std::vector<int>{}), ShapeError);
}

TEST_CASE("element algebra and vectorization round trip") {
  AlgebraShape s({2, 3});
  Rng rng(7);
  Element a = Element::zero(s), b = Element::zero(s);
  for (int i = 0; i < 2; ++i) {
    a.block(i) = rng.gauss_matrix(s.block_dim(i), s.block_dim(i));
    b.block(i) = rng.gauss_matrix(s.block_dim(i), s.block_dim(i));
  }
  CHECK((a + b - b - a).frobenius_norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(((a * b).adjoint() - b.adjoint() * a.adjoint()).frobenius_norm() <
        1e-12);
  Element back = Element::unvec(s, a.vec());
  CHECK((back - a).frobenius_norm() < 1e-14);

  double off = 0.0;
  Matrix m = a.ambient();
  m(0, 4) = 3.0;  // off-block-diagonal entry
  Element c = Element::from_ambient(s, m, &off);
  CHECK(off == doctest::Approx(3.0));
  CHECK((c - a).frobenius_norm() < 1e-14);
}

TEST_CASE("spectrum is sorted and block-tagged") {
  AlgebraShape s({1, 2});
  Element a = Element::zero(s);
  a.block(0)(0, 0) = 5.0;
  a.block(1) << 1.0, 0.0, 0.0, -2.0;
  auto ev = spectrum(a);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0].value == doctest::Approx(-2.0));
  CHECK(ev[0].block == 1);
  CHECK(ev[2].value == doctest::Approx(5.0));
  CHECK(ev[2].block == 0);
  CHECK(operator_norm(a) == doctest::Approx(5.0));
  CHECK_FALSE(is_positive_element(a, 1e-9));
  Element nh = Element::zero(s);
  nh.block(1) << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(spectrum(nh), Error);
}

TEST_CASE("identity map is the block-diagonal pinching") {
  AlgebraShape s({1, 2});
  LinearMap id = LinearMap::identity(s);
  Matrix x = Matrix::Zero(3, 3);
  x(0, 0) = 1.0;
  x(0, 2) = 7.0;  // off-block entry must be annihilated
  x(1, 2) = 2.0;
  Matrix y = id.apply_ambient(x);
  CHECK(std::abs(y(0, 0) - Complex(1.0)) < 1e-14);
  CHECK(std::abs(y(0, 2)) < 1e-14);
  CHECK(std::abs(y(1, 2) - Complex(2.0)) < 1e-14);
}

TEST_CASE("sparse apply agrees with dense apply") {
  AlgebraShape s({2, 2});
  Rng rng(11);
  Matrix m = rng.gauss_matrix(16, 16);
  LinearMap phi(s, s, m);
  Element x = Element::zero(s);
  x.block(1)(0, 1) = Complex(2.0, -1.0);
  CHECK((phi.apply(x) - phi.apply_sparse(x)).frobenius_norm() < 1e-12);
}

TEST_CASE("choi matrix of the pinching is a diagonal projection") {
  AlgebraShape s({1, 1});
  Matrix c = LinearMap::identity(s).choi();
  CHECK(c.rows() == 4);
  CHECK((c - c.adjoint()).norm() < 1e-14);
  CHECK(std::abs(c.trace() - Complex(2.0)) < 1e-14);  // one per point
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-14);
}

TEST_CASE("hs adjoint is the adjoint for the Frobenius pairing") {
  AlgebraShape s({2});
  Rng rng(3);
  Matrix m = rng.gauss_matrix(4, 4);
  LinearMap phi(s, s, m);
  LinearMap adj = phi.hs_adjoint();
  Element x = Element::zero(s), y = Element::zero(s);
  x.block(0) = rng.gauss_matrix(2, 2);
  y.block(0) = rng.gauss_matrix(2, 2);
  Complex lhs = (x.adjoint() * phi.apply(y)).trace();
  Complex rhs = (adj.apply(x).adjoint() * y).trace();
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("rng reproducibility and haar unitarity") {
  Rng a = Rng::split(42, 3), b = Rng::split(42, 3), c = Rng::split(42, 4);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  Rng r(99);
  Matrix u = r.haar_unitary(5);
  CHECK((u * u.adjoint() - Matrix::Identity(5, 5)).norm() < 1e-12);
}
