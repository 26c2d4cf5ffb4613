#include <doctest.h>

#include "findex/inclusion.hpp"
#include "findex/rng.hpp"

using namespace findex;

namespace {

// B = C ⊕ M2 inside A = M3 ⊕ M2 with Λ = [[1,1],[0,1]].
Embedding sample_embedding(bool rotate) {
  AlgebraShape sub({1, 2}), amb({3, 2});
  Eigen::MatrixXi lam(2, 2);
  lam << 1, 1, 0, 1;
  std::vector<Matrix> us;
  if (rotate) {
    Rng rng(5);
    us = {rng.haar_unitary(3), rng.haar_unitary(2)};
  }
  return Embedding(sub, amb, lam, us);
}

}  // namespace

TEST_CASE("embedding constructor validates the arithmetic") {
  AlgebraShape sub({1, 2}), amb({3, 2});
  Eigen::MatrixXi bad(2, 2);
  bad << 1, 1, 1, 1;  // second ambient block would need dim 3
  CHECK_THROWS_AS(Embedding(sub, amb, bad), ShapeError);
  Eigen::MatrixXi dead(2, 2);
  dead << 3, 0, 2, 0;  // second sub block never appears in the ambient algebra
  CHECK_THROWS_AS(Embedding(sub, amb, dead), ShapeError);
  CHECK(Embedding::identity(sub).is_identity());
  CHECK_FALSE(sample_embedding(false).is_identity());
}

TEST_CASE("embed is a unital *-homomorphism and unembed inverts it") {
  for (bool rotate : {false, true}) {
    Embedding e = sample_embedding(rotate);
    e.validate();
    Rng rng(17);
    Element b = Element::zero(e.sub_shape());
    b.block(0)(0, 0) = Complex(1.0, 2.0);
    b.block(1) = rng.gauss_matrix(2, 2);
    Element ib = e.embed(b);
    CHECK((e.unembed(ib) - b).frobenius_norm() < 1e-12);
    CHECK(e.contains(ib, 1e-10));
    CHECK(e.image_residual(ib) < 1e-12);

    Element c = Element::zero(e.sub_shape());
    c.block(0)(0, 0) = Complex(0.0, -1.0);
    c.block(1) = rng.gauss_matrix(2, 2);
    CHECK((e.embed(b * c) - e.embed(b) * e.embed(c)).frobenius_norm() < 1e-10);
    CHECK((e.embed(b.adjoint()) - ib.adjoint()).frobenius_norm() < 1e-12);
  }
}

TEST_CASE("multiplication superoperators") {
  Embedding e = sample_embedding(true);
  Rng rng(23);
  Element b = Element::zero(e.sub_shape());
  b.block(0)(0, 0) = 2.0;
  b.block(1) = rng.gauss_matrix(2, 2);
  Element x = Element::zero(e.amb_shape());
  x.block(0) = rng.gauss_matrix(3, 3);
  x.block(1) = rng.gauss_matrix(2, 2);
  Matrix lhs = e.left_mult_superop(b) * x.vec();
  CHECK((lhs - (e.embed(b) * x).vec()).norm() < 1e-12);
  Matrix rhs = e.right_mult_superop(b) * x.vec();
  CHECK((rhs - (x * e.embed(b)).vec()).norm() < 1e-12);
}

TEST_CASE("relative commutant dimension") {
  // B' ∩ A for C ⊕ M2 in M3 ⊕ M2: block one contributes M1 ⊕ scalars on the
  // M2 copy, block two contributes scalars: 1 + 1 + 1 + 1... computed as the
  // commutant of ⊕-copies: dim = Σ_i Σ_j Λ_ij² over blocks = (1+1) + 1 = 3.
  Embedding e = sample_embedding(true);
  SubspaceBasis rc = relative_commutant(e);
  CHECK(rc.dim == 3);
  for (const Element& z : rc.vectors) {
    for (const Element& g : e.sub_unit_images())
      CHECK((z * g - g * z).frobenius_norm() < 1e-7);
  }
  // The identity embedding has the center as its relative commutant.
  SubspaceBasis center = relative_commutant(Embedding::identity(AlgebraShape({2, 3})));
  CHECK(center.dim == 2);
}

TEST_CASE("minimal projections and orthogonal families") {
  Embedding e = sample_embedding(false);
  Element p = e.embed(Element::unit(e.sub_shape(), 1, 0, 0));
  CHECK(is_minimal_projection_in_image(e, p, 1e-9));
  OrthogonalFamily fam = max_orthogonal_family(e, p);
  CHECK(fam.count == 2);       // one copy of M2 in each ambient block
  CHECK(fam.corner_dim == 2);  // rank one in each block
  Element q = e.embed(Element::identity(e.sub_shape()));
  CHECK_FALSE(is_minimal_projection_in_image(e, q, 1e-9));
  CHECK_THROWS_AS(max_orthogonal_family(e, q), Error);
}
