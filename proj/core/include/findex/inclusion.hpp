#pragma once

#include <optional>

#include "findex/algebra.hpp"

namespace findex {

/// Unital *-embedding of a multi-matrix algebra B into A, given by an
/// inclusion matrix of multiplicities and one unitary per A-block that
/// conjugates the canonical multiplicity embedding.
class Embedding {
 public:
  Embedding() = default;
  Embedding(AlgebraShape sub, AlgebraShape amb, Eigen::MatrixXi inclusion,
            std::vector<Matrix> unitaries = {});

  static Embedding identity(const AlgebraShape& shape);

  const AlgebraShape& sub_shape() const { return sub_; }
  const AlgebraShape& amb_shape() const { return amb_; }
  const Eigen::MatrixXi& inclusion_matrix() const { return inclusion_; }
  const std::vector<Matrix>& unitaries() const { return unitaries_; }

  bool is_identity() const;

  /// ι(b): block i of the output is U_i (⊕_j 1_{Λ_ij} ⊗ b_j) U_i^*.
  Element embed(const Element& b) const;
  /// Recover b from ι(b), averaging over the multiplicity copies.
  Element unembed(const Element& a) const;
  /// Distance of a from ι(B) (Frobenius norm of a − ι(unembed(a))).
  double image_residual(const Element& a) const;
  bool contains(const Element& a, double tol) const;

  /// ι of all matrix units of B, a canonical generating set of the image.
  std::vector<Element> sub_unit_images() const;

  /// Superoperator of x ↦ ι(b)·x (left) or x ↦ x·ι(b) (right) on ambient vecs.
  Matrix left_mult_superop(const Element& b) const;
  Matrix right_mult_superop(const Element& b) const;

  /// Check unitality arithmetic and the *-homomorphism property on units.
  void validate(double tol = 1e-10) const;

 private:
  AlgebraShape sub_, amb_;
  Eigen::MatrixXi inclusion_;
  std::vector<Matrix> unitaries_;
};

struct SubspaceBasis {
  AlgebraShape ambient;
  std::vector<Element> vectors;
  int dim = 0;
};

/// Basis of {x in A : x ι(b) = ι(b) x for all b}, via the null space of the
/// stacked commutator operator on block-diagonal coordinates.
SubspaceBasis relative_commutant(const Embedding& e, const Tolerance& tol = {});

struct OrthogonalFamily {
  int count = 0;       // max pairwise orthogonal nonzero subprojections in A
  int corner_dim = 0;  // dim(pAp)
};

/// For p a minimal projection of ι(B): the block-rank count and corner size.
OrthogonalFamily max_orthogonal_family(const Embedding& e, const Element& p,
                                       const Tolerance& tol = {});

/// Is p a projection of A that lies in ι(B) and is minimal there?
bool is_minimal_projection_in_image(const Embedding& e, const Element& p,
                                    double tol);

}  // namespace findex
