#pragma once

#include <array>
#include <functional>
#include <optional>

#include "findex/constants.hpp"

namespace findex {

/// tr(E(x* y)), the scalar inner product of the module A over B.
Complex scalar_inner(const CondExp& ce, const Element& x, const Element& y);

/// Default generating set of A as a right B-module: for every B-block j a
/// basis of A·ι(e^{(j)}_{11}), one element y v* per ambient block and range
/// vector of ι(e^{(j)}_{11}).
std::vector<Element> module_generators(const CondExp& ce);

struct QuasiBasis {
  std::vector<Element> elements;
  double reconstruction_residual = 0.0;
};

/// Quasi-basis {u_i} with x = Σ_i u_i E(u_i* x), from the canonical module
/// generators via the B-valued Gram operator.
QuasiBasis quasi_basis(const CondExp& ce, const Tolerance& tol = {});
QuasiBasis quasi_basis_from(const CondExp& ce, const std::vector<Element>& generators,
                            const Tolerance& tol = {});
/// For commutative ambient algebras only: u_x = e_x / sqrt(E(e_x)(x)).
QuasiBasis quasi_basis_pointwise(const CondExp& ce, const Tolerance& tol = {});

struct IndexElement {
  Element value;                    // Σ_i u_i u_i*, central in A
  double centrality_residual = 0.0;
  double min_eigenvalue = 0.0;
  double norm = 0.0;
};

IndexElement index_element(const CondExp& ce, const Tolerance& tol = {});
IndexElement index_element_from(const CondExp& ce, const QuasiBasis& qb,
                                const Tolerance& tol = {});

/// Jones basic construction A₁ = ⟨A, e⟩ realized concretely as the algebra
/// of right-B-linear operators on A, one matrix block per B-block acting on
/// V_j = A·ι(e^{(j)}_{11}). Blocks are ordered by ascending dimension.
class BasicConstruction {
 public:
  BasicConstruction(CondExp base, const Tolerance& tol = {});

  const CondExp& base() const { return base_; }
  const AlgebraShape& shape() const { return shape_; }
  /// Embedding of A into A₁ (π_E in the canonical block coordinates).
  const Embedding& iota1() const { return iota1_; }
  const Element& jones_projection() const { return jones_; }
  /// The ⟨,⟩_E-orthonormal frame of V_j for B-block j.
  const std::vector<Element>& frame(int sub_block) const {
    return frames_[static_cast<size_t>(sub_block)];
  }
  /// The B-block whose module V_j realizes A₁ block p.
  int sub_block_of(int a1_block) const {
    return block_of_[static_cast<size_t>(a1_block)];
  }

  /// π_E(a): left multiplication by a as an element of A₁.
  Element represent(const Element& a) const;
  /// θ_{a₁,a₂}: x ↦ a₂ E(a₁* x) as an element of A₁.
  Element theta(const Element& a1, const Element& a2) const;
  /// Apply h ∈ A₁ to x ∈ A through the module action.
  Element act(const Element& h, const Element& x) const;

 private:
  Element operator_matrix(const std::function<Element(const Element&)>& op) const;

  CondExp base_;
  AlgebraShape shape_;
  std::vector<int> block_of_;                 // A₁ block position -> B block j
  std::vector<int> pos_of_;                   // B block j -> A₁ block position
  std::vector<std::vector<Element>> frames_;  // per B block, ⟨,⟩_E-ONB of V_j
  Embedding iota1_;
  Element jones_;
};

BasicConstruction basic_construction(const CondExp& ce, const Tolerance& tol = {});

/// The dual expectation E₁ : A₁ → π_E(A), E₁(T) = π_E(Ind(E)⁻¹ Σ_i (T u_i) u_i*).
CondExp next_expectation(const BasicConstruction& bc, const QuasiBasis& qb,
                         const IndexElement& ind);

struct TowerLevel {
  CondExp expectation;
  IndexElement index;
  std::optional<Element> jones_projection;  // absent at the base level
  bool stabilization_checked = false;
  bool stabilization_ok = true;
};

enum class TowerStatus { complete, truncated };

struct Tower {
  std::vector<TowerLevel> levels;
  TowerStatus status = TowerStatus::complete;
};

/// Iterated basic construction: levels extra floors above the base, stopping
/// early (status truncated) once the next algebra would exceed dim_budget
/// in linear dimension. Index stabilization is compared only when the
/// previous index element lies in the embedded center of the subalgebra.
Tower jones_tower(const CondExp& ce, int levels, int dim_budget = 20000,
                  const Tolerance& tol = {});

/// Minimal Stinespring-type dilation of E: the Hilbert space A ⊗_B A with
/// ⟨a⊗x, c⊗y⟩ = tr E(x* E(a*c) y), the left representation of A on it, and
/// the isometry x ↦ 1⊗x intertwining it with multiplication by E(a).
struct Stinespring {
  int module_dim = 0;
  double isometry_residual = 0.0;
  double covariance_residual = 0.0;
  bool dense = false;
  Matrix isometry;  // module_dim × dim(A), in the ⟨,⟩_E-orthonormal basis of A

  /// π̂(a) on the dilation space.
  Matrix rep(const Element& a) const;

  // Internal coordinates of the generator family a ⊗ x over ambient units.
  AlgebraShape amb;
  std::vector<std::array<int, 3>> units;  // (block, global row, global col)
  Matrix coords;                          // module_dim × units²
  Matrix coords_pinv;
};

Stinespring stinespring(const CondExp& ce, const Tolerance& tol = {});

}  // namespace findex
