#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "findex/inclusion.hpp"

namespace findex {

enum class CEKind { trace, tensor_state, weighted_corner, group_average, custom };

std::string to_string(CEKind kind);
CEKind ce_kind_from_string(const std::string& s);

/// Construction parameters, kept so an expectation can be serialized and
/// rebuilt exactly. Only the fields of the matching kind are meaningful.
struct CEParams {
  std::vector<double> trace_weights;   // trace: one weight per ambient block
  int h = 0, k = 0;                    // tensor_state: factor dimensions
  Matrix density;                      // tensor_state: k×k faithful state
  double lambda = 0.0;                 // weighted_corner
  std::vector<int> involution;         // group_average: permutation, σ² = id
  std::vector<double> point_weights;   // group_average
};

/// Conditional expectation E : A → A with range ι(B), stored as the
/// superoperator on ambient vectorizations together with the embedding.
class CondExp {
 public:
  CondExp() = default;
  CondExp(CEKind kind, Embedding embedding, LinearMap map, CEParams params = {});

  CEKind kind() const { return kind_; }
  const Embedding& embedding() const { return emb_; }
  const LinearMap& map() const { return map_; }
  const CEParams& params() const { return params_; }

  const AlgebraShape& sub_shape() const { return emb_.sub_shape(); }
  const AlgebraShape& amb_shape() const { return emb_.amb_shape(); }

  Element apply(const Element& x) const { return map_.apply_sparse(x); }
  /// E followed by unembedding, i.e. the B-valued form of the expectation.
  Element compress(const Element& x) const { return emb_.unembed(apply(x)); }

 private:
  CEKind kind_ = CEKind::custom;
  Embedding emb_;
  LinearMap map_;
  CEParams params_;
};

/// τ-preserving expectation onto ι(B), where τ(x) = Σ_i w_i tr(x_i) and the
/// weights are strictly positive (all 1 when omitted).
CondExp trace_ce(const Embedding& e, std::vector<double> weights = {});

/// B = M_h inside A = M_h ⊗ M_k via b ↦ b ⊗ 1, with E(T ⊗ S) = T · tr(CS)
/// for a faithful density matrix C on the second factor.
CondExp tensor_state_ce(int h, int k, const Matrix& density);

/// B = ⊕ M_{m_i} inside A = ⊕ M_{2m_i} with multiplicity two; each block
/// [[P,Q],[R,S]] is sent to two copies of λP + (1−λ)S, λ ∈ (0,1).
CondExp weighted_corner_ce(const std::vector<int>& corner_dims, double lambda);

/// A = functions on n points, σ an involutive permutation, B the σ-invariant
/// functions; E averages over orbits with the given positive point weights.
CondExp group_average_ce(const std::vector<int>& involution,
                         std::vector<double> point_weights = {});

CondExp custom_ce(const Embedding& e, const LinearMap& map);

struct AxiomCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<AxiomCheck> checks;
  bool ok = true;
  const AxiomCheck* find(const std::string& name) const;
};

struct ValidationError : Error {
  ValidationError(const std::string& msg, ValidationReport rep)
      : Error(msg), report(std::move(rep)) {}
  ValidationReport report;
};

/// Estimate of min over states of the smallest eigenvalue reachable through
/// Φ, by alternating minimization; nonnegative iff Φ is (block) positive up
/// to the restart budget.
double positivity_margin(const LinearMap& phi, int restarts = 16,
                         std::uint64_t seed = 0x5eed0001ULL);

/// Check the conditional expectation axioms: idempotent, unital, range in
/// ι(B), B-bimodule property, positivity, faithfulness.
ValidationReport validate_ce(const CondExp& ce, const Tolerance& tol = {},
                             std::uint64_t seed = 0x5eed0002ULL);

/// validate_ce, throwing ValidationError when any axiom fails.
void require_valid_ce(const CondExp& ce, const Tolerance& tol = {});

}  // namespace findex
