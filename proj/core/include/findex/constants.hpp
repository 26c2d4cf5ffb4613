#pragma once

#include <cstdint>

#include "findex/condexp.hpp"

namespace findex {

enum class CertMethod { seesaw, choi_pencil, closed_form };

std::string to_string(CertMethod m);

/// Witnessed value of an optimization. `value` may be +infinity; for the
/// positivity constant the witness is a block vector ξ and an ambient state
/// η with value |⟨η, ξ̂⟩|² / ⟨η, E(ξξ*)η⟩; for the complete-positivity
/// constant η is the extremal vector of the Choi pencil.
struct Certificate {
  double value = 0.0;
  CertMethod method = CertMethod::seesaw;
  bool converged = false;
  int restarts_used = 0;
  double residual = 0.0;  // cross-check gap or eigenresidual, diagnostic only
  Vector eta;
  Vector xi;
  int xi_block = -1;

  bool is_infinite() const;
};

/// Best constant K with x ≤ K·E(x) for all positive x, by see-saw over
/// rank-one block states against ambient vector states. Kinds with a known
/// closed form are cross-checked against one see-saw run.
Certificate compute_K(const CondExp& ce, const Tolerance& tol = {},
                      int restarts = 64, std::uint64_t seed = 0x5eedcafeULL);

/// Best constant L with L·E − id completely positive, as the top generalized
/// eigenvalue of the Choi pencil (C_id, C_E); +infinity when the identity
/// has mass outside the support of C_E.
Certificate compute_L(const CondExp& ce, const Tolerance& tol = {});

struct KadisonResult {
  double variance_margin = 0.0;  // λmin of E(a²) − E(a)²
  double upper_margin = 0.0;     // λmin of (K−1)(E(a²) − E(a)²) − (E(a) − a)²
  bool ok = false;
};

/// The variance inequality 0 ≤ (E(a) − a)² ≤ (K−1)(E(a²) − E(a)²) for
/// self-adjoint a.
KadisonResult kadison_check(const CondExp& ce, double K, const Element& a,
                            const Tolerance& tol = {});

/// λmin of K·E(x) − x; nonnegative for all positive x iff K is admissible.
double pimsner_popa_margin(const CondExp& ce, double K, const Element& x);

}  // namespace findex
