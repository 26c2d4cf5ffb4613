#pragma once

namespace findex {

/// One knob per kind of numerical decision, threaded through every
/// operation so results stay auditable and reproducible.
struct Tolerance {
  double abs = 1e-9;               // generic comparisons, scaled by norm
  double axiom = 1e-10;            // expectation axiom residuals
  double rank_rel = 1e-8;          // singular value cutoff, relative to largest
  double choi_support_rel = 1e-10; // pencil support cutoff
  double offsupport = 1e-8;        // identity mass outside the pencil support
  double reconstruction = 1e-8;    // quasi-basis reconstruction residual
  double certificate = 1e-6;       // inequality slack in suite checks
};

}  // namespace findex
