#pragma once

#include <cstdint>
#include <optional>

#include "findex/hilbert_module.hpp"

namespace findex {

struct ParseError : Error {
  using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

/// A serializable description of a conditional expectation together with the
/// checks to run on it. All floating point numbers travel as decimal strings
/// so files round-trip bit-exactly across platforms.
struct Scenario {
  int schema_version = kSchemaVersion;
  std::string name;
  CEKind kind = CEKind::custom;

  // kind-specific payload; only the fields of the active kind are used
  std::optional<Embedding> embedding;  // trace, custom
  std::vector<double> trace_weights;
  int h = 0, k = 0;
  Matrix density;
  std::vector<int> corner_dims;
  double lambda = 0.0;
  std::vector<int> involution;
  std::vector<double> point_weights;
  std::optional<Matrix> custom_map;  // ambient superoperator, custom only

  std::vector<std::string> checks;  // empty means all
  std::uint64_t seed = 1;
  int levels = 2;
  int dim_budget = 20000;
  Tolerance tol;
};

std::string format_decimal(double x);
double parse_decimal(const std::string& s);

Scenario parse_scenario(const std::string& json_text);
std::string serialize_scenario(const Scenario& sc);

/// Build the expectation a scenario describes (the map of non-custom kinds
/// is re-derived from the parameters, never trusted from the file).
CondExp make_condexp(const Scenario& sc);

/// Scenario describing an already-built expectation, for writing to disk.
Scenario scenario_of(const CondExp& ce, std::string name);

/// Deterministic random scenario: a trace-preserving expectation onto a
/// random multi-matrix subalgebra with Haar-rotated embedding and random
/// positive trace weights. Ambient dimension stays at or below 24.
Scenario random_scenario(std::uint64_t seed, int max_blocks = 3,
                         int max_block_dim = 4);

const std::vector<std::string>& known_checks();

}  // namespace findex
