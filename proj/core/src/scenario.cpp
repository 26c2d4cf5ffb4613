#include "findex/scenario.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "findex/rng.hpp"

namespace findex {

using nlohmann::json;

std::string format_decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_decimal(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("not a decimal number: '" + s + "'");
  }
  if (used != s.size()) throw ParseError("trailing characters in number: '" + s + "'");
  return v;
}

namespace {

json complex_to_json(const Complex& z) {
  return json::array({format_decimal(z.real()), format_decimal(z.imag())});
}

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError("complex numbers must be [re, im] string pairs");
  return {parse_decimal(j.at(0).get<std::string>()),
          parse_decimal(j.at(1).get<std::string>())};
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a nonempty array");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError("matrix rows have inconsistent lengths");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = complex_from_json(row.at(static_cast<size_t>(c)));
  }
  return m;
}

json doubles_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(format_decimal(x));
  return a;
}

std::vector<double> doubles_from_json(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(parse_decimal(x.get<std::string>()));
  return v;
}

json embedding_to_json(const Embedding& e) {
  json j;
  j["sub_blocks"] = e.sub_shape().blocks();
  j["amb_blocks"] = e.amb_shape().blocks();
  json inc = json::array();
  for (int r = 0; r < e.inclusion_matrix().rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < e.inclusion_matrix().cols(); ++c)
      row.push_back(e.inclusion_matrix()(r, c));
    inc.push_back(std::move(row));
  }
  j["inclusion_matrix"] = std::move(inc);
  bool trivial = true;
  for (const Matrix& u : e.unitaries()) trivial = trivial && u.isIdentity(1e-14);
  if (!trivial) {
    json us = json::array();
    for (const Matrix& u : e.unitaries()) us.push_back(matrix_to_json(u));
    j["unitaries"] = std::move(us);
  }
  return j;
}

Embedding embedding_from_json(const json& j) {
  AlgebraShape sub(j.at("sub_blocks").get<std::vector<int>>());
  AlgebraShape amb(j.at("amb_blocks").get<std::vector<int>>());
  const json& inc = j.at("inclusion_matrix");
  Eigen::MatrixXi lam(static_cast<Eigen::Index>(inc.size()), sub.num_blocks());
  if (static_cast<int>(inc.size()) != amb.num_blocks())
    throw ParseError("inclusion_matrix must have one row per ambient block");
  for (int r = 0; r < amb.num_blocks(); ++r) {
    const json& row = inc.at(static_cast<size_t>(r));
    if (static_cast<int>(row.size()) != sub.num_blocks())
      throw ParseError("inclusion_matrix must have one column per sub block");
    for (int c = 0; c < sub.num_blocks(); ++c)
      lam(r, c) = row.at(static_cast<size_t>(c)).get<int>();
  }
  std::vector<Matrix> us;
  if (j.contains("unitaries"))
    for (const auto& u : j.at("unitaries")) us.push_back(matrix_from_json(u));
  try {
    return Embedding(sub, amb, std::move(lam), std::move(us));
  } catch (const Error& e) {
    throw ParseError(std::string("invalid embedding: ") + e.what());
  }
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> ids = {
      "validate",       "constants",          "sandwich",
      "gap_law",        "index",              "index_bound",
      "dim_bounds",     "minimal_projection", "kadison",
      "pimsner_popa",   "tower",              "stinespring",
      "pointwise_index", "commutative_collapse"};
  return ids;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    Scenario sc;
    sc.schema_version = j.at("schema_version").get<int>();
    if (sc.schema_version != kSchemaVersion)
      throw ParseError("unsupported schema_version " +
                       std::to_string(sc.schema_version));
    sc.name = j.value("name", std::string("unnamed"));

    const json& ej = j.at("expectation");
    try {
      sc.kind = ce_kind_from_string(ej.at("kind").get<std::string>());
    } catch (const Error& e) {
      throw ParseError(e.what());
    }
    switch (sc.kind) {
      case CEKind::trace:
        sc.embedding = embedding_from_json(ej.at("embedding"));
        if (ej.contains("trace_weights"))
          sc.trace_weights = doubles_from_json(ej.at("trace_weights"));
        break;
      case CEKind::tensor_state:
        sc.h = ej.at("h").get<int>();
        sc.k = ej.at("k").get<int>();
        sc.density = matrix_from_json(ej.at("density"));
        break;
      case CEKind::weighted_corner:
        sc.corner_dims = ej.at("corner_dims").get<std::vector<int>>();
        sc.lambda = parse_decimal(ej.at("lambda").get<std::string>());
        break;
      case CEKind::group_average:
        sc.involution = ej.at("involution").get<std::vector<int>>();
        if (ej.contains("point_weights"))
          sc.point_weights = doubles_from_json(ej.at("point_weights"));
        break;
      case CEKind::custom:
        sc.embedding = embedding_from_json(ej.at("embedding"));
        sc.custom_map = matrix_from_json(ej.at("map"));
        break;
    }

    if (j.contains("checks")) {
      for (const auto& c : j.at("checks")) {
        std::string id = c.get<std::string>();
        const auto& ids = known_checks();
        if (std::find(ids.begin(), ids.end(), id) == ids.end())
          throw ParseError("unknown check id: " + id);
        sc.checks.push_back(std::move(id));
      }
    }
    sc.seed = j.value("seed", std::uint64_t{1});
    sc.levels = j.value("levels", 2);
    sc.dim_budget = j.value("dim_budget", 20000);
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      auto get = [&](const char* key, double& slot) {
        if (t.contains(key)) slot = parse_decimal(t.at(key).get<std::string>());
      };
      get("abs", sc.tol.abs);
      get("axiom", sc.tol.axiom);
      get("rank_rel", sc.tol.rank_rel);
      get("choi_support_rel", sc.tol.choi_support_rel);
      get("offsupport", sc.tol.offsupport);
      get("reconstruction", sc.tol.reconstruction);
      get("certificate", sc.tol.certificate);
    }
    return sc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
}

std::string serialize_scenario(const Scenario& sc) {
  json j;
  j["schema_version"] = sc.schema_version;
  j["name"] = sc.name;
  json ej;
  ej["kind"] = to_string(sc.kind);
  switch (sc.kind) {
    case CEKind::trace:
      ej["embedding"] = embedding_to_json(*sc.embedding);
      if (!sc.trace_weights.empty())
        ej["trace_weights"] = doubles_to_json(sc.trace_weights);
      break;
    case CEKind::tensor_state:
      ej["h"] = sc.h;
      ej["k"] = sc.k;
      ej["density"] = matrix_to_json(sc.density);
      break;
    case CEKind::weighted_corner:
      ej["corner_dims"] = sc.corner_dims;
      ej["lambda"] = format_decimal(sc.lambda);
      break;
    case CEKind::group_average:
      ej["involution"] = sc.involution;
      if (!sc.point_weights.empty())
        ej["point_weights"] = doubles_to_json(sc.point_weights);
      break;
    case CEKind::custom:
      ej["embedding"] = embedding_to_json(*sc.embedding);
      ej["map"] = matrix_to_json(*sc.custom_map);
      break;
  }
  j["expectation"] = std::move(ej);
  if (!sc.checks.empty()) j["checks"] = sc.checks;
  j["seed"] = sc.seed;
  j["levels"] = sc.levels;
  j["dim_budget"] = sc.dim_budget;
  return j.dump(2) + "\n";
}

CondExp make_condexp(const Scenario& sc) {
  switch (sc.kind) {
    case CEKind::trace:
      return trace_ce(*sc.embedding, sc.trace_weights);
    case CEKind::tensor_state:
      return tensor_state_ce(sc.h, sc.k, sc.density);
    case CEKind::weighted_corner:
      return weighted_corner_ce(sc.corner_dims, sc.lambda);
    case CEKind::group_average:
      return group_average_ce(sc.involution, sc.point_weights);
    case CEKind::custom: {
      const AlgebraShape& amb = sc.embedding->amb_shape();
      return custom_ce(*sc.embedding, LinearMap(amb, amb, *sc.custom_map));
    }
  }
  throw Error("make_condexp: unknown kind");
}

Scenario scenario_of(const CondExp& ce, std::string name) {
  Scenario sc;
  sc.name = std::move(name);
  sc.kind = ce.kind();
  const CEParams& p = ce.params();
  switch (ce.kind()) {
    case CEKind::trace:
      sc.embedding = ce.embedding();
      sc.trace_weights = p.trace_weights;
      break;
    case CEKind::tensor_state:
      sc.h = p.h;
      sc.k = p.k;
      sc.density = p.density;
      break;
    case CEKind::weighted_corner: {
      sc.lambda = p.lambda;
      for (int m : ce.sub_shape().blocks()) sc.corner_dims.push_back(m);
      break;
    }
    case CEKind::group_average:
      sc.involution = p.involution;
      sc.point_weights = p.point_weights;
      break;
    case CEKind::custom:
      sc.embedding = ce.embedding();
      sc.custom_map = ce.map().matrix();
      break;
  }
  return sc;
}

Scenario random_scenario(std::uint64_t seed, int max_blocks, int max_block_dim) {
  Rng rng = Rng::split(seed, 0xabba);
  for (int attempt = 0; attempt < 256; ++attempt) {
    int nb = rng.uniform_int(1, max_blocks);
    std::vector<int> sub_blocks;
    for (int j = 0; j < nb; ++j) sub_blocks.push_back(rng.uniform_int(1, max_block_dim));

    int na = rng.uniform_int(1, max_blocks);
    Eigen::MatrixXi lam(na, nb);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) lam(i, j) = rng.uniform_int(0, 2);
    bool shape_ok = true;
    std::vector<int> amb_blocks;
    int total = 0;
    for (int i = 0; i < na; ++i) {
      int n = 0;
      for (int j = 0; j < nb; ++j) n += lam(i, j) * sub_blocks[static_cast<size_t>(j)];
      if (n == 0) shape_ok = false;
      amb_blocks.push_back(n);
      total += n;
    }
    for (int j = 0; j < nb && shape_ok; ++j) {
      int col = 0;
      for (int i = 0; i < na; ++i) col += lam(i, j);
      if (col == 0) shape_ok = false;
    }
    if (!shape_ok || total > 24) continue;

    std::vector<Matrix> us;
    for (int i = 0; i < na; ++i) {
      int n = amb_blocks[static_cast<size_t>(i)];
      us.push_back(rng.uniform() < 0.5 ? Matrix(Matrix::Identity(n, n))
                                       : rng.haar_unitary(n));
    }
    Scenario sc;
    sc.name = "random-" + std::to_string(seed);
    sc.kind = CEKind::trace;
    sc.embedding = Embedding(AlgebraShape(sub_blocks), AlgebraShape(amb_blocks),
                             std::move(lam), std::move(us));
    for (int i = 0; i < na; ++i) sc.trace_weights.push_back(rng.uniform(0.2, 2.0));
    sc.seed = seed;
    return sc;
  }
  throw Error("random_scenario: no admissible inclusion found");
}

}  // namespace findex
