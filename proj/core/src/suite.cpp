#include "findex/suite.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "findex/rng.hpp"

namespace findex {

using nlohmann::json;

std::string SuiteReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["passed"] = passed;
  json rs = json::array();
  for (const auto& r : results) {
    json e;
    e["id"] = r.id;
    e["status"] = r.status;
    if (!r.detail.empty()) e["detail"] = r.detail;
    if (!r.values.empty()) {
      json vals;
      for (const auto& [k, v] : r.values) vals[k] = format_decimal(v);
      e["values"] = std::move(vals);
    }
    rs.push_back(std::move(e));
  }
  j["results"] = std::move(rs);
  return j.dump(2) + "\n";
}

namespace {

int fuzzy_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

bool is_commutative(const AlgebraShape& s) {
  for (int b = 0; b < s.num_blocks(); ++b)
    if (s.block_dim(b) != 1) return false;
  return true;
}

Element random_self_adjoint(const AlgebraShape& s, Rng& rng) {
  Element a = Element::zero(s);
  for (int b = 0; b < s.num_blocks(); ++b) a.block(b) = rng.hermitian(s.block_dim(b));
  double n = a.frobenius_norm();
  return n > 0 ? a * Complex(1.0 / n) : a;
}

struct SuiteState {
  CondExp ce;
  Tolerance tol;
  std::uint64_t seed = 1;

  std::optional<Certificate> kcert, lcert;
  std::optional<QuasiBasis> qb;
  std::optional<IndexElement> ind;
  bool index_failed = false;
  std::string index_error;

  const Certificate& K() {
    if (!kcert) kcert = compute_K(ce, tol, 64, seed ^ 0x4bULL);
    return *kcert;
  }
  const Certificate& L() {
    if (!lcert) lcert = compute_L(ce, tol);
    return *lcert;
  }
  bool finite_index() { return !L().is_infinite() && !K().is_infinite(); }
  const IndexElement* index() {
    if (!ind && !index_failed) {
      try {
        qb = quasi_basis(ce, tol);
        ind = index_element_from(ce, *qb, tol);
      } catch (const Error& e) {
        index_failed = true;
        index_error = e.what();
      }
    }
    return ind ? &*ind : nullptr;
  }
};

CheckResult check_validate(SuiteState& st) {
  CheckResult r{"validate", "pass", "", {}};
  ValidationReport rep = validate_ce(st.ce, st.tol, st.seed);
  for (const auto& c : rep.checks) {
    r.values[c.name] = c.residual;
    if (!c.passed) {
      r.status = "fail";
      r.detail += (r.detail.empty() ? "" : ", ") + c.name;
    }
  }
  if (r.status == "fail") r.detail = "failed axioms: " + r.detail;
  return r;
}

CheckResult check_constants(SuiteState& st) {
  CheckResult r{"constants", "pass", "", {}};
  const Certificate& k = st.K();
  const Certificate& l = st.L();
  r.values["K"] = k.value;
  r.values["L"] = l.value;
  r.detail = "K by " + to_string(k.method) + ", L by " + to_string(l.method);
  if (!k.converged) {
    r.status = "fail";
    r.detail += "; K optimization did not converge";
  }
  if (!k.is_infinite() && k.value < 1.0 - st.tol.certificate) {
    r.status = "fail";
    r.detail += "; K below one";
  }
  if (!l.is_infinite() && l.value < 1.0 - st.tol.certificate) {
    r.status = "fail";
    r.detail += "; L below one";
  }
  if (!k.is_infinite() && !l.is_infinite()) {
    double k2 = k.value * k.value;
    bool boundary = std::abs(l.value - k2) <= st.tol.certificate * std::max(1.0, k2);
    r.values["L_equals_K2"] = boundary ? 1.0 : 0.0;
    if (boundary) r.detail += "; L attains K^2 (boundary case logged)";
  }
  return r;
}

CheckResult check_sandwich(SuiteState& st) {
  CheckResult r{"sandwich", "pass", "", {}};
  if (!st.finite_index()) {
    r.status = "infinite-index";
    return r;
  }
  double k = st.K().value, l = st.L().value;
  int fk = fuzzy_floor(k);
  r.values["K"] = k;
  r.values["L"] = l;
  r.values["floor_K"] = fk;
  double slack = st.tol.certificate * std::max(1.0, l);
  if (l < k - slack || l > k * fk + slack) {
    r.status = "fail";
    r.detail = "K <= L <= K*floor(K) violated";
  }
  return r;
}

CheckResult check_gap_law(SuiteState& st) {
  CheckResult r{"gap_law", "pass", "", {}};
  double k = st.K().value;
  r.values["K"] = k;
  if (std::isinf(k)) return r;
  bool at_one = std::abs(k - 1.0) <= st.tol.certificate;
  bool above_two = k >= 2.0 - st.tol.certificate;
  if (!at_one && !above_two) {
    r.status = "fail";
    r.detail = "K lies in the forbidden gap (1, 2)";
  }
  return r;
}

CheckResult check_index(SuiteState& st) {
  CheckResult r{"index", "pass", "", {}};
  if (!st.finite_index()) {
    r.status = "infinite-index";
    return r;
  }
  const IndexElement* ind = st.index();
  if (!ind) {
    r.status = "fail";
    r.detail = st.index_error;
    return r;
  }
  r.values["reconstruction_residual"] = st.qb->reconstruction_residual;
  r.values["centrality_residual"] = ind->centrality_residual;
  r.values["min_eigenvalue"] = ind->min_eigenvalue;
  r.values["norm"] = ind->norm;
  if (ind->centrality_residual > st.tol.certificate * std::max(1.0, ind->norm)) {
    r.status = "fail";
    r.detail = "index element is not central";
    return r;
  }
  if (ind->min_eigenvalue < 1.0 - st.tol.certificate) {
    r.status = "fail";
    r.detail = "index element drops below one";
    return r;
  }
  // Independence of the quasi-basis: recombine the generators by a random
  // unitary and recompute.
  std::vector<Element> gens = module_generators(st.ce);
  int m = static_cast<int>(gens.size());
  Rng rng = Rng::split(st.seed, 0x1dULL);
  Matrix rot = rng.haar_unitary(m);
  std::vector<Element> gens2;
  for (int i = 0; i < m; ++i) {
    Element g = Element::zero(st.ce.amb_shape());
    for (int t = 0; t < m; ++t) g = g + gens[static_cast<size_t>(t)] * rot(t, i);
    gens2.push_back(std::move(g));
  }
  try {
    QuasiBasis qb2 = quasi_basis_from(st.ce, gens2, st.tol);
    IndexElement ind2 = index_element_from(st.ce, qb2, st.tol);
    double diff = (ind2.value - ind->value).frobenius_norm() /
                  std::max(1.0, ind->value.frobenius_norm());
    r.values["basis_independence_residual"] = diff;
    if (diff > st.tol.certificate) {
      r.status = "fail";
      r.detail = "index depends on the chosen quasi-basis";
    }
  } catch (const Error& e) {
    r.status = "fail";
    r.detail = std::string("recombined quasi-basis failed: ") + e.what();
  }
  return r;
}

CheckResult check_index_bound(SuiteState& st) {
  CheckResult r{"index_bound", "pass", "", {}};
  if (!st.finite_index()) {
    r.status = "infinite-index";
    return r;
  }
  const IndexElement* ind = st.index();
  if (!ind) {
    r.status = "fail";
    r.detail = st.index_error;
    return r;
  }
  double l = st.L().value;
  r.values["index_norm"] = ind->norm;
  r.values["L"] = l;
  if (std::abs(ind->norm - l) > st.tol.certificate * std::max(1.0, l)) {
    r.status = "fail";
    r.detail = "norm of the index element disagrees with L";
  }
  return r;
}

CheckResult check_dim_bounds(SuiteState& st) {
  CheckResult r{"dim_bounds", "pass", "", {}};
  double k = st.K().value;
  if (std::isinf(k)) {
    r.status = "skipped";
    r.detail = "bounds are vacuous at infinite K";
    return r;
  }
  int fk = fuzzy_floor(k);
  int dim_m = st.ce.amb_shape().linear_dim();
  int dim_n = st.ce.sub_shape().linear_dim();
  r.values["dim_M"] = dim_m;
  r.values["dim_N"] = dim_n;
  r.values["floor_K"] = fk;
  if (dim_m > fk * fk * dim_n * dim_n) {
    r.status = "fail";
    r.detail = "dim(M) exceeds floor(K)^2 dim(N)^2";
    return r;
  }
  if (is_commutative(st.ce.amb_shape()) && dim_m > fk * dim_n) {
    r.status = "fail";
    r.detail = "commutative dim(M) exceeds floor(K) dim(N)";
    return r;
  }
  SubspaceBasis rc = relative_commutant(st.ce.embedding(), st.tol);
  int dim_z = st.ce.sub_shape().num_blocks();
  r.values["dim_rel_commutant"] = rc.dim;
  r.values["dim_center_N"] = dim_z;
  if (rc.dim > fk * fk * dim_z) {
    r.status = "fail";
    r.detail = "relative commutant exceeds floor(K)^2 dim Z(N)";
  }
  return r;
}

CheckResult check_minimal_projection(SuiteState& st) {
  CheckResult r{"minimal_projection", "pass", "", {}};
  double k = st.K().value;
  if (std::isinf(k)) {
    r.status = "skipped";
    r.detail = "bounds are vacuous at infinite K";
    return r;
  }
  int fk = fuzzy_floor(k);
  const AlgebraShape& sub = st.ce.sub_shape();
  int worst_count = 0, worst_corner = 0;
  for (int j = 0; j < sub.num_blocks(); ++j) {
    Element p = st.ce.embedding().embed(Element::unit(sub, j, 0, 0));
    OrthogonalFamily fam = max_orthogonal_family(st.ce.embedding(), p, st.tol);
    worst_count = std::max(worst_count, fam.count);
    worst_corner = std::max(worst_corner, fam.corner_dim);
  }
  r.values["max_orthogonal_count"] = worst_count;
  r.values["max_corner_dim"] = worst_corner;
  r.values["floor_K"] = fk;
  if (worst_count > fk) {
    r.status = "fail";
    r.detail = "orthogonal family under a minimal projection exceeds floor(K)";
  } else if (worst_corner > fk * fk) {
    r.status = "fail";
    r.detail = "corner dimension exceeds floor(K)^2";
  }
  return r;
}

CheckResult check_kadison(SuiteState& st) {
  CheckResult r{"kadison", "pass", "", {}};
  double k = st.K().value;
  if (std::isinf(k)) {
    r.status = "skipped";
    r.detail = "inequality is vacuous at infinite K";
    return r;
  }
  Rng rng = Rng::split(st.seed, 0xcadULL);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Element a = random_self_adjoint(st.ce.amb_shape(), rng);
    KadisonResult kr = kadison_check(st.ce, k, a, st.tol);
    worst = std::min({worst, kr.variance_margin, kr.upper_margin});
    if (!kr.ok) {
      r.status = "fail";
      r.detail = "variance inequality violated";
    }
  }
  r.values["worst_margin"] = worst;
  return r;
}

CheckResult check_pimsner_popa(SuiteState& st) {
  CheckResult r{"pimsner_popa", "pass", "", {}};
  double k = st.K().value;
  if (std::isinf(k)) {
    r.status = "skipped";
    r.detail = "inequality is vacuous at infinite K";
    return r;
  }
  Rng rng = Rng::split(st.seed, 0x9192ULL);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Element g = Element::zero(st.ce.amb_shape());
    for (int b = 0; b < g.num_blocks(); ++b)
      g.block(b) = rng.gauss_matrix(g.shape().block_dim(b), g.shape().block_dim(b));
    Element x = g.adjoint() * g;
    double n = x.frobenius_norm();
    if (n > 0) x = x * Complex(1.0 / n);
    double margin = pimsner_popa_margin(st.ce, k, x);
    worst = std::min(worst, margin);
  }
  r.values["worst_margin"] = worst;
  if (worst < -st.tol.certificate) {
    r.status = "fail";
    r.detail = "K*E(x) - x dips below zero on a positive element";
  }
  return r;
}

CheckResult check_tower(SuiteState& st, int levels, int dim_budget) {
  CheckResult r{"tower", "pass", "", {}};
  if (!st.finite_index()) {
    r.status = "infinite-index";
    return r;
  }
  Tower tower;
  try {
    tower = jones_tower(st.ce, levels, dim_budget, st.tol);
  } catch (const Error& e) {
    r.status = "fail";
    r.detail = e.what();
    return r;
  }
  int built = static_cast<int>(tower.levels.size()) - 1;
  r.values["levels_built"] = built;
  if (tower.status == TowerStatus::truncated) {
    r.detail = "truncated by dimension budget after " + std::to_string(built) +
               " level(s)";
    if (built == 0) {
      r.status = "skipped";
      return r;
    }
  }
  for (size_t i = 0; i < tower.levels.size(); ++i) {
    const TowerLevel& lvl = tower.levels[i];
    r.values["index_norm_" + std::to_string(i)] = lvl.index.norm;
    if (lvl.index.min_eigenvalue < 1.0 - st.tol.certificate) {
      r.status = "fail";
      r.detail = "index below one at level " + std::to_string(i);
      return r;
    }
    if (lvl.jones_projection) {
      const Element& p = *lvl.jones_projection;
      double res = std::max((p * p - p).frobenius_norm(),
                            (p - p.adjoint()).frobenius_norm());
      if (res > 1e-8) {
        r.status = "fail";
        r.detail = "jones projection fails p = p* = p^2 at level " +
                   std::to_string(i);
        return r;
      }
    }
    if (lvl.stabilization_checked && !lvl.stabilization_ok) {
      r.status = "fail";
      r.detail = "index failed to stabilize at level " + std::to_string(i);
      return r;
    }
  }
  return r;
}

CheckResult check_stinespring(SuiteState& st, int dim_budget) {
  CheckResult r{"stinespring", "pass", "", {}};
  std::int64_t d = st.ce.amb_shape().linear_dim();
  if (d * d > dim_budget) {
    r.status = "skipped";
    r.detail = "generator family exceeds the dimension budget";
    return r;
  }
  try {
    Stinespring sp = stinespring(st.ce, st.tol);
    r.values["module_dim"] = sp.module_dim;
    r.values["isometry_residual"] = sp.isometry_residual;
    r.values["covariance_residual"] = sp.covariance_residual;
    if (!sp.dense) {
      r.status = "fail";
      r.detail = "dilation space is degenerate";
    }
  } catch (const Error& e) {
    r.status = "fail";
    r.detail = e.what();
  }
  return r;
}

CheckResult check_pointwise_index(SuiteState& st) {
  CheckResult r{"pointwise_index", "pass", "", {}};
  if (st.ce.kind() != CEKind::group_average) {
    r.status = "skipped";
    r.detail = "only defined for the two-point averaging surrogate";
    return r;
  }
  r.detail = "pointwise index of the finite averaging surrogate";
  try {
    QuasiBasis qbp = quasi_basis_pointwise(st.ce, st.tol);
    IndexElement indp = index_element_from(st.ce, qbp, st.tol);
    const IndexElement* ind = st.index();
    if (!ind) {
      r.status = "fail";
      r.detail = st.index_error;
      return r;
    }
    double diff = (indp.value - ind->value).frobenius_norm() /
                  std::max(1.0, ind->value.frobenius_norm());
    r.values["route_agreement_residual"] = diff;
    if (diff > st.tol.certificate) {
      r.status = "fail";
      r.detail = "pointwise and frame routes disagree";
      return r;
    }
    // Explicit pointwise values: (w_x + w_sx)/w_x, hence 1 at fixed points.
    const CEParams& p = st.ce.params();
    double worst = 0.0;
    for (size_t x = 0; x < p.involution.size(); ++x) {
      size_t sx = static_cast<size_t>(p.involution[x]);
      double expect =
          sx == x ? 1.0
                  : (p.point_weights[x] + p.point_weights[sx]) / p.point_weights[x];
      worst = std::max(worst,
                       std::abs(indp.value.block(static_cast<int>(x))(0, 0).real() -
                                expect));
    }
    r.values["pointwise_residual"] = worst;
    if (worst > st.tol.certificate) {
      r.status = "fail";
      r.detail = "pointwise index values disagree with the weight formula";
    }
  } catch (const Error& e) {
    r.status = "fail";
    r.detail = e.what();
  }
  return r;
}

CheckResult check_commutative_collapse(SuiteState& st) {
  CheckResult r{"commutative_collapse", "pass", "", {}};
  if (!is_commutative(st.ce.amb_shape())) {
    r.status = "skipped";
    r.detail = "ambient algebra is not commutative";
    return r;
  }
  double k = st.K().value, l = st.L().value;
  r.values["K"] = k;
  r.values["L"] = l;
  if (std::isinf(k) != std::isinf(l)) {
    r.status = "fail";
    r.detail = "K and L disagree on finiteness";
    return r;
  }
  if (!std::isinf(k) && std::abs(k - l) > st.tol.certificate * std::max(1.0, l)) {
    r.status = "fail";
    r.detail = "positivity and complete positivity constants differ";
  }
  return r;
}

}  // namespace

SuiteReport run_suite(const Scenario& sc) {
  SuiteState st{make_condexp(sc), sc.tol, sc.seed};
  SuiteReport report;
  report.scenario = sc.name;

  std::vector<std::string> todo = sc.checks.empty() ? known_checks() : sc.checks;
  for (const std::string& id : todo) {
    CheckResult r;
    if (id == "validate") r = check_validate(st);
    else if (id == "constants") r = check_constants(st);
    else if (id == "sandwich") r = check_sandwich(st);
    else if (id == "gap_law") r = check_gap_law(st);
    else if (id == "index") r = check_index(st);
    else if (id == "index_bound") r = check_index_bound(st);
    else if (id == "dim_bounds") r = check_dim_bounds(st);
    else if (id == "minimal_projection") r = check_minimal_projection(st);
    else if (id == "kadison") r = check_kadison(st);
    else if (id == "pimsner_popa") r = check_pimsner_popa(st);
    else if (id == "tower") r = check_tower(st, sc.levels, sc.dim_budget);
    else if (id == "stinespring") r = check_stinespring(st, sc.dim_budget);
    else if (id == "pointwise_index") r = check_pointwise_index(st);
    else if (id == "commutative_collapse") r = check_commutative_collapse(st);
    else throw Error("run_suite: unknown check id " + id);
    if (r.status == "fail") report.passed = false;
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace findex
