// Acceptance battery: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "findex/rng.hpp"
#include "findex/suite.hpp"

using namespace findex;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(int num, bool ok, const std::string& what, double secs) {
  std::printf("%s  %2d  %s (%.2fs)\n", ok ? "PASS" : "FAIL", num, what.c_str(),
              secs);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Scenario load(const std::string& name) {
  std::ifstream in(std::string(FINDEX_DATA_DIR) + "/" + name);
  if (!in.good()) throw Error("missing scenario file: " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

const std::vector<std::string>& golden_names() {
  static const std::vector<std::string> names = {
      "ex1.json",       "corner-0.50.json", "corner-third.json",
      "corner-0.90.json", "corner-2.25.json", "tensor-h1.json",
      "tensor-h2.json", "tensor-h2k2.json", "circle-3.json",
      "circle-8.json",  "circle-64.json"};
  return names;
}

int fuzzy_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1: half-trace on M2 — K = 2, L = 4 = K², index element 4·1.
void criterion_1() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "half-trace on M2: K=2, L=4=K^2, index 4*1";
  try {
    CondExp ce = make_condexp(load("ex1.json"));
    double k = compute_K(ce).value;
    double l = compute_L(ce).value;
    IndexElement ind = index_element(ce);
    Element target = Element::identity(ce.amb_shape()) * Complex(4.0);
    ok = near(k, 2.0, 1e-6) && near(l, 4.0, 1e-6) &&
         (ind.value - target).frobenius_norm() <= 1e-8 &&
         near(l, k * k, 1e-6);
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  double secs = seconds_since(t0);
  if (secs >= 1.0) ok = false;
  report(1, ok, what, secs);
}

// 2: weighted-corner grid — closed forms, and the point where L exceeds
// floor(K)² while staying inside the sandwich.
void criterion_2() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "corner grid closed forms; L=4.05 > floor(K)^2 flagged";
  try {
    for (double lam : {0.5, 1.0 / 3.0, 0.9}) {
      CondExp ce = weighted_corner_ce({1}, lam);
      double k_want = std::max(1.0 / lam, 1.0 / (1.0 - lam));
      double l_want = 1.0 / lam + 1.0 / (1.0 - lam);
      ok = ok && near(compute_K(ce).value, k_want, 1e-6) &&
           near(compute_L(ce).value, l_want, 1e-6);
    }
    CondExp sep = weighted_corner_ce({1}, 1.0 / 2.25);
    double k = compute_K(sep).value;
    double l = compute_L(sep).value;
    int fk = fuzzy_floor(k);
    bool flagged = l > static_cast<double>(fk) * fk + 1e-9;
    ok = ok && near(l, 4.05, 1e-6) && fk == 2 && flagged;
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  double secs = seconds_since(t0);
  if (secs >= 5.0) ok = false;
  report(2, ok, what, secs);
}

// 3: tensor-state index — (Σ 1/λ_n)·1 for h = 1 and h = 2, norm equals L.
void criterion_3() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "tensor-state index (1/.5+1/.3+1/.2)*1, norm equals L";
  try {
    double want = 1.0 / 0.5 + 1.0 / 0.3 + 1.0 / 0.2;
    Matrix c = Matrix::Zero(3, 3);
    c(0, 0) = 0.5;
    c(1, 1) = 0.3;
    c(2, 2) = 0.2;
    for (int h : {1, 2}) {
      CondExp ce = tensor_state_ce(h, 3, c);
      IndexElement ind = index_element(ce);
      Element target = Element::identity(ce.amb_shape()) * Complex(want);
      double rel = (ind.value - target).frobenius_norm() /
                   target.frobenius_norm();
      double l = compute_L(ce).value;
      ok = ok && rel <= 1e-6 && near(ind.norm, l, 1e-8);
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(3, ok, what, seconds_since(t0));
}

std::vector<double> g_random_ks;  // shared between criteria 4 and 5

// 4: sandwich K ≤ L ≤ K·floor(K) on 100 seeded random trace expectations.
void criterion_4() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "sandwich on 100 seeded random expectations (dim <= 24)";
  try {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      CondExp ce = make_condexp(random_scenario(seed));
      double k = compute_K(ce, {}, 48, seed).value;
      double l = compute_L(ce).value;
      g_random_ks.push_back(k);
      int fk = fuzzy_floor(k);
      if (!(k <= l + 1e-6 && l <= k * fk + 1e-6)) {
        ok = false;
        what += " -- seed " + std::to_string(seed) + " violates";
        break;
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  double secs = seconds_since(t0);
  if (secs >= 300.0) ok = false;
  report(4, ok, what, secs);
}

// 5: gap law — every K in the corpus is 1 or at least 2.
void criterion_5() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "gap law: K = 1 or K >= 2 across the corpus";
  try {
    std::vector<double> ks = g_random_ks;
    for (const std::string& name : golden_names())
      ks.push_back(compute_K(make_condexp(load(name))).value);
    for (double k : ks) {
      if (std::isinf(k)) continue;
      if (!(near(k, 1.0, 1e-6) || k >= 2.0 - 1e-6)) {
        ok = false;
        what += " -- K = " + std::to_string(k) + " in the gap";
        break;
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(5, ok, what, seconds_since(t0));
}

// 6: quasi-basis reconstruction and basis independence on all goldens.
void criterion_6() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "quasi-basis residual <= 1e-8, index basis-independent";
  try {
    for (const std::string& name : golden_names()) {
      CondExp ce = make_condexp(load(name));
      QuasiBasis qb = quasi_basis(ce);
      if (qb.reconstruction_residual > 1e-8) {
        ok = false;
        what += " -- " + name + " residual too large";
        break;
      }
      IndexElement ind = index_element_from(ce, qb);
      std::vector<Element> gens = module_generators(ce);
      Rng rng = Rng::split(0xacce97ULL, 6);
      Matrix rot = rng.haar_unitary(static_cast<int>(gens.size()));
      std::vector<Element> gens2;
      for (size_t i = 0; i < gens.size(); ++i) {
        Element g = Element::zero(ce.amb_shape());
        for (size_t t = 0; t < gens.size(); ++t)
          g = g + gens[t] * rot(static_cast<int>(t), static_cast<int>(i));
        gens2.push_back(std::move(g));
      }
      IndexElement ind2 = index_element_from(ce, quasi_basis_from(ce, gens2));
      if ((ind.value - ind2.value).frobenius_norm() > 1e-8) {
        ok = false;
        what += " -- " + name + " index depends on the generators";
        break;
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(6, ok, what, seconds_since(t0));
}

// 7: three-level tower with a valid dual expectation sending e to Ind⁻¹.
void criterion_7() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "towers build, E1 valid, E1(e) = Ind^-1, index constant";
  try {
    Matrix half = 0.5 * Matrix::Identity(2, 2);
    std::vector<CondExp> cases;
    cases.push_back(make_condexp(load("ex1.json")));
    cases.push_back(tensor_state_ce(2, 2, half));
    for (const CondExp& ce : cases) {
      BasicConstruction bc(ce);
      QuasiBasis qb = quasi_basis(ce);
      IndexElement ind = index_element_from(ce, qb);
      CondExp e1 = next_expectation(bc, qb, ind);
      if (!validate_ce(e1).ok) {
        ok = false;
        what += " -- E1 failed validation";
        break;
      }
      Element inv = Element::zero(ce.amb_shape());
      for (int b = 0; b < inv.num_blocks(); ++b)
        inv.block(b) = ind.value.block(b).inverse();
      if ((e1.apply(bc.jones_projection()) - bc.represent(inv))
              .frobenius_norm() > 1e-8) {
        ok = false;
        what += " -- E1(e) differs from the inverse index";
        break;
      }
      Tower tower = jones_tower(ce, 3);
      if (tower.levels.size() != 4 || tower.status != TowerStatus::complete) {
        ok = false;
        what += " -- tower did not reach three levels";
        break;
      }
      double base_norm = tower.levels[0].index.norm;
      for (const TowerLevel& lvl : tower.levels)
        if (!near(lvl.index.norm, base_norm, 1e-6 * std::max(1.0, base_norm)))
          ok = false;
      if (!ok) {
        what += " -- index drifts along the tower";
        break;
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  double secs = seconds_since(t0);
  if (secs >= 60.0) ok = false;
  report(7, ok, what, secs);
}

// 8: dimension bounds, with equality attained on the half-trace example.
void criterion_8() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "dimension bounds hold; half-trace attains equality";
  try {
    for (const std::string& name : golden_names()) {
      CondExp ce = make_condexp(load(name));
      double k = compute_K(ce).value;
      if (std::isinf(k)) continue;
      int fk = fuzzy_floor(k);
      int dim_a = ce.amb_shape().linear_dim();
      int dim_b = ce.sub_shape().linear_dim();
      SubspaceBasis rc = relative_commutant(ce.embedding());
      int dim_z = ce.sub_shape().num_blocks();
      bool commutative = true;
      for (int b = 0; b < ce.amb_shape().num_blocks(); ++b)
        commutative = commutative && ce.amb_shape().block_dim(b) == 1;
      if (dim_a > fk * fk * dim_b * dim_b ||
          (commutative && dim_a > fk * dim_b) || rc.dim > fk * fk * dim_z) {
        ok = false;
        what += " -- bound violated on " + name;
        break;
      }
      if (name == "ex1.json" &&
          (dim_a != fk * fk * dim_b * dim_b || rc.dim != fk * fk * dim_z)) {
        ok = false;
        what += " -- equality not attained on the half-trace example";
        break;
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(8, ok, what, seconds_since(t0));
}

// 9: variance inequality on 500 random self-adjoint elements per golden.
void criterion_9() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "variance inequality on 500 random elements per scenario";
  try {
    for (const std::string& name : golden_names()) {
      CondExp ce = make_condexp(load(name));
      double k = compute_K(ce).value;
      if (std::isinf(k)) continue;
      Rng rng = Rng::split(0xacce97ULL, 9);
      for (int trial = 0; trial < 500; ++trial) {
        Element a = Element::zero(ce.amb_shape());
        for (int b = 0; b < a.num_blocks(); ++b)
          a.block(b) = rng.hermitian(a.shape().block_dim(b));
        double n = a.frobenius_norm();
        if (n > 0) a = a * Complex(1.0 / n);
        KadisonResult res = kadison_check(ce, k, a);
        if (res.variance_margin < -1e-8 || res.upper_margin < -1e-8) {
          ok = false;
          what += " -- violated on " + name;
          break;
        }
      }
      if (!ok) break;
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(9, ok, what, seconds_since(t0));
}

// 10: Stinespring dilation residuals at most 1e-10 on all goldens.
void criterion_10() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "dilation residuals <= 1e-10 on all golden scenarios";
  try {
    for (const std::string& name : golden_names()) {
      Stinespring st = stinespring(make_condexp(load(name)));
      if (st.isometry_residual > 1e-10 || st.covariance_residual > 1e-10 ||
          !st.dense) {
        ok = false;
        what += " -- " + name + " residual too large";
        break;
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(10, ok, what, seconds_since(t0));
}

// 11: reflection surrogates — pointwise index 2 off the fixed points, 1 at
// them, K = L = 2 whenever a point moves.
void criterion_11() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string what = "reflection surrogates: pointwise index {1,2}, K=L=2";
  try {
    for (int n : {3, 8, 64}) {
      CondExp ce = make_condexp(load("circle-" + std::to_string(n) + ".json"));
      IndexElement ind = index_element_from(ce, quasi_basis_pointwise(ce));
      for (int x = 0; x < n; ++x) {
        bool fixed = (x == 0) || (n % 2 == 0 && x == n / 2);
        double want = fixed ? 1.0 : 2.0;
        if (std::abs(ind.value.block(x)(0, 0).real() - want) > 1e-12) {
          ok = false;
          what += " -- wrong pointwise value at n=" + std::to_string(n);
          break;
        }
      }
      double k = compute_K(ce).value;
      double l = compute_L(ce).value;
      if (!(near(k, 2.0, 1e-9) && near(l, 2.0, 1e-9))) {
        ok = false;
        what += " -- constants differ from 2 at n=" + std::to_string(n);
      }
      if (!ok) break;
    }
  } catch (const std::exception& e) {
    ok = false;
    what += std::string(" -- ") + e.what();
  }
  report(11, ok, what, seconds_since(t0));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0) {
    std::printf("all %d acceptance criteria passed\n", 11);
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
