#include "findex/condexp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "findex/rng.hpp"

namespace findex {

std::string to_string(CEKind kind) {
  switch (kind) {
    case CEKind::trace: return "trace";
    case CEKind::tensor_state: return "tensor_state";
    case CEKind::weighted_corner: return "weighted_corner";
    case CEKind::group_average: return "group_average";
    case CEKind::custom: return "custom";
  }
  throw Error("to_string: unknown CEKind");
}

CEKind ce_kind_from_string(const std::string& s) {
  if (s == "trace") return CEKind::trace;
  if (s == "tensor_state") return CEKind::tensor_state;
  if (s == "weighted_corner") return CEKind::weighted_corner;
  if (s == "group_average") return CEKind::group_average;
  if (s == "custom") return CEKind::custom;
  throw Error("unknown expectation kind: " + s);
}

CondExp::CondExp(CEKind kind, Embedding embedding, LinearMap map, CEParams params)
    : kind_(kind), emb_(std::move(embedding)), map_(std::move(map)),
      params_(std::move(params)) {
  if (map_.domain() != emb_.amb_shape() || map_.codomain() != emb_.amb_shape())
    throw ShapeError("CondExp: map must be an endomorphism of the ambient algebra");
}

CondExp trace_ce(const Embedding& e, std::vector<double> weights) {
  const AlgebraShape& amb = e.amb_shape();
  const AlgebraShape& sub = e.sub_shape();
  if (weights.empty()) weights.assign(static_cast<size_t>(amb.num_blocks()), 1.0);
  if (static_cast<int>(weights.size()) != amb.num_blocks())
    throw ShapeError("trace_ce: one weight per ambient block required");
  for (double w : weights)
    if (!(w > 0.0)) throw Error("trace_ce: trace weights must be positive");

  int n = amb.ambient_dim();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n) * n,
                          static_cast<Eigen::Index>(n) * n);
  for (int j = 0; j < sub.num_blocks(); ++j) {
    double tj = 0.0;
    for (int i = 0; i < amb.num_blocks(); ++i)
      tj += weights[static_cast<size_t>(i)] * e.inclusion_matrix()(i, j);
    for (int r = 0; r < sub.block_dim(j); ++r)
      for (int c = 0; c < sub.block_dim(j); ++c) {
        Element b = e.embed(Element::unit(sub, j, r, c));
        Element wb = b;
        for (int i = 0; i < amb.num_blocks(); ++i)
          wb.block(i) *= weights[static_cast<size_t>(i)];
        // τ-orthogonal projection: E(x) = Σ b_k τ(b_k* x), τ(b*b) = t_j.
        m += (b.vec() * wb.vec().adjoint()) / tj;
      }
  }
  CEParams p;
  p.trace_weights = std::move(weights);
  return CondExp(CEKind::trace, e, LinearMap(amb, amb, std::move(m)), std::move(p));
}

CondExp tensor_state_ce(int h, int k, const Matrix& density) {
  if (h < 1 || k < 1) throw ShapeError("tensor_state_ce: factor dims must be >= 1");
  if (density.rows() != k || density.cols() != k)
    throw ShapeError("tensor_state_ce: density must be k x k");
  Matrix c = density;
  if ((c - c.adjoint()).norm() > 1e-10 * std::max(1.0, c.norm()))
    throw Error("tensor_state_ce: density is not Hermitian");
  c = hermitian_part(c);
  if (std::abs(c.trace().real() - 1.0) > 1e-9 || std::abs(c.trace().imag()) > 1e-12)
    throw Error("tensor_state_ce: density must have trace one");
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 1e-12 * std::max(lmax, 1.0))
    throw Error("tensor_state_ce: density must be faithful (strictly positive)");

  AlgebraShape amb({h * k});
  AlgebraShape sub({h});
  Eigen::MatrixXi inc(1, 1);
  inc(0, 0) = k;
  // ι(b) = b ⊗ 1_k; the canonical multiplicity embedding is 1_k ⊗ b, so the
  // block unitary is the tensor-factor swap e_{j·h+i} ↦ e_{i·k+j}.
  Matrix u = Matrix::Zero(h * k, h * k);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < k; ++j) u(i * k + j, j * h + i) = 1.0;
  Embedding e(sub, amb, inc, {u});

  int n = h * k;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n) * n,
                          static_cast<Eigen::Index>(n) * n);
  // E(e_{ii'} ⊗ e_{jj'}) = C_{j'j} · e_{ii'} ⊗ 1_k, columnwise over units.
  for (int i = 0; i < h; ++i)
    for (int ip = 0; ip < h; ++ip)
      for (int j = 0; j < k; ++j)
        for (int jp = 0; jp < k; ++jp) {
          Complex coeff = c(jp, j);
          if (coeff == Complex(0.0)) continue;
          Eigen::Index col = static_cast<Eigen::Index>(ip * k + jp) * n + (i * k + j);
          for (int t = 0; t < k; ++t) {
            Eigen::Index row = static_cast<Eigen::Index>(ip * k + t) * n + (i * k + t);
            m(row, col) += coeff;
          }
        }
  CEParams p;
  p.h = h;
  p.k = k;
  p.density = c;
  return CondExp(CEKind::tensor_state, e, LinearMap(amb, amb, std::move(m)),
                 std::move(p));
}

CondExp weighted_corner_ce(const std::vector<int>& corner_dims, double lambda) {
  if (corner_dims.empty()) throw ShapeError("weighted_corner_ce: no blocks");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error("weighted_corner_ce: lambda must lie in (0,1)");
  std::vector<int> amb_blocks, sub_blocks;
  for (int m : corner_dims) {
    if (m < 1) throw ShapeError("weighted_corner_ce: corner dim must be >= 1");
    amb_blocks.push_back(2 * m);
    sub_blocks.push_back(m);
  }
  AlgebraShape amb(amb_blocks), sub(sub_blocks);
  Eigen::MatrixXi inc = 2 * Eigen::MatrixXi::Identity(amb.num_blocks(), sub.num_blocks());
  Embedding e(sub, amb, inc);

  int n = amb.ambient_dim();
  Matrix map = Matrix::Zero(static_cast<Eigen::Index>(n) * n,
                            static_cast<Eigen::Index>(n) * n);
  for (int blk = 0; blk < amb.num_blocks(); ++blk) {
    int m = corner_dims[static_cast<size_t>(blk)];
    int o = amb.block_offset(blk);
    // [[P,Q],[R,S]] ↦ diag(Y,Y) with Y = λP + (1−λ)S.
    for (int s = 0; s < 2; ++s) {
      double coeff = (s == 0) ? lambda : 1.0 - lambda;
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
          Eigen::Index col =
              static_cast<Eigen::Index>(o + s * m + c) * n + (o + s * m + r);
          for (int t = 0; t < 2; ++t) {
            Eigen::Index row =
                static_cast<Eigen::Index>(o + t * m + c) * n + (o + t * m + r);
            map(row, col) += coeff;
          }
        }
    }
  }
  CEParams p;
  p.lambda = lambda;
  return CondExp(CEKind::weighted_corner, e, LinearMap(amb, amb, std::move(map)),
                 std::move(p));
}

CondExp group_average_ce(const std::vector<int>& involution,
                         std::vector<double> point_weights) {
  int n = static_cast<int>(involution.size());
  if (n < 1) throw ShapeError("group_average_ce: empty point set");
  std::vector<bool> seen(static_cast<size_t>(n), false);
  for (int x = 0; x < n; ++x) {
    int y = involution[static_cast<size_t>(x)];
    if (y < 0 || y >= n || seen[static_cast<size_t>(y)])
      throw Error("group_average_ce: involution is not a permutation");
    seen[static_cast<size_t>(y)] = true;
  }
  for (int x = 0; x < n; ++x)
    if (involution[static_cast<size_t>(involution[static_cast<size_t>(x)])] != x)
      throw Error("group_average_ce: permutation is not an involution");
  if (point_weights.empty()) point_weights.assign(static_cast<size_t>(n), 1.0);
  if (static_cast<int>(point_weights.size()) != n)
    throw ShapeError("group_average_ce: one weight per point required");
  for (double w : point_weights)
    if (!(w > 0.0)) throw Error("group_average_ce: point weights must be positive");

  // Orbits ordered by their smallest point.
  std::vector<int> orbit_of(static_cast<size_t>(n), -1);
  int num_orbits = 0;
  for (int x = 0; x < n; ++x) {
    if (orbit_of[static_cast<size_t>(x)] >= 0) continue;
    orbit_of[static_cast<size_t>(x)] = num_orbits;
    orbit_of[static_cast<size_t>(involution[static_cast<size_t>(x)])] = num_orbits;
    ++num_orbits;
  }

  AlgebraShape amb(std::vector<int>(static_cast<size_t>(n), 1));
  AlgebraShape sub(std::vector<int>(static_cast<size_t>(num_orbits), 1));
  Eigen::MatrixXi inc = Eigen::MatrixXi::Zero(n, num_orbits);
  for (int x = 0; x < n; ++x) inc(x, orbit_of[static_cast<size_t>(x)]) = 1;
  Embedding e(sub, amb, inc);

  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n) * n,
                          static_cast<Eigen::Index>(n) * n);
  for (int x = 0; x < n; ++x) {
    int sx = involution[static_cast<size_t>(x)];
    double wx = point_weights[static_cast<size_t>(x)];
    double wsx = point_weights[static_cast<size_t>(sx)];
    double coeff = wx / (wx + wsx);
    Eigen::Index col = static_cast<Eigen::Index>(x) * n + x;
    m(col, col) += (x == sx) ? 1.0 : coeff;
    if (x != sx) m(static_cast<Eigen::Index>(sx) * n + sx, col) += coeff;
  }
  CEParams p;
  p.involution = involution;
  p.point_weights = std::move(point_weights);
  return CondExp(CEKind::group_average, e, LinearMap(amb, amb, std::move(m)),
                 std::move(p));
}

CondExp custom_ce(const Embedding& e, const LinearMap& map) {
  return CondExp(CEKind::custom, e, map);
}

const AxiomCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double positivity_margin(const LinearMap& phi, int restarts, std::uint64_t seed) {
  const AlgebraShape& dom = phi.domain();
  const AlgebraShape& cod = phi.codomain();
  int nc = cod.ambient_dim();
  LinearMap adj = phi.hs_adjoint();

  double worst = std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < restarts; ++rs) {
    Rng rng = Rng::split(seed, static_cast<std::uint64_t>(rs));
    int blk = rng.uniform_int(0, dom.num_blocks() - 1);
    Vector xi = rng.unit_vector(dom.block_dim(blk));
    double value = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
      Element x = Element::zero(dom);
      x.block(blk) = xi * xi.adjoint();
      Matrix img = hermitian_part(phi.apply(x).ambient());
      Eigen::SelfAdjointEigenSolver<Matrix> es(img);
      double lmin = es.eigenvalues()(0);
      Vector eta = es.eigenvectors().col(0);
      if (std::abs(lmin - value) < 1e-14 * std::max(1.0, std::abs(value)) && it > 2) {
        value = lmin;
        break;
      }
      value = lmin;
      // ξ-step: minimize ⟨η, Φ(ξξ*) η⟩ = ξ* herm(Φ†(ηη*)) ξ over block unit ξ.
      Matrix outer = eta * eta.adjoint();
      Element back = Element::from_ambient(
          cod, outer, nullptr);
      Element d = adj.apply(back);
      (void)nc;
      double best = std::numeric_limits<double>::infinity();
      int best_blk = blk;
      Vector best_xi = xi;
      for (int b = 0; b < dom.num_blocks(); ++b) {
        Eigen::SelfAdjointEigenSolver<Matrix> bs(hermitian_part(d.block(b)));
        if (bs.eigenvalues()(0) < best) {
          best = bs.eigenvalues()(0);
          best_blk = b;
          best_xi = bs.eigenvectors().col(0);
        }
      }
      blk = best_blk;
      xi = best_xi;
    }
    worst = std::min(worst, value);
  }
  return worst;
}

namespace {

// tr(E(e_pq)) for every ambient unit inside a block, used for O(1) Gram
// entries in the faithfulness check.
Matrix trace_table(const CondExp& ce) {
  const AlgebraShape& amb = ce.amb_shape();
  int n = amb.ambient_dim();
  Matrix t = Matrix::Zero(n, n);
  const Matrix& m = ce.map().matrix();
  for (int b = 0; b < amb.num_blocks(); ++b) {
    int o = amb.block_offset(b), d = amb.block_dim(b);
    for (int p = o; p < o + d; ++p)
      for (int q = o; q < o + d; ++q) {
        Eigen::Index col = static_cast<Eigen::Index>(q) * n + p;
        Complex tr = 0.0;
        for (int i = 0; i < n; ++i) tr += m(static_cast<Eigen::Index>(i) * n + i, col);
        t(p, q) = tr;
      }
  }
  return t;
}

}  // namespace

ValidationReport validate_ce(const CondExp& ce, const Tolerance& tol,
                             std::uint64_t seed) {
  ValidationReport rep;
  const AlgebraShape& amb = ce.amb_shape();
  const AlgebraShape& sub = ce.sub_shape();
  const Matrix& m = ce.map().matrix();
  int n = amb.ambient_dim();

  auto add = [&](const std::string& name, double residual, double bound) {
    AxiomCheck c{name, residual <= bound, residual};
    rep.ok = rep.ok && c.passed;
    rep.checks.push_back(std::move(c));
  };

  if (static_cast<Eigen::Index>(n) * n <= 1500) {
    double scale = std::max(1.0, m.norm());
    add("idempotent", (m * m - m).norm() / scale, tol.axiom * n);
  } else {
    // Superoperator too large to square outright; probe E∘E = E instead.
    Rng rng = Rng::split(seed, 7);
    double res = 0.0;
    for (int trial = 0; trial < 32; ++trial) {
      Vector v = rng.gauss_vector(static_cast<int>(m.cols()));
      v /= v.norm();
      Vector ev = m * v;
      res = std::max(res, (m * ev - ev).norm());
    }
    add("idempotent", res, tol.axiom * n);
  }
  add("unital",
      (ce.apply(Element::identity(amb)) - Element::identity(amb)).frobenius_norm() /
          std::sqrt(static_cast<double>(n)),
      tol.axiom * n);

  double range_res = 0.0;
  for (int b = 0; b < amb.num_blocks(); ++b) {
    int o = amb.block_offset(b), d = amb.block_dim(b);
    for (int p = o; p < o + d; ++p)
      for (int q = o; q < o + d; ++q) {
        Element img = ce.apply(Element::unit(amb, b, p - o, q - o));
        range_res = std::max(range_res, ce.embedding().image_residual(img));
      }
  }
  add("range", range_res, tol.axiom * n);

  // Bimodule property E(ι(b) x ι(b')) = ι(b) E(x) ι(b').
  double bim_res = 0.0;
  std::int64_t dB = sub.linear_dim(), dA = amb.linear_dim();
  if (dB * dA * dB <= 20000) {
    std::vector<Element> bs;
    for (int j = 0; j < sub.num_blocks(); ++j)
      for (int r = 0; r < sub.block_dim(j); ++r)
        for (int c = 0; c < sub.block_dim(j); ++c)
          bs.push_back(ce.embedding().embed(Element::unit(sub, j, r, c)));
    std::vector<Element> xs;
    for (int b = 0; b < amb.num_blocks(); ++b)
      for (int r = 0; r < amb.block_dim(b); ++r)
        for (int c = 0; c < amb.block_dim(b); ++c)
          xs.push_back(Element::unit(amb, b, r, c));
    for (const Element& lb : bs)
      for (const Element& x : xs) {
        Element ex = ce.apply(x);
        for (const Element& rb : bs) {
          Element lhs = ce.apply(lb * x * rb);
          Element rhs = lb * ex * rb;
          bim_res = std::max(bim_res, (lhs - rhs).frobenius_norm());
        }
      }
  } else {
    Rng rng = Rng::split(seed, 101);
    for (int trial = 0; trial < 500; ++trial) {
      Element b1 = Element::zero(sub), b2 = Element::zero(sub), x = Element::zero(amb);
      for (int j = 0; j < sub.num_blocks(); ++j) {
        b1.block(j) = rng.gauss_matrix(sub.block_dim(j), sub.block_dim(j));
        b2.block(j) = rng.gauss_matrix(sub.block_dim(j), sub.block_dim(j));
      }
      for (int b = 0; b < amb.num_blocks(); ++b)
        x.block(b) = rng.gauss_matrix(amb.block_dim(b), amb.block_dim(b));
      double nb = std::max({b1.frobenius_norm(), b2.frobenius_norm(),
                            x.frobenius_norm(), 1.0});
      Element lb = ce.embedding().embed(b1), rb = ce.embedding().embed(b2);
      Element lhs = ce.apply(lb * x * rb);
      Element rhs = lb * ce.apply(x) * rb;
      bim_res = std::max(bim_res, (lhs - rhs).frobenius_norm() / (nb * nb * nb));
    }
  }
  add("bimodule", bim_res, tol.axiom * n);

  double margin = positivity_margin(ce.map(), 16, seed ^ 0xabcdULL);
  {
    AxiomCheck c{"positive", margin >= -tol.abs, margin};
    rep.ok = rep.ok && c.passed;
    rep.checks.push_back(std::move(c));
  }

  // Faithfulness: the scalar Gram of tr(E(g_s* g_t)) over block-diagonal
  // units must be positive definite.
  {
    Matrix trE = trace_table(ce);
    int d = amb.linear_dim();
    Matrix g = Matrix::Zero(d, d);
    int s = 0;
    std::vector<std::tuple<int, int, int>> idx;  // (block, row a, col b) of e_ab
    for (int b = 0; b < amb.num_blocks(); ++b) {
      int o = amb.block_offset(b), nb = amb.block_dim(b);
      for (int a = o; a < o + nb; ++a)
        for (int c = o; c < o + nb; ++c) idx.emplace_back(b, a, c);
    }
    for (const auto& [bs_, a, bb] : idx) {
      int t = 0;
      for (const auto& [bt, cc, dd] : idx) {
        if (bs_ == bt && a == cc) g(s, t) = trE(bb, dd);
        ++t;
      }
      ++s;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(g), Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    bool ok = lmax > 0.0 && lmin > tol.rank_rel * lmax;
    AxiomCheck c{"faithful", ok, lmax > 0.0 ? lmin / lmax : 0.0};
    rep.ok = rep.ok && c.passed;
    rep.checks.push_back(std::move(c));
  }

  return rep;
}

void require_valid_ce(const CondExp& ce, const Tolerance& tol) {
  ValidationReport rep = validate_ce(ce, tol);
  if (rep.ok) return;
  std::string msg = "conditional expectation axioms violated:";
  for (const auto& c : rep.checks)
    if (!c.passed) msg += " " + c.name;
  throw ValidationError(msg, std::move(rep));
}

}  // namespace findex
