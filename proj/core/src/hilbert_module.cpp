#include "findex/hilbert_module.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "findex/rng.hpp"

namespace findex {

Complex scalar_inner(const CondExp& ce, const Element& x, const Element& y) {
  return ce.apply(x.adjoint() * y).trace();
}

namespace {

// Orthonormal basis of the range of a Hermitian projection.
std::vector<Vector> range_onb(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p));
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) out.push_back(es.eigenvectors().col(i));
  return out;
}

std::vector<std::vector<Element>> grouped_generators(const CondExp& ce) {
  const AlgebraShape& amb = ce.amb_shape();
  const AlgebraShape& sub = ce.sub_shape();
  std::vector<std::vector<Element>> out(static_cast<size_t>(sub.num_blocks()));
  for (int j = 0; j < sub.num_blocks(); ++j) {
    Element p = ce.embedding().embed(Element::unit(sub, j, 0, 0));
    for (int i = 0; i < amb.num_blocks(); ++i) {
      if (ce.embedding().inclusion_matrix()(i, j) == 0) continue;
      for (const Vector& v : range_onb(p.block(i))) {
        for (int y = 0; y < amb.block_dim(i); ++y) {
          Element g = Element::zero(amb);
          g.block(i) = Vector::Unit(amb.block_dim(i), y) * v.adjoint();
          out[static_cast<size_t>(j)].push_back(std::move(g));
        }
      }
    }
  }
  return out;
}

// Hermitian pseudo-inverse square root, relative cutoff.
Matrix pinv_sqrt(const Matrix& q, double rank_rel) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(q));
  double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
  double cutoff = rank_rel * std::max(lmax, 1e-300);
  Eigen::VectorXd d(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    double lam = es.eigenvalues()(i);
    d(i) = lam > cutoff ? 1.0 / std::sqrt(lam) : 0.0;
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

std::vector<Element> module_generators(const CondExp& ce) {
  std::vector<Element> flat;
  for (auto& grp : grouped_generators(ce))
    for (auto& g : grp) flat.push_back(std::move(g));
  return flat;
}

QuasiBasis quasi_basis_from(const CondExp& ce, const std::vector<Element>& gens,
                            const Tolerance& tol) {
  const AlgebraShape& amb = ce.amb_shape();
  const AlgebraShape& sub = ce.sub_shape();
  int m = static_cast<int>(gens.size());
  if (m == 0) throw Error("quasi_basis_from: empty generating set");

  // B-valued Gram entries ⟨g_s, g_t⟩_B = E(g_s* g_t) viewed in B.
  std::vector<std::vector<Element>> gram(static_cast<size_t>(m));
  for (int s = 0; s < m; ++s) {
    gram[static_cast<size_t>(s)].reserve(static_cast<size_t>(m));
    for (int t = 0; t < m; ++t)
      gram[static_cast<size_t>(s)].push_back(ce.compress(gens[static_cast<size_t>(s)].adjoint() *
                                                          gens[static_cast<size_t>(t)]));
  }

  // S = Q^{+1/2} computed blockwise over B: on block j the Gram acts as an
  // (m·m_j) × (m·m_j) matrix, and matrix functions pass through.
  std::vector<Element> scol(static_cast<size_t>(m) * m, Element::zero(sub));
  for (int j = 0; j < sub.num_blocks(); ++j) {
    int mj = sub.block_dim(j);
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(m) * mj,
                            static_cast<Eigen::Index>(m) * mj);
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t)
        q.block(static_cast<Eigen::Index>(s) * mj, static_cast<Eigen::Index>(t) * mj,
                mj, mj) = gram[static_cast<size_t>(s)][static_cast<size_t>(t)].block(j);
    Matrix sq = pinv_sqrt(q, tol.rank_rel);
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t)
        scol[static_cast<size_t>(s) * m + static_cast<size_t>(t)].block(j) =
            sq.block(static_cast<Eigen::Index>(s) * mj,
                     static_cast<Eigen::Index>(t) * mj, mj, mj);
  }

  QuasiBasis qb;
  for (int i = 0; i < m; ++i) {
    Element u = Element::zero(amb);
    for (int t = 0; t < m; ++t)
      u = u + gens[static_cast<size_t>(t)] *
                  ce.embedding().embed(scol[static_cast<size_t>(t) * m + static_cast<size_t>(i)]);
    qb.elements.push_back(std::move(u));
  }

  // Reconstruction x = Σ_i u_i E(u_i* x): exhaustively on block-diagonal
  // units when affordable, otherwise on normalized random probes.
  double worst = 0.0;
  auto residual_at = [&](const Element& x) {
    Element rec = Element::zero(amb);
    for (const Element& u : qb.elements) rec = rec + u * ce.apply(u.adjoint() * x);
    return (rec - x).frobenius_norm();
  };
  if (static_cast<std::int64_t>(amb.linear_dim()) * m <= 20000) {
    for (int b = 0; b < amb.num_blocks(); ++b)
      for (int r = 0; r < amb.block_dim(b); ++r)
        for (int c = 0; c < amb.block_dim(b); ++c)
          worst = std::max(worst, residual_at(Element::unit(amb, b, r, c)));
  } else {
    worst = residual_at(Element::identity(amb) *
                        Complex(1.0 / std::sqrt(static_cast<double>(amb.ambient_dim()))));
    Rng rng(0x9b5ULL);
    for (int trial = 0; trial < 24; ++trial) {
      Element x = Element::zero(amb);
      for (int b = 0; b < amb.num_blocks(); ++b)
        x.block(b) = rng.gauss_matrix(amb.block_dim(b), amb.block_dim(b));
      worst = std::max(worst, residual_at(x * Complex(1.0 / x.frobenius_norm())));
    }
  }
  qb.reconstruction_residual = worst;
  if (worst > tol.reconstruction)
    throw Error("quasi_basis: reconstruction failed, residual " + std::to_string(worst));
  return qb;
}

QuasiBasis quasi_basis(const CondExp& ce, const Tolerance& tol) {
  return quasi_basis_from(ce, module_generators(ce), tol);
}

QuasiBasis quasi_basis_pointwise(const CondExp& ce, const Tolerance& tol) {
  const AlgebraShape& amb = ce.amb_shape();
  for (int b = 0; b < amb.num_blocks(); ++b)
    if (amb.block_dim(b) != 1)
      throw Error("quasi_basis_pointwise: ambient algebra must be commutative");
  QuasiBasis qb;
  for (int x = 0; x < amb.num_blocks(); ++x) {
    Element ex = Element::unit(amb, x, 0, 0);
    double mu = ce.apply(ex).block(x)(0, 0).real();
    if (mu <= 0.0) throw Error("quasi_basis_pointwise: expectation is not faithful");
    qb.elements.push_back(ex * Complex(1.0 / std::sqrt(mu)));
  }
  double worst = 0.0;
  for (int b = 0; b < amb.num_blocks(); ++b) {
    Element x = Element::unit(amb, b, 0, 0);
    Element rec = Element::zero(amb);
    for (const Element& u : qb.elements) rec = rec + u * ce.apply(u.adjoint() * x);
    worst = std::max(worst, (rec - x).frobenius_norm());
  }
  qb.reconstruction_residual = worst;
  if (worst > tol.reconstruction)
    throw Error("quasi_basis_pointwise: reconstruction failed");
  return qb;
}

IndexElement index_element_from(const CondExp& ce, const QuasiBasis& qb,
                                const Tolerance& tol) {
  IndexElement out;
  out.value = Element::zero(ce.amb_shape());
  for (const Element& u : qb.elements) out.value = out.value + u * u.adjoint();
  double cres = 0.0;
  for (int b = 0; b < out.value.num_blocks(); ++b) {
    const Matrix& blk = out.value.block(b);
    int n = static_cast<int>(blk.rows());
    Complex mean = blk.trace() / static_cast<double>(n);
    cres = std::max(cres, (blk - mean * Matrix::Identity(n, n)).norm());
  }
  out.centrality_residual = cres;
  auto ev = spectrum(out.value, 1e-7);
  out.min_eigenvalue = ev.front().value;
  out.norm = operator_norm(out.value);
  if (out.min_eigenvalue < 1.0 - 1e-8)
    throw Error("index_element: index below one, expectation cannot be valid");
  (void)tol;
  return out;
}

IndexElement index_element(const CondExp& ce, const Tolerance& tol) {
  return index_element_from(ce, quasi_basis(ce, tol), tol);
}

BasicConstruction::BasicConstruction(CondExp base, const Tolerance& tol)
    : base_(std::move(base)) {
  const AlgebraShape& sub = base_.sub_shape();

  // ⟨,⟩_E-orthonormal bases of the column modules V_j.
  auto grouped = grouped_generators(base_);
  std::vector<int> dims;
  for (int j = 0; j < sub.num_blocks(); ++j) {
    auto& gens = grouped[static_cast<size_t>(j)];
    int c = static_cast<int>(gens.size());
    Matrix gram(c, c);
    for (int s = 0; s < c; ++s)
      for (int t = 0; t < c; ++t)
        gram(s, t) = scalar_inner(base_, gens[static_cast<size_t>(s)],
                                  gens[static_cast<size_t>(t)]);
    Matrix w = pinv_sqrt(gram, tol.rank_rel);
    std::vector<Element> frame;
    for (int s = 0; s < c; ++s) {
      Element f = Element::zero(base_.amb_shape());
      for (int t = 0; t < c; ++t) f = f + gens[static_cast<size_t>(t)] * w(t, s);
      frame.push_back(std::move(f));
    }
    frames_.push_back(std::move(frame));
    dims.push_back(c);
  }

  // Canonical block order: ascending dimension, ties by B-block index.
  block_of_.resize(dims.size());
  std::iota(block_of_.begin(), block_of_.end(), 0);
  std::stable_sort(block_of_.begin(), block_of_.end(), [&](int a, int b) {
    return dims[static_cast<size_t>(a)] < dims[static_cast<size_t>(b)];
  });
  pos_of_.assign(dims.size(), -1);
  std::vector<int> sorted_dims;
  for (size_t p = 0; p < block_of_.size(); ++p) {
    pos_of_[static_cast<size_t>(block_of_[p])] = static_cast<int>(p);
    sorted_dims.push_back(dims[static_cast<size_t>(block_of_[p])]);
  }
  shape_ = AlgebraShape(sorted_dims);

  jones_ = operator_matrix([&](const Element& x) { return base_.apply(x); });

  // A ↪ A₁: multiplicities are the transpose of the base inclusion, and the
  // block unitaries align the canonical layout with the frame coordinates.
  const AlgebraShape& amb = base_.amb_shape();
  Eigen::MatrixXi inc1(shape_.num_blocks(), amb.num_blocks());
  for (int p = 0; p < shape_.num_blocks(); ++p)
    for (int i = 0; i < amb.num_blocks(); ++i)
      inc1(p, i) = base_.embedding().inclusion_matrix()(i, block_of_[static_cast<size_t>(p)]);

  std::vector<Matrix> ws;
  for (int p = 0; p < shape_.num_blocks(); ++p) {
    int j = block_of_[static_cast<size_t>(p)];
    int c = dims[static_cast<size_t>(j)];
    Matrix w = Matrix::Zero(c, c);
    int col = 0;
    for (int i = 0; i < amb.num_blocks(); ++i) {
      int ni = amb.block_dim(i);
      int mult = inc1(p, i);
      if (mult == 0) continue;
      Element e11 = Element::unit(amb, i, 0, 0);
      Element rho11 = operator_matrix(
          [&](const Element& x) { return e11 * x; });
      std::vector<Vector> wc = range_onb(rho11.block(p));
      if (static_cast<int>(wc.size()) != mult)
        throw Error("basic_construction: multiplicity mismatch in block unitary");
      for (int cc = 0; cc < mult; ++cc)
        for (int k = 0; k < ni; ++k) {
          Element ek1 = Element::unit(amb, i, k, 0);
          Element rk = operator_matrix([&](const Element& x) { return ek1 * x; });
          w.col(col++) = rk.block(p) * wc[static_cast<size_t>(cc)];
        }
    }
    ws.push_back(std::move(w));
  }
  iota1_ = Embedding(amb, shape_, std::move(inc1), std::move(ws));

  // Spot-check that the embedding realizes left multiplication.
  Rng rng(0x1071ULL);
  for (int trial = 0; trial < 3; ++trial) {
    Element a = Element::zero(amb);
    for (int i = 0; i < amb.num_blocks(); ++i)
      a.block(i) = rng.gauss_matrix(amb.block_dim(i), amb.block_dim(i));
    double res = (iota1_.embed(a) - represent(a)).frobenius_norm() /
                 std::max(1.0, a.frobenius_norm());
    if (res > 1e-8)
      throw Error("basic_construction: embedding disagrees with left multiplication");
  }
}

Element BasicConstruction::operator_matrix(
    const std::function<Element(const Element&)>& op) const {
  Element h = Element::zero(shape_);
  for (int p = 0; p < shape_.num_blocks(); ++p) {
    const auto& frame = frames_[static_cast<size_t>(block_of_[static_cast<size_t>(p)])];
    int c = static_cast<int>(frame.size());
    std::vector<Element> images;
    images.reserve(static_cast<size_t>(c));
    for (int t = 0; t < c; ++t) images.push_back(op(frame[static_cast<size_t>(t)]));
    for (int t = 0; t < c; ++t)
      for (int s = 0; s < c; ++s)
        h.block(p)(s, t) =
            scalar_inner(base_, frame[static_cast<size_t>(s)], images[static_cast<size_t>(t)]);
  }
  return h;
}

Element BasicConstruction::represent(const Element& a) const {
  return operator_matrix([&](const Element& x) { return a * x; });
}

Element BasicConstruction::theta(const Element& a1, const Element& a2) const {
  return operator_matrix(
      [&](const Element& x) { return a2 * base_.apply(a1.adjoint() * x); });
}

Element BasicConstruction::act(const Element& h, const Element& x) const {
  if (h.shape() != shape_) throw ShapeError("act: operator has wrong shape");
  const AlgebraShape& sub = base_.sub_shape();
  Element out = Element::zero(base_.amb_shape());
  for (int j = 0; j < sub.num_blocks(); ++j) {
    int p = pos_of_[static_cast<size_t>(j)];
    const auto& frame = frames_[static_cast<size_t>(j)];
    int c = static_cast<int>(frame.size());
    for (int k = 0; k < sub.block_dim(j); ++k) {
      // x = Σ_{j,k} (x ι(e_{k1})) ι(e_{1k}); the first factor lies in V_j.
      Element y = x * base_.embedding().embed(Element::unit(sub, j, k, 0));
      Vector alpha(c);
      for (int s = 0; s < c; ++s)
        alpha(s) = scalar_inner(base_, frame[static_cast<size_t>(s)], y);
      Vector beta = h.block(p) * alpha;
      Element z = Element::zero(base_.amb_shape());
      for (int s = 0; s < c; ++s) z = z + frame[static_cast<size_t>(s)] * beta(s);
      out = out + z * base_.embedding().embed(Element::unit(sub, j, 0, k));
    }
  }
  return out;
}

BasicConstruction basic_construction(const CondExp& ce, const Tolerance& tol) {
  return BasicConstruction(ce, tol);
}

CondExp next_expectation(const BasicConstruction& bc, const QuasiBasis& qb,
                         const IndexElement& ind) {
  const AlgebraShape& s1 = bc.shape();
  const AlgebraShape& amb = bc.base().amb_shape();

  Element ind_inv = Element::zero(amb);
  for (int b = 0; b < amb.num_blocks(); ++b)
    ind_inv.block(b) = ind.value.block(b).inverse();

  const CondExp& base = bc.base();
  const AlgebraShape& sub = base.sub_shape();
  int n1 = s1.ambient_dim();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n1) * n1,
                          static_cast<Eigen::Index>(n1) * n1);
  for (int p = 0; p < s1.num_blocks(); ++p) {
    int o = s1.block_offset(p), d = s1.block_dim(p);
    int j = bc.sub_block_of(p);
    const std::vector<Element>& frame = bc.frame(j);
    // For the unit h = e^{(p)}_{rc}, Σ_i (h u_i) u_i* = f_r · T_c with
    // T_c = Σ_{k,i} ⟨f_c, u_i ι(e_k1)⟩_E · ι(e_1k) u_i*, so all the inner
    // products are shared across the d² columns of this block.
    std::vector<Element> t(static_cast<size_t>(d), Element::zero(amb));
    for (int k = 0; k < sub.block_dim(j); ++k) {
      Element ek1 = base.embedding().embed(Element::unit(sub, j, k, 0));
      Element e1k = base.embedding().embed(Element::unit(sub, j, 0, k));
      for (const Element& u : qb.elements) {
        Element y = u * ek1;
        Element tail = e1k * u.adjoint();
        for (int c = 0; c < d; ++c) {
          Complex a = scalar_inner(base, frame[static_cast<size_t>(c)], y);
          if (std::abs(a) > 0) t[static_cast<size_t>(c)] =
              t[static_cast<size_t>(c)] + tail * a;
        }
      }
    }
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) {
        // π agrees with iota1 (spot-checked at construction); embedding is
        // far cheaper than rebuilding the operator matrix per column.
        Element img = bc.iota1().embed(
            ind_inv * (frame[static_cast<size_t>(r)] * t[static_cast<size_t>(c)]));
        m.col(static_cast<Eigen::Index>(o + c) * n1 + (o + r)) = img.vec();
      }
  }
  return CondExp(CEKind::custom, bc.iota1(), LinearMap(s1, s1, std::move(m)));
}

Tower jones_tower(const CondExp& ce, int levels, int dim_budget,
                  const Tolerance& tol) {
  Tower tower;
  TowerLevel baselvl;
  baselvl.expectation = ce;
  baselvl.index = index_element(ce, tol);
  tower.levels.push_back(std::move(baselvl));

  for (int k = 0; k < levels; ++k) {
    const TowerLevel& prev = tower.levels.back();
    BasicConstruction bc(prev.expectation, tol);
    if (bc.shape().linear_dim() > dim_budget) {
      tower.status = TowerStatus::truncated;
      return tower;
    }
    QuasiBasis qb = quasi_basis(prev.expectation, tol);
    CondExp e1 = next_expectation(bc, qb, prev.index);

    TowerLevel lvl;
    lvl.expectation = e1;
    lvl.index = index_element(e1, tol);
    lvl.jones_projection = bc.jones_projection();

    // The index stabilizes along the tower exactly when it sits in the
    // embedded center of the subalgebra; only then is the comparison made.
    const Embedding& emb = prev.expectation.embedding();
    bool central = false;
    if (emb.contains(prev.index.value, 1e-8)) {
      Element b = emb.unembed(prev.index.value);
      central = true;
      for (int j = 0; j < b.num_blocks(); ++j) {
        int nb = static_cast<int>(b.block(j).rows());
        Complex mean = b.block(j).trace() / static_cast<double>(nb);
        if ((b.block(j) - mean * Matrix::Identity(nb, nb)).norm() > 1e-8) central = false;
      }
    }
    if (central) {
      lvl.stabilization_checked = true;
      Element expected = bc.iota1().embed(prev.index.value);
      double res = (expected - lvl.index.value).frobenius_norm() /
                   std::max(1.0, expected.frobenius_norm());
      lvl.stabilization_ok = res <= tol.certificate;
    }
    tower.levels.push_back(std::move(lvl));
  }
  return tower;
}

namespace {

Matrix ce_trace_table(const CondExp& ce) {
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

Matrix Stinespring::rep(const Element& a) const {
  int d = static_cast<int>(units.size());
  Eigen::Index big = static_cast<Eigen::Index>(d) * d;
  // π̂(a): (g_s ⊗ g_t) ↦ (a g_s) ⊗ g_t, assembled in generator coordinates.
  Matrix gathered = Matrix::Zero(coords.rows(), big);
  std::map<std::pair<int, int>, int> lookup;
  for (int s = 0; s < d; ++s)
    lookup[{units[static_cast<size_t>(s)][1], units[static_cast<size_t>(s)][2]}] = s;
  for (int s = 0; s < d; ++s) {
    auto [blk, row, col] = units[static_cast<size_t>(s)];
    const Matrix& ab = a.block(blk);
    int o = amb.block_offset(blk), nb = amb.block_dim(blk);
    for (int r = o; r < o + nb; ++r) {
      Complex coeff = ab(r - o, row - o);
      if (coeff == Complex(0.0)) continue;
      int target = lookup.at({r, col});
      for (int t = 0; t < d; ++t)
        gathered.col(static_cast<Eigen::Index>(s) * d + t) +=
            coeff * coords.col(static_cast<Eigen::Index>(target) * d + t);
    }
  }
  return gathered * coords_pinv;
}

Stinespring stinespring(const CondExp& ce, const Tolerance& tol) {
  Stinespring st;
  st.amb = ce.amb_shape();
  const AlgebraShape& amb = st.amb;
  int n = amb.ambient_dim();
  int d = amb.linear_dim();
  Eigen::Index big = static_cast<Eigen::Index>(d) * d;

  for (int b = 0; b < amb.num_blocks(); ++b) {
    int o = amb.block_offset(b), nb = amb.block_dim(b);
    for (int r = o; r < o + nb; ++r)
      for (int c = o; c < o + nb; ++c) st.units.push_back({b, r, c});
  }
  Matrix trE = ce_trace_table(ce);
  const Matrix& em = ce.map().matrix();

  // ⟨g_s ⊗ g_t, g_u ⊗ g_v⟩ = tr E(g_t* E(g_s* g_u) g_v), O(1) per entry.
  auto gram = [&](Eigen::Index kk, Eigen::Index ll) -> Complex {
    int s = static_cast<int>(kk / d), t = static_cast<int>(kk % d);
    int u = static_cast<int>(ll / d), v = static_cast<int>(ll % d);
    const auto& gs = st.units[static_cast<size_t>(s)];
    const auto& gu = st.units[static_cast<size_t>(u)];
    const auto& gt = st.units[static_cast<size_t>(t)];
    const auto& gv = st.units[static_cast<size_t>(v)];
    if (gs[0] != gu[0] || gs[1] != gu[1] || gt[0] != gv[0]) return 0.0;
    // E(e_{bd})(p,r) with g_s = e_{ab}, g_u = e_{cd}, g_t = e_{pq}, g_v = e_{rs}.
    Complex x = em(static_cast<Eigen::Index>(gv[1]) * n + gt[1],
                   static_cast<Eigen::Index>(gu[2]) * n + gs[2]);
    return x * trE(gt[2], gv[2]);
  };

  // Lazy pivoted Cholesky: G ≈ R† R without materializing G.
  Eigen::VectorXd diag(big);
  for (Eigen::Index k = 0; k < big; ++k) diag(k) = gram(k, k).real();
  double d0 = std::max(diag.maxCoeff(), 1e-300);
  std::vector<Vector> rows;
  std::vector<Eigen::Index> pivots;
  while (true) {
    Eigen::Index piv = 0;
    double best = diag.maxCoeff(&piv);
    if (best <= tol.rank_rel * d0 || best <= 1e-14) break;
    Vector row(big);
    for (Eigen::Index l = 0; l < big; ++l) row(l) = gram(piv, l);
    for (size_t j = 0; j < rows.size(); ++j)
      row -= std::conj(rows[j](piv)) * rows[j];
    row /= std::sqrt(best);
    for (Eigen::Index l = 0; l < big; ++l) diag(l) -= std::norm(row(l));
    diag(piv) = 0.0;
    pivots.push_back(piv);
    rows.push_back(std::move(row));
    if (static_cast<Eigen::Index>(rows.size()) >= big) break;
  }
  st.module_dim = static_cast<int>(rows.size());
  st.coords = Matrix(st.module_dim, big);
  for (int j = 0; j < st.module_dim; ++j)
    st.coords.row(j) = rows[static_cast<size_t>(j)].transpose();
  Matrix rr = st.coords * st.coords.adjoint();
  st.coords_pinv = st.coords.adjoint() * rr.inverse();
  st.dense = st.module_dim > 0;

  // V x = 1 ⊗ x in generator coordinates.
  Matrix v = Matrix::Zero(st.module_dim, d);
  for (int t = 0; t < d; ++t)
    for (int s = 0; s < d; ++s) {
      const auto& us = st.units[static_cast<size_t>(s)];
      if (us[1] != us[2]) continue;  // diagonal units sum to the identity
      v.col(t) += st.coords.col(static_cast<Eigen::Index>(s) * d + t);
    }

  // Scalar Gram of A itself, for the ⟨,⟩_E-orthonormal coordinates.
  Matrix ga = Matrix::Zero(d, d);
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) {
      const auto& a = st.units[static_cast<size_t>(s)];
      const auto& b = st.units[static_cast<size_t>(t)];
      if (a[0] == b[0] && a[1] == b[1]) ga(s, t) = trE(a[2], b[2]);
    }
  Eigen::LLT<Matrix> llt(hermitian_part(ga));
  if (llt.info() != Eigen::Success)
    throw Error("stinespring: scalar Gram of A is not positive definite");
  Matrix l = llt.matrixL();
  // V_onb = V·L^{-†}: orthonormal coordinates on A are ξ ↦ L†ξ.
  st.isometry = l.triangularView<Eigen::Lower>().solve(v.adjoint()).adjoint();
  st.isometry_residual =
      (st.isometry.adjoint() * st.isometry - Matrix::Identity(d, d)).norm();

  // Covariance V* π̂(a) V = left multiplication by E(a), on sampled units.
  double worst = 0.0;
  int samples = std::min(d, 32);
  Rng rng(0x57135ULL);
  std::vector<int> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  for (int i = d - 1; i > 0; --i)
    std::swap(order[static_cast<size_t>(i)],
              order[static_cast<size_t>(rng.uniform_int(0, i))]);
  for (int si = 0; si < samples; ++si) {
    int uidx = order[static_cast<size_t>(si)];
    const auto& uu = st.units[static_cast<size_t>(uidx)];
    Element a = Element::unit(amb, uu[0], uu[1] - amb.block_offset(uu[0]),
                              uu[2] - amb.block_offset(uu[0]));
    Matrix lhs = st.isometry.adjoint() * st.rep(a) * st.isometry;
    // Left multiplication by E(a) in unit coordinates, then to the ONB.
    Matrix ya = ce.apply(a).ambient();
    Matrix lm = Matrix::Zero(d, d);
    std::map<std::pair<int, int>, int> lookup;
    for (int s = 0; s < d; ++s)
      lookup[{st.units[static_cast<size_t>(s)][1], st.units[static_cast<size_t>(s)][2]}] = s;
    for (int t = 0; t < d; ++t) {
      const auto& tu = st.units[static_cast<size_t>(t)];
      int o = amb.block_offset(tu[0]), nb = amb.block_dim(tu[0]);
      for (int p = o; p < o + nb; ++p) {
        Complex coeff = ya(p, tu[1]);
        if (coeff == Complex(0.0)) continue;
        lm(lookup.at({p, tu[2]}), t) += coeff;
      }
    }
    // To the orthonormal basis: M_onb = L† · M_units · L^{-†}.
    Matrix rhs = l.adjoint() * lm;
    rhs = l.triangularView<Eigen::Lower>().solve(rhs.adjoint()).adjoint();
    worst = std::max(worst, (lhs - rhs).norm());
  }
  st.covariance_residual = worst;
  if (st.isometry_residual > 1e-8 || st.covariance_residual > 1e-8)
    throw Error("stinespring: dilation identities failed numerically");
  return st;
}

}  // namespace findex
