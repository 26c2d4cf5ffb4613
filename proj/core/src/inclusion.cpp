#include "findex/inclusion.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace findex {

Embedding::Embedding(AlgebraShape sub, AlgebraShape amb, Eigen::MatrixXi inclusion,
                     std::vector<Matrix> unitaries)
    : sub_(std::move(sub)), amb_(std::move(amb)), inclusion_(std::move(inclusion)),
      unitaries_(std::move(unitaries)) {
  if (inclusion_.rows() != amb_.num_blocks() || inclusion_.cols() != sub_.num_blocks())
    throw ShapeError("Embedding: inclusion matrix size mismatch");
  if (unitaries_.empty()) {
    for (int i = 0; i < amb_.num_blocks(); ++i)
      unitaries_.push_back(Matrix::Identity(amb_.block_dim(i), amb_.block_dim(i)));
  }
  if (static_cast<int>(unitaries_.size()) != amb_.num_blocks())
    throw ShapeError("Embedding: one unitary per ambient block required");
  for (int i = 0; i < amb_.num_blocks(); ++i) {
    int n = amb_.block_dim(i);
    if (unitaries_[static_cast<size_t>(i)].rows() != n ||
        unitaries_[static_cast<size_t>(i)].cols() != n)
      throw ShapeError("Embedding: unitary size mismatch");
    int sum = 0;
    for (int j = 0; j < sub_.num_blocks(); ++j) {
      if (inclusion_(i, j) < 0) throw ShapeError("Embedding: negative multiplicity");
      sum += inclusion_(i, j) * sub_.block_dim(j);
    }
    if (sum != n)
      throw ShapeError("Embedding: unitality violated in ambient block " +
                       std::to_string(i));
  }
  for (int j = 0; j < sub_.num_blocks(); ++j) {
    bool hit = false;
    for (int i = 0; i < amb_.num_blocks(); ++i) hit = hit || inclusion_(i, j) > 0;
    if (!hit)
      throw ShapeError("Embedding: sub block " + std::to_string(j) +
                       " has zero multiplicity everywhere");
  }
}

Embedding Embedding::identity(const AlgebraShape& shape) {
  Eigen::MatrixXi inc = Eigen::MatrixXi::Identity(shape.num_blocks(), shape.num_blocks());
  return Embedding(shape, shape, std::move(inc));
}

bool Embedding::is_identity() const {
  if (sub_ != amb_) return false;
  if (inclusion_ != Eigen::MatrixXi::Identity(sub_.num_blocks(), sub_.num_blocks()))
    return false;
  for (const Matrix& u : unitaries_)
    if (!u.isIdentity(1e-12)) return false;
  return true;
}

Element Embedding::embed(const Element& b) const {
  if (b.shape() != sub_) throw ShapeError("embed: element has wrong shape");
  Element out = Element::zero(amb_);
  for (int i = 0; i < amb_.num_blocks(); ++i) {
    int n = amb_.block_dim(i);
    Matrix canon = Matrix::Zero(n, n);
    int pos = 0;
    for (int j = 0; j < sub_.num_blocks(); ++j) {
      int m = sub_.block_dim(j);
      for (int c = 0; c < inclusion_(i, j); ++c) {
        canon.block(pos, pos, m, m) = b.block(j);
        pos += m;
      }
    }
    const Matrix& u = unitaries_[static_cast<size_t>(i)];
    out.block(i) = u * canon * u.adjoint();
  }
  return out;
}

Element Embedding::unembed(const Element& a) const {
  if (a.shape() != amb_) throw ShapeError("unembed: element has wrong shape");
  Element b = Element::zero(sub_);
  std::vector<int> copies(static_cast<size_t>(sub_.num_blocks()), 0);
  for (int i = 0; i < amb_.num_blocks(); ++i) {
    const Matrix& u = unitaries_[static_cast<size_t>(i)];
    Matrix canon = u.adjoint() * a.block(i) * u;
    int pos = 0;
    for (int j = 0; j < sub_.num_blocks(); ++j) {
      int m = sub_.block_dim(j);
      for (int c = 0; c < inclusion_(i, j); ++c) {
        b.block(j) += canon.block(pos, pos, m, m);
        copies[static_cast<size_t>(j)] += 1;
        pos += m;
      }
    }
  }
  for (int j = 0; j < sub_.num_blocks(); ++j)
    b.block(j) /= static_cast<double>(copies[static_cast<size_t>(j)]);
  return b;
}

double Embedding::image_residual(const Element& a) const {
  Element back = embed(unembed(a));
  return (a - back).frobenius_norm();
}

bool Embedding::contains(const Element& a, double tol) const {
  return image_residual(a) <= tol * std::max(1.0, a.frobenius_norm());
}

std::vector<Element> Embedding::sub_unit_images() const {
  std::vector<Element> out;
  for (int j = 0; j < sub_.num_blocks(); ++j) {
    int m = sub_.block_dim(j);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r)
        out.push_back(embed(Element::unit(sub_, j, r, c)));
  }
  return out;
}

Matrix Embedding::left_mult_superop(const Element& b) const {
  // vec(ι(b)·x) = (1 ⊗ ι(b)) vec(x)
  Matrix amb = embed(b).ambient();
  int n = amb_.ambient_dim();
  return Eigen::kroneckerProduct(Matrix::Identity(n, n), amb);
}

Matrix Embedding::right_mult_superop(const Element& b) const {
  // vec(x·ι(b)) = (ι(b)ᵀ ⊗ 1) vec(x)
  Matrix amb = embed(b).ambient();
  int n = amb_.ambient_dim();
  return Eigen::kroneckerProduct(amb.transpose().eval(), Matrix::Identity(n, n));
}

void Embedding::validate(double tol) const {
  // *-homomorphism on the canonical units: ι(x)ι(y) = ι(xy), ι(x)* = ι(x*).
  for (int i = 0; i < amb_.num_blocks(); ++i) {
    const Matrix& u = unitaries_[static_cast<size_t>(i)];
    int n = amb_.block_dim(i);
    if ((u * u.adjoint() - Matrix::Identity(n, n)).norm() > tol * n)
      throw Error("Embedding: block matrix " + std::to_string(i) + " is not unitary");
  }
  Element one = embed(Element::identity(sub_));
  if ((one - Element::identity(amb_)).frobenius_norm() > tol * amb_.ambient_dim())
    throw Error("Embedding: not unital");
  for (int j = 0; j < sub_.num_blocks(); ++j) {
    int m = sub_.block_dim(j);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        Element x = Element::unit(sub_, j, r, c);
        Element ix = embed(x);
        if ((embed(x.adjoint()) - ix.adjoint()).frobenius_norm() > tol)
          throw Error("Embedding: adjoint not preserved");
        Element y = Element::unit(sub_, j, c, r);
        if ((embed(x * y) - ix * embed(y)).frobenius_norm() > tol)
          throw Error("Embedding: multiplicativity violated");
      }
  }
}

SubspaceBasis relative_commutant(const Embedding& e, const Tolerance& tol) {
  const AlgebraShape& amb = e.amb_shape();
  int n = amb.ambient_dim();
  int d = amb.linear_dim();

  // Selection of block-diagonal coordinates inside the ambient vec space.
  std::vector<Eigen::Index> support;
  support.reserve(static_cast<size_t>(d));
  for (int b = 0; b < amb.num_blocks(); ++b) {
    int o = amb.block_offset(b), nb = amb.block_dim(b);
    for (int c = o; c < o + nb; ++c)
      for (int r = o; r < o + nb; ++r)
        support.push_back(static_cast<Eigen::Index>(c) * n + r);
  }

  Matrix h = Matrix::Zero(d, d);
  for (const Element& g : e.sub_unit_images()) {
    Matrix gm = g.ambient();
    // K columns: vec of [x, g] for each block-diagonal unit x.
    Matrix k(static_cast<Eigen::Index>(n) * n, d);
    int col = 0;
    for (int b = 0; b < amb.num_blocks(); ++b) {
      int o = amb.block_offset(b), nb = amb.block_dim(b);
      for (int c = o; c < o + nb; ++c)
        for (int r = o; r < o + nb; ++r) {
          Matrix x = Matrix::Zero(n, n);
          x(r, c) = 1.0;
          Matrix comm = x * gm - gm * x;
          k.col(col++) = Eigen::Map<const Vector>(comm.data(), comm.size());
        }
    }
    h += k.adjoint() * k;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  double smax = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  double cutoff = tol.rank_rel * std::max(smax, 1e-300);

  SubspaceBasis out;
  out.ambient = amb;
  for (Eigen::Index idx = 0; idx < es.eigenvalues().size(); ++idx) {
    double sv = std::sqrt(std::max(0.0, es.eigenvalues()(idx)));
    if (smax > 0.0 && sv > cutoff) continue;
    Vector full = Vector::Zero(static_cast<Eigen::Index>(n) * n);
    for (int t = 0; t < d; ++t) full(support[static_cast<size_t>(t)]) = es.eigenvectors()(t, idx);
    out.vectors.push_back(Element::unvec(amb, full));
  }
  out.dim = static_cast<int>(out.vectors.size());
  return out;
}

static int projection_rank(const Matrix& p, double tol) {
  double t = p.trace().real();
  int r = static_cast<int>(std::lround(t));
  if (std::abs(t - r) > 1e-6) throw Error("projection_rank: trace is not an integer");
  (void)tol;
  return r;
}

bool is_minimal_projection_in_image(const Embedding& e, const Element& p, double tol) {
  if (!p.is_self_adjoint(tol)) return false;
  if ((p * p - p).frobenius_norm() > tol * std::max(1.0, p.frobenius_norm())) return false;
  if (!e.contains(p, tol)) return false;
  Element b = e.unembed(p);
  int total = 0;
  for (int j = 0; j < b.num_blocks(); ++j) total += projection_rank(b.block(j), tol);
  return total == 1;
}

OrthogonalFamily max_orthogonal_family(const Embedding& e, const Element& p,
                                       const Tolerance& tol) {
  if (!is_minimal_projection_in_image(e, p, 1e-8))
    throw Error("max_orthogonal_family: p is not a minimal projection of the image");
  OrthogonalFamily fam;
  for (int i = 0; i < p.num_blocks(); ++i) {
    int r = projection_rank(p.block(i), tol.abs);
    fam.count += r;
    fam.corner_dim += r * r;
  }
  return fam;
}

}  // namespace findex
