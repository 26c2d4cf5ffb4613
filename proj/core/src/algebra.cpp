#include "findex/algebra.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace findex {

AlgebraShape::AlgebraShape(std::vector<int> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ShapeError("AlgebraShape: no blocks");
  offsets_.reserve(blocks_.size());
  for (int n : blocks_) {
    if (n < 1) throw ShapeError("AlgebraShape: block dimension < 1");
    offsets_.push_back(ambient_);
    ambient_ += n;
    linear_ += n * n;
  }
}

std::string AlgebraShape::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (i) os << "+";
    os << "M" << blocks_[i];
  }
  return os.str();
}

Element::Element(AlgebraShape shape, std::vector<Matrix> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<int>(data_.size()) != shape_.num_blocks())
    throw ShapeError("Element: block count mismatch");
  for (int i = 0; i < shape_.num_blocks(); ++i) {
    const Matrix& m = data_[static_cast<size_t>(i)];
    if (m.rows() != shape_.block_dim(i) || m.cols() != shape_.block_dim(i))
      throw ShapeError("Element: block size mismatch");
  }
}

Element Element::zero(const AlgebraShape& shape) {
  std::vector<Matrix> d;
  for (int n : shape.blocks()) d.push_back(Matrix::Zero(n, n));
  return Element(shape, std::move(d));
}

Element Element::identity(const AlgebraShape& shape) {
  std::vector<Matrix> d;
  for (int n : shape.blocks()) d.push_back(Matrix::Identity(n, n));
  return Element(shape, std::move(d));
}

Element Element::unit(const AlgebraShape& shape, int block, int row, int col) {
  Element e = zero(shape);
  e.block(block)(row, col) = 1.0;
  return e;
}

static void check_same_shape(const Element& a, const Element& b) {
  if (a.shape() != b.shape()) throw ShapeError("Element: shape mismatch");
}

Element Element::operator+(const Element& o) const {
  check_same_shape(*this, o);
  std::vector<Matrix> d;
  for (int i = 0; i < num_blocks(); ++i) d.push_back(block(i) + o.block(i));
  return Element(shape_, std::move(d));
}

Element Element::operator-(const Element& o) const {
  check_same_shape(*this, o);
  std::vector<Matrix> d;
  for (int i = 0; i < num_blocks(); ++i) d.push_back(block(i) - o.block(i));
  return Element(shape_, std::move(d));
}

Element Element::operator*(const Element& o) const {
  check_same_shape(*this, o);
  std::vector<Matrix> d;
  for (int i = 0; i < num_blocks(); ++i) d.push_back(block(i) * o.block(i));
  return Element(shape_, std::move(d));
}

Element Element::operator*(Complex c) const {
  std::vector<Matrix> d;
  for (int i = 0; i < num_blocks(); ++i) d.push_back(block(i) * c);
  return Element(shape_, std::move(d));
}

Element Element::adjoint() const {
  std::vector<Matrix> d;
  for (int i = 0; i < num_blocks(); ++i) d.push_back(block(i).adjoint());
  return Element(shape_, std::move(d));
}

Matrix Element::ambient() const {
  int n = shape_.ambient_dim();
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < num_blocks(); ++i) {
    int o = shape_.block_offset(i);
    int d = shape_.block_dim(i);
    m.block(o, o, d, d) = block(i);
  }
  return m;
}

Element Element::from_ambient(const AlgebraShape& shape, const Matrix& m,
                              double* off_block_mass) {
  if (m.rows() != shape.ambient_dim() || m.cols() != shape.ambient_dim())
    throw ShapeError("from_ambient: size mismatch");
  std::vector<Matrix> d;
  double diag_sq = 0.0;
  for (int i = 0; i < shape.num_blocks(); ++i) {
    int o = shape.block_offset(i);
    int n = shape.block_dim(i);
    d.push_back(m.block(o, o, n, n));
    diag_sq += d.back().squaredNorm();
  }
  if (off_block_mass) {
    double total_sq = m.squaredNorm();
    *off_block_mass = std::sqrt(std::max(0.0, total_sq - diag_sq));
  }
  return Element(shape, std::move(d));
}

Vector Element::vec() const {
  Matrix m = ambient();
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Element Element::unvec(const AlgebraShape& shape, const Vector& v,
                       double* off_block_mass) {
  int n = shape.ambient_dim();
  if (v.size() != static_cast<Eigen::Index>(n) * n)
    throw ShapeError("unvec: size mismatch");
  Matrix m = Eigen::Map<const Matrix>(v.data(), n, n);
  return from_ambient(shape, m, off_block_mass);
}

double Element::frobenius_norm() const {
  double s = 0.0;
  for (int i = 0; i < num_blocks(); ++i) s += block(i).squaredNorm();
  return std::sqrt(s);
}

Complex Element::trace() const {
  Complex t = 0.0;
  for (int i = 0; i < num_blocks(); ++i) t += block(i).trace();
  return t;
}

bool Element::is_self_adjoint(double tol) const {
  double scale = std::max(1.0, frobenius_norm());
  for (int i = 0; i < num_blocks(); ++i)
    if ((block(i) - block(i).adjoint()).norm() > tol * scale) return false;
  return true;
}

bool Element::is_zero(double tol) const { return frobenius_norm() <= tol; }

Element multiply(const Element& a, const Element& b) { return a * b; }

std::vector<BlockEigenvalue> spectrum(const Element& a, double tol) {
  if (!a.is_self_adjoint(tol))
    throw Error("spectrum: element is not self-adjoint within tolerance");
  std::vector<BlockEigenvalue> out;
  for (int i = 0; i < a.num_blocks(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a.block(i)),
                                             Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
      out.push_back({es.eigenvalues()(k), i});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.value != y.value) return x.value < y.value;
    return x.block < y.block;
  });
  return out;
}

double operator_norm(const Element& a) {
  double best = 0.0;
  for (int i = 0; i < a.num_blocks(); ++i) {
    if (a.block(i).size() == 0) continue;
    Eigen::JacobiSVD<Matrix> svd(a.block(i));
    if (svd.singularValues().size() > 0)
      best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

bool is_positive_element(const Element& a, double tol) {
  if (!a.is_self_adjoint(tol)) return false;
  auto ev = spectrum(a, tol);
  return ev.empty() || ev.front().value >= -tol;
}

std::vector<Element> center_basis(const AlgebraShape& shape) {
  std::vector<Element> out;
  for (int i = 0; i < shape.num_blocks(); ++i) {
    Element z = Element::zero(shape);
    z.block(i).setIdentity();
    out.push_back(std::move(z));
  }
  return out;
}

LinearMap::LinearMap(AlgebraShape domain, AlgebraShape codomain, Matrix matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)),
      matrix_(std::move(matrix)) {
  Eigen::Index dn = domain_.ambient_dim(), cn = codomain_.ambient_dim();
  if (matrix_.rows() != cn * cn || matrix_.cols() != dn * dn)
    throw ShapeError("LinearMap: matrix size mismatch");
}

LinearMap LinearMap::identity(const AlgebraShape& shape) {
  int n = shape.ambient_dim();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n) * n,
                          static_cast<Eigen::Index>(n) * n);
  // Pinching to the block diagonal: fixes e_rc when r,c sit in one block.
  for (int b = 0; b < shape.num_blocks(); ++b) {
    int o = shape.block_offset(b), d = shape.block_dim(b);
    for (int c = o; c < o + d; ++c)
      for (int r = o; r < o + d; ++r) {
        Eigen::Index idx = static_cast<Eigen::Index>(c) * n + r;
        m(idx, idx) = 1.0;
      }
  }
  return LinearMap(shape, shape, std::move(m));
}

Element LinearMap::apply(const Element& x, double* off_block_mass) const {
  if (x.shape() != domain_) throw ShapeError("LinearMap::apply: shape mismatch");
  Vector y = matrix_ * x.vec();
  return Element::unvec(codomain_, y, off_block_mass);
}

Element LinearMap::apply_sparse(const Element& x) const {
  if (x.shape() != domain_) throw ShapeError("LinearMap::apply_sparse: shape mismatch");
  int n = domain_.ambient_dim();
  Vector y = Vector::Zero(matrix_.rows());
  for (int b = 0; b < domain_.num_blocks(); ++b) {
    int o = domain_.block_offset(b), d = domain_.block_dim(b);
    const Matrix& blk = x.block(b);
    if (blk.isZero(0.0)) continue;
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) {
        Complex v = blk(r, c);
        if (v == Complex(0.0)) continue;
        y += v * matrix_.col(static_cast<Eigen::Index>(o + c) * n + (o + r));
      }
  }
  return Element::unvec(codomain_, y);
}

Matrix LinearMap::apply_ambient(const Matrix& x) const {
  int n = domain_.ambient_dim();
  if (x.rows() != n || x.cols() != n)
    throw ShapeError("LinearMap::apply_ambient: size mismatch");
  Vector v = Eigen::Map<const Vector>(x.data(), x.size());
  Vector y = matrix_ * v;
  int m = codomain_.ambient_dim();
  return Eigen::Map<const Matrix>(y.data(), m, m);
}

LinearMap LinearMap::compose(const LinearMap& inner) const {
  if (inner.codomain_ != domain_) throw ShapeError("compose: shape mismatch");
  return LinearMap(inner.domain_, codomain_, matrix_ * inner.matrix_);
}

LinearMap LinearMap::scale_add(double a, const LinearMap& other, double b) const {
  if (other.domain_ != domain_ || other.codomain_ != codomain_)
    throw ShapeError("scale_add: shape mismatch");
  return LinearMap(domain_, codomain_, a * matrix_ + b * other.matrix_);
}

LinearMap LinearMap::hs_adjoint() const {
  return LinearMap(codomain_, domain_, matrix_.adjoint());
}

Matrix LinearMap::choi() const {
  if (domain_ != codomain_) throw ShapeError("choi: map is not an endomorphism");
  int n = domain_.ambient_dim();
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(n) * n,
                          static_cast<Eigen::Index>(n) * n);
  Matrix unit = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      unit(i, j) = 1.0;
      Matrix img = apply_ambient(unit);
      unit(i, j) = 0.0;
      c.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n,
              n, n) = img;
    }
  return c;
}

}  // namespace findex
