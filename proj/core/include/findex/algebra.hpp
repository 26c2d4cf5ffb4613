#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "findex/tolerance.hpp"

namespace findex {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};

/// Block shape of a multi-matrix algebra, a direct sum of full matrix
/// algebras with the given block dimensions.
class AlgebraShape {
 public:
  AlgebraShape() = default;
  explicit AlgebraShape(std::vector<int> blocks);

  const std::vector<int>& blocks() const { return blocks_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int block_dim(int i) const { return blocks_[static_cast<size_t>(i)]; }
  int block_offset(int i) const { return offsets_[static_cast<size_t>(i)]; }
  int ambient_dim() const { return ambient_; }
  /// Linear dimension as a complex vector space (sum of squared block dims).
  int linear_dim() const { return linear_; }

  bool operator==(const AlgebraShape& o) const { return blocks_ == o.blocks_; }
  bool operator!=(const AlgebraShape& o) const { return !(*this == o); }

  std::string str() const;

 private:
  std::vector<int> blocks_;
  std::vector<int> offsets_;
  int ambient_ = 0;
  int linear_ = 0;
};

/// Block-diagonal element of a multi-matrix algebra, stored per block.
class Element {
 public:
  Element() = default;
  Element(AlgebraShape shape, std::vector<Matrix> data);

  static Element zero(const AlgebraShape& shape);
  static Element identity(const AlgebraShape& shape);
  /// Matrix unit e_{rc} of the given block.
  static Element unit(const AlgebraShape& shape, int block, int row, int col);

  const AlgebraShape& shape() const { return shape_; }
  const Matrix& block(int i) const { return data_[static_cast<size_t>(i)]; }
  Matrix& block(int i) { return data_[static_cast<size_t>(i)]; }
  int num_blocks() const { return shape_.num_blocks(); }

  Element operator+(const Element& o) const;
  Element operator-(const Element& o) const;
  Element operator*(const Element& o) const;  // blockwise matrix product
  Element operator*(Complex c) const;
  Element operator-() const { return *this * Complex(-1.0, 0.0); }
  Element adjoint() const;

  /// Dense ambient matrix with the blocks along the diagonal.
  Matrix ambient() const;
  /// Extract the block-diagonal part of an ambient matrix; if off_block_mass
  /// is given it receives the Frobenius norm of the discarded part.
  static Element from_ambient(const AlgebraShape& shape, const Matrix& m,
                              double* off_block_mass = nullptr);

  /// Column-major vectorization of the ambient matrix.
  Vector vec() const;
  static Element unvec(const AlgebraShape& shape, const Vector& v,
                       double* off_block_mass = nullptr);

  double frobenius_norm() const;
  Complex trace() const;
  bool is_self_adjoint(double tol) const;
  bool is_zero(double tol) const;

 private:
  AlgebraShape shape_;
  std::vector<Matrix> data_;
};

inline Element operator*(Complex c, const Element& e) { return e * c; }

/// Eigenvalue with the index of the block it lives in.
struct BlockEigenvalue {
  double value;
  int block;
};

Element multiply(const Element& a, const Element& b);

/// Ascending Hermitian eigenvalues of all blocks; ties broken by block index.
std::vector<BlockEigenvalue> spectrum(const Element& a, double tol = 1e-9);

/// Largest singular value over all blocks.
double operator_norm(const Element& a);

bool is_positive_element(const Element& a, double tol);

/// Block identities; they span the center.
std::vector<Element> center_basis(const AlgebraShape& shape);

/// Linear map between multi-matrix algebras, stored as a dense matrix acting
/// on ambient column-major vectorizations. Maps are built so that the
/// off-block-diagonal part of the domain is annihilated.
class LinearMap {
 public:
  LinearMap() = default;
  LinearMap(AlgebraShape domain, AlgebraShape codomain, Matrix matrix);

  /// The identity of the algebra, i.e. the block-diagonal compression of
  /// the ambient matrix algebra.
  static LinearMap identity(const AlgebraShape& shape);

  const AlgebraShape& domain() const { return domain_; }
  const AlgebraShape& codomain() const { return codomain_; }
  const Matrix& matrix() const { return matrix_; }

  Element apply(const Element& x, double* off_block_mass = nullptr) const;
  /// Same as apply, gathering matrix columns only for nonzero entries of x;
  /// much faster on sparse elements, identical cost on dense ones.
  Element apply_sparse(const Element& x) const;
  Matrix apply_ambient(const Matrix& x) const;

  LinearMap compose(const LinearMap& inner) const;  // this ∘ inner
  LinearMap scale_add(double a, const LinearMap& other, double b) const;
  /// Adjoint with respect to the Hilbert–Schmidt inner product.
  LinearMap hs_adjoint() const;

  /// Choi matrix sum_ij e_ij ⊗ Phi(e_ij) on the ambient matrix algebra.
  Matrix choi() const;

 private:
  AlgebraShape domain_;
  AlgebraShape codomain_;
  Matrix matrix_;
};

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace findex
