#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psgla {

class RngStream;

/// Thrown when two points (or a point and an operation) disagree on the space.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SpaceKind { FlatVector, SymmetricMatrix };

/// State space of a sampler: R^d, or d x d symmetric matrices under tr(AB).
struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::FlatVector;
  int d = 1;

  static SpaceDescriptor flat(int d);
  static SpaceDescriptor symmetric(int d);

  /// Number of free coordinates: d, or d(d+1)/2 for symmetric matrices.
  [[nodiscard]] std::size_t ambient_dim() const;
  [[nodiscard]] bool is_matrix() const { return kind == SpaceKind::SymmetricMatrix; }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;
};

/// Row-major dense square matrix. Used for eigenbases and factorizations,
/// never as a sampler state.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  static DenseMatrix identity(int n);

  [[nodiscard]] int size() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  [[nodiscard]] std::span<const double> data() const { return a_; }

  [[nodiscard]] DenseMatrix transpose() const;
  [[nodiscard]] double frobenius_norm() const;
  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);

 private:
  int n_ = 0;
  std::vector<double> a_;
};

/// An element of the state space.
///
/// Flat vectors store their d coordinates. Symmetric matrices store the upper
/// triangle once (row-major, i <= j), so M(i, j) == M(j, i) holds exactly.
/// All arithmetic and the inner product respect the trace geometry.
class SpacePoint {
 public:
  SpacePoint() = default;
  explicit SpacePoint(SpaceDescriptor desc);
  SpacePoint(SpaceDescriptor desc, std::vector<double> coords);

  static SpacePoint zeros(SpaceDescriptor desc) { return SpacePoint(desc); }
  static SpacePoint scalar(double v);
  static SpacePoint flat(std::vector<double> v);
  static SpacePoint identity(int d);
  static SpacePoint diagonal(std::span<const double> diag);
  static SpacePoint diagonal(std::initializer_list<double> diag);
  /// Builds a symmetric matrix from a full row-major d x d array. The upper
  /// triangle is used; the lower triangle must agree to within `tol`.
  static SpacePoint from_dense(int d, std::span<const double> rowmajor, double tol = 0.0);
  static SpacePoint from_dense(const DenseMatrix& m, double tol = 0.0);

  [[nodiscard]] const SpaceDescriptor& descriptor() const { return desc_; }
  [[nodiscard]] std::size_t size() const { return coords_.size(); }
  [[nodiscard]] std::span<const double> coords() const { return coords_; }
  [[nodiscard]] std::span<double> coords() { return coords_; }
  double operator[](std::size_t k) const { return coords_[k]; }
  double& operator[](std::size_t k) { return coords_[k]; }

  /// Symmetric entry access; requires a matrix point.
  [[nodiscard]] double at(int i, int j) const;
  void set(int i, int j, double v);

  [[nodiscard]] DenseMatrix to_dense() const;
  /// Scalar value of a 1-D flat point.
  [[nodiscard]] double value() const;
  [[nodiscard]] bool all_finite() const;

  SpacePoint& operator+=(const SpacePoint& o);
  SpacePoint& operator-=(const SpacePoint& o);
  SpacePoint& operator*=(double s);
  /// this += s * o
  SpacePoint& axpy(double s, const SpacePoint& o);

  friend SpacePoint operator+(SpacePoint a, const SpacePoint& b) { return a += b; }
  friend SpacePoint operator-(SpacePoint a, const SpacePoint& b) { return a -= b; }
  friend SpacePoint operator*(double s, SpacePoint a) { return a *= s; }
  friend SpacePoint operator*(SpacePoint a, double s) { return a *= s; }
  friend bool operator==(const SpacePoint&, const SpacePoint&) = default;

 private:
  void require_same(const SpacePoint& o) const;

  SpaceDescriptor desc_;
  std::vector<double> coords_;
};

/// Index of (i, j), i <= j, in packed upper-triangular storage of side d.
std::size_t packed_index(int d, int i, int j);

/// Euclidean dot product, or tr(ab) for symmetric matrices.
double inner(const SpacePoint& a, const SpacePoint& b);
double squared_norm(const SpacePoint& x);
double norm(const SpacePoint& x);
double distance(const SpacePoint& a, const SpacePoint& b);

/// Standard Gaussian with respect to the space's inner product. For matrices
/// the diagonal is N(0, 1) and each off-diagonal pair is N(0, 1/2), which is
/// the coordinate law of an isotropic Gaussian in the basis E_ii,
/// (E_ij + E_ji)/sqrt(2).
SpacePoint gaussian_standard(const SpaceDescriptor& desc, RngStream& rng);

/// Uniform direction on the unit sphere of the space.
SpacePoint uniform_direction(const SpaceDescriptor& desc, RngStream& rng);

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  DenseMatrix basis;                // columns are eigenvectors

  /// Q diag(values) Q^T.
  [[nodiscard]] SpacePoint reassemble(std::span<const double> values) const;
};

struct JacobiOptions {
  double relative_tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix point. Throws
/// NumericalError if the off-diagonal mass does not fall below
/// relative_tolerance * ||M||_F within max_sweeps.
EigenDecomposition sym_eigendecomposition(const SpacePoint& m, JacobiOptions opts = {});

/// Q f(Lambda) Q^T.
SpacePoint spectral_apply(const std::function<double(double)>& f, const SpacePoint& m);

/// Cholesky factor (lower) of a symmetric positive definite matrix point.
/// Returns false when a non-positive pivot is met.
bool cholesky(const SpacePoint& m, DenseMatrix& lower);

/// Inverse of a symmetric positive definite matrix point via Cholesky.
SpacePoint spd_inverse(const SpacePoint& m);

}  // namespace psgla
