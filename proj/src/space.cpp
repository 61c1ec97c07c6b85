#include "psgla/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "psgla/rng.hpp"

namespace psgla {

SpaceDescriptor SpaceDescriptor::flat(int d) {
  if (d < 1) throw DimensionError("dimension must be positive");
  return {SpaceKind::FlatVector, d};
}

SpaceDescriptor SpaceDescriptor::symmetric(int d) {
  if (d < 1) throw DimensionError("matrix side must be positive");
  return {SpaceKind::SymmetricMatrix, d};
}

std::size_t SpaceDescriptor::ambient_dim() const {
  const auto n = static_cast<std::size_t>(d);
  return kind == SpaceKind::FlatVector ? n : n * (n + 1) / 2;
}

std::string SpaceDescriptor::to_string() const {
  return (kind == SpaceKind::FlatVector ? "flat(" : "sym(") + std::to_string(d) + ")";
}

// --- DenseMatrix -----------------------------------------------------------

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("matrix size mismatch");
  const int n = a.size();
  DenseMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("matrix size mismatch");
  DenseMatrix c(a.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

// --- SpacePoint ------------------------------------------------------------

std::size_t packed_index(int d, int i, int j) {
  if (i > j) std::swap(i, j);
  const auto ii = static_cast<std::size_t>(i);
  return ii * static_cast<std::size_t>(d) - ii * (ii - 1) / 2 - ii + static_cast<std::size_t>(j);
}

SpacePoint::SpacePoint(SpaceDescriptor desc) : desc_(desc), coords_(desc.ambient_dim(), 0.0) {}

SpacePoint::SpacePoint(SpaceDescriptor desc, std::vector<double> coords)
    : desc_(desc), coords_(std::move(coords)) {
  if (coords_.size() != desc_.ambient_dim())
    throw DimensionError("coordinate count " + std::to_string(coords_.size()) +
                         " does not match " + desc_.to_string());
}

SpacePoint SpacePoint::scalar(double v) { return {SpaceDescriptor::flat(1), {v}}; }

SpacePoint SpacePoint::flat(std::vector<double> v) {
  const auto d = static_cast<int>(v.size());
  return {SpaceDescriptor::flat(d), std::move(v)};
}

SpacePoint SpacePoint::identity(int d) {
  SpacePoint p(SpaceDescriptor::symmetric(d));
  for (int i = 0; i < d; ++i) p.set(i, i, 1.0);
  return p;
}

SpacePoint SpacePoint::diagonal(std::span<const double> diag) {
  const auto d = static_cast<int>(diag.size());
  SpacePoint p(SpaceDescriptor::symmetric(d));
  for (int i = 0; i < d; ++i) p.set(i, i, diag[static_cast<std::size_t>(i)]);
  return p;
}

SpacePoint SpacePoint::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

SpacePoint SpacePoint::from_dense(int d, std::span<const double> rowmajor, double tol) {
  if (rowmajor.size() != static_cast<std::size_t>(d) * d)
    throw DimensionError("dense matrix has wrong number of entries");
  SpacePoint p(SpaceDescriptor::symmetric(d));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double upper = rowmajor[static_cast<std::size_t>(i) * d + j];
      const double lower = rowmajor[static_cast<std::size_t>(j) * d + i];
      if (std::abs(upper - lower) > tol)
        throw DimensionError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      p.set(i, j, tol > 0.0 ? 0.5 * (upper + lower) : upper);
    }
  return p;
}

SpacePoint SpacePoint::from_dense(const DenseMatrix& m, double tol) {
  return from_dense(m.size(), m.data(), tol);
}

double SpacePoint::at(int i, int j) const {
  if (!desc_.is_matrix()) throw DimensionError("entry access requires a matrix point");
  return coords_[packed_index(desc_.d, i, j)];
}

void SpacePoint::set(int i, int j, double v) {
  if (!desc_.is_matrix()) throw DimensionError("entry access requires a matrix point");
  coords_[packed_index(desc_.d, i, j)] = v;
}

DenseMatrix SpacePoint::to_dense() const {
  if (!desc_.is_matrix()) throw DimensionError("to_dense requires a matrix point");
  const int d = desc_.d;
  DenseMatrix m(d);
  std::size_t k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) {
      m(i, j) = coords_[k];
      m(j, i) = coords_[k];
    }
  return m;
}

double SpacePoint::value() const {
  if (desc_.is_matrix() || desc_.d != 1) throw DimensionError("value() requires a 1-D point");
  return coords_[0];
}

bool SpacePoint::all_finite() const {
  return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
}

void SpacePoint::require_same(const SpacePoint& o) const {
  if (!(desc_ == o.desc_))
    throw DimensionError("descriptor mismatch: " + desc_.to_string() + " vs " +
                         o.desc_.to_string());
}

SpacePoint& SpacePoint::operator+=(const SpacePoint& o) {
  require_same(o);
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] += o.coords_[k];
  return *this;
}

SpacePoint& SpacePoint::operator-=(const SpacePoint& o) {
  require_same(o);
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] -= o.coords_[k];
  return *this;
}

SpacePoint& SpacePoint::operator*=(double s) {
  for (double& v : coords_) v *= s;
  return *this;
}

SpacePoint& SpacePoint::axpy(double s, const SpacePoint& o) {
  require_same(o);
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] += s * o.coords_[k];
  return *this;
}

double inner(const SpacePoint& a, const SpacePoint& b) {
  if (!(a.descriptor() == b.descriptor()))
    throw DimensionError("inner: descriptor mismatch: " + a.descriptor().to_string() + " vs " +
                         b.descriptor().to_string());
  const auto ca = a.coords();
  const auto cb = b.coords();
  if (!a.descriptor().is_matrix()) return std::inner_product(ca.begin(), ca.end(), cb.begin(), 0.0);
  const int d = a.descriptor().d;
  double diag = 0.0, off = 0.0;
  std::size_t k = 0;
  for (int i = 0; i < d; ++i) {
    diag += ca[k] * cb[k];
    ++k;
    for (int j = i + 1; j < d; ++j, ++k) off += ca[k] * cb[k];
  }
  return diag + 2.0 * off;
}

double squared_norm(const SpacePoint& x) { return inner(x, x); }
double norm(const SpacePoint& x) { return std::sqrt(inner(x, x)); }
double distance(const SpacePoint& a, const SpacePoint& b) { return norm(a - b); }

SpacePoint gaussian_standard(const SpaceDescriptor& desc, RngStream& rng) {
  SpacePoint w(desc);
  auto c = w.coords();
  if (!desc.is_matrix()) {
    for (double& v : c) v = rng.normal();
    return w;
  }
  const double off_scale = std::sqrt(0.5);
  std::size_t k = 0;
  for (int i = 0; i < desc.d; ++i)
    for (int j = i; j < desc.d; ++j, ++k) c[k] = (i == j ? 1.0 : off_scale) * rng.normal();
  return w;
}

SpacePoint uniform_direction(const SpaceDescriptor& desc, RngStream& rng) {
  for (;;) {
    SpacePoint u = gaussian_standard(desc, rng);
    const double n = norm(u);
    if (n > 1e-300) return u *= 1.0 / n;
  }
}

// --- Eigendecomposition ----------------------------------------------------

SpacePoint EigenDecomposition::reassemble(std::span<const double> values) const {
  const int d = basis.size();
  if (values.size() != static_cast<std::size_t>(d)) throw DimensionError("eigenvalue count");
  SpacePoint out(SpaceDescriptor::symmetric(d));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += basis(i, k) * values[static_cast<std::size_t>(k)] * basis(j, k);
      out.set(i, j, s);
    }
  return out;
}

EigenDecomposition sym_eigendecomposition(const SpacePoint& m, JacobiOptions opts) {
  if (!m.descriptor().is_matrix()) throw DimensionError("eigendecomposition requires a matrix");
  if (!m.all_finite()) throw NumericalError("eigendecomposition of a non-finite matrix");
  const int n = m.descriptor().d;
  DenseMatrix a = m.to_dense();
  DenseMatrix v = DenseMatrix::identity(n);
  const double scale = norm(m);
  const double target = opts.relative_tolerance * scale;

  auto off_norm = [&] {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  bool converged = scale == 0.0 || off_norm() <= target;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation annihilating a(p, q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0 for stability.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_norm() <= target;
  }
  if (!converged)
    throw NumericalError("Jacobi eigendecomposition did not converge in " +
                         std::to_string(opts.max_sweeps) + " sweeps");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  out.basis = DenseMatrix(n);
  for (int c = 0; c < n; ++c) {
    const int src = order[static_cast<std::size_t>(c)];
    out.eigenvalues[static_cast<std::size_t>(c)] = a(src, src);
    for (int r = 0; r < n; ++r) out.basis(r, c) = v(r, src);
  }
  return out;
}

SpacePoint spectral_apply(const std::function<double(double)>& f, const SpacePoint& m) {
  const EigenDecomposition eig = sym_eigendecomposition(m);
  std::vector<double> mapped(eig.eigenvalues.size());
  std::transform(eig.eigenvalues.begin(), eig.eigenvalues.end(), mapped.begin(), f);
  return eig.reassemble(mapped);
}

// --- Cholesky --------------------------------------------------------------

bool cholesky(const SpacePoint& m, DenseMatrix& lower) {
  if (!m.descriptor().is_matrix()) throw DimensionError("cholesky requires a matrix");
  const int n = m.descriptor().d;
  lower = DenseMatrix(n);
  for (int j = 0; j < n; ++j) {
    double diag = m.at(j, j);
    for (int k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    lower(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m.at(i, j);
      for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return true;
}

SpacePoint spd_inverse(const SpacePoint& m) {
  DenseMatrix l;
  if (!cholesky(m, l)) throw NumericalError("matrix is not positive definite");
  const int n = l.size();
  // Solve L L^T X = I column by column.
  DenseMatrix x(n);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= l(i, k) * y[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(i)] = s / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return SpacePoint::from_dense(x, 1e-8 * std::max(1.0, x.frobenius_norm()));
}

}  // namespace psgla
