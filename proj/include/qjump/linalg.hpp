#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qjump/errors.hpp"

namespace qjump {

using Complex = std::complex<double>;

// Dense complex square matrix, row-major. Sized for desk-scale state
// spaces (a handful of levels), not for numerical heavy lifting.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<Complex> a;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim) : n(dim), a(dim * dim) {}

  static SquareMatrix identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  Complex& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return a[i * n + j];
  }
};

inline SquareMatrix multiply(const SquareMatrix& x, const SquareMatrix& y) {
  if (x.n != y.n) throw DimensionMismatch("matrix product of unequal sizes");
  SquareMatrix r(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k) {
      const Complex xik = x(i, k);
      if (xik == Complex{}) continue;
      for (std::size_t j = 0; j < x.n; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

inline Complex trace(const SquareMatrix& m) {
  Complex t{};
  for (std::size_t i = 0; i < m.n; ++i) t += m(i, i);
  return t;
}

// max_ij |a_ij - conj(a_ji)|
inline double hermitian_defect(const SquareMatrix& m) {
  double d = 0.0;
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
  return d;
}

// |v><v|
inline SquareMatrix outer(const std::vector<Complex>& v) {
  SquareMatrix m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

namespace detail {

// Cyclic Jacobi sweeps on a real symmetric matrix; returns the diagonal.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> m,
                                              std::size_t n) {
  auto at = [&m, n](std::size_t i, std::size_t j) -> double& {
    return m[i * n + j];
  };
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(at(i, j)));
  if (scale == 0.0) return std::vector<double>(n, 0.0);
  const double tol = 1e-15 * scale;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(at(p, q)));
    if (off <= tol) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) <= tol) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = at(k, p), mkq = at(k, q);
          at(k, p) = c * mkp - s * mkq;
          at(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = at(p, k), mqk = at(q, k);
          at(p, k) = c * mpk - s * mqk;
          at(q, k) = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace detail

// Eigenvalues of a Hermitian matrix H = A + iB, sorted ascending. Computed
// on the real symmetric embedding [[A, -B], [B, A]], whose spectrum is that
// of H with every eigenvalue doubled; one copy of each pair is returned.
inline std::vector<double> hermitian_eigenvalues(const SquareMatrix& h) {
  const std::size_t n = h.n;
  std::vector<double> m(4 * n * n, 0.0);
  const std::size_t big = 2 * n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = h(i, j).real(), im = h(i, j).imag();
      m[i * big + j] = re;
      m[(i + n) * big + (j + n)] = re;
      m[i * big + (j + n)] = -im;
      m[(i + n) * big + j] = im;
    }
  const std::vector<double> all = detail::jacobi_eigenvalues(std::move(m), big);
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = 0.5 * (all[2 * i] + all[2 * i + 1]);
  return eig;
}

}  // namespace qjump
