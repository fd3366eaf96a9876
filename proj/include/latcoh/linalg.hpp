#pragma once
#include <algorithm>
#include <cstddef>

#include "numeric.hpp"

namespace latcoh {

struct IMatrix {
  size_t rows = 0, cols = 0;
  std::vector<Int> a;  // row-major

  IMatrix() = default;
  IMatrix(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
  Int& at(size_t r, size_t c) { return a[r * cols + c]; }
  const Int& at(size_t r, size_t c) const { return a[r * cols + c]; }
};

// Exact determinant of a square integer matrix (rational elimination with
// partial pivoting; the result of an integer matrix is an integer).
inline Int det_exact(const IMatrix& m) {
  if (m.rows != m.cols) throw input_error("det: matrix not square");
  size_t n = m.rows;
  std::vector<Rat> w(n * n);
  for (size_t i = 0; i < n * n; ++i) w[i] = Rat(m.a[i]);
  auto at = [&](size_t r, size_t c) -> Rat& { return w[r * n + c]; };
  Rat det = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && at(p, c) == 0) ++p;
    if (p == n) return Int(0);
    if (p != c) {
      for (size_t j = c; j < n; ++j) std::swap(at(p, j), at(c, j));
      det = -det;
    }
    det *= at(c, c);
    for (size_t r = c + 1; r < n; ++r) {
      if (at(r, c) == 0) continue;
      Rat f = at(r, c) / at(c, c);
      for (size_t j = c; j < n; ++j) at(r, j) -= f * at(c, j);
    }
  }
  if (!is_integer(det)) throw property_error("det: non-integral result");
  return numer(det);
}

// Leading principal minors det(M[0..k-1, 0..k-1]) for k = 1..n.
inline std::vector<Int> leading_principal_minors(const IMatrix& m) {
  if (m.rows != m.cols) throw input_error("minors: matrix not square");
  std::vector<Int> out;
  for (size_t k = 1; k <= m.rows; ++k) {
    IMatrix sub(k, k);
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j) sub.at(i, j) = m.at(i, j);
    out.push_back(det_exact(sub));
  }
  return out;
}

// Solves M x = rhs exactly (square, nonsingular).
inline std::vector<Rat> solve_exact(const IMatrix& m,
                                    const std::vector<Rat>& rhs) {
  if (m.rows != m.cols || rhs.size() != m.rows)
    throw input_error("solve: dimension mismatch");
  size_t n = m.rows;
  std::vector<Rat> w(n * (n + 1));
  auto at = [&](size_t r, size_t c) -> Rat& { return w[r * (n + 1) + c]; };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) at(i, j) = Rat(m.at(i, j));
    at(i, n) = rhs[i];
  }
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    while (p < n && at(p, c) == 0) ++p;
    if (p == n) throw input_error("solve: singular matrix");
    if (p != c)
      for (size_t j = c; j <= n; ++j) std::swap(at(p, j), at(c, j));
    Rat piv = at(c, c);
    for (size_t j = c; j <= n; ++j) at(c, j) /= piv;
    for (size_t r = 0; r < n; ++r) {
      if (r == c || at(r, c) == 0) continue;
      Rat f = at(r, c);
      for (size_t j = c; j <= n; ++j) at(r, j) -= f * at(c, j);
    }
  }
  std::vector<Rat> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = at(i, n);
  return x;
}

// Columns of M^{-1} (exact).
inline std::vector<std::vector<Rat>> inverse_exact(const IMatrix& m) {
  size_t n = m.rows;
  std::vector<std::vector<Rat>> cols(n);
  for (size_t j = 0; j < n; ++j) {
    std::vector<Rat> e(n, Rat(0));
    e[j] = 1;
    cols[j] = solve_exact(m, e);
  }
  return cols;
}

struct SmithForm {
  std::vector<Int> factors;  // nonzero invariant factors, d1 | d2 | ...
  size_t rank = 0;
};

namespace detail {
// Division rounded to nearest (ties toward zero) - keeps remainders small.
inline Int div_nearest(const Int& a, const Int& b) {
  Int q = a / b, r = a - q * b;
  if (r != 0) {
    Int twice = 2 * abs(r);
    if (twice > abs(b)) q += ((a < 0) == (b < 0)) ? 1 : -1;
  }
  return q;
}
}  // namespace detail

// Smith normal form over Z (naive elimination with best-pivot selection).
// Only the invariant factors are produced; transforms are not tracked.
inline SmithForm smith_normal_form(IMatrix m) {
  SmithForm out;
  size_t R = m.rows, C = m.cols;
  size_t t = 0;
  while (t < R && t < C) {
    // locate minimal-magnitude nonzero entry in the trailing submatrix
    size_t pi = R, pj = C;
    for (size_t i = t; i < R; ++i)
      for (size_t j = t; j < C; ++j) {
        const Int& v = m.at(i, j);
        if (v == 0) continue;
        if (pi == R || abs(v) < abs(m.at(pi, pj))) {
          pi = i;
          pj = j;
        }
      }
    if (pi == R) break;  // submatrix is zero
    for (size_t j = 0; j < C; ++j) std::swap(m.at(t, j), m.at(pi, j));
    for (size_t i = 0; i < R; ++i) std::swap(m.at(i, t), m.at(i, pj));

    bool clean = false;
    while (!clean) {
      clean = true;
      // clear column t
      for (size_t i = t + 1; i < R; ++i) {
        if (m.at(i, t) == 0) continue;
        Int q = detail::div_nearest(m.at(i, t), m.at(t, t));
        for (size_t j = t; j < C; ++j) m.at(i, j) -= q * m.at(t, j);
        if (m.at(i, t) != 0) {  // remainder became the smaller pivot
          for (size_t j = 0; j < C; ++j) std::swap(m.at(t, j), m.at(i, j));
          clean = false;
        }
      }
      if (!clean) continue;
      // clear row t
      for (size_t j = t + 1; j < C; ++j) {
        if (m.at(t, j) == 0) continue;
        Int q = detail::div_nearest(m.at(t, j), m.at(t, t));
        for (size_t i = t; i < R; ++i) m.at(i, j) -= q * m.at(i, t);
        if (m.at(t, j) != 0) {
          for (size_t i = 0; i < R; ++i) std::swap(m.at(i, t), m.at(i, j));
          clean = false;
        }
      }
      if (!clean) continue;
      // enforce divisibility of the trailing submatrix by the pivot
      for (size_t i = t + 1; i < R && clean; ++i)
        for (size_t j = t + 1; j < C && clean; ++j)
          if (m.at(i, j) % m.at(t, t) != 0) {
            for (size_t jj = 0; jj < C; ++jj) m.at(t, jj) += m.at(i, jj);
            clean = false;
          }
    }
    ++t;
  }
  out.rank = t;
  out.factors.reserve(t);
  for (size_t i = 0; i < t; ++i) out.factors.push_back(abs(m.at(i, i)));
  return out;
}

}  // namespace latcoh
