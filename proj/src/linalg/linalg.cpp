#include "stiefel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "stiefel/errors.hpp"
#include "stiefel/tolerances.hpp"

namespace stiefel {

namespace {

std::string shape(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_finite(const Matrix& a, const char* op) {
  if (!a.all_finite()) throw PreconditionError(std::string(op) + ": non-finite entry in " + shape(a) + " input");
}

void require_square(const Matrix& a, const char* op) {
  if (a.rows() != a.cols()) throw PreconditionError(std::string(op) + ": expected a square matrix, got " + shape(a));
}

void require_symmetric(const Matrix& p, const char* op) {
  require_square(p, op);
  const double scale = std::max(1.0, max_abs(p));
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = i + 1; j < p.cols(); ++j)
      if (std::abs(p(i, j) - p(j, i)) > kTolerances.symmetry * scale)
        throw PreconditionError(std::string(op) + ": matrix is not symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
}

// Extend the orthonormal columns u(:, 0..filled-1) by Gram-Schmidt on the
// canonical basis; used when some singular values vanish.
void complete_orthonormal(Matrix& u, const std::vector<bool>& have) {
  const std::size_t m = u.rows();
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < u.cols(); ++j) {
    if (have[j]) continue;
    for (; candidate < m; ++candidate) {
      std::vector<double> e(m, 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < u.cols(); ++k) {
          if (k == j || (!have[k] && k > j)) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += u(i, k) * e[i];
          for (std::size_t i = 0; i < m; ++i) e[i] -= proj * u(i, k);
        }
      }
      const double norm = std::sqrt(dot(e, e));
      if (norm > 1e-8) {
        for (std::size_t i = 0; i < m; ++i) u(i, j) = e[i] / norm;
        ++candidate;
        break;
      }
    }
  }
}

}  // namespace

Svd svd(const Matrix& a) {
  require_finite(a, "svd");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw PreconditionError("svd: requires rows >= cols, got " + shape(a));

  // Columns stored as rows so that each rotation touches contiguous memory.
  Matrix cols = a.transposed();
  Matrix vt = Matrix::identity(n);

  bool converged = n < 2;
  for (int sweep = 0; sweep < kTolerances.jacobi_max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto ap = cols.row(p);
        auto aq = cols.row(q);
        const double alpha = dot(ap, ap);
        const double beta = dot(aq, aq);
        const double gamma = dot(ap, aq);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kTolerances.jacobi_rotation * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = ap[i];
          const double y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
  }
  if (!converged) {
    throw ConvergenceError("svd: one-sided Jacobi did not converge in " +
                           std::to_string(kTolerances.jacobi_max_sweeps) + " sweeps for a " + shape(a) + " matrix");
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(dot(cols.row(j), cols.row(j)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  Svd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n > 0 ? norms[order[0]] : 0.0;
  const double zero_cut = smax * static_cast<double>(m) * 1e-15;
  std::vector<bool> have(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = norms[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = vt(j, i);
    if (norms[j] > zero_cut && norms[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = cols(j, i) / norms[j];
      have[k] = true;
    }
  }
  if (std::find(have.begin(), have.end(), false) != have.end()) complete_orthonormal(out.u, have);
  return out;
}

SymEig sym_eig(const Matrix& p) {
  require_finite(p, "sym_eig");
  require_symmetric(p, "sym_eig");
  const std::size_t n = p.rows();
  Matrix a = p;
  // symmetrize exactly so the rotations act on a symmetric matrix
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(n);
  const double total = frobenius_norm(a);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  bool converged = off_norm() <= kTolerances.jacobi_rotation * total;
  for (int sweep = 0; sweep < kTolerances.jacobi_max_sweeps && !converged; ++sweep) {
    for (std::size_t r = 0; r + 1 < n; ++r) {
      for (std::size_t q = r + 1; q < n; ++q) {
        const double arq = a(r, q);
        if (arq == 0.0) continue;
        const double theta = (a(q, q) - a(r, r)) / (2.0 * arq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akr = a(k, r);
          const double akq = a(k, q);
          a(k, r) = c * akr - s * akq;
          a(k, q) = s * akr + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double ark = a(r, k);
          const double aqk = a(q, k);
          a(r, k) = c * ark - s * aqk;
          a(q, k) = s * ark + c * aqk;
        }
        a(r, q) = a(q, r) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkr = v(k, r);
          const double vkq = v(k, q);
          v(k, r) = c * vkr - s * vkq;
          v(k, q) = s * vkr + c * vkq;
        }
      }
    }
    converged = off_norm() <= kTolerances.jacobi_rotation * total;
  }
  if (!converged) {
    throw ConvergenceError("sym_eig: cyclic Jacobi did not converge in " +
                           std::to_string(kTolerances.jacobi_max_sweeps) + " sweeps for a " + shape(p) + " matrix");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymEig out{Matrix(n, n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  require_square(a, "solve");
  require_finite(a, "solve");
  require_finite(b, "solve");
  if (b.rows() != a.rows()) throw PreconditionError("solve: right-hand side has " + std::to_string(b.rows()) +
                                                    " rows, expected " + std::to_string(a.rows()));
  const std::size_t n = a.rows();
  double norm_inf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double x : a.row(i)) s += std::abs(x);
    norm_inf = std::max(norm_inf, s);
  }
  const double pivot_floor = kTolerances.solve_pivot * norm_inf;

  Matrix lu = a;
  Matrix x = b;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (!(std::abs(lu(piv, k)) > pivot_floor)) {
      throw SingularityError("solve: singular " + shape(a) + " matrix (pivot " + std::to_string(std::abs(lu(piv, k))) +
                             " at column " + std::to_string(k) + ")");
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      if (f == 0.0) continue;
      lu(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = x(kk, j);
      for (std::size_t c = kk + 1; c < n; ++c) s -= lu(kk, c) * x(c, j);
      x(kk, j) = s / lu(kk, kk);
    }
  }
  return x;
}

Matrix inv_sqrt_sym(const Matrix& p) {
  const SymEig eig = sym_eig(p);
  const std::size_t n = p.rows();
  if (n == 0) return Matrix();
  const double largest = eig.values.front();
  const double smallest = eig.values.back();
  if (!(largest > 0.0) || !(smallest > kTolerances.inv_sqrt_ratio * largest)) {
    std::ostringstream msg;
    msg << "inv_sqrt_sym: matrix is not safely positive definite (eigenvalue ratio " << smallest / largest << ")";
    throw SingularityError(msg.str());
  }
  Matrix scaled = eig.vectors;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = 1.0 / std::sqrt(eig.values[k]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, k) *= f;
  }
  return matmul_nt(scaled, eig.vectors);
}

Matrix cholesky(const Matrix& p) {
  require_square(p, "cholesky");
  const std::size_t n = p.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = p(j, j);
    auto lj = l.row(j);
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0)) throw SingularityError("cholesky: matrix is not positive definite at pivot " + std::to_string(j));
    const double ljj = std::sqrt(d);
    lj[j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      auto li = l.row(i);
      double s = p(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      li[j] = s / ljj;
    }
  }
  return l;
}

double logdet_from_cholesky(const Matrix& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

Matrix inverse_from_cholesky(const Matrix& l) {
  const std::size_t n = l.rows();
  // W = L^{-1}, lower triangular
  Matrix w(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    w(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      auto li = l.row(i);
      for (std::size_t k = j; k < i; ++k) s -= li[k] * w(k, j);
      w(i, j) = s / l(i, i);
    }
  }
  // P^{-1} = W^T W
  Matrix inv(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    auto wk = w.row(k);
    for (std::size_t i = 0; i <= k; ++i) {
      const double wki = wk[i];
      if (wki == 0.0) continue;
      auto inv_i = inv.row(i);
      for (std::size_t j = 0; j <= i; ++j) inv_i[j] += wki * wk[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) inv(j, i) = inv(i, j);
  return inv;
}

double log_abs_det(const Matrix& a) {
  require_square(a, "log_abs_det");
  const std::size_t n = a.rows();
  Matrix lu = a;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (lu(piv, k) == 0.0) return -std::numeric_limits<double>::infinity();
    if (piv != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
    s += std::log(std::abs(lu(k, k)));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
    }
  }
  return s;
}

}  // namespace stiefel
