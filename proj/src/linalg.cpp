#include "conevol/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "conevol/error.hpp"

namespace conevol {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw DimensionMismatch("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const {
  return std::sqrt(squared_norm(data_));
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix difference shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

// ---------------------------------------------------------------------------
// Cyclic Jacobi

EigenDecomposition symmetric_eigen(const Matrix& w) {
  constexpr int kMaxSweeps = 50;
  const std::size_t n = w.rows();
  if (w.cols() != n) throw DomainError("symmetric_eigen: matrix is not square");

  const double scale = w.frobenius_norm();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::abs(w(i, j) - w(j, i)));
  if (asym > 1e-12 * scale) throw DomainError("symmetric_eigen: matrix is not symmetric");

  Matrix a = w;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (w(i, j) + w(j, i));
  Matrix v = Matrix::identity(n);

  const double eps = std::numeric_limits<double>::epsilon();
  int sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= (eps * scale) * (eps * scale) || off == 0.0) break;
    if (sweep == kMaxSweeps) throw NonConvergence("symmetric_eigen: sweep cap exceeded", sweep);

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Skip rotations that cannot change the diagonal in floating point.
        if (sweep > 3 && std::abs(apq) < eps * 1e-2 * std::min(std::abs(app), std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
          a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD (singular values only)

std::vector<double> singular_values(const Matrix& a_in) {
  Matrix a = a_in.rows() >= a_in.cols() ? a_in : a_in.transposed();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a(i, p);
          const double y = a(i, q);
          a(i, p) = c * x - s * y;
          a(i, q) = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

// ---------------------------------------------------------------------------
// Lawson-Hanson NNLS

namespace {

// Least squares min ||E_P z - f|| over the columns listed in `passive`,
// by Householder QR. Columns whose pivot collapses below `drop_tol` get z = 0.
std::vector<double> passive_least_squares(const Matrix& e, std::span<const double> f,
                                          const std::vector<std::size_t>& passive) {
  const std::size_t d = e.rows();
  const std::size_t p = passive.size();
  Matrix r(d, p);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < p; ++j) r(i, j) = e(i, passive[j]);
  std::vector<double> y(f.begin(), f.end());

  const std::size_t steps = std::min(d, p);
  double max_diag = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    double col = 0.0;
    for (std::size_t i = k; i < d; ++i) col += r(i, k) * r(i, k);
    col = std::sqrt(col);
    if (col == 0.0) continue;
    const double alpha = r(k, k) > 0 ? -col : col;
    std::vector<double> v(d - k);
    for (std::size_t i = k; i < d; ++i) v[i - k] = r(i, k);
    v[0] -= alpha;
    const double vnorm2 = squared_norm(v);
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < p; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < d; ++i) s += v[i - k] * r(i, j);
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < d; ++i) r(i, j) -= s * v[i - k];
    }
    double s = 0.0;
    for (std::size_t i = k; i < d; ++i) s += v[i - k] * y[i];
    s = 2.0 * s / vnorm2;
    for (std::size_t i = k; i < d; ++i) y[i] -= s * v[i - k];
    max_diag = std::max(max_diag, std::abs(r(k, k)));
  }

  std::vector<double> z(p, 0.0);
  const double drop_tol = 1e-13 * max_diag;
  for (std::size_t kk = steps; kk-- > 0;) {
    if (std::abs(r(kk, kk)) <= drop_tol) {
      z[kk] = 0.0;
      continue;
    }
    double s = y[kk];
    for (std::size_t j = kk + 1; j < steps; ++j) s -= r(kk, j) * z[j];
    z[kk] = s / r(kk, kk);
  }
  return z;
}

std::vector<double> gradient(const Matrix& e, std::span<const double> f, std::span<const double> x) {
  std::vector<double> resid(f.begin(), f.end());
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t j = 0; j < e.cols(); ++j) resid[i] -= e(i, j) * x[j];
  std::vector<double> w(e.cols(), 0.0);
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t j = 0; j < e.cols(); ++j) w[j] += e(i, j) * resid[i];
  return w;
}

}  // namespace

NnlsResult nnls_solve(const Matrix& generators, std::span<const double> b) {
  const std::size_t m = generators.rows();
  const std::size_t d = generators.cols();
  if (b.size() != d) throw DimensionMismatch("nnls_solve: rhs length differs from generator dimension");
  for (double v : b)
    if (!std::isfinite(v)) throw DomainError("nnls_solve: non-finite right-hand side");

  const Matrix e = generators.transposed();  // d x m, columns are generators
  double max_col = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += e(i, j) * e(i, j);
    max_col = std::max(max_col, std::sqrt(s));
  }
  const double bnorm = norm(b);
  const double tol = 1e-12 * max_col * std::max(bnorm, 1e-300);

  std::vector<double> x(m, 0.0);
  std::vector<char> in_passive(m, 0);
  const std::size_t cap = 3 * m;
  std::size_t iter = 0;

  for (;;) {
    const auto w = gradient(e, b, x);
    std::size_t t = m;
    double best = tol;
    for (std::size_t j = 0; j < m; ++j)
      if (!in_passive[j] && w[j] > best) {
        best = w[j];
        t = j;
      }
    if (t == m) break;
    if (++iter > cap) throw NonConvergence("nnls_solve: iteration cap exceeded", iter - 1);
    in_passive[t] = 1;

    for (;;) {
      std::vector<std::size_t> passive;
      for (std::size_t j = 0; j < m; ++j)
        if (in_passive[j]) passive.push_back(j);
      const auto zp = passive_least_squares(e, b, passive);

      bool feasible = true;
      for (double z : zp) feasible = feasible && z > 0.0;
      if (feasible) {
        for (std::size_t k = 0; k < passive.size(); ++k) x[passive[k]] = zp[k];
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const std::size_t j = passive[k];
        if (zp[k] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - zp[k]));
      }
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const std::size_t j = passive[k];
        x[j] += alpha * (zp[k] - x[j]);
      }
      bool removed = false;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const std::size_t j = passive[k];
        if (x[j] <= 1e-15 * std::max(1.0, std::abs(zp[k]))) {
          x[j] = 0.0;
          in_passive[j] = 0;
          removed = true;
        }
      }
      if (!removed) {
        // alpha was attained by some index; force it out to guarantee progress.
        std::size_t worst = passive.front();
        double worst_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < passive.size(); ++k)
          if (zp[k] <= 0.0 && x[passive[k]] < worst_ratio) {
            worst_ratio = x[passive[k]];
            worst = passive[k];
          }
        x[worst] = 0.0;
        in_passive[worst] = 0;
      }
    }
  }

  NnlsResult out;
  out.coefficients = std::move(x);
  out.iterations = iter;
  const auto w = gradient(e, b, out.coefficients);
  double kkt = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    kkt = std::max(kkt, in_passive[j] ? std::abs(w[j]) : std::max(w[j], 0.0));
  out.kkt_residual = kkt;
  return out;
}

}  // namespace conevol
