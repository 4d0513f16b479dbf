#include "conevol/cone.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "conevol/error.hpp"

namespace conevol {

namespace cv = cone_variant;

namespace {

std::size_t dim_of(const ConeVariant& v) {
  return std::visit(
      [](const auto& c) -> std::size_t {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cv::Psd>) {
          return c.n * (c.n + 1) / 2;
        } else if constexpr (std::is_same_v<T, cv::Generators>) {
          return c.rays.cols();
        } else if constexpr (std::is_same_v<T, cv::Product>) {
          return c.left->ambient_dim() + c.right->ambient_dim();
        } else if constexpr (std::is_same_v<T, cv::Polar>) {
          return c.inner->ambient_dim();
        } else {
          return c.d;
        }
      },
      v);
}

bool polyhedral_of(const ConeVariant& v) {
  return std::visit(
      [](const auto& c) -> bool {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cv::Circular> || std::is_same_v<T, cv::Psd>) {
          return false;
        } else if constexpr (std::is_same_v<T, cv::Product>) {
          return c.left->is_polyhedral() && c.right->is_polyhedral();
        } else if constexpr (std::is_same_v<T, cv::Polar>) {
          return c.inner->is_polyhedral();
        } else {
          return true;
        }
      },
      v);
}

}  // namespace

Cone::Cone(ConeVariant v)
    : node_(std::make_shared<const ConeVariant>(std::move(v))),
      ambient_dim_(dim_of(*node_)),
      polyhedral_(polyhedral_of(*node_)) {
  if (ambient_dim_ < 1) throw DomainError("cone ambient dimension must be at least 1");
}

Cone Cone::subspace(std::size_t k, std::size_t d) {
  if (k > d) throw DomainError("subspace dimension exceeds ambient dimension");
  Matrix basis(k, d);
  for (std::size_t i = 0; i < k; ++i) basis(i, i) = 1.0;
  return Cone(cv::Subspace{k, d, std::move(basis), true});
}

Cone Cone::subspace_from_rows(const Matrix& rows) {
  const std::size_t d = rows.cols();
  std::vector<std::vector<double>> kept;
  double scale = 0.0;
  for (std::size_t i = 0; i < rows.rows(); ++i) scale = std::max(scale, norm(rows.row(i)));
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    std::vector<double> v(rows.row(i).begin(), rows.row(i).end());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : kept) {
        const double c = dot(v, q);
        for (std::size_t j = 0; j < d; ++j) v[j] -= c * q[j];
      }
    const double nv = norm(v);
    if (nv <= 1e-10 * scale) continue;
    for (double& x : v) x /= nv;
    kept.push_back(std::move(v));
  }
  Matrix basis(kept.size(), d);
  for (std::size_t i = 0; i < kept.size(); ++i) std::copy(kept[i].begin(), kept[i].end(), basis.row(i).begin());
  return Cone(cv::Subspace{kept.size(), d, std::move(basis), false});
}

Cone Cone::orthant(std::size_t d) { return Cone(cv::Orthant{d}); }

Cone Cone::circular(std::size_t d, double alpha) {
  if (!(alpha >= 0.0 && alpha <= std::numbers::pi / 2)) throw DomainError("circular cone angle outside [0, pi/2]");
  return Cone(cv::Circular{d, alpha, false});
}

Cone Cone::second_order(std::size_t d) { return Cone(cv::Circular{d, std::numbers::pi / 4, true}); }

Cone Cone::psd(std::size_t n) { return Cone(cv::Psd{n}); }

Cone Cone::generators(Matrix rays, std::string source) {
  if (rays.rows() == 0) throw DomainError("generator matrix has no rows");
  for (std::size_t i = 0; i < rays.rows(); ++i) {
    for (double v : rays.row(i))
      if (!std::isfinite(v)) throw DomainError("generator row " + std::to_string(i) + " is not finite");
    if (norm(rays.row(i)) == 0.0) throw DomainError("generator row " + std::to_string(i) + " is zero");
  }
  return Cone(cv::Generators{std::move(rays), std::move(source)});
}

Cone Cone::product(const Cone& left, const Cone& right) {
  return Cone(cv::Product{std::make_shared<const Cone>(left), std::make_shared<const Cone>(right)});
}

Cone Cone::polar(const Cone& inner) { return Cone(cv::Polar{std::make_shared<const Cone>(inner)}); }

Cone Cone::trivial(std::size_t d) { return Cone(cv::Trivial{d}); }

// ---------------------------------------------------------------------------

namespace {

double zero_threshold(std::span<const double> x) { return 1e-12 * (1.0 + norm(x)); }

void finish(ProjectionOutcome& out, std::span<const double> x) {
  out.residual.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.residual[i] = x[i] - out.projection[i];
  out.sq_norm_proj = squared_norm(out.projection);
  out.sq_norm_residual = squared_norm(out.residual);
}

ProjectionOutcome project_subspace(const cv::Subspace& c, std::span<const double> x) {
  ProjectionOutcome out;
  out.projection.assign(x.size(), 0.0);
  if (c.coordinate) {
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(c.k), out.projection.begin());
  } else {
    for (std::size_t i = 0; i < c.k; ++i) {
      const double coef = dot(c.basis.row(i), x);
      for (std::size_t j = 0; j < c.d; ++j) out.projection[j] += coef * c.basis(i, j);
    }
  }
  finish(out, x);
  out.face_dim = c.k;
  return out;
}

ProjectionOutcome project_orthant(std::span<const double> x) {
  ProjectionOutcome out;
  out.projection.resize(x.size());
  const double tau = zero_threshold(x);
  std::size_t active = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.projection[i] = std::max(x[i], 0.0);
    if (out.projection[i] > tau) ++active;
  }
  finish(out, x);
  out.face_dim = active;
  return out;
}

ProjectionOutcome project_circular(const cv::Circular& c, std::span<const double> x) {
  ProjectionOutcome out;
  out.projection.assign(x.size(), 0.0);
  const double a = x[0];
  double r2 = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) r2 += x[i] * x[i];
  const double r = std::sqrt(r2);
  const double ca = std::cos(c.alpha);
  const double sa = std::sin(c.alpha);

  if (a >= 0.0 && r * ca <= a * sa) {
    std::copy(x.begin(), x.end(), out.projection.begin());
  } else if (a <= 0.0 && r * sa <= -a * ca) {
    // x lies in the polar cone; projection is the origin.
  } else {
    const double coef = a * ca + r * sa;
    out.projection[0] = coef * ca;
    if (r > 0.0)
      for (std::size_t i = 1; i < x.size(); ++i) out.projection[i] = coef * sa * x[i] / r;
  }
  finish(out, x);
  return out;
}

ProjectionOutcome project_psd(const cv::Psd& c, std::span<const double> x) {
  const Matrix s = smat(x, c.n);
  const auto eig = symmetric_eigen(s);
  Matrix plus(c.n, c.n);
  for (std::size_t k = 0; k < c.n; ++k) {
    const double lam = eig.values[k];
    if (lam <= 0.0) break;  // values are descending
    for (std::size_t i = 0; i < c.n; ++i) {
      const double qi = lam * eig.vectors(i, k);
      for (std::size_t j = i; j < c.n; ++j) plus(i, j) += qi * eig.vectors(j, k);
    }
  }
  for (std::size_t i = 0; i < c.n; ++i)
    for (std::size_t j = 0; j < i; ++j) plus(i, j) = plus(j, i);
  ProjectionOutcome out;
  out.projection = svec(plus);
  finish(out, x);
  return out;
}

ProjectionOutcome project_generators(const cv::Generators& c, std::span<const double> x) {
  const auto sol = nnls_solve(c.rays, x);
  ProjectionOutcome out;
  out.projection.assign(x.size(), 0.0);
  for (std::size_t i = 0; i < c.rays.rows(); ++i) {
    const double t = sol.coefficients[i];
    if (t == 0.0) continue;
    for (std::size_t j = 0; j < x.size(); ++j) out.projection[j] += t * c.rays(i, j);
  }
  finish(out, x);

  const double tau = zero_threshold(x);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < c.rays.rows(); ++i)
    if (sol.coefficients[i] > tau) active.push_back(i);
  if (active.empty()) {
    out.face_dim = 0;
  } else {
    Matrix sub(active.size(), x.size());
    for (std::size_t r = 0; r < active.size(); ++r)
      std::copy(c.rays.row(active[r]).begin(), c.rays.row(active[r]).end(), sub.row(r).begin());
    const auto sv = singular_values(sub);
    out.face_dim = static_cast<std::size_t>(
        std::count_if(sv.begin(), sv.end(), [&](double s) { return s > 1e-10 * sv.front(); }));
  }
  return out;
}

}  // namespace

ProjectionOutcome project(const Cone& cone, std::span<const double> x) {
  if (x.size() != cone.ambient_dim())
    throw DimensionMismatch("project: point has dimension " + std::to_string(x.size()) + ", cone has " +
                            std::to_string(cone.ambient_dim()));
  return std::visit(
      [&](const auto& c) -> ProjectionOutcome {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cv::Subspace>) {
          return project_subspace(c, x);
        } else if constexpr (std::is_same_v<T, cv::Orthant>) {
          return project_orthant(x);
        } else if constexpr (std::is_same_v<T, cv::Circular>) {
          return project_circular(c, x);
        } else if constexpr (std::is_same_v<T, cv::Psd>) {
          return project_psd(c, x);
        } else if constexpr (std::is_same_v<T, cv::Generators>) {
          return project_generators(c, x);
        } else if constexpr (std::is_same_v<T, cv::Trivial>) {
          ProjectionOutcome out;
          out.projection.assign(x.size(), 0.0);
          finish(out, x);
          out.face_dim = 0;
          return out;
        } else if constexpr (std::is_same_v<T, cv::Polar>) {
          auto in = project(*c.inner, x);
          ProjectionOutcome out;
          out.projection = std::move(in.residual);
          out.residual = std::move(in.projection);
          out.sq_norm_proj = in.sq_norm_residual;
          out.sq_norm_residual = in.sq_norm_proj;
          // For a polyhedral cone the residual lies in the relative interior
          // of the normal face, whose dimension is complementary.
          if (in.face_dim) out.face_dim = x.size() - *in.face_dim;
          return out;
        } else {
          const std::size_t d1 = c.left->ambient_dim();
          auto l = project(*c.left, x.subspan(0, d1));
          auto r = project(*c.right, x.subspan(d1));
          ProjectionOutcome out;
          out.projection = std::move(l.projection);
          out.projection.insert(out.projection.end(), r.projection.begin(), r.projection.end());
          out.residual = std::move(l.residual);
          out.residual.insert(out.residual.end(), r.residual.begin(), r.residual.end());
          out.sq_norm_proj = l.sq_norm_proj + r.sq_norm_proj;
          out.sq_norm_residual = l.sq_norm_residual + r.sq_norm_residual;
          if (l.face_dim && r.face_dim) out.face_dim = *l.face_dim + *r.face_dim;
          return out;
        }
      },
      cone.variant());
}

std::size_t face_dimension(const Cone& cone, const ProjectionOutcome& outcome) {
  if (!cone.is_polyhedral()) throw UnsupportedVariant("face_dimension: cone is not polyhedral");
  if (!outcome.face_dim) throw UnsupportedVariant("face_dimension: outcome carries no face information");
  return *outcome.face_dim;
}

AmbientPoint svec(const Matrix& s) {
  const std::size_t n = s.rows();
  AmbientPoint out;
  out.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.push_back(i == j ? s(i, i) : std::numbers::sqrt2 * s(i, j));
  return out;
}

Matrix smat(std::span<const double> coords, std::size_t n) {
  if (coords.size() != n * (n + 1) / 2) throw DimensionMismatch("smat: coordinate count does not match n(n+1)/2");
  Matrix s(n, n);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = coords[idx++];
      if (i == j) {
        s(i, i) = v;
      } else {
        s(i, j) = s(j, i) = v / std::numbers::sqrt2;
      }
    }
  return s;
}

Matrix parse_generators_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<double> values;
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      ++col;
      const std::size_t comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      std::size_t used = 0;
      double v = 0.0;
      bool ok = true;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok && cell.find_first_not_of(" \t", used) != std::string::npos) ok = false;
      if (!ok || !std::isfinite(v))
        throw ParseError("generators CSV: bad value '" + cell + "' at row " + std::to_string(row) + ", column " +
                             std::to_string(col),
                         line_offset + pos);
      values.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw ParseError("generators CSV: row " + std::to_string(row) + " has " + std::to_string(values.size()) +
                           " columns, expected " + std::to_string(rows.front().size()),
                       line_offset);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("generators CSV: no rows", 0);
  return Matrix::from_rows(rows);
}

Matrix load_generators_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open generators file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_generators_csv(buf.str());
}

}  // namespace conevol
