#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "conevol/linalg.hpp"

namespace conevol {

/// A point of the ambient space R^d (also used for g, theta and residuals).
using AmbientPoint = std::vector<double>;

class Cone;

namespace cone_variant {

/// Linear subspace spanned by the orthonormal rows of `basis`.
struct Subspace {
  std::size_t k;
  std::size_t d;
  Matrix basis;  // k x d, orthonormal rows
  bool coordinate = true;  // basis is e_1..e_k
};

struct Orthant {
  std::size_t d;
};

/// {x : x_1 >= ||x|| cos(alpha)}.
struct Circular {
  std::size_t d;
  double alpha;
  bool second_order = false;  // constructed as the Lorentz cone alias
};

/// Positive-semidefinite n x n matrices in svec coordinates, d = n(n+1)/2.
struct Psd {
  std::size_t n;
};

/// Conic hull of the rows of `rays`.
struct Generators {
  Matrix rays;  // m x d
  std::string source;  // file the rays were read from, if any
};

struct Product {
  std::shared_ptr<const Cone> left;
  std::shared_ptr<const Cone> right;
};

struct Polar {
  std::shared_ptr<const Cone> inner;
};

/// The cone {0}.
struct Trivial {
  std::size_t d;
};

}  // namespace cone_variant

using ConeVariant = std::variant<cone_variant::Subspace, cone_variant::Orthant, cone_variant::Circular,
                                 cone_variant::Psd, cone_variant::Generators, cone_variant::Product,
                                 cone_variant::Polar, cone_variant::Trivial>;

/// Immutable, cheaply copyable description of a closed convex cone.
class Cone {
 public:
  static Cone subspace(std::size_t k, std::size_t d);
  /// Subspace spanned by the rows of `spanning_rows` (orthonormalised; rank defines k).
  static Cone subspace_from_rows(const Matrix& spanning_rows);
  static Cone orthant(std::size_t d);
  static Cone circular(std::size_t d, double alpha);
  static Cone second_order(std::size_t d);
  static Cone psd(std::size_t n);
  static Cone generators(Matrix rays, std::string source = {});
  static Cone product(const Cone& left, const Cone& right);
  static Cone polar(const Cone& inner);
  static Cone trivial(std::size_t d);

  const ConeVariant& variant() const { return *node_; }
  std::size_t ambient_dim() const { return ambient_dim_; }

  /// True when face_dimension is defined: Subspace, Orthant, Trivial,
  /// Generators, and Products/Polars built only from those.
  bool is_polyhedral() const { return polyhedral_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(node_.get());
  }

 private:
  explicit Cone(ConeVariant v);

  std::shared_ptr<const ConeVariant> node_;
  std::size_t ambient_dim_ = 0;
  bool polyhedral_ = false;
};

struct ProjectionOutcome {
  AmbientPoint projection;  // Pi_C(x)
  AmbientPoint residual;    // Pi_{C polar}(x) = x - Pi_C(x)
  double sq_norm_proj = 0.0;
  double sq_norm_residual = 0.0;
  std::optional<std::size_t> face_dim;
};

/// Metric projection onto `cone` with the Moreau residual. Throws
/// DimensionMismatch when x has the wrong length.
ProjectionOutcome project(const Cone& cone, std::span<const double> x);

/// Dimension of the face whose relative interior contains the projection.
/// Throws UnsupportedVariant for non-polyhedral cones.
std::size_t face_dimension(const Cone& cone, const ProjectionOutcome& outcome);

// svec coordinates: (x_11, sqrt2 x_12, ..., sqrt2 x_1n, x_22, ...), an isometry
// from symmetric matrices with the Frobenius inner product onto R^{n(n+1)/2}.
AmbientPoint svec(const Matrix& symmetric);
Matrix smat(std::span<const double> coords, std::size_t n);

/// Reads generator rays from CSV (one ray per row, no header).
/// Throws ParseError naming the row and column of the offending cell.
Matrix load_generators_csv(const std::string& path);
Matrix parse_generators_csv(const std::string& text);

}  // namespace conevol
