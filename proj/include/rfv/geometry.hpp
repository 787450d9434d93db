#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfv::geometry {

using Point = std::vector<double>;

/// Largest supported dimension of the input space.
inline constexpr std::size_t kMaxDimension = 8;

enum class GeometryErrorKind {
  invalid_input,
  non_finite,
  outside_domain,
  duplicate_site,
  outside_bounding_simplex,
  degenerate,
};

class GeometryError : public std::runtime_error {
 public:
  GeometryError(GeometryErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  GeometryErrorKind kind() const noexcept { return kind_; }

 private:
  GeometryErrorKind kind_;
};

/// Axis-aligned box; the normalized fuzzy domain is usually the unit cube.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unit(std::size_t dimension);

  std::size_t dimension() const noexcept { return lower.size(); }
  /// Largest side length. Tolerances scale with this.
  double width() const;
  Point center() const;
  bool contains(std::span<const double> q, double slack = 0.0) const;
  Point clamp(std::span<const double> q) const;
  void validate() const;
};

/// How the barycentric weight of a site is turned into a membership value.
enum class MembershipSupport {
  /// Nonzero on every simplex incident to the site (its application area).
  application_area,
  /// Literal reading: only the site whose Voronoi cell holds the query fires.
  voronoi_cell,
};

struct TriangulationOptions {
  /// Bounding simplex circumscribes the domain ball, then is scaled by this.
  double bounding_scale = 1e3;
  /// Deterministic site jitter, relative to the domain width.
  double perturbation = 1e-9;
  /// Sites closer than this (relative to the domain width) are duplicates.
  double duplicate_tolerance = 1e-7;
  /// Barycentric weights above -containment_tolerance count as inside.
  double containment_tolerance = 1e-9;
  /// Relative tolerance of the in-sphere predicate.
  double insphere_tolerance = 1e-10;
  MembershipSupport support = MembershipSupport::application_area;
};

inline constexpr std::ptrdiff_t kNoNeighbor = -1;

struct Simplex {
  std::vector<std::size_t> vertices;
  /// neighbors[i] shares the facet opposite vertices[i]; kNoNeighbor on the hull.
  std::vector<std::ptrdiff_t> neighbors;
};

struct Location {
  std::size_t simplex = 0;
  std::vector<double> weights;
};

/// Delaunay triangulation of a set of sites plus an enclosing simplex.
///
/// Vertices 0..d are the bounding simplex; vertex d+1+k is site k. The site
/// coordinates stored here carry the deterministic jitter applied at build
/// time. A built triangulation is immutable and safe to query concurrently.
class Triangulation {
 public:
  static Triangulation build(std::span<const Point> sites, const Box& domain,
                             const TriangulationOptions& options = {});

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t site_count() const noexcept { return vertices_.size() - dimension_ - 1; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t site_vertex(std::size_t site) const noexcept { return dimension_ + 1 + site; }
  bool is_bounding_vertex(std::size_t vertex) const noexcept { return vertex <= dimension_; }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Simplex>& simplices() const noexcept { return simplices_; }
  const Box& domain() const noexcept { return domain_; }
  const TriangulationOptions& options() const noexcept { return options_; }

  /// Simplex containing q. On shared facets the lowest simplex id wins.
  /// `hint` seeds the walk; any valid simplex id is accepted.
  std::size_t locate(std::span<const double> q, std::optional<std::size_t> hint = {}) const;
  Location locate_with_weights(std::span<const double> q,
                               std::optional<std::size_t> hint = {}) const;

  /// Barycentric weights of q with respect to a simplex; they sum to 1.
  std::vector<double> barycentric(std::size_t simplex, std::span<const double> q) const;

  /// Membership of q in the fuzzy set of site k, in [0, 1].
  double membership(std::size_t site, std::span<const double> q) const;

  /// All site memberships from a single point location. `hint` is read and
  /// updated with the containing simplex when given.
  std::vector<double> membership_vector(std::span<const double> q,
                                        std::size_t* hint = nullptr) const;

  /// Site ids sharing at least one simplex with each site.
  std::vector<std::vector<std::size_t>> site_neighbors() const;

  /// Ids of the simplices incident to `site`; their union is the site's application area.
  std::vector<std::size_t> application_area(std::size_t site) const;

  /// Vertex table (id, kind, coordinates) and simplex table (id, vertices, neighbors).
  void dump_csv(std::ostream& vertex_table, std::ostream& simplex_table) const;

 private:
  Triangulation() = default;

  bool barycentric_into(std::size_t simplex, std::span<const double> q, double* out) const;
  std::vector<double> site_memberships(const Location& loc, std::span<const double> q) const;
  std::size_t exhaustive_locate(std::span<const double> q) const;

  std::size_t dimension_ = 0;
  Box domain_;
  TriangulationOptions options_;
  std::vector<Point> vertices_;
  std::vector<Simplex> simplices_;
};

/// Vertices of a regular simplex centred at `center` with circumradius `radius`.
std::vector<Point> regular_simplex(std::span<const double> center, double radius);

/// Solves the n x n system a * x = b in place (row-major a, n <= kMaxDimension).
/// Returns false on a zero or non-finite pivot.
bool solve_linear(double* a, double* b, std::size_t n);

}  // namespace rfv::geometry
