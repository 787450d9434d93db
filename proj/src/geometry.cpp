#include "rfv/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace rfv::geometry {

namespace {

constexpr std::size_t kMaxVertices = kMaxDimension + 1;

// New simplices whose relative volume falls below this are refused while
// carving the insertion cavity.
constexpr double kMinFacetWeight = 1e-13;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1], a pure function of (site, axis).
double jitter(std::size_t site, std::size_t axis) {
  const std::uint64_t bits = splitmix64(splitmix64(site) ^ (axis * 0x632be59bd9b4e019ULL));
  return 2.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53) - 1.0;
}

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

// Barycentric weights of q in the simplex spanned by `ids`. The system is
// solved relative to a site vertex when there is one: subtracting a bounding
// vertex (~1e3 away) from q would cost several digits in the site weights.
bool simplex_weights(const std::vector<Point>& verts, const std::size_t* ids, std::size_t d,
                     const double* q, double* w) {
  std::size_t origin = 0;
  while (origin < d && ids[origin] <= d) ++origin;
  if (ids[origin] <= d) origin = 0;
  std::array<std::size_t, kMaxVertices> order{};
  for (std::size_t i = 0, k = 0; i <= d; ++i) {
    if (i != origin) order[k++] = i;
  }
  std::array<double, kMaxDimension * kMaxDimension> m{};
  std::array<double, kMaxDimension> rhs{};
  const double* v0 = verts[ids[origin]].data();
  for (std::size_t c = 0; c < d; ++c) {
    const double* vc = verts[ids[order[c]]].data();
    for (std::size_t r = 0; r < d; ++r) m[r * d + c] = vc[r] - v0[r];
  }
  for (std::size_t r = 0; r < d; ++r) rhs[r] = q[r] - v0[r];
  if (!solve_linear(m.data(), rhs.data(), d)) return false;
  double sum = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    w[order[c]] = rhs[c];
    sum += rhs[c];
  }
  w[origin] = 1.0 - sum;
  return true;
}

struct Cell {
  std::array<std::size_t, kMaxVertices> v{};
  std::array<std::ptrdiff_t, kMaxVertices> n{};
  std::array<double, kMaxDimension> center{};
  double radius2 = 0.0;
  bool alive = true;
};

// Incremental Bowyer-Watson insertion over an initial enclosing simplex.
class Builder {
 public:
  Builder(const std::vector<Point>& verts, std::size_t d, double insphere_tol,
          double containment_tol)
      : verts_(verts), d_(d), insphere_tol_(insphere_tol), containment_tol_(containment_tol) {
    Cell root;
    for (std::size_t i = 0; i <= d_; ++i) {
      root.v[i] = i;
      root.n[i] = kNoNeighbor;
    }
    if (!circumsphere(root)) {
      throw GeometryError(GeometryErrorKind::degenerate, "bounding simplex is degenerate");
    }
    cells_.push_back(root);
  }

  void insert(std::size_t vid) {
    const double* p = verts_[vid].data();
    const std::size_t start = find_containing(p, vid);

    ++stamp_;
    visit_.resize(cells_.size(), 0);
    in_cavity_.resize(cells_.size(), 0);
    std::vector<std::size_t> cavity{start};
    std::vector<std::size_t> stack{start};
    visit_[start] = stamp_;
    in_cavity_[start] = stamp_;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      for (std::size_t i = 0; i <= d_; ++i) {
        const std::ptrdiff_t nb = cells_[c].n[i];
        if (nb == kNoNeighbor) continue;
        const auto u = static_cast<std::size_t>(nb);
        if (visit_[u] == stamp_) continue;
        visit_[u] = stamp_;
        if (inside_sphere(cells_[u], p)) {
          in_cavity_[u] = stamp_;
          cavity.push_back(u);
          stack.push_back(u);
        }
      }
    }

    repair_cavity(cavity, start, p);
    retriangulate(cavity, vid);
  }

  std::vector<Simplex> finish() const {
    std::vector<std::ptrdiff_t> remap(cells_.size(), kNoNeighbor);
    std::size_t next = 0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i].alive) remap[i] = static_cast<std::ptrdiff_t>(next++);
    }
    std::vector<Simplex> out;
    out.reserve(next);
    for (const Cell& c : cells_) {
      if (!c.alive) continue;
      Simplex s;
      s.vertices.assign(c.v.begin(), c.v.begin() + static_cast<std::ptrdiff_t>(d_ + 1));
      s.neighbors.resize(d_ + 1);
      for (std::size_t i = 0; i <= d_; ++i) {
        s.neighbors[i] = c.n[i] == kNoNeighbor ? kNoNeighbor : remap[static_cast<std::size_t>(c.n[i])];
      }
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  bool circumsphere(Cell& c) const {
    std::array<double, kMaxDimension * kMaxDimension> m{};
    std::array<double, kMaxDimension> rhs{};
    const double* v0 = verts_[c.v[0]].data();
    for (std::size_t r = 0; r < d_; ++r) {
      const double* vr = verts_[c.v[r + 1]].data();
      double half_norm = 0.0;
      for (std::size_t k = 0; k < d_; ++k) {
        const double t = vr[k] - v0[k];
        m[r * d_ + k] = t;
        half_norm += t * t;
      }
      rhs[r] = 0.5 * half_norm;
    }
    if (!solve_linear(m.data(), rhs.data(), d_)) return false;
    double r2 = 0.0;
    for (std::size_t k = 0; k < d_; ++k) {
      c.center[k] = v0[k] + rhs[k];
      r2 += rhs[k] * rhs[k];
    }
    c.radius2 = r2;
    return std::isfinite(r2);
  }

  bool inside_sphere(const Cell& c, const double* p) const {
    return squared_distance(p, c.center.data(), d_) < c.radius2 * (1.0 - insphere_tol_);
  }

  bool weights(const Cell& c, const double* q, double* w) const {
    return simplex_weights(verts_, c.v.data(), d_, q, w);
  }

  std::size_t find_containing(const double* p, std::size_t vid) {
    std::array<double, kMaxVertices> w{};
    std::size_t current = last_;
    const std::size_t max_steps = cells_.size() + 16;
    for (std::size_t step = 0; step < max_steps; ++step) {
      if (!weights(cells_[current], p, w.data())) break;
      std::size_t worst = 0;
      for (std::size_t i = 1; i <= d_; ++i) {
        if (w[i] < w[worst]) worst = i;
      }
      if (w[worst] >= -containment_tol_) return current;
      const std::ptrdiff_t nb = cells_[current].n[worst];
      if (nb == kNoNeighbor) break;
      current = static_cast<std::size_t>(nb);
    }
    // Walk failed numerically; fall back to a scan.
    std::size_t best = cells_.size();
    double best_min = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (!cells_[c].alive || !weights(cells_[c], p, w.data())) continue;
      const double mn = *std::min_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d_ + 1));
      if (mn > best_min) {
        best_min = mn;
        best = c;
      }
    }
    if (best == cells_.size() || best_min < -containment_tol_) {
      std::ostringstream msg;
      msg << "vertex " << vid << " lies outside the bounding simplex";
      throw GeometryError(GeometryErrorKind::outside_bounding_simplex, msg.str());
    }
    return best;
  }

  // Shrinks (or, at the seed cell, grows) the cavity until every boundary
  // facet is strictly visible from p, so the new simplices have positive volume.
  void repair_cavity(std::vector<std::size_t>& cavity, std::size_t start, const double* p) {
    std::array<double, kMaxVertices> w{};
    bool changed = true;
    std::size_t rounds = 0;
    while (changed) {
      if (++rounds > 4 * cells_.size() + 8) {
        throw GeometryError(GeometryErrorKind::degenerate, "insertion cavity repair did not converge");
      }
      changed = false;
      for (std::size_t idx = 0; idx < cavity.size() && !changed; ++idx) {
        const std::size_t c = cavity[idx];
        if (!weights(cells_[c], p, w.data())) {
          throw GeometryError(GeometryErrorKind::degenerate, "degenerate simplex in cavity");
        }
        for (std::size_t i = 0; i <= d_; ++i) {
          const std::ptrdiff_t nb = cells_[c].n[i];
          const bool boundary = nb == kNoNeighbor || in_cavity_[static_cast<std::size_t>(nb)] != stamp_;
          if (!boundary || w[i] > kMinFacetWeight) continue;
          if (c == start) {
            if (nb == kNoNeighbor) {
              throw GeometryError(GeometryErrorKind::degenerate, "point on the bounding simplex hull");
            }
            const auto u = static_cast<std::size_t>(nb);
            in_cavity_[u] = stamp_;
            cavity.push_back(u);
          } else {
            in_cavity_[c] = 0;
            cavity.erase(cavity.begin() + static_cast<std::ptrdiff_t>(idx));
            prune_disconnected(cavity, start);
          }
          changed = true;
          break;
        }
      }
    }
  }

  void prune_disconnected(std::vector<std::size_t>& cavity, std::size_t start) {
    ++stamp_;
    visit_.resize(cells_.size(), 0);
    const std::uint32_t old = stamp_ - 1;
    std::vector<std::size_t> stack{start};
    visit_[start] = stamp_;
    std::vector<std::size_t> kept{start};
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      for (std::size_t i = 0; i <= d_; ++i) {
        const std::ptrdiff_t nb = cells_[c].n[i];
        if (nb == kNoNeighbor) continue;
        const auto u = static_cast<std::size_t>(nb);
        if (in_cavity_[u] != old || visit_[u] == stamp_) continue;
        visit_[u] = stamp_;
        kept.push_back(u);
        stack.push_back(u);
      }
    }
    for (std::size_t c : cavity) in_cavity_[c] = 0;
    for (std::size_t c : kept) in_cavity_[c] = stamp_;
    std::sort(kept.begin() + 1, kept.end());
    cavity = std::move(kept);
  }

  struct Ridge {
    std::array<std::size_t, kMaxDimension> key;
    std::size_t cell;
    std::size_t slot;
  };

  void retriangulate(const std::vector<std::size_t>& cavity, std::size_t vid) {
    std::vector<std::size_t> created;
    std::vector<std::size_t> apex_slot;
    for (std::size_t c : cavity) {
      for (std::size_t i = 0; i <= d_; ++i) {
        const std::ptrdiff_t nb = cells_[c].n[i];
        if (nb != kNoNeighbor && in_cavity_[static_cast<std::size_t>(nb)] == stamp_) continue;
        Cell fresh;
        fresh.v = cells_[c].v;
        fresh.v[i] = vid;
        fresh.n.fill(kNoNeighbor);
        fresh.n[i] = nb;
        if (!circumsphere(fresh)) {
          throw GeometryError(GeometryErrorKind::degenerate, "zero-volume simplex during insertion");
        }
        const std::size_t id = cells_.size();
        cells_.push_back(fresh);
        if (nb != kNoNeighbor) {
          Cell& outer = cells_[static_cast<std::size_t>(nb)];
          for (std::size_t j = 0; j <= d_; ++j) {
            if (outer.n[j] == static_cast<std::ptrdiff_t>(c)) outer.n[j] = static_cast<std::ptrdiff_t>(id);
          }
        }
        created.push_back(id);
        apex_slot.push_back(i);
      }
    }
    for (std::size_t c : cavity) cells_[c].alive = false;

    std::vector<Ridge> ridges;
    ridges.reserve(created.size() * d_);
    for (std::size_t k = 0; k < created.size(); ++k) {
      const Cell& cell = cells_[created[k]];
      for (std::size_t j = 0; j <= d_; ++j) {
        if (j == apex_slot[k]) continue;
        Ridge r{};
        r.key.fill(std::numeric_limits<std::size_t>::max());
        std::size_t t = 0;
        for (std::size_t q = 0; q <= d_; ++q) {
          if (q != j && q != apex_slot[k]) r.key[t++] = cell.v[q];
        }
        std::sort(r.key.begin(), r.key.begin() + static_cast<std::ptrdiff_t>(t));
        r.cell = created[k];
        r.slot = j;
        ridges.push_back(r);
      }
    }
    std::sort(ridges.begin(), ridges.end(), [](const Ridge& a, const Ridge& b) {
      return a.key != b.key ? a.key < b.key : a.cell < b.cell;
    });
    for (std::size_t k = 0; k < ridges.size(); k += 2) {
      if (k + 1 >= ridges.size() || ridges[k].key != ridges[k + 1].key ||
          (k + 2 < ridges.size() && ridges[k + 2].key == ridges[k].key)) {
        throw GeometryError(GeometryErrorKind::degenerate, "cavity boundary is not a closed surface");
      }
      cells_[ridges[k].cell].n[ridges[k].slot] = static_cast<std::ptrdiff_t>(ridges[k + 1].cell);
      cells_[ridges[k + 1].cell].n[ridges[k + 1].slot] = static_cast<std::ptrdiff_t>(ridges[k].cell);
    }
    last_ = created.back();
  }

  const std::vector<Point>& verts_;
  std::size_t d_;
  double insphere_tol_;
  double containment_tol_;
  std::vector<Cell> cells_;
  std::vector<std::uint32_t> visit_;
  std::vector<std::uint32_t> in_cavity_;
  std::uint32_t stamp_ = 0;
  std::size_t last_ = 0;
};

}  // namespace

bool solve_linear(double* a, double* b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) return false;
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

std::vector<Point> regular_simplex(std::span<const double> center, double radius) {
  const std::size_t d = center.size();
  const auto n = static_cast<double>(d);
  std::vector<Point> out(d + 1, Point(d, 0.0));
  const double diag = std::sqrt(1.0 + 1.0 / n);
  const double shift = (std::sqrt(n + 1.0) + 1.0) / std::pow(n, 1.5);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) out[i][k] = (i == k ? diag : 0.0) - shift;
  }
  for (std::size_t k = 0; k < d; ++k) out[d][k] = 1.0 / std::sqrt(n);
  for (Point& v : out) {
    for (std::size_t k = 0; k < d; ++k) v[k] = center[k] + radius * v[k];
  }
  return out;
}

Box Box::unit(std::size_t dimension) {
  return Box{std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0)};
}

double Box::width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) w = std::max(w, upper[i] - lower[i]);
  return w;
}

Point Box::center() const {
  Point c(lower.size());
  for (std::size_t i = 0; i < lower.size(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
  return c;
}

bool Box::contains(std::span<const double> q, double slack) const {
  if (q.size() != lower.size()) return false;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= lower[i] - slack && q[i] <= upper[i] + slack)) return false;
  }
  return true;
}

Point Box::clamp(std::span<const double> q) const {
  Point out(q.begin(), q.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lower[i], upper[i]);
  return out;
}

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw GeometryError(GeometryErrorKind::invalid_input, "domain box has inconsistent dimensions");
  }
  if (lower.size() > kMaxDimension) {
    throw GeometryError(GeometryErrorKind::invalid_input, "domain dimension exceeds 8");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(upper[i] > lower[i])) {
      throw GeometryError(GeometryErrorKind::invalid_input, "domain box must have finite, positive extent");
    }
  }
}

Triangulation Triangulation::build(std::span<const Point> sites, const Box& domain,
                                   const TriangulationOptions& options) {
  domain.validate();
  const std::size_t d = domain.dimension();
  if (sites.empty()) {
    throw GeometryError(GeometryErrorKind::invalid_input, "at least one site is required");
  }
  const double width = domain.width();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (sites[k].size() != d) {
      throw GeometryError(GeometryErrorKind::invalid_input, "site dimension does not match domain");
    }
    for (double x : sites[k]) {
      if (!std::isfinite(x)) {
        throw GeometryError(GeometryErrorKind::non_finite, "site " + std::to_string(k) + " has a non-finite coordinate");
      }
    }
    if (!domain.contains(sites[k], 1e-12 * width)) {
      throw GeometryError(GeometryErrorKind::outside_domain, "site " + std::to_string(k) + " lies outside the domain");
    }
  }
  const double dup2 = std::pow(options.duplicate_tolerance * width, 2);
  for (std::size_t a = 0; a < sites.size(); ++a) {
    for (std::size_t b = a + 1; b < sites.size(); ++b) {
      if (squared_distance(sites[a].data(), sites[b].data(), d) < dup2) {
        throw GeometryError(GeometryErrorKind::duplicate_site,
                            "sites " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
      }
    }
  }

  Triangulation tri;
  tri.dimension_ = d;
  tri.domain_ = domain;
  tri.options_ = options;

  double half_diagonal = 0.0;
  for (std::size_t i = 0; i < d; ++i) half_diagonal += std::pow(0.5 * (domain.upper[i] - domain.lower[i]), 2);
  half_diagonal = std::sqrt(half_diagonal);
  // A regular simplex's inradius is circumradius / d.
  const double radius = options.bounding_scale * static_cast<double>(d) * half_diagonal;
  const Point center = domain.center();
  tri.vertices_ = regular_simplex(center, radius);
  tri.vertices_.reserve(d + 1 + sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    Point p = sites[k];
    for (std::size_t i = 0; i < d; ++i) p[i] += options.perturbation * width * jitter(k, i);
    tri.vertices_.push_back(std::move(p));
  }

  Builder builder(tri.vertices_, d, options.insphere_tolerance, options.containment_tolerance);
  for (std::size_t v = d + 1; v < tri.vertices_.size(); ++v) builder.insert(v);
  tri.simplices_ = builder.finish();
  return tri;
}

bool Triangulation::barycentric_into(std::size_t simplex, std::span<const double> q, double* out) const {
  return simplex_weights(vertices_, simplices_[simplex].vertices.data(), dimension_, q.data(), out);
}

std::vector<double> Triangulation::barycentric(std::size_t simplex, std::span<const double> q) const {
  if (simplex >= simplices_.size()) {
    throw GeometryError(GeometryErrorKind::invalid_input, "simplex id out of range");
  }
  if (q.size() != dimension_) {
    throw GeometryError(GeometryErrorKind::invalid_input, "query dimension mismatch");
  }
  std::vector<double> w(dimension_ + 1);
  if (!barycentric_into(simplex, q, w.data())) {
    throw GeometryError(GeometryErrorKind::degenerate, "degenerate simplex " + std::to_string(simplex));
  }
  return w;
}

std::size_t Triangulation::exhaustive_locate(std::span<const double> q) const {
  std::array<double, kMaxVertices> w{};
  const double tol = options_.containment_tolerance;
  for (std::size_t s = 0; s < simplices_.size(); ++s) {
    if (!barycentric_into(s, q, w.data())) continue;
    if (*std::min_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(dimension_ + 1)) >= -tol) return s;
  }
  throw GeometryError(GeometryErrorKind::outside_bounding_simplex, "query lies outside the bounding simplex");
}

Location Triangulation::locate_with_weights(std::span<const double> q, std::optional<std::size_t> hint) const {
  if (q.size() != dimension_) {
    throw GeometryError(GeometryErrorKind::invalid_input, "query dimension mismatch");
  }
  for (double x : q) {
    if (!std::isfinite(x)) throw GeometryError(GeometryErrorKind::non_finite, "query has a non-finite coordinate");
  }
  const double tol = options_.containment_tolerance;
  const std::size_t n = dimension_ + 1;
  std::array<double, kMaxVertices> w{};

  std::size_t current = hint && *hint < simplices_.size() ? *hint : 0;
  std::optional<std::size_t> found;
  for (std::size_t step = 0; step < simplices_.size() + 16; ++step) {
    if (!barycentric_into(current, q, w.data())) break;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (w[i] < w[worst]) worst = i;
    }
    if (w[worst] >= -tol) {
      found = current;
      break;
    }
    const std::ptrdiff_t nb = simplices_[current].neighbors[worst];
    if (nb == kNoNeighbor) {
      throw GeometryError(GeometryErrorKind::outside_bounding_simplex, "query lies outside the bounding simplex");
    }
    current = static_cast<std::size_t>(nb);
  }
  if (!found) {
    found = exhaustive_locate(q);
    barycentric_into(*found, q, w.data());
  }

  // Gather every simplex that also contains q across near-zero facets and
  // keep the lowest id.
  std::size_t best = *found;
  bool on_facet = false;
  for (std::size_t i = 0; i < n; ++i) on_facet = on_facet || w[i] <= tol;
  if (on_facet) {
    std::vector<std::size_t> stack{*found};
    std::vector<std::size_t> seen{*found};
    std::array<double, kMaxVertices> wn{};
    while (!stack.empty()) {
      const std::size_t s = stack.back();
      stack.pop_back();
      barycentric_into(s, q, wn.data());
      for (std::size_t i = 0; i < n; ++i) {
        if (wn[i] > tol) continue;
        const std::ptrdiff_t nb = simplices_[s].neighbors[i];
        if (nb == kNoNeighbor) continue;
        const auto u = static_cast<std::size_t>(nb);
        if (std::find(seen.begin(), seen.end(), u) != seen.end()) continue;
        seen.push_back(u);
        std::array<double, kMaxVertices> wu{};
        if (!barycentric_into(u, q, wu.data())) continue;
        if (*std::min_element(wu.begin(), wu.begin() + static_cast<std::ptrdiff_t>(n)) < -tol) continue;
        best = std::min(best, u);
        stack.push_back(u);
      }
    }
  }

  Location loc;
  loc.simplex = best;
  loc.weights.resize(n);
  barycentric_into(best, q, loc.weights.data());
  return loc;
}

std::size_t Triangulation::locate(std::span<const double> q, std::optional<std::size_t> hint) const {
  return locate_with_weights(q, hint).simplex;
}

std::vector<double> Triangulation::site_memberships(const Location& loc, std::span<const double> q) const {
  std::vector<double> mu(site_count(), 0.0);
  const Simplex& s = simplices_[loc.simplex];
  if (options_.support == MembershipSupport::application_area) {
    for (std::size_t i = 0; i <= dimension_; ++i) {
      if (is_bounding_vertex(s.vertices[i])) continue;
      mu[s.vertices[i] - dimension_ - 1] = std::clamp(loc.weights[i], 0.0, 1.0);
    }
    return mu;
  }
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < site_count(); ++k) {
    const double d2 = squared_distance(vertices_[site_vertex(k)].data(), q.data(), dimension_);
    if (d2 < best) {
      best = d2;
      nearest = k;
    }
  }
  for (std::size_t i = 0; i <= dimension_; ++i) {
    if (s.vertices[i] == site_vertex(nearest)) mu[nearest] = std::clamp(loc.weights[i], 0.0, 1.0);
  }
  return mu;
}

std::vector<double> Triangulation::membership_vector(std::span<const double> q, std::size_t* hint) const {
  const Location loc = hint ? locate_with_weights(q, *hint) : locate_with_weights(q);
  if (hint) *hint = loc.simplex;
  return site_memberships(loc, q);
}

double Triangulation::membership(std::size_t site, std::span<const double> q) const {
  if (site >= site_count()) {
    throw GeometryError(GeometryErrorKind::invalid_input, "site index out of range");
  }
  const Location loc = locate_with_weights(q);
  const Simplex& s = simplices_[loc.simplex];
  const auto it = std::find(s.vertices.begin(), s.vertices.end(), site_vertex(site));
  if (it == s.vertices.end()) return 0.0;
  if (options_.support == MembershipSupport::voronoi_cell) return site_memberships(loc, q)[site];
  return std::clamp(loc.weights[static_cast<std::size_t>(it - s.vertices.begin())], 0.0, 1.0);
}

std::vector<std::vector<std::size_t>> Triangulation::site_neighbors() const {
  std::vector<std::vector<std::size_t>> out(site_count());
  for (const Simplex& s : simplices_) {
    for (std::size_t a : s.vertices) {
      if (is_bounding_vertex(a)) continue;
      for (std::size_t b : s.vertices) {
        if (b != a && !is_bounding_vertex(b)) out[a - dimension_ - 1].push_back(b - dimension_ - 1);
      }
    }
  }
  for (auto& list : out) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return out;
}

std::vector<std::size_t> Triangulation::application_area(std::size_t site) const {
  std::vector<std::size_t> out;
  const std::size_t v = site_vertex(site);
  for (std::size_t s = 0; s < simplices_.size(); ++s) {
    const auto& vs = simplices_[s].vertices;
    if (std::find(vs.begin(), vs.end(), v) != vs.end()) out.push_back(s);
  }
  return out;
}

void Triangulation::dump_csv(std::ostream& vertex_table, std::ostream& simplex_table) const {
  const auto old_precision = vertex_table.precision(17);
  vertex_table << "id,kind";
  for (std::size_t i = 0; i < dimension_; ++i) vertex_table << ",x" << i;
  vertex_table << '\n';
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    vertex_table << v << ',' << (is_bounding_vertex(v) ? "bounding" : "site");
    for (double x : vertices_[v]) vertex_table << ',' << x;
    vertex_table << '\n';
  }
  vertex_table.precision(old_precision);

  simplex_table << "id";
  for (std::size_t i = 0; i <= dimension_; ++i) simplex_table << ",v" << i;
  for (std::size_t i = 0; i <= dimension_; ++i) simplex_table << ",n" << i;
  simplex_table << '\n';
  for (std::size_t s = 0; s < simplices_.size(); ++s) {
    simplex_table << s;
    for (std::size_t v : simplices_[s].vertices) simplex_table << ',' << v;
    for (std::ptrdiff_t nb : simplices_[s].neighbors) simplex_table << ',' << nb;
    simplex_table << '\n';
  }
}

}  // namespace rfv::geometry
