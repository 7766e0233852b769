#include "vortcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "vortcert/error.hpp"

namespace vortcert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kCurveSamples = 1024;
constexpr double kBaryTol = 1e-12;

double golden_min(const auto& f, double a, double b, int iters = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::annulus: return "annulus";
    case DomainKind::deformed_annulus: return "deformed-annulus";
    case DomainKind::disc: return "disc";
  }
  return "unknown";
}

std::string to_string(BoundaryLabel label) {
  return label == BoundaryLabel::sigma1 ? "sigma1" : "sigma2";
}

DomainSpec DomainSpec::annulus(double r_outer, double r_inner, double h) {
  DomainSpec s;
  s.kind = DomainKind::annulus;
  s.r_outer = r_outer;
  s.r_inner = r_inner;
  s.mesh_target_h = h;
  return s;
}

DomainSpec DomainSpec::disc(double r, double h) {
  DomainSpec s;
  s.kind = DomainKind::disc;
  s.r_outer = r;
  s.r_inner = 0.0;
  s.mesh_target_h = h;
  return s;
}

// ---------------------------------------------------------------------------
// BoundaryCurve

BoundaryCurve::BoundaryCurve(double base_radius, std::vector<FourierMode> modes)
    : base_radius_(base_radius), modes_(std::move(modes)) {}

double BoundaryCurve::radius(double theta) const {
  double r = base_radius_;
  for (const auto& m : modes_)
    r += m.cos_amp * std::cos(m.k * theta) + m.sin_amp * std::sin(m.k * theta);
  return r;
}

double BoundaryCurve::radius_derivative(double theta) const {
  double d = 0.0;
  for (const auto& m : modes_)
    d += m.k * (-m.cos_amp * std::sin(m.k * theta) + m.sin_amp * std::cos(m.k * theta));
  return d;
}

Vec2 BoundaryCurve::point(double theta) const {
  const double r = radius(theta);
  return {r * std::cos(theta), r * std::sin(theta)};
}

Vec2 BoundaryCurve::tangent(double theta) const {
  const double r = radius(theta);
  const double dr = radius_derivative(theta);
  const double c = std::cos(theta), s = std::sin(theta);
  return {dr * c - r * s, dr * s + r * c};
}

Vec2 BoundaryCurve::enclosing_normal(double theta) const {
  const Vec2 t = tangent(theta);
  return Vec2(t.y(), -t.x()).normalized();
}

double BoundaryCurve::radial_level(const Vec2& x) const {
  return x.norm() - radius(std::atan2(x.y(), x.x()));
}

double BoundaryCurve::distance(const Vec2& x) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kCurveSamples; ++i) {
    const double th = -kPi + kTwoPi * i / kCurveSamples;
    const double d = (point(th) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const double step = kTwoPi / kCurveSamples;
  const double center = -kPi + step * best;
  const double refined =
      golden_min([&](double th) { return (point(th) - x).squaredNorm(); }, center - step,
                 center + step);
  return std::sqrt(std::min(best_d, refined));
}

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(const DomainSpec& spec) : spec_(spec) {
  if (!(spec.mesh_target_h > 0.0)) fail(ErrorKind::InvalidDomain, "mesh_target_h must be positive");
  if (!(spec.r_outer > 0.0)) fail(ErrorKind::InvalidDomain, "outer radius must be positive");

  std::vector<FourierMode> outer_modes;
  std::vector<FourierMode> inner_modes;
  if (spec.kind == DomainKind::deformed_annulus) {
    outer_modes = spec.outer_perturbation;
    inner_modes = spec.inner_perturbation;
  }
  outer_ = BoundaryCurve(spec.r_outer, outer_modes);

  if (spec.kind == DomainKind::disc) {
    has_inner_ = false;
    if (spec.sigma1 != CurveId::outer)
      fail(ErrorKind::InvalidDomain, "disc fixture has only an outer boundary");
  } else {
    if (!(spec.r_inner > 0.0)) fail(ErrorKind::InvalidDomain, "inner radius must be positive");
    if (!(spec.r_inner < spec.r_outer))
      fail(ErrorKind::InvalidDomain, "inner radius must be below outer radius");
    inner_ = BoundaryCurve(spec.r_inner, inner_modes);
  }

  // Both curves are star-shaped about the origin, so positivity and strict
  // radial ordering at every sampled angle make them simple and disjoint.
  for (int i = 0; i < 4 * kCurveSamples; ++i) {
    const double th = kTwoPi * i / (4.0 * kCurveSamples);
    const double ro = outer_.radius(th);
    if (!(ro > 0.0)) fail(ErrorKind::InvalidDomain, "outer radius becomes nonpositive");
    if (has_inner_) {
      const double ri = inner_.radius(th);
      if (!(ri > 0.0)) fail(ErrorKind::InvalidDomain, "inner radius becomes nonpositive");
      if (!(ri < ro)) fail(ErrorKind::InvalidDomain, "boundary curves intersect");
    }
  }
}

bool Domain::has(BoundaryLabel label) const {
  if (has_inner_) return true;
  return label == BoundaryLabel::sigma1;
}

bool Domain::is_outer(BoundaryLabel label) const {
  return (label == BoundaryLabel::sigma1) == (spec_.sigma1 == CurveId::outer);
}

BoundaryLabel Domain::label_of(CurveId id) const {
  return id == spec_.sigma1 ? BoundaryLabel::sigma1 : BoundaryLabel::sigma2;
}

const BoundaryCurve& Domain::curve(BoundaryLabel label) const {
  if (!has(label)) fail(ErrorKind::InvalidDomain, "domain has no " + to_string(label));
  return is_outer(label) ? outer_ : inner_;
}

double Domain::level(BoundaryLabel label, const Vec2& x) const {
  if (!has(label)) return -std::numeric_limits<double>::infinity();
  const double l = curve(label).radial_level(x);
  return is_outer(label) ? l : -l;
}

double Domain::outside_level(const Vec2& x) const {
  double l = outer_.radial_level(x);
  if (has_inner_) l = std::max(l, -inner_.radial_level(x));
  return l;
}

bool Domain::contains(const Vec2& x, double tol) const { return outside_level(x) <= tol; }

Vec2 Domain::normal(BoundaryLabel label, double theta) const {
  const Vec2 n = curve(label).enclosing_normal(theta);
  return is_outer(label) ? n : Vec2(-n);
}

Vec2 Domain::normal_at(BoundaryLabel label, const Vec2& x) const {
  return normal(label, std::atan2(x.y(), x.x()));
}

Vec2 Domain::project(BoundaryLabel label, const Vec2& x) const {
  return curve(label).point(std::atan2(x.y(), x.x()));
}

double Domain::distance(BoundaryLabel label, const Vec2& x) const {
  return curve(label).distance(x);
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(Domain domain, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<VertexFlag> flags)
    : domain_(std::move(domain)),
      vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      flags_(std::move(flags)) {
  build_topology();
  build_grid();
}

void Mesh::build_topology() {
  const int nt = static_cast<int>(triangles_.size());
  const int nv = static_cast<int>(vertices_.size());
  areas_.resize(nt);
  bary_grad_.resize(3 * static_cast<std::size_t>(nt));
  const double h = domain_.spec().mesh_target_h;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    const Vec2& a = vertices_[tri[0]];
    const Vec2& b = vertices_[tri[1]];
    const Vec2& c = vertices_[tri[2]];
    const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    areas_[t] = 0.5 * det;
    if (!(areas_[t] > 1e-14 * h * h)) {
      std::ostringstream os;
      os << "triangle " << t << " has signed area " << areas_[t];
      fail(ErrorKind::MeshFailure, os.str());
    }
    // grad lambda_k = perp of the opposite edge / (2 area)
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = vertices_[tri[(k + 1) % 3]];
      const Vec2& q = vertices_[tri[(k + 2) % 3]];
      const Vec2 e = q - p;
      bary_grad_[3 * t + k] = Vec2(-e.y(), e.x()) / det;
    }
  }

  // vertex -> triangle incidence (CSR)
  vt_offsets_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri) ++vt_offsets_[v + 1];
  for (int v = 0; v < nv; ++v) vt_offsets_[v + 1] += vt_offsets_[v];
  vt_items_.resize(vt_offsets_.back());
  std::vector<int> fill(vt_offsets_.begin(), vt_offsets_.end() - 1);
  for (int t = 0; t < nt; ++t)
    for (int v : triangles_[t]) vt_items_[fill[v]++] = t;

  // edge adjacency
  neighbors_.assign(3 * static_cast<std::size_t>(nt), -1);
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // (lo,hi) -> (t, k)
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_[t][(k + 1) % 3];
      const int b = triangles_[t][(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edges.find(key);
      if (it == edges.end()) {
        edges.emplace(key, std::make_pair(t, k));
      } else {
        if (it->second.first < 0) fail(ErrorKind::MeshFailure, "non-manifold edge");
        neighbors_[3 * t + k] = it->second.first;
        neighbors_[3 * it->second.first + it->second.second] = t;
        it->second.first = -1;
      }
    }
  }

  boundary_edges_.clear();
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      if (neighbors_[3 * t + k] >= 0) continue;
      const int a = triangles_[t][(k + 1) % 3];
      const int b = triangles_[t][(k + 2) % 3];
      if (flags_[a] == VertexFlag::interior || flags_[a] != flags_[b])
        fail(ErrorKind::MeshFailure, "boundary edge with inconsistent vertex flags");
      BoundaryEdge e;
      e.v = {a, b};
      e.label = flags_[a] == VertexFlag::sigma1 ? BoundaryLabel::sigma1 : BoundaryLabel::sigma2;
      e.triangle = t;
      const Vec2 mid = 0.5 * (vertices_[a] + vertices_[b]);
      e.normal = domain_.normal_at(e.label, mid);
      boundary_edges_.push_back(e);
    }
  }
}

void Mesh::build_grid() {
  Vec2 lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double h = domain_.spec().mesh_target_h;
  cell_ = h;
  grid_lo_ = lo - Vec2::Constant(1e-9);
  nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - grid_lo_.x()) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - grid_lo_.y()) / cell_)) + 1);
  const std::size_t ncell = static_cast<std::size_t>(nx_) * ny_;
  std::vector<std::vector<int>> buckets(ncell);
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    Vec2 tlo = vertices_[triangles_[t][0]], thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(vertices_[triangles_[t][k]]);
      thi = thi.cwiseMax(vertices_[triangles_[t][k]]);
    }
    const int i0 = static_cast<int>((tlo.x() - grid_lo_.x()) / cell_);
    const int i1 = static_cast<int>((thi.x() - grid_lo_.x()) / cell_);
    const int j0 = static_cast<int>((tlo.y() - grid_lo_.y()) / cell_);
    const int j1 = static_cast<int>((thi.y() - grid_lo_.y()) / cell_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
  cell_offsets_.assign(ncell + 1, 0);
  for (std::size_t c = 0; c < ncell; ++c)
    cell_offsets_[c + 1] = cell_offsets_[c] + static_cast<int>(buckets[c].size());
  cell_items_.clear();
  cell_items_.reserve(cell_offsets_.back());
  for (const auto& b : buckets) cell_items_.insert(cell_items_.end(), b.begin(), b.end());
}

Vec2 Mesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

std::vector<int> Mesh::vertex_triangles(int v) const {
  return {vt_items_.begin() + vt_offsets_[v], vt_items_.begin() + vt_offsets_[v + 1]};
}

double Mesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& tri : triangles_)
    for (int k = 0; k < 3; ++k)
      m = std::max(m, (vertices_[tri[k]] - vertices_[tri[(k + 1) % 3]]).norm());
  return m;
}

double Mesh::min_edge_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& tri : triangles_)
    for (int k = 0; k < 3; ++k)
      m = std::min(m, (vertices_[tri[k]] - vertices_[tri[(k + 1) % 3]]).norm());
  return m;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (double x : areas_) a += x;
  return a;
}

std::array<double, 3> Mesh::barycentric(int t, const Vec2& x) const {
  const auto& tri = triangles_[t];
  std::array<double, 3> l{};
  for (int k = 0; k < 3; ++k) {
    const Vec2& p = vertices_[tri[(k + 1) % 3]];
    l[k] = bary_grad_[3 * t + k].dot(x - p);
  }
  return l;
}

bool Mesh::try_triangle(int t, const Vec2& x, Location& out) const {
  auto l = barycentric(t, x);
  if (l[0] < -kBaryTol || l[1] < -kBaryTol || l[2] < -kBaryTol) return false;
  double s = 0.0;
  for (double& v : l) {
    v = std::max(v, 0.0);
    s += v;
  }
  for (double& v : l) v /= s;
  out.inside = true;
  out.triangle = t;
  out.bary = l;
  out.boundary_edge = -1;
  out.signed_distance = 0.0;
  return true;
}

Location Mesh::locate(const Vec2& x, int hint) const {
  Location loc;
  if (hint >= 0 && hint < static_cast<int>(triangles_.size())) {
    int t = hint;
    for (int step = 0; step < 12; ++step) {
      const auto l = barycentric(t, x);
      int worst = 0;
      for (int k = 1; k < 3; ++k)
        if (l[k] < l[worst]) worst = k;
      if (l[worst] >= -kBaryTol) {
        try_triangle(t, x, loc);
        return loc;
      }
      const int nb = neighbors_[3 * t + worst];
      if (nb < 0) break;
      t = nb;
    }
  }
  const int i = static_cast<int>(std::floor((x.x() - grid_lo_.x()) / cell_));
  const int j = static_cast<int>(std::floor((x.y() - grid_lo_.y()) / cell_));
  if (i >= 0 && j >= 0 && i < nx_ && j < ny_) {
    const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
    for (int k = cell_offsets_[c]; k < cell_offsets_[c + 1]; ++k)
      if (try_triangle(cell_items_[k], x, loc)) return loc;
  }
  return locate_outside(x);
}

Location Mesh::locate_outside(const Vec2& x) const {
  Location loc;
  loc.inside = false;
  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e < static_cast<int>(boundary_edges_.size()); ++e) {
    const auto& be = boundary_edges_[e];
    const Vec2& a = vertices_[be.v[0]];
    const Vec2& b = vertices_[be.v[1]];
    const Vec2 ab = b - a;
    const double s = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const double d = (x - (a + s * ab)).norm();
    if (d < best) {
      best = d;
      loc.boundary_edge = e;
    }
  }
  const auto& be = boundary_edges_[loc.boundary_edge];
  const Vec2& a = vertices_[be.v[0]];
  const Vec2 ab = vertices_[be.v[1]] - a;
  const Vec2 out_normal = Vec2(ab.y(), -ab.x()).normalized();
  const Vec2 into = centroid(be.triangle) - a;
  const double sign = out_normal.dot(into) > 0.0 ? -1.0 : 1.0;
  loc.signed_distance = (x - a).dot(sign * out_normal) >= 0.0 ? best : -best;
  loc.triangle = be.triangle;
  loc.bary = barycentric(be.triangle, x);
  loc.nearest_label = be.label;
  return loc;
}

Location locate_point(const Mesh& mesh, const Vec2& x) { return mesh.locate(x); }

// ---------------------------------------------------------------------------
// Mesh generation

namespace {

double sampled_ring_length(const BoundaryCurve& inner, const BoundaryCurve& outer, double s,
                           bool disc) {
  const int n = 2048;
  double len = 0.0;
  auto ring_point = [&](double th) {
    const double ro = outer.radius(th);
    const double ri = disc ? 0.0 : inner.radius(th);
    const double r = (1.0 - s) * ri + s * ro;
    return Vec2(r * std::cos(th), r * std::sin(th));
  };
  Vec2 prev = ring_point(0.0);
  for (int i = 1; i <= n; ++i) {
    const Vec2 p = ring_point(kTwoPi * i / n);
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

}  // namespace

MeshPtr build_mesh(const DomainSpec& spec) {
  Domain domain(spec);
  const double h = spec.mesh_target_h;
  const bool disc = spec.kind == DomainKind::disc;
  const BoundaryCurve& outer = domain.curve(domain.label_of(CurveId::outer));
  BoundaryCurve inner_dummy;
  const BoundaryCurve& inner = disc ? inner_dummy : domain.curve(domain.label_of(CurveId::inner));

  double max_gap = 0.0;
  for (int i = 0; i < 4096; ++i) {
    const double th = kTwoPi * i / 4096.0;
    max_gap = std::max(max_gap, outer.radius(th) - (disc ? 0.0 : inner.radius(th)));
  }
  const int n_rings = std::max(1, static_cast<int>(std::ceil(max_gap / h - 1e-9)));

  std::vector<Vec2> vertices;
  std::vector<VertexFlag> flags;
  std::vector<int> ring_start(n_rings + 2, 0);
  std::vector<int> ring_count(n_rings + 1, 0);

  const VertexFlag outer_flag =
      domain.label_of(CurveId::outer) == BoundaryLabel::sigma1 ? VertexFlag::sigma1 : VertexFlag::sigma2;
  const VertexFlag inner_flag =
      outer_flag == VertexFlag::sigma1 ? VertexFlag::sigma2 : VertexFlag::sigma1;

  for (int k = 0; k <= n_rings; ++k) {
    const double s = static_cast<double>(k) / n_rings;
    ring_start[k] = static_cast<int>(vertices.size());
    if (disc && k == 0) {
      vertices.emplace_back(0.0, 0.0);
      flags.push_back(VertexFlag::interior);
      ring_count[k] = 1;
      continue;
    }
    const double len = sampled_ring_length(inner, outer, s, disc);
    const int n = std::max(disc ? 6 : 3, static_cast<int>(std::ceil(len / h - 1e-9)));
    ring_count[k] = n;
    for (int j = 0; j < n; ++j) {
      const double th = kTwoPi * j / n;
      Vec2 p;
      if (k == n_rings) {
        p = outer.point(th);
      } else if (k == 0) {
        p = inner.point(th);
      } else {
        const double ri = disc ? 0.0 : inner.radius(th);
        const double r = (1.0 - s) * ri + s * outer.radius(th);
        p = Vec2(r * std::cos(th), r * std::sin(th));
      }
      vertices.push_back(p);
      if (k == n_rings)
        flags.push_back(outer_flag);
      else if (k == 0)
        flags.push_back(inner_flag);
      else
        flags.push_back(VertexFlag::interior);
    }
  }
  ring_start[n_rings + 1] = static_cast<int>(vertices.size());

  // Zip consecutive rings together by advancing along increasing angle.
  std::vector<std::array<int, 3>> triangles;
  for (int k = 0; k < n_rings; ++k) {
    const int na = ring_count[k], nb = ring_count[k + 1];
    const int a0 = ring_start[k], b0 = ring_start[k + 1];
    int i = 0, j = 0;
    while (i < na || j < nb) {
      const double ta = kTwoPi * (i + 1) / na;
      const double tb = kTwoPi * (j + 1) / nb;
      std::array<int, 3> tri{};
      const bool advance_a = j >= nb || (i < na && ta <= tb);
      if (advance_a) {
        tri = {a0 + i % na, a0 + (i + 1) % na, b0 + j % nb};
        ++i;
      } else {
        tri = {a0 + i % na, b0 + (j + 1) % nb, b0 + j % nb};
        ++j;
      }
      if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
      const Vec2& p = vertices[tri[0]];
      const Vec2& q = vertices[tri[1]];
      const Vec2& r = vertices[tri[2]];
      const double det = (q - p).x() * (r - p).y() - (q - p).y() * (r - p).x();
      if (det < 0.0) std::swap(tri[1], tri[2]);
      triangles.push_back(tri);
    }
  }

  return std::make_shared<const Mesh>(std::move(domain), std::move(vertices), std::move(triangles),
                                      std::move(flags));
}

// ---------------------------------------------------------------------------
// Inner radius

InnerRadius inner_radius(const Mesh& mesh, int vertex_stride) {
  const Domain& d = mesh.domain();
  InnerRadius out;
  if (d.spec().kind == DomainKind::disc) {
    double rmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4096; ++i) rmin = std::min(rmin, d.curve(BoundaryLabel::sigma1).radius(kTwoPi * i / 4096.0));
    out.rho = rmin;
    if (d.spec().outer_perturbation.empty()) return out;
  }
  const bool disc = d.spec().kind == DomainKind::disc;
  const BoundaryLabel outer_label = d.label_of(CurveId::outer);
  const BoundaryCurve& outer = d.curve(outer_label);

  double rho = std::numeric_limits<double>::infinity();
  if (!disc) {
    const BoundaryCurve& inner = d.curve(d.label_of(CurveId::inner));
    for (int i = 0; i < 4096; ++i) {
      const double th = kTwoPi * i / 4096.0;
      rho = std::min(rho, 0.5 * (outer.radius(th) - inner.radius(th)));
    }
  } else {
    rho = out.rho;
  }

  const int stride = std::max(1, vertex_stride);
  for (int attempt = 0; attempt < 200; ++attempt) {
    bool ok = true;
    for (std::size_t v = 0; v < mesh.num_vertices() && ok; v += stride) {
      const Vec2& x = mesh.vertices()[v];
      const double th = std::atan2(x.y(), x.x());
      const double ri = disc ? 0.0 : d.curve(d.label_of(CurveId::inner)).radius(th);
      const double ro = outer.radius(th);
      const double lo = disc ? 0.0 : ri + rho;
      const double hi = ro - rho;
      if (lo > hi + 1e-12) {
        ok = false;
        break;
      }
      const double rc = std::clamp(x.norm(), lo, std::max(lo, hi));
      const Vec2 c = rc * Vec2(std::cos(th), std::sin(th));
      const double tol = 1e-9 * rho;
      if ((x - c).norm() > rho + tol) ok = false;
      if (d.distance(outer_label, c) < rho - tol) ok = false;
      if (!disc && d.distance(d.label_of(CurveId::inner), c) < rho - tol) ok = false;
    }
    if (ok) {
      out.rho = rho;
      return out;
    }
    rho *= 0.9;
    ++out.shrink_steps;
  }
  fail(ErrorKind::InvalidDomain, "could not verify a positive inner radius");
}

}  // namespace vortcert
