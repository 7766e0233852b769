#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vortcert/boundary_data.hpp"

namespace vortcert {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class DomainKind { annulus, deformed_annulus, disc };
enum class CurveId { outer, inner };
enum class BoundaryLabel { sigma1, sigma2 };
enum class VertexFlag : std::uint8_t { interior, sigma1, sigma2 };

std::string to_string(DomainKind kind);
std::string to_string(BoundaryLabel label);

struct DomainSpec {
  DomainKind kind = DomainKind::annulus;
  double r_outer = 2.0;
  double r_inner = 0.5;
  std::vector<FourierMode> outer_perturbation;
  std::vector<FourierMode> inner_perturbation;
  CurveId sigma1 = CurveId::outer;
  double mesh_target_h = 0.1;

  bool operator==(const DomainSpec&) const = default;

  static DomainSpec annulus(double r_outer, double r_inner, double h);
  /// Test fixture: a disc of radius r with a single boundary curve (Sigma_1).
  static DomainSpec disc(double r, double h);
};

/// Star-shaped polar curve r(theta) = R + sum_k (a_k cos k theta + b_k sin k theta).
class BoundaryCurve {
 public:
  BoundaryCurve() = default;
  BoundaryCurve(double base_radius, std::vector<FourierMode> modes);

  double radius(double theta) const;
  double radius_derivative(double theta) const;
  Vec2 point(double theta) const;
  /// d point / d theta.
  Vec2 tangent(double theta) const;
  double speed(double theta) const { return tangent(theta).norm(); }
  /// Unit normal pointing away from the region the curve encloses.
  Vec2 enclosing_normal(double theta) const;
  /// |x| - r(theta(x)); zero exactly on the curve, positive beyond it.
  double radial_level(const Vec2& x) const;
  /// Euclidean distance, sampled then refined by golden-section search.
  double distance(const Vec2& x) const;

 private:
  double base_radius_ = 1.0;
  std::vector<FourierMode> modes_;
};

/// The (deformed) annular domain with its two labeled boundary components.
class Domain {
 public:
  explicit Domain(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  bool has(BoundaryLabel label) const;
  const BoundaryCurve& curve(BoundaryLabel label) const;
  bool is_outer(BoundaryLabel label) const;
  BoundaryLabel label_of(CurveId id) const;

  /// Positive when x lies beyond the given component (outside D).
  double level(BoundaryLabel label, const Vec2& x) const;
  /// max over components; <= 0 inside the closed domain.
  double outside_level(const Vec2& x) const;
  bool contains(const Vec2& x, double tol = 1e-12) const;

  /// Outward unit normal of D at the curve point with parameter theta.
  Vec2 normal(BoundaryLabel label, double theta) const;
  Vec2 normal_at(BoundaryLabel label, const Vec2& x) const;
  /// Radial projection onto the curve (exact for star-shaped curves).
  Vec2 project(BoundaryLabel label, const Vec2& x) const;
  /// Distance from x to the given component.
  double distance(BoundaryLabel label, const Vec2& x) const;

 private:
  DomainSpec spec_;
  BoundaryCurve outer_;
  BoundaryCurve inner_;
  bool has_inner_ = true;
};

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryLabel label = BoundaryLabel::sigma1;
  Vec2 normal = Vec2::Zero();
  int triangle = -1;
};

/// Result of a point query. Inside: triangle + barycentric coordinates in [0,1].
/// Outside: nearest boundary edge, its triangle, the signed distance to that
/// edge (positive outside) and unclamped barycentric coordinates, which give
/// the affine extension of nodal data from that triangle.
struct Location {
  bool inside = false;
  int triangle = -1;
  std::array<double, 3> bary{0.0, 0.0, 0.0};
  int boundary_edge = -1;
  BoundaryLabel nearest_label = BoundaryLabel::sigma1;
  double signed_distance = 0.0;
};

class Mesh {
 public:
  Mesh(Domain domain, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<VertexFlag> flags);

  const Domain& domain() const { return domain_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<VertexFlag>& vertex_flags() const { return flags_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  /// Signed area (positive for counterclockwise triangles).
  double area(int t) const { return areas_[t]; }
  /// Gradient of the k-th barycentric coordinate on triangle t.
  const Vec2& bary_gradient(int t, int k) const { return bary_grad_[3 * t + k]; }
  Vec2 centroid(int t) const;
  /// Neighbor across the edge opposite local vertex k, -1 on the boundary.
  int neighbor(int t, int k) const { return neighbors_[3 * t + k]; }
  /// Triangles incident to vertex v.
  std::vector<int> vertex_triangles(int v) const;

  double max_edge_length() const;
  double min_edge_length() const;
  double total_area() const;

  /// Point location: walk from `hint` when given, else the bucket grid.
  Location locate(const Vec2& x, int hint = -1) const;
  std::array<double, 3> barycentric(int t, const Vec2& x) const;

 private:
  void build_topology();
  void build_grid();
  Location locate_outside(const Vec2& x) const;
  bool try_triangle(int t, const Vec2& x, Location& out) const;

  Domain domain_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<VertexFlag> flags_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<double> areas_;
  std::vector<Vec2> bary_grad_;
  std::vector<int> neighbors_;
  std::vector<int> vt_offsets_;
  std::vector<int> vt_items_;

  // Uniform bucket grid over the bounding box, listing triangles per cell.
  Vec2 grid_lo_ = Vec2::Zero();
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<int> cell_offsets_;
  std::vector<int> cell_items_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Structured ring-by-ring triangulation of the domain.
MeshPtr build_mesh(const DomainSpec& spec);

struct InnerRadius {
  double rho = 0.0;
  int shrink_steps = 0;
};

/// Verified lower bound on the inner radius: every sampled vertex lies in a
/// disc of radius rho contained in D.
InnerRadius inner_radius(const Mesh& mesh, int vertex_stride = 1);

Location locate_point(const Mesh& mesh, const Vec2& x);

}  // namespace vortcert
