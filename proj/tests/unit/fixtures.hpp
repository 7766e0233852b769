#pragma once

#include <cmath>
#include <memory>
#include <numbers>

#include "vortcert/elliptic.hpp"
#include "vortcert/galerkin.hpp"
#include "vortcert/geometry.hpp"
#include "vortcert/transport.hpp"

namespace fx {

using namespace vortcert;

inline MeshPtr annulus(double h = 0.1) { return build_mesh(DomainSpec::annulus(2.0, 0.5, h)); }
inline MeshPtr unit_disc(double h = 0.05) { return build_mesh(DomainSpec::disc(1.0, h)); }

inline std::shared_ptr<const EllipticSolver> solver(MeshPtr m) {
  return std::make_shared<const EllipticSolver>(std::move(m));
}

/// Radial context: mu = 1, g = 0, h = scale on the whole outer circle.
inline LambdaContext radial_context(std::shared_ptr<const EllipticSolver> s, double scale = 1.0) {
  LambdaContext ctx;
  ctx.solver = s;
  ctx.psi_g = ScalarField::zeros(s->mesh(), "psi_g");
  ctx.mu = 1.0;
  ctx.h = BoundaryProfile::constant(1.0);
  ctx.h.scale = scale;
  return ctx;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace fx
