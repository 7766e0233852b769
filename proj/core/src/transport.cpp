#include "vortcert/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "vortcert/error.hpp"
#include "vortcert/mesh_io.hpp"
#include "vortcert/ode.hpp"
#include "vortcert/parallel.hpp"

namespace vortcert {

namespace {

constexpr double kStagnation = 1e-12;
constexpr double kOnBoundary = 1e-12;

OdeOptions ode_options(const TraceOptions& opts) {
  OdeOptions o;
  o.tol = opts.tol;
  return o;
}

std::vector<OdeEvent> boundary_events(const Domain& d) {
  std::vector<OdeEvent> ev;
  ev.emplace_back([&d](const Eigen::VectorXd& y) {
    return d.level(BoundaryLabel::sigma1, Vec2(y[0], y[1]));
  });
  if (d.has(BoundaryLabel::sigma2))
    ev.emplace_back([&d](const Eigen::VectorXd& y) {
      return d.level(BoundaryLabel::sigma2, Vec2(y[0], y[1]));
    });
  return ev;
}

double angle_of(const Vec2& x) { return std::atan2(x.y(), x.x()); }

using CellRhs = std::function<void(int tri, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

// Integrates triangle by triangle so the right-hand side is smooth on every
// segment: leaving the current triangle is a terminal event, after which the
// integration restarts in the neighbour. Between the mesh polygon and the
// curved boundary the last triangle's affine data is continued. With
// cellwise == false the rhs is called with tri = -1 throughout.
OdeResult integrate_cells(const Mesh& mesh, bool cellwise, const CellRhs& rhs, Eigen::VectorXd y,
                          double t_end, const TraceOptions& topts, const OdeObserver& observer = {}) {
  const std::vector<OdeEvent> bnd = boundary_events(mesh.domain());
  const auto nb = static_cast<int>(bnd.size());
  OdeOptions o = ode_options(topts);
  int tri = -1;
  bool free = !cellwise;
  if (cellwise) {
    const Location loc = mesh.locate(Vec2(y[0], y[1]));
    tri = loc.triangle;
    free = !loc.inside;
  }
  double t0 = 0.0;
  long accepted = 0, rejected = 0;
  OdeObserver obs;
  if (observer) obs = [&](double t, const Eigen::VectorXd& s) { return observer(t0 + t, s); };
  for (long seg = 0;; ++seg) {
    std::vector<OdeEvent> ev = bnd;
    if (!free) {
      // a start a rounding error outside an edge would hide the exit through
      // it, so each exit level is shifted to include the start point
      const auto b0 = mesh.barycentric(tri, Vec2(y[0], y[1]));
      for (int k = 0; k < 3; ++k) {
        const double shift = std::max(0.0, -b0[k]);
        ev.emplace_back([&mesh, tri, k, shift](const Eigen::VectorXd& s) {
          return -mesh.barycentric(tri, Vec2(s[0], s[1]))[k] - shift;
        });
      }
    }
    const OdeRhs f = [&rhs, tri](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) { rhs(tri, s, ds); };
    OdeResult r = integrate_dopri5(f, y, t_end - t0, ev, o, obs);
    accepted += r.accepted;
    rejected += r.rejected;
    if (r.status == OdeStatus::event && r.event >= nb && seg < 1'000'000) {
      t0 += r.t;
      y = r.y;
      if (r.h_last > 0.0) o.h_init = r.h_last;
      const Vec2 x(y[0], y[1]);
      // a cell exit through a boundary vertex can land a rounding error past
      // the curve, where the boundary event would never change sign
      int on_bnd = -1;
      for (int k = 0; k < nb && on_bnd < 0; ++k) {
        if (bnd[k](y) < 0.0) continue;
        Eigen::VectorXd dy(y.size());
        rhs(tri, y, dy);
        const BoundaryLabel label = k == 0 ? BoundaryLabel::sigma1 : BoundaryLabel::sigma2;
        if (mesh.domain().normal_at(label, x).dot(Vec2(dy[0], dy[1])) > 0.0) on_bnd = k;
      }
      if (on_bnd >= 0) {
        r.event = on_bnd;
        r.t = t0;
        r.accepted = accepted;
        r.rejected = rejected;
        return r;
      }
      const int next = mesh.neighbor(tri, r.event - nb);
      if (next < 0) {
        free = true;
        continue;
      }
      const auto b = mesh.barycentric(next, x);
      if (std::min({b[0], b[1], b[2]}) < -1e-9) {
        // passed close to a vertex: the edge neighbour may be the wrong cell
        const Location loc = mesh.locate(x, next);
        tri = loc.inside && loc.triangle != tri ? loc.triangle : next;
      } else {
        tri = next;
      }
      continue;
    }
    r.t += t0;
    r.accepted = accepted;
    r.rejected = rejected;
    return r;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

VelocityField::VelocityField(MeshPtr mesh, Eigen::MatrixX2d nodal, double mu)
    : mesh_(std::move(mesh)), nodal_(std::move(nodal)), mu_(mu) {
  if (nodal_.rows() != static_cast<Eigen::Index>(mesh_->num_vertices()))
    fail(ErrorKind::MeshMismatch, "velocity nodal data has wrong length");
  discrete_zero_ = nodal_.size() == 0 || nodal_.cwiseAbs().maxCoeff() == 0.0;
}

VelocityField VelocityField::linear(MeshPtr mesh, double mu) {
  const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
  return VelocityField(std::move(mesh), Eigen::MatrixX2d::Zero(n, 2), mu);
}

VelocityField::Sample VelocityField::eval(const Vec2& x, int& hint) const {
  Sample s;
  s.q = -mu_ * x;
  s.Dq = -mu_ * Mat2::Identity();
  if (discrete_zero_) return s;
  const Location loc = mesh_->locate(x, hint);
  hint = loc.triangle;
  s.triangle = loc.triangle;
  s.bary = loc.bary;
  const auto& tri = mesh_->triangles()[loc.triangle];
  for (int k = 0; k < 3; ++k) {
    const Vec2 g = nodal_.row(tri[k]).transpose();
    s.q += loc.bary[k] * g;
    s.Dq += g * mesh_->bary_gradient(loc.triangle, k).transpose();
  }
  return s;
}

VelocityField::Sample VelocityField::eval_in(const Vec2& x, int tri) const {
  Sample s;
  s.q = -mu_ * x;
  s.Dq = -mu_ * Mat2::Identity();
  s.triangle = tri;
  s.bary = mesh_->barycentric(tri, x);
  if (discrete_zero_) return s;
  const auto& t = mesh_->triangles()[tri];
  for (int k = 0; k < 3; ++k) {
    const Vec2 g = nodal_.row(t[k]).transpose();
    s.q += s.bary[k] * g;
    s.Dq += g * mesh_->bary_gradient(tri, k).transpose();
  }
  return s;
}

Vec2 VelocityField::operator()(const Vec2& x) const {
  int hint = -1;
  return eval(x, hint).q;
}

VelocityField make_q(const ScalarField& Phi, const ScalarField& Psi_g, double mu) {
  if (Phi.mesh != Psi_g.mesh) fail(ErrorKind::MeshMismatch, "Phi and Psi_g live on different meshes");
  const Eigen::VectorXd sum = Phi.values + Psi_g.values;
  return VelocityField(Phi.mesh, recovered_perp_gradient(*Phi.mesh, sum), mu);
}

// ---------------------------------------------------------------------------

PerturbationSet PerturbationSet::from_nodal(const std::vector<Eigen::MatrixX2d>& fields) {
  PerturbationSet p;
  p.count = static_cast<int>(fields.size());
  if (fields.empty()) return p;
  p.nodal.resize(fields.front().rows(), 2 * p.count);
  for (int j = 0; j < p.count; ++j) p.nodal.middleCols(2 * j, 2) = fields[j];
  return p;
}

PerturbationSet PerturbationSet::from_function(
    int count,
    std::function<void(const Vec2&, Eigen::Ref<Eigen::Matrix<double, 2, Eigen::Dynamic>>)> f) {
  PerturbationSet p;
  p.count = count;
  p.analytic = std::move(f);
  return p;
}

void PerturbationSet::eval(const Mesh& mesh, const VelocityField::Sample& at, const Vec2& x,
                           Eigen::Ref<Eigen::Matrix<double, 2, Eigen::Dynamic>> out) const {
  if (analytic) {
    analytic(x, out);
    return;
  }
  int t = at.triangle;
  std::array<double, 3> bary = at.bary;
  if (t < 0) {
    const Location loc = mesh.locate(x);
    t = loc.triangle;
    bary = loc.bary;
  }
  const auto& tri = mesh.triangles()[t];
  out.setZero();
  for (int k = 0; k < 3; ++k) {
    const auto row = nodal.row(tri[k]);
    for (int j = 0; j < count; ++j) {
      out(0, j) += bary[k] * row(2 * j);
      out(1, j) += bary[k] * row(2 * j + 1);
    }
  }
}

// ---------------------------------------------------------------------------

std::string to_string(TraceOutcome outcome) {
  switch (outcome) {
    case TraceOutcome::hit_sigma1: return "hit_sigma1";
    case TraceOutcome::hit_sigma2: return "hit_sigma2";
    case TraceOutcome::timeout: return "timeout";
    case TraceOutcome::stagnation: return "stagnation";
    case TraceOutcome::failure: return "failure";
  }
  return "unknown";
}

namespace {

// Exit at t = 0 when y sits on a boundary component and the flow leaves there.
bool immediate_exit(const VelocityField& q, const Vec2& y, double sign, CharacteristicTrace& tr) {
  const Domain& d = q.mesh()->domain();
  for (BoundaryLabel label : {BoundaryLabel::sigma1, BoundaryLabel::sigma2}) {
    if (!d.has(label) || d.level(label, y) < -kOnBoundary) continue;
    const Vec2 v = sign * q(y);
    if (v.dot(d.normal_at(label, y)) > 0.0) {
      tr.outcome = label == BoundaryLabel::sigma1 ? TraceOutcome::hit_sigma1 : TraceOutcome::hit_sigma2;
      tr.exit_time = 0.0;
      tr.exit_point = d.project(label, y);
      return true;
    }
  }
  return false;
}

void finish(const Domain& d, const OdeResult& res, CharacteristicTrace& tr) {
  const Vec2 x(res.y[0], res.y[1]);
  switch (res.status) {
    case OdeStatus::event: {
      const BoundaryLabel label = res.event == 0 ? BoundaryLabel::sigma1 : BoundaryLabel::sigma2;
      tr.outcome = label == BoundaryLabel::sigma1 ? TraceOutcome::hit_sigma1 : TraceOutcome::hit_sigma2;
      tr.exit_time = res.t;
      tr.exit_point = d.project(label, x);
      break;
    }
    case OdeStatus::reached_end:
      tr.outcome = TraceOutcome::timeout;
      tr.exit_time = res.t;
      tr.exit_point = x;
      break;
    case OdeStatus::stopped:
      tr.outcome = TraceOutcome::stagnation;
      tr.exit_time = res.t;
      tr.exit_point = x;
      break;
    case OdeStatus::step_underflow:
    case OdeStatus::max_steps:
      tr.outcome = TraceOutcome::failure;
      tr.exit_time = res.t;
      tr.exit_point = x;
      tr.message = res.status == OdeStatus::step_underflow ? "step size underflow" : "step limit reached";
      break;
  }
}

}  // namespace

CharacteristicTrace trace(const VelocityField& q, const Vec2& y, Direction dir, const TraceOptions& opts) {
  const Domain& d = q.mesh()->domain();
  if (d.outside_level(y) > 1e-9) fail(ErrorKind::TraceFailure, "start point lies outside the domain");
  CharacteristicTrace tr;
  tr.start = y;
  tr.direction = dir;
  const double sign = dir == Direction::backward ? -1.0 : 1.0;
  if (opts.keep_samples) tr.samples.emplace_back(0.0, y);

  if (immediate_exit(q, y, sign, tr)) {
    if (opts.keep_samples) tr.samples.emplace_back(0.0, tr.exit_point);
    return tr;
  }
  if (q(y).norm() < kStagnation) {
    tr.outcome = TraceOutcome::stagnation;
    tr.exit_point = y;
    return tr;
  }

  int hint = -1;
  CellRhs rhs = [&](int tri, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const Vec2 x(s[0], s[1]);
    const Vec2 v = sign * (tri >= 0 ? q.eval_in(x, tri) : q.eval(x, hint)).q;
    ds[0] = v.x();
    ds[1] = v.y();
  };
  int obs_hint = -1;
  bool slow_prev = false;
  OdeObserver obs = [&](double t, const Eigen::VectorXd& s) {
    const Vec2 x(s[0], s[1]);
    if (opts.keep_samples) tr.samples.emplace_back(t, x);
    const bool slow = q.eval(x, obs_hint).q.norm() < kStagnation;
    const bool stop = slow && slow_prev;
    slow_prev = slow;
    return !stop;
  };
  Eigen::VectorXd y0(2);
  y0 << y.x(), y.y();
  const OdeResult res = integrate_cells(*q.mesh(), !q.discrete_zero(), rhs, y0, opts.T_max, opts, obs);
  finish(d, res, tr);
  if (opts.keep_samples && res.status == OdeStatus::event) tr.samples.emplace_back(tr.exit_time, tr.exit_point);
  return tr;
}

void write_trace_csv(const CharacteristicTrace& tr, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path.string());
  os << "t,x,y\n";
  for (const auto& [t, x] : tr.samples)
    os << format_double(t) << ',' << format_double(x.x()) << ',' << format_double(x.y()) << '\n';
}

// ---------------------------------------------------------------------------

TransversalityReport check_transversality(const VelocityField& q, const BoundaryProfile& h,
                                          int n_samples, const TraceOptions& opts, unsigned threads) {
  TransversalityReport rep;
  rep.T_max = opts.T_max;
  if (h.support_empty() || n_samples <= 0) {
    rep.c1 = std::numeric_limits<double>::infinity();
    rep.T_star = 0.0;
    return rep;
  }
  const Domain& d = q.mesh()->domain();
  const BoundaryCurve& s1 = d.curve(BoundaryLabel::sigma1);
  const bool full = !h.arc.has_value();
  const double lo = h.support_lo(), hi = h.support_hi();
  const int n = std::max(2, n_samples);

  struct Row {
    Vec2 y, z;
    double entry = 0.0, exit = 0.0, T = 0.0;
    bool ok = false;
  };
  std::vector<Row> rows(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const double th = full ? lo + (hi - lo) * static_cast<double>(i) / n
                           : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    Row& r = rows[i];
    r.y = s1.point(th);
    r.entry = -d.normal(BoundaryLabel::sigma1, th).dot(q(r.y));
    const CharacteristicTrace tr = trace(q, r.y, Direction::forward, opts);
    r.T = tr.exit_time;
    if (tr.outcome == TraceOutcome::hit_sigma2) {
      r.ok = true;
      r.z = tr.exit_point;
      r.exit = d.normal_at(BoundaryLabel::sigma2, r.z).dot(q(r.z));
    } else {
      r.z = tr.exit_point;
      r.exit = -std::numeric_limits<double>::infinity();
    }
  });

  rep.c1 = std::numeric_limits<double>::infinity();
  rep.samples_checked = n;
  rep.worst_entry = {rows[0].y, rows[0].entry};
  rep.worst_exit = {rows[0].z, rows[0].exit};
  for (const Row& r : rows) {
    if (r.entry < rep.worst_entry.second) rep.worst_entry = {r.y, r.entry};
    if (r.exit < rep.worst_exit.second) rep.worst_exit = {r.z, r.exit};
    if (!r.ok) rep.all_exit_sigma2 = false;
    rep.c1 = std::min({rep.c1, r.entry, r.exit});
    rep.T_star = std::max(rep.T_star, r.T);
    if (r.ok) rep.exit_points.push_back(r.z);
  }
  return rep;
}

TransportResult solve_transport(const VelocityField& q, const BoundaryProfile& h,
                                const TraceOptions& opts, unsigned threads) {
  const MeshPtr& mesh = q.mesh();
  const std::size_t nv = mesh->num_vertices();
  TransportResult out;
  out.omega = ScalarField::zeros(mesh, "omega");
  out.tau = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  out.outcomes.assign(nv, TraceOutcome::failure);
  if (h.support_empty()) {
    out.outcomes.assign(nv, TraceOutcome::hit_sigma2);
    return out;
  }
  TraceOptions o = opts;
  o.keep_samples = false;
  parallel_for(nv, threads, [&](std::size_t v) {
    CharacteristicTrace tr;
    try {
      tr = trace(q, mesh->vertices()[v], Direction::backward, o);
    } catch (const Error&) {
      tr.outcome = TraceOutcome::failure;
    }
    out.outcomes[v] = tr.outcome;
    if (tr.outcome == TraceOutcome::hit_sigma1) {
      out.tau[v] = tr.exit_time;
      out.omega.values[v] = std::exp(tr.exit_time) * h.value(angle_of(tr.exit_point));
    }
  });
  for (TraceOutcome oc : out.outcomes) {
    if (oc == TraceOutcome::timeout || oc == TraceOutcome::stagnation) ++out.timeouts;
    if (oc == TraceOutcome::failure) ++out.failures;
  }
  return out;
}

// ---------------------------------------------------------------------------

TangentState tangent_solve(const VelocityField& q, const PerturbationSet& qt, const Vec2& y,
                           const BoundaryProfile& h, const TraceOptions& opts, double c1) {
  const int m = qt.count;
  TangentState st;
  st.tau_tilde = Eigen::VectorXd::Zero(m);
  st.omega_tilde = Eigen::VectorXd::Zero(m);
  st.xi_tilde = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, m);
  st.w_exit = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, m);
  TraceOptions o = opts;
  o.keep_samples = false;
  st.base = trace(q, y, Direction::backward, o);
  if (st.base.outcome != TraceOutcome::hit_sigma1) return st;

  const double th0 = angle_of(st.base.exit_point);
  st.omega = std::exp(st.base.exit_time) * h.value(th0);
  if (st.base.exit_time == 0.0 || m == 0) return st;
  if (!h.in_support(th0) && h.value(th0) == 0.0 && h.derivative(th0) == 0.0) return st;

  const Mesh& mesh = *q.mesh();
  const Domain& d = mesh.domain();
  const bool need_loc = !qt.analytic;
  int hint = -1;
  Eigen::Matrix<double, 2, Eigen::Dynamic> Qt(2, m);
  CellRhs rhs = [&](int tri, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const Vec2 x(s[0], s[1]);
    VelocityField::Sample smp = tri >= 0 ? q.eval_in(x, tri) : q.eval(x, hint);
    if (need_loc && smp.triangle < 0) {
      const Location loc = mesh.locate(x, hint);
      hint = loc.triangle;
      smp.triangle = loc.triangle;
      smp.bary = loc.bary;
    }
    qt.eval(mesh, smp, x, Qt);
    ds[0] = -smp.q.x();
    ds[1] = -smp.q.y();
    for (int j = 0; j < m; ++j) {
      const Vec2 w(s[2 + 2 * j], s[3 + 2 * j]);
      const Vec2 dw = -smp.Dq * w - Qt.col(j);
      ds[2 + 2 * j] = dw.x();
      ds[3 + 2 * j] = dw.y();
    }
  };
  Eigen::VectorXd s0 = Eigen::VectorXd::Zero(2 + 2 * m);
  s0[0] = y.x();
  s0[1] = y.y();
  const OdeResult res = integrate_cells(mesh, need_loc || !q.discrete_zero(), rhs, s0, opts.T_max, opts);
  if (res.status != OdeStatus::event || res.event != 0)
    fail(ErrorKind::TraceFailure, "tangent integration did not reach Sigma_1 (status " +
                                      std::to_string(static_cast<int>(res.status)) + ", event " +
                                      std::to_string(res.event) + ", t " + format_double(res.t) +
                                      ", base tau " + format_double(st.base.exit_time) + ")");

  const Vec2 xi = d.project(BoundaryLabel::sigma1, Vec2(res.y[0], res.y[1]));
  const double tau = res.t;
  const double th = angle_of(xi);
  const Vec2 n = d.normal_at(BoundaryLabel::sigma1, xi);
  const Vec2 qxi = q(xi);
  const double nq = n.dot(qxi);
  if (std::abs(nq) < std::max(0.5 * c1, 1e-14))
    fail(ErrorKind::DegenerateExit, "characteristic meets Sigma_1 almost tangentially");

  const double e = std::exp(tau);
  const double hv = h.value(th), hd = h.derivative(th);
  st.omega = e * hv;
  for (int j = 0; j < m; ++j) {
    const Vec2 w(res.y[2 + 2 * j], res.y[3 + 2 * j]);
    const double tt = n.dot(w) / nq;
    const Vec2 xt = w - tt * qxi;
    const double dth = (xi.x() * xt.y() - xi.y() * xt.x()) / xi.squaredNorm();
    st.w_exit.col(j) = w;
    st.tau_tilde[j] = tt;
    st.xi_tilde.col(j) = xt;
    st.omega_tilde[j] = e * (tt * hv + hd * dth);
  }
  return st;
}

Eigen::MatrixXd tangent_field(const VelocityField& q, const PerturbationSet& qt,
                              const BoundaryProfile& h, const TraceOptions& opts, double c1,
                              unsigned threads) {
  const Mesh& mesh = *q.mesh();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()), qt.count);
  if (h.support_empty() || qt.count == 0) return out;
  parallel_for(mesh.num_vertices(), threads, [&](std::size_t v) {
    const TangentState st = tangent_solve(q, qt, mesh.vertices()[v], h, opts, c1);
    out.row(static_cast<Eigen::Index>(v)) = st.omega_tilde.transpose();
  });
  return out;
}

double flow_jacobian_check(const VelocityField& q, const Vec2& y, double t, const TraceOptions& opts) {
  if (t <= 0.0) return 1.0;
  int hint = -1;
  CellRhs rhs = [&](int tri, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const Vec2 x(s[0], s[1]);
    const VelocityField::Sample smp = tri >= 0 ? q.eval_in(x, tri) : q.eval(x, hint);
    ds[0] = -smp.q.x();
    ds[1] = -smp.q.y();
    Eigen::Map<const Mat2> W(s.data() + 2);
    Eigen::Map<Mat2> dW(ds.data() + 2);
    dW = -smp.Dq * W;
  };
  Eigen::VectorXd s0(6);
  s0 << y.x(), y.y(), 1.0, 0.0, 0.0, 1.0;
  const OdeResult res = integrate_cells(*q.mesh(), !q.discrete_zero(), rhs, s0, t, opts);
  if (res.status != OdeStatus::reached_end)
    fail(ErrorKind::TraceFailure, "characteristic does not survive to the requested time");
  Eigen::Map<const Mat2> W(res.y.data() + 2);
  return W.determinant();
}

SupBounds sup_bounds(const VelocityField& q, const BoundaryProfile& h, int boundary_samples, double safety) {
  SupBounds b;
  b.safety = safety;
  const Mesh& mesh = *q.mesh();
  int hint = -1;
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto& tri = mesh.triangles()[t];
    std::array<Vec2, 4> pts{mesh.vertices()[tri[0]], mesh.vertices()[tri[1]], mesh.vertices()[tri[2]],
                            mesh.centroid(t)};
    for (const Vec2& x : pts) {
      hint = t;
      const auto s = q.eval(x, hint);
      b.sup_q = std::max(b.sup_q, s.q.norm());
    }
    hint = t;
    const auto s = q.eval(mesh.centroid(t), hint);
    const Eigen::JacobiSVD<Mat2> svd(s.Dq);
    b.sup_Dq = std::max(b.sup_Dq, svd.singularValues()[0]);
  }
  b.M = safety * std::max(b.sup_q, b.sup_Dq);

  if (h.support_empty()) return b;
  const Domain& d = mesh.domain();
  const BoundaryCurve& s1 = d.curve(BoundaryLabel::sigma1);
  const bool full = !h.arc.has_value();
  const double lo = h.support_lo(), hi = h.support_hi();
  const int n = std::max(2, boundary_samples);
  b.boundary_samples = n;
  b.inf_nq_sigma1 = std::numeric_limits<double>::infinity();
  hint = -1;
  for (int i = 0; i < n; ++i) {
    const double th = full ? lo + (hi - lo) * i / n : lo + (hi - lo) * i / (n - 1);
    const Vec2 x = s1.point(th);
    const Vec2 v = q.eval(x, hint).q;
    b.sup_q_sigma1 = std::max(b.sup_q_sigma1, v.norm());
    b.inf_nq_sigma1 = std::min(b.inf_nq_sigma1, std::abs(d.normal(BoundaryLabel::sigma1, th).dot(v)));
  }
  return b;
}

double normal_velocity_lipschitz(const VelocityField& q, BoundaryLabel label, int samples) {
  const Domain& d = q.mesh()->domain();
  if (!d.has(label)) return 0.0;
  const BoundaryCurve& c = d.curve(label);
  int hint = -1;
  double L = 0.0;
  Vec2 prev_x = c.point(-std::numbers::pi);
  double prev_f = d.normal(label, -std::numbers::pi).dot(q.eval(prev_x, hint).q);
  for (int i = 1; i <= samples; ++i) {
    const double th = -std::numbers::pi + 2.0 * std::numbers::pi * i / samples;
    const Vec2 x = c.point(th);
    const double f = d.normal(label, th).dot(q.eval(x, hint).q);
    L = std::max(L, std::abs(f - prev_f) / (x - prev_x).norm());
    prev_x = x;
    prev_f = f;
  }
  return L;
}

}  // namespace vortcert
