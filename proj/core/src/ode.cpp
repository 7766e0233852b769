#include "vortcert/ode.hpp"

#include <algorithm>
#include <cmath>

namespace vortcert {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
  const OdeRhs& rhs;
  Eigen::VectorXd k2, k3, k4, k5, k6, tmp;

  explicit Stepper(const OdeRhs& f, Eigen::Index n)
      : rhs(f), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n) {}

  // One step from (t, y) with derivative k1; writes y1 and the error estimate
  // (needs k7 = f(t+h, y1), returned for FSAL reuse).
  void step(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& k1, double h,
            Eigen::VectorXd& y1, Eigen::VectorXd& k7, Eigen::VectorXd* err) {
    tmp = y + h * a21 * k1;
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, y1, k7);
    if (err) *err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  }
};

// Smallest s in (0, h] with g(y(t+s)) > 0, bracketed to `tol`.
double locate_root(Stepper& st, const OdeEvent& g, double t, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& k1, double h, double glo, double ghi, double tol,
                   Eigen::VectorXd& ys, Eigen::VectorXd& kd) {
  double lo = 0.0, hi = h;
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double s = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    st.step(t, y, k1, s, ys, kd, nullptr);
    const double gs = g(ys);
    if (gs > 0.0) {
      hi = s;
      ghi = gs;
      if (side == 1) glo *= 0.5;
      side = 1;
    } else {
      lo = s;
      glo = gs;
      if (side == -1) ghi *= 0.5;
      side = -1;
    }
  }
  return hi;
}

}  // namespace

OdeResult integrate_dopri5(const OdeRhs& rhs, Eigen::VectorXd y0, double t_end,
                           const std::vector<OdeEvent>& events, const OdeOptions& opts,
                           const OdeObserver& observer) {
  const Eigen::Index n = y0.size();
  OdeResult res;
  res.y = std::move(y0);
  if (t_end <= 0.0) return res;

  Stepper st(rhs, n);
  Eigen::VectorXd k1(n), k7(n), y1(n), err(n), ys(n), kdummy(n);
  rhs(0.0, res.y, k1);
  double t = 0.0;
  double h = std::min({opts.h_init, opts.h_max, t_end});

  while (true) {
    if (res.accepted + res.rejected >= opts.max_steps) {
      res.status = OdeStatus::max_steps;
      break;
    }
    const bool last = t + h >= t_end;
    if (last) h = t_end - t;
    st.step(t, res.y, k1, h, y1, k7, &err);

    double ratio = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = opts.tol * h * (1.0 + std::max(std::abs(res.y[i]), std::abs(y1[i])));
      ratio = std::max(ratio, std::abs(err[i]) / scale);
    }
    if (!std::isfinite(ratio)) ratio = 1e10;

    if (ratio > 1.0) {
      ++res.rejected;
      h *= std::max(0.1, 0.9 * std::pow(ratio, -0.25));
      if (h < opts.h_min) {
        res.status = OdeStatus::step_underflow;
        break;
      }
      continue;
    }

    if (!events.empty()) {
      double best_s = INFINITY;
      int best = -1;
      for (std::size_t i = 0; i < events.size(); ++i) {
        const double g1 = events[i](y1);
        if (!(g1 > 0.0)) continue;
        const double g0 = events[i](res.y);
        if (g0 > 0.0) continue;
        const double s = locate_root(st, events[i], t, res.y, k1, h, g0, g1, opts.event_time_tol, ys, kdummy);
        if (s < best_s) {
          best_s = s;
          best = static_cast<int>(i);
        }
      }
      if (best >= 0) {
        st.step(t, res.y, k1, best_s, ys, kdummy, nullptr);
        res.t = t + best_s;
        res.y = ys;
        res.event = best;
        res.status = OdeStatus::event;
        res.h_last = h;
        ++res.accepted;
        return res;
      }
    }

    res.h_last = h;
    t = last ? t_end : t + h;
    res.y.swap(y1);
    k1.swap(k7);
    ++res.accepted;
    res.t = t;
    if (observer && !observer(t, res.y)) {
      res.status = OdeStatus::stopped;
      return res;
    }
    if (last) {
      res.status = OdeStatus::reached_end;
      return res;
    }
    const double fac = ratio > 0.0 ? std::min(5.0, 0.9 * std::pow(ratio, -0.25)) : 5.0;
    h = std::min(h * fac, opts.h_max);
  }
  res.t = t;
  return res;
}

}  // namespace vortcert
