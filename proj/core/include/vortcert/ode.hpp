#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace vortcert {

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;
/// Terminal event: integration stops at the first crossing from <= 0 to > 0.
using OdeEvent = std::function<double(const Eigen::VectorXd& y)>;
/// Called after each accepted step; returning false stops the integration.
using OdeObserver = std::function<bool(double t, const Eigen::VectorXd& y)>;

struct OdeOptions {
  double tol = 1e-9;        ///< local error per unit time, relative to 1 + |y_i|
  double h_init = 1e-3;
  double h_min = 1e-13;
  double h_max = 0.25;
  double event_time_tol = 1e-10;
  long max_steps = 2'000'000;
};

enum class OdeStatus { reached_end, event, stopped, step_underflow, max_steps };

struct OdeResult {
  OdeStatus status = OdeStatus::reached_end;
  double t = 0.0;
  Eigen::VectorXd y;
  int event = -1;
  long accepted = 0;
  long rejected = 0;
  double h_last = 0.0;  ///< last attempted step, to warm-start a restart
};

/// Dormand-Prince 5(4) with FSAL. Terminal events are located by the
/// Illinois variant of regula falsi on the step length, to event_time_tol.
OdeResult integrate_dopri5(const OdeRhs& rhs, Eigen::VectorXd y0, double t_end,
                           const std::vector<OdeEvent>& events, const OdeOptions& opts,
                           const OdeObserver& observer = {});

}  // namespace vortcert
