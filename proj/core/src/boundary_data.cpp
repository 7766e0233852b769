#include "vortcert/boundary_data.hpp"

#include <cmath>
#include <numbers>

namespace vortcert {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_angle_from(double theta, double lo) {
  double t = std::fmod(theta - lo, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return lo + t;
}

double FourierSeries::value(double theta) const {
  double v = mean;
  for (const auto& m : modes)
    v += m.cos_amp * std::cos(m.k * theta) + m.sin_amp * std::sin(m.k * theta);
  return v;
}

double FourierSeries::derivative(double theta) const {
  double d = 0.0;
  for (const auto& m : modes)
    d += m.k * (-m.cos_amp * std::sin(m.k * theta) + m.sin_amp * std::cos(m.k * theta));
  return d;
}

bool FourierSeries::identically_zero() const {
  if (mean != 0.0) return false;
  for (const auto& m : modes)
    if (m.cos_amp != 0.0 || m.sin_amp != 0.0) return false;
  return true;
}

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

double smooth_step_derivative(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  const double s = a + b;
  return a * b * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / (s * s);
}

bool SupportArc::contains(double theta) const {
  const double t = wrap_angle_from(theta, theta_a);
  return t <= theta_b;
}

double SupportArc::cutoff(double theta) const {
  const double t = wrap_angle_from(theta, theta_a);
  if (t > theta_b) return 0.0;
  if (ramp_width <= 0.0) return 1.0;
  return smooth_step((t - theta_a) / ramp_width) * smooth_step((theta_b - t) / ramp_width);
}

double SupportArc::cutoff_derivative(double theta) const {
  const double t = wrap_angle_from(theta, theta_a);
  if (t > theta_b || ramp_width <= 0.0) return 0.0;
  const double ua = (t - theta_a) / ramp_width;
  const double ub = (theta_b - t) / ramp_width;
  return (smooth_step_derivative(ua) * smooth_step(ub) -
          smooth_step(ua) * smooth_step_derivative(ub)) /
         ramp_width;
}

double BoundaryProfile::value(double theta) const {
  if (scale == 0.0) return 0.0;
  const double s = series.value(theta);
  return arc ? scale * s * arc->cutoff(theta) : scale * s;
}

double BoundaryProfile::derivative(double theta) const {
  if (scale == 0.0) return 0.0;
  if (!arc) return scale * series.derivative(theta);
  return scale * (series.derivative(theta) * arc->cutoff(theta) +
                  series.value(theta) * arc->cutoff_derivative(theta));
}

bool BoundaryProfile::in_support(double theta) const {
  if (support_empty()) return false;
  return !arc || arc->contains(theta);
}

bool BoundaryProfile::support_empty() const {
  if (scale == 0.0 || series.identically_zero()) return true;
  return arc && arc->length() <= 0.0;
}

double BoundaryProfile::support_lo() const { return arc ? arc->theta_a : -std::numbers::pi; }
double BoundaryProfile::support_hi() const { return arc ? arc->theta_b : std::numbers::pi; }

BoundaryProfile BoundaryProfile::constant(double c) {
  BoundaryProfile p;
  p.series = FourierSeries{1.0, {}};
  p.scale = c;
  return p;
}

}  // namespace vortcert
