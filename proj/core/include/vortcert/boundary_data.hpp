#pragma once

#include <optional>
#include <vector>

namespace vortcert {

/// One angular mode a*cos(k t) + b*sin(k t).
struct FourierMode {
  int k = 1;
  double cos_amp = 0.0;
  double sin_amp = 0.0;

  bool operator==(const FourierMode&) const = default;
};

/// mean + sum of modes, as a function of the polar boundary parameter.
struct FourierSeries {
  double mean = 0.0;
  std::vector<FourierMode> modes;

  double value(double theta) const;
  double derivative(double theta) const;
  bool identically_zero() const;

  bool operator==(const FourierSeries&) const = default;
};

/// Closed parameter interval [theta_a, theta_b] of a boundary curve. The
/// cutoff ramps from 0 to 1 over `ramp_width` at each end with a C-infinity
/// step, so the support of the cut-off profile is exactly this arc.
struct SupportArc {
  double theta_a = -1.0;
  double theta_b = 1.0;
  double ramp_width = 0.2;

  bool operator==(const SupportArc&) const = default;

  double length() const { return theta_b - theta_a; }
  bool contains(double theta) const;
  double cutoff(double theta) const;
  double cutoff_derivative(double theta) const;
};

/// C-infinity step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);
double smooth_step_derivative(double u);

/// Vorticity boundary data h on Sigma_1: scale * series(theta) * cutoff(theta).
/// Without an arc the profile is supported on the whole curve.
struct BoundaryProfile {
  FourierSeries series{1.0, {}};
  std::optional<SupportArc> arc;
  double scale = 1.0;

  bool operator==(const BoundaryProfile&) const = default;

  double value(double theta) const;
  /// d/dtheta; divide by the curve speed for the arclength derivative.
  double derivative(double theta) const;
  bool in_support(double theta) const;
  bool support_empty() const;

  /// Parameter range to sample Supp(h): [lo, hi].
  double support_lo() const;
  double support_hi() const;

  static BoundaryProfile constant(double c);
};

/// Stream-function boundary data g, one series per boundary component.
struct StreamBoundaryData {
  FourierSeries sigma1;
  FourierSeries sigma2;

  bool operator==(const StreamBoundaryData&) const = default;
};

/// Maps an angle into [lo, lo + 2*pi).
double wrap_angle_from(double theta, double lo);

}  // namespace vortcert
