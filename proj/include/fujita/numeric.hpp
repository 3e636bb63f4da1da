#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fujita {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y ~ slope*x + intercept. Needs at least two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x).
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Geometric ladder t0, t0*ratio, ... with `count` entries.
std::vector<double> geometric_ladder(double t0, double ratio, int count);

/// Locale-independent shortest round-trip form with 17 significant digits.
std::string format_double(double v);

/// Volume of the unit ball in R^n (n >= 0).
double unit_ball_volume(int n);

/// Surface area of the unit sphere S^{n-1} in R^n (n >= 1).
double unit_sphere_area(int n);

}  // namespace fujita
