#include "fujita/numeric.hpp"

#include "fujita/errors.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace fujita {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::DimensionMismatch: return "dimension mismatch";
        case ErrorCode::GridMismatch: return "grid mismatch";
        case ErrorCode::NonConvergence: return "non-convergence";
        case ErrorCode::InvariantViolation: return "invariant violation";
        case ErrorCode::RegimeMismatch: return "wrong regime";
        case ErrorCode::SmallnessUnmet: return "smallness unmet";
        case ErrorCode::Vacuous: return "vacuous input";
        case ErrorCode::FitFailure: return "fit failure";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::Config: return "invalid config";
    }
    return "unknown error";
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "fit_line: size mismatch");
    require(x.size() >= 2, ErrorCode::InvalidArgument, "fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0, ErrorCode::InvalidArgument, "fit_line: abscissae are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0 && y[i] > 0, ErrorCode::InvalidArgument,
                "fit_loglog: values must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

std::vector<double> geometric_ladder(double t0, double ratio, int count) {
    require(t0 > 0 && ratio > 1 && count > 0, ErrorCode::InvalidArgument,
            "geometric_ladder: need t0 > 0, ratio > 1, count > 0");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = t0 * std::pow(ratio, k);
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double unit_sphere_area(int n) {
    return n * unit_ball_volume(n);
}

}  // namespace fujita
