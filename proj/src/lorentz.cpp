#include "fujita/lorentz.hpp"

#include "fujita/errors.hpp"
#include "fujita/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace fujita {

namespace {

constexpr double kReconcileTol = 1e-8;
constexpr double kMarginTol = 1e-8;

bool is_inf(double v) { return std::isinf(v) && v > 0; }

// Independent route to mu_f: accumulate measure per distinct |value| in an
// ordered map, then read superlevel masses from the top.
std::vector<std::pair<double, double>> superlevel_masses(const GridFunction& f) {
    std::map<double, double, std::greater<>> per_level;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = std::abs(f[i]);
        if (v > 0.0) per_level[v] += f.grid->measure(i);
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(per_level.size());
    double acc = 0.0;
    for (const auto& [level, mass] : per_level) {
        acc += mass;
        out.emplace_back(level, acc);
    }
    return out;
}

double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

void LorentzIndex::validate() const {
    require(r >= 1.0 && !std::isnan(r), ErrorCode::InvalidArgument, "Lorentz index r must lie in [1, inf]");
    require(sigma >= 1.0 && !std::isnan(sigma), ErrorCode::InvalidArgument,
            "Lorentz index sigma must lie in [1, inf]");
}

std::string LorentzIndex::describe() const {
    std::ostringstream os;
    os << "L^{" << format_double(r) << "," << format_double(sigma) << "}";
    return os.str();
}

double RearrangementTable::distribution(double lambda) const {
    // First level not exceeding lambda; everything above it contributes.
    const auto it = std::upper_bound(levels.begin(), levels.end(), lambda, std::greater<>());
    const auto k = static_cast<std::size_t>(it - levels.begin());
    return k == 0 ? 0.0 : cumulative[k - 1];
}

double RearrangementTable::rearrangement(double s) const {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    return it == cumulative.end() ? 0.0 : levels[static_cast<std::size_t>(it - cumulative.begin())];
}

double RearrangementTable::spherical(double x_norm) const {
    return rearrangement(unit_ball_volume(dimension) * std::pow(x_norm, dimension));
}

RearrangementTable rearrange(const GridFunction& f) {
    require(f.grid != nullptr, ErrorCode::InvalidArgument, "grid function without a grid");
    RearrangementTable t;
    t.total_mass = f.grid->total_measure();
    t.dimension = f.grid->spec().dimension;
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return std::abs(f[i]) > std::abs(f[j]); });
    double acc = 0.0;
    for (std::size_t idx : order) {
        const double v = std::abs(f[idx]);
        if (v == 0.0) break;
        acc += f.grid->measure(idx);
        if (!t.levels.empty() && t.levels.back() == v) {
            t.cumulative.back() = acc;
        } else {
            t.levels.push_back(v);
            t.cumulative.push_back(acc);
        }
    }
    return t;
}

double distribution_fn(const GridFunction& f, double lambda) {
    require(lambda >= 0.0, ErrorCode::InvalidArgument, "distribution level must be nonnegative");
    return rearrange(f).distribution(lambda);
}

double rearrangement(const GridFunction& f, double s) {
    require(s >= 0.0, ErrorCode::InvalidArgument, "rearrangement argument must be nonnegative");
    return rearrange(f).rearrangement(s);
}

double lebesgue_norm(const GridFunction& f, double r) {
    require(r >= 1.0, ErrorCode::InvalidArgument, "Lebesgue exponent must be >= 1");
    if (is_inf(r)) return f.sup_norm();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), r) * f.grid->measure(i);
    return std::pow(s, 1.0 / r);
}

double weak_norm(const GridFunction& f, double r) {
    require(r >= 1.0, ErrorCode::InvalidArgument, "Lorentz index r must lie in [1, inf]");
    const RearrangementTable t = rearrange(f);
    if (is_inf(r)) return t.levels.empty() ? 0.0 : t.levels.front();
    double best = 0.0;
    // s^{1/r} f*(s) peaks at the right end of each step.
    for (std::size_t k = 0; k < t.levels.size(); ++k) {
        best = std::max(best, t.levels[k] * std::pow(t.cumulative[k], 1.0 / r));
    }
    return best;
}

LorentzNorm lorentz_norm(const GridFunction& f, LorentzIndex idx) {
    idx.validate();
    LorentzNorm out;
    const RearrangementTable t = rearrange(f);
    if (t.levels.empty()) return out;

    const double r = idx.r;
    const double sigma = idx.sigma;

    if (is_inf(r)) {
        if (is_inf(sigma)) {
            out.value = out.rearrangement_form = t.levels.front();
            out.distribution_form = f.sup_norm();
        } else {
            out.value = out.rearrangement_form = out.distribution_form = kInf;
            out.infinite = true;
            return out;
        }
    } else if (is_inf(sigma)) {
        out.rearrangement_form = weak_norm(f, r);
        double best = 0.0;
        for (const auto& [level, mass] : superlevel_masses(f)) {
            best = std::max(best, level * std::pow(mass, 1.0 / r));
        }
        out.distribution_form = best;
        out.value = out.rearrangement_form;
    } else {
        const double q = sigma / r;
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t k = 0; k < t.levels.size(); ++k) {
            const double cur = std::pow(t.cumulative[k], q);
            acc += std::pow(t.levels[k], sigma) * (cur - prev);
            prev = cur;
        }
        out.rearrangement_form = std::pow(acc / q, 1.0 / sigma);

        const auto masses = superlevel_masses(f);
        double dacc = 0.0;
        for (std::size_t k = 0; k < masses.size(); ++k) {
            const double next = k + 1 < masses.size() ? std::pow(masses[k + 1].first, sigma) : 0.0;
            dacc += std::pow(masses[k].second, q) * (std::pow(masses[k].first, sigma) - next) / sigma;
        }
        out.distribution_form = std::pow(r, 1.0 / sigma) * std::pow(dacc, 1.0 / sigma);
        out.value = out.rearrangement_form;
    }

    require(relative_gap(out.rearrangement_form, out.distribution_form) <= kReconcileTol,
            ErrorCode::InvariantViolation,
            "Lorentz norm routes disagree for " + idx.describe() + ": " + format_double(out.rearrangement_form) +
                " vs " + format_double(out.distribution_form));
    return out;
}

double embedding_constant(double r, double sigma1, double sigma2) {
    require(sigma1 <= sigma2, ErrorCode::InvalidArgument, "embedding needs sigma1 <= sigma2");
    if (is_inf(r)) return 1.0;
    const double e = 1.0 / sigma1 - (is_inf(sigma2) ? 0.0 : 1.0 / sigma2);
    return std::pow(sigma1 / r, e);
}

void InequalityParams::validate() const {
    require(r0 >= 1.0 && r0 <= r && r <= r1, ErrorCode::InvalidArgument,
            "interpolation needs 1 <= r0 <= r <= r1");
    require(theta >= 0.0 && theta <= 1.0, ErrorCode::InvalidArgument, "interpolation theta must lie in [0, 1]");
    const double inv_r1 = is_inf(r1) ? 0.0 : 1.0 / r1;
    const double rhs = (1.0 - theta) / r0 + theta * inv_r1;
    require(std::abs(1.0 / r - rhs) <= 1e-12, ErrorCode::InvalidArgument,
            "interpolation indices violate 1/r = (1-theta)/r0 + theta/r1");
    require(h1 >= 1.0 && h2 >= 1.0, ErrorCode::InvalidArgument, "Hoelder exponents must be >= 1");
    const double inv_h1 = is_inf(h1) ? 0.0 : 1.0 / h1;
    const double inv_h2 = is_inf(h2) ? 0.0 : 1.0 / h2;
    require(std::abs(inv_h1 + inv_h2 - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
            "Hoelder pair violates 1/h1 + 1/h2 = 1");
    require(sharp_r > 1.0 && !is_inf(sharp_r), ErrorCode::InvalidArgument,
            "pointwise rearrangement bound needs 1 < r < inf");
}

bool InequalityReport::all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& c) { return c.holds; });
}

InequalityReport inequality_suite(const GridFunction& f, const GridFunction& g, const InequalityParams& params) {
    params.validate();
    require_same_grid(f, g);
    InequalityReport rep;
    auto add = [&rep](std::string name, double lhs, double rhs) {
        InequalityCheck c{std::move(name), lhs, rhs, rhs - lhs, false};
        c.holds = is_inf(rhs) || c.margin >= -kMarginTol * std::abs(rhs);
        if (is_inf(rhs)) c.margin = kInf;
        rep.checks.push_back(std::move(c));
    };

    // Pointwise f# <= C_1 |x|^{-n/r}: fit C_1 at the breakpoints, compare with the weak norm.
    const RearrangementTable t = rearrange(f);
    const int n = t.dimension;
    const double cn = unit_ball_volume(n);
    double c1 = 0.0;
    for (std::size_t k = 0; k < t.levels.size(); ++k) {
        // Just left of the breakpoint s = cumulative[k], f# still equals levels[k].
        const double x = std::pow(t.cumulative[k] / cn, 1.0 / n);
        c1 = std::max(c1, t.levels[k] * std::pow(x, static_cast<double>(n) / params.sharp_r));
    }
    rep.fitted_c1 = c1;
    add("sharp_pointwise", c1, std::pow(cn, -1.0 / params.sharp_r) * weak_norm(f, params.sharp_r) * (1.0 + 1e-12));

    const double lhs10 = lorentz_norm(f, {params.r, kInf}).value;
    const double a = lorentz_norm(f, {params.r0, kInf}).value;
    const double b = lorentz_norm(f, {params.r1, kInf}).value;
    add("weak_interpolation", lhs10, std::pow(a, 1.0 - params.theta) * std::pow(b, params.theta));

    double prod = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) prod += std::abs(f[i] * g[i]) * f.grid->measure(i);
    const LorentzNorm fn = lorentz_norm(f, {params.h1, 1.0});
    const LorentzNorm gn = lorentz_norm(g, {params.h2, kInf});
    double rhs = fn.value * gn.value;
    if (fn.value == 0.0 || gn.value == 0.0) rhs = 0.0;
    add("lorentz_hoelder", prod, rhs);
    return rep;
}

}  // namespace fujita
