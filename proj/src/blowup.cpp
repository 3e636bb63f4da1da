#include "fujita/blowup.hpp"

#include "fujita/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace fujita {

namespace {

constexpr int kKaplanTerms = 30;
constexpr int kBoundTruncation = 60;

std::vector<double> fine_ladder(double t0, double horizon, int per_octave) {
    std::vector<double> out;
    const double ratio = std::pow(2.0, 1.0 / per_octave);
    for (int k = 0;; ++k) {
        const double t = t0 * std::pow(ratio, k);
        if (t >= horizon * (1.0 - 1e-12)) break;
        out.push_back(t);
    }
    out.push_back(horizon);
    return out;
}

double kaplan_value(const Propagator& prop, const GridFunction& u0, double p, double t) {
    return std::pow(t, 1.0 / (p - 1.0)) * prop.apply(t, u0).sup_norm();
}

WeightSpec spec_for(WeightCase c, double alpha, int n) {
    return c == WeightCase::AxisPower ? WeightSpec::axis(alpha, n) : WeightSpec::radial(alpha, n);
}

const char* color_for(CellKind kind) {
    switch (kind) {
        case CellKind::BlowUp: return "#b03a2e";
        case CellKind::GlobalCandidate: return "#1f618d";
        case CellKind::Inconclusive: return "#7f8c8d";
    }
    return "#000000";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

CriticalParameters critical_parameters(const WeightSpec& spec, double p) {
    spec.validate();
    require(p > 1.0, ErrorCode::InvalidArgument, "critical_parameters: p must exceed 1");
    CriticalParameters cp;
    cp.homogeneity = spec.homogeneity();
    cp.p_star = 1.0 + 2.0 / cp.homogeneity;
    cp.r_star = cp.homogeneity / 2.0 * (p - 1.0);
    cp.r_star_at_most_one = cp.r_star <= 1.0;
    return cp;
}

bool is_critical(const WeightSpec& spec, double p) {
    const double p_star = 1.0 + 2.0 / spec.homogeneity();
    return std::abs(p - p_star) <= kCriticalGuard * p_star;
}

double kaplan_log_ak(double p, int k) {
    require(p > 1.0 && k >= 1, ErrorCode::InvalidArgument, "kaplan_log_ak needs p > 1 and k >= 1");
    double log_a = 0.0;
    for (int j = 1; j < k; ++j) {
        // log((p-1)/(p^{j+1}-1)) without forming p^{j+1}
        const double log_den = (j + 1) * std::log(p) + std::log1p(-std::pow(p, -(j + 1.0)));
        log_a = p * log_a + std::log(p - 1.0) - log_den;
    }
    return log_a;
}

double kaplan_log_cstar_bound(double p) {
    require(p > 1.0, ErrorCode::InvalidArgument, "kaplan_log_cstar_bound needs p > 1");
    const double x = 1.0 / p;
    double sum = 0.0;
    for (int j = kBoundTruncation; j >= 2; --j) sum += j * std::pow(x, j);
    const double J = kBoundTruncation;
    sum += std::pow(x, J + 1.0) * ((J + 1.0) - J * x) / ((1.0 - x) * (1.0 - x));
    return (1.0 + std::log(p)) * sum;
}

double kaplan_log_cstar_sum(double p) {
    require(p > 1.0, ErrorCode::InvalidArgument, "kaplan_log_cstar_sum needs p > 1");
    const double lp = std::log(p);
    const double lq = std::log(p - 1.0);
    double sum = 0.0;
    for (int j = 2; j < 4000; ++j) {
        const double term = std::exp(-j * lp) * (j * lp + std::log1p(-std::exp(-j * lp)) - lq);
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

KaplanSeries kaplan_bound_series(const GridFunction& u0, double p, std::span<const double> times,
                                 const Propagator& prop) {
    require(p > 1.0, ErrorCode::InvalidArgument, "kaplan_bound_series: p must exceed 1");
    require(u0.sup_norm() > 0.0, ErrorCode::Vacuous, "kaplan_bound_series: u0 = 0 makes the series vacuous");
    for (double v : u0.values) require(v >= 0.0, ErrorCode::InvalidArgument, "kaplan_bound_series: u0 must be nonnegative");
    KaplanSeries s;
    for (int k = 1; k <= kKaplanTerms; ++k) s.log_ak.push_back(kaplan_log_ak(p, k));
    s.log_cstar_bound = kaplan_log_cstar_bound(p);
    s.cstar_estimate = std::exp(s.log_cstar_bound);
    for (double t : times) {
        require(t > 0.0, ErrorCode::InvalidArgument, "kaplan_bound_series: times must be positive");
        const double v = kaplan_value(prop, u0, p, t);
        s.times.push_back(t);
        s.values.push_back(v);
        s.max_value = std::max(s.max_value, v);
    }
    s.below_estimate = s.max_value <= s.cstar_estimate;
    return s;
}

EscapeEvidence subcritical_escape(const GridFunction& u0, double p, const Propagator& prop, double horizon) {
    const Grid& grid = *prop.grid();
    const double h = grid.line_homogeneity();
    const double p_star = 1.0 + 2.0 / h;
    require(p < p_star * (1.0 - kCriticalGuard), ErrorCode::RegimeMismatch,
            "subcritical_escape needs p < p* = " + format_double(p_star) + ", got p = " + format_double(p));
    EscapeEvidence ev;
    ev.exponent = 1.0 / (p - 1.0) - h / 2.0;
    const std::vector<double> times = fine_ladder(0.25, horizon, 8);
    ev.series = kaplan_bound_series(u0, p, times, prop);

    ev.crossing_time = FittedConstants::kUnset;
    const double cstar = ev.series.cstar_estimate;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (ev.series.values[k] <= cstar) continue;
        if (k == 0) {
            ev.crossing_time = times[0];
            break;
        }
        double lo = std::log(times[k - 1]), hi = std::log(times[k]);
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (kaplan_value(prop, u0, p, std::exp(mid)) > cstar ? hi : lo) = mid;
        }
        ev.crossing_time = std::exp(hi);
        break;
    }

    ev.core_constant = kInf;
    bool any = false;
    for (double t : times) {
        const HeatCoreReport rep = heat_core_lower(prop, u0, t);
        if (rep.vacuous) continue;
        any = true;
        ev.core_constant = std::min(ev.core_constant, rep.constant);
    }
    if (!any) ev.core_constant = 0.0;
    ev.core_bound_holds = any && ev.core_constant > 0.0;
    return ev;
}

CriticalGrowth critical_log_growth(const GridFunction& u0, double p, const Propagator& prop, EvolveConfig cfg) {
    const double h = prop.grid()->line_homogeneity();
    const double p_star = 1.0 + 2.0 / h;
    require(std::abs(p - p_star) <= kCriticalGuard * p_star, ErrorCode::RegimeMismatch,
            "critical_log_growth needs p = p* = " + format_double(p_star) + " to 1e-12 relative, got p = " +
                format_double(p));
    require(u0.sup_norm() > 0.0, ErrorCode::Vacuous, "critical_log_growth: u0 = 0 gives I = 0");
    cfg.p = p;
    cfg.record_times = fine_ladder(0.25, cfg.horizon, 4);
    cfg.keep_snapshots = true;
    const Trajectory tr = picard_iterate(u0, cfg, prop);

    CriticalGrowth out;
    out.outcome = tr.outcome;
    out.escape_time = tr.escape_time;
    std::vector<double> logt, late;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double t = tr.times[k];
        const double I = tr.snapshots[k].integral_within(std::sqrt(t));
        out.times.push_back(t);
        out.core_integral.push_back(I);
        if (t > 3.0) {
            logt.push_back(std::log(t));
            late.push_back(I);
        }
    }
    if (late.size() < 3) {
        out.reason = tr.converged() ? "horizon too short: fewer than three recorded times past t = 3"
                                    : "trajectory ends before t = 3 (" + std::string(to_string(tr.outcome)) +
                                          " at t = " + format_double(tr.escape_time) + ")";
        return out;
    }
    out.slope = fit_line(logt, late).slope;
    out.conclusive = true;
    return out;
}

const char* to_string(CellKind kind) noexcept {
    switch (kind) {
        case CellKind::BlowUp: return "BlowUp";
        case CellKind::GlobalCandidate: return "GlobalCandidate";
        case CellKind::Inconclusive: return "Inconclusive";
    }
    return "?";
}

void ClassifyConfig::validate() const {
    require(radius >= 0.0, ErrorCode::InvalidArgument, "grid.radius must be nonnegative (0 = auto)");
    require(cells >= 16, ErrorCode::InvalidArgument, "grid.cells must be at least 16");
    require(grading >= 1.0, ErrorCode::InvalidArgument, "grid.grading must be at least 1");
    require(blowup_horizon > 3.0, ErrorCode::InvalidArgument, "sweep.blowup_horizon must exceed 3");
    require(global_horizon > 0.25, ErrorCode::InvalidArgument, "evolve.horizon must exceed 0.25");
    require(smallness > 0.0, ErrorCode::InvalidArgument, "evolve.smallness must be positive");
    require(max_halvings >= 0, ErrorCode::InvalidArgument, "evolve.max_halvings must be nonnegative");
}

CellOutcome classify(const WeightSpec& spec, double p, const ClassifyConfig& cfg) {
    CellOutcome out;
    out.p = p;
    out.alpha = spec.alpha();
    try {
        cfg.validate();
        const CriticalParameters cp = critical_parameters(spec, p);
        const bool critical = is_critical(spec, p);
        const bool blowup_regime = critical || p < cp.p_star;
        const double horizon = blowup_regime ? cfg.blowup_horizon : cfg.global_horizon;
        const double radius = cfg.radius > 0.0 ? cfg.radius : 7.43 * std::sqrt(horizon);
        const GridPtr grid = make_grid(spec, radius, cfg.cells, cfg.grading);
        const Propagator prop(grid);

        EvolveConfig ecfg = cfg.evolve;
        ecfg.p = p;
        ecfg.horizon = horizon;
        ecfg.record_times.clear();
        ecfg.keep_snapshots = false;

        if (blowup_regime) {
            const GridFunction u0 = sample(cfg.blowup_u0, grid);
            Outcome outcome = Outcome::Converged;
            double escape = 0.0;
            std::string note;
            if (critical) {
                const CriticalGrowth cg = critical_log_growth(u0, cp.p_star, prop, ecfg);
                outcome = cg.outcome;
                escape = cg.escape_time;
                if (cg.conclusive) {
                    out.critical_log_slope = cg.slope;
                } else {
                    note = "log-growth fit inconclusive: " + cg.reason;
                }
            } else {
                out.kaplan_crossing_time = subcritical_escape(u0, p, prop, horizon).crossing_time;
                const Trajectory tr = picard_iterate(u0, ecfg, prop);
                outcome = tr.outcome;
                escape = tr.escape_time;
            }
            switch (outcome) {
                case Outcome::ThresholdExceeded:
                    out.kind = CellKind::BlowUp;
                    out.escape_time = escape;
                    out.reason = note.empty() ? "numerical escape: sup u above the threshold" : note;
                    break;
                case Outcome::IterationBudgetExhausted:
                    out.kind = CellKind::Inconclusive;
                    out.reason = "Picard iteration budget exhausted at t = " + format_double(escape);
                    break;
                case Outcome::Converged:
                    out.kind = CellKind::Inconclusive;
                    out.reason = "no escape before horizon " + format_double(horizon);
                    break;
            }
            return out;
        }

        InitialDatum datum = cfg.global_u0;
        const bool calibrate = datum.kind == InitialDatum::Kind::DecayProfile;
        if (calibrate) datum.p = p;
        std::string last;
        for (int k = 0; k <= (calibrate ? cfg.max_halvings : 0); ++k) {
            try {
                const GlobalRun run = solve_global_small(datum, grid, p, 0.0, cfg.smallness, prop, ecfg);
                if (run.accepted) {
                    out.kind = CellKind::GlobalCandidate;
                    out.decay_slope = run.sup_decay_slope;
                    if (calibrate) out.accepted_delta = datum.delta;
                    out.reason = "small-data run converged with non-trending decay functionals";
                    return out;
                }
                if (run.trajectory.outcome == Outcome::ThresholdExceeded && !calibrate) {
                    out.kind = CellKind::BlowUp;
                    out.escape_time = run.trajectory.escape_time;
                    out.reason = "numerical escape: sup u above the threshold";
                    return out;
                }
                last = run.trajectory.converged() ? "decay functionals trending"
                                                  : std::string("run ended: ") + to_string(run.trajectory.outcome);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SmallnessUnmet) throw;
                last = e.what();
            }
            datum.delta *= 0.5;
        }
        out.kind = CellKind::Inconclusive;
        out.reason = last;
    } catch (const Error& e) {
        out.kind = CellKind::Inconclusive;
        out.reason = e.what();
    }
    return out;
}

const CellOutcome& DichotomyReport::at(std::size_t alpha_index, std::size_t p_index) const {
    return cells.at(alpha_index * ps.size() + p_index);
}

DichotomyReport sweep(WeightCase weight_case, int dimension, std::span<const double> alphas,
                      std::span<const double> ps, const ClassifyConfig& cfg, int jobs) {
    require(!alphas.empty() && !ps.empty(), ErrorCode::InvalidArgument, "sweep needs at least one p and one alpha");
    cfg.validate();
    DichotomyReport rep;
    rep.weight_case = weight_case;
    rep.dimension = dimension;
    rep.alphas.assign(alphas.begin(), alphas.end());
    rep.ps.assign(ps.begin(), ps.end());
    for (double a : alphas) spec_for(weight_case, a, dimension).validate();
    rep.cells.resize(alphas.size() * ps.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rep.cells.size(); i = next++) {
            const double a = rep.alphas[i / rep.ps.size()];
            const double p = rep.ps[i % rep.ps.size()];
            rep.cells[i] = classify(spec_for(weight_case, a, dimension), p, cfg);
        }
    };
    const int n = std::clamp(jobs, 1, static_cast<int>(rep.cells.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rep;
}

void write_dichotomy_csv(const std::filesystem::path& file, const DichotomyReport& report) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + file.string());
    os << "p,alpha,outcome,escape_time,decay_slope,critical_log_slope,kaplan_crossing_time,accepted_delta,reason\n";
    for (const auto& c : report.cells) {
        os << format_double(c.p) << ',' << format_double(c.alpha) << ',' << to_string(c.kind) << ','
           << format_double(c.escape_time) << ',' << format_double(c.decay_slope) << ','
           << format_double(c.critical_log_slope) << ',' << format_double(c.kaplan_crossing_time) << ','
           << format_double(c.accepted_delta) << ',' << csv_field(c.reason) << '\n';
    }
    require(static_cast<bool>(os), ErrorCode::Io, "short write on " + file.string());
}

void write_dichotomy_svg(const std::filesystem::path& file, const DichotomyReport& report) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + file.string());
    const double W = 640, H = 480, left = 70, right = 170, top = 40, bottom = 90;
    const int n = report.dimension;

    double a0 = *std::min_element(report.alphas.begin(), report.alphas.end());
    double a1 = *std::max_element(report.alphas.begin(), report.alphas.end());
    if (a1 - a0 < 1e-9) {
        a0 -= 0.5;
        a1 += 0.5;
    }
    a0 = std::max(0.0, a0 - 0.05 * (a1 - a0));
    a1 += 0.05 * (a1 - a0);
    double p0 = *std::min_element(report.ps.begin(), report.ps.end());
    double p1 = *std::max_element(report.ps.begin(), report.ps.end());
    for (double a : {a0, a1}) {
        p0 = std::min(p0, 1.0 + 2.0 / (n + a));
        p1 = std::max(p1, 1.0 + 2.0 / (n + a));
    }
    const double pad = 0.1 * std::max(p1 - p0, 0.5);
    p0 = std::max(1.0, p0 - pad);
    p1 += pad;

    auto X = [&](double a) { return left + (a - a0) / (a1 - a0) * (W - left - right); };
    auto Y = [&](double p) { return H - bottom - (p - p0) / (p1 - p0) * (H - top - bottom); };
    auto num = [](double v) {
        std::ostringstream s;
        s.setf(std::ios::fixed);
        s.precision(2);
        s << v;
        return s.str();
    };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">Dichotomy, "
       << (report.weight_case == WeightCase::AxisPower ? "w = |x_1|^a" : "w = |x|^b") << ", n = " << n << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double a = a0 + (a1 - a0) * k / 4.0;
        const double p = p0 + (p1 - p0) * k / 4.0;
        os << "<text x=\"" << X(a) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">" << num(a)
           << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << Y(p) + 4 << "\" text-anchor=\"end\">" << num(p) << "</text>\n";
    }
    os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - bottom + 34
       << "\" text-anchor=\"middle\">alpha</text>\n";
    os << "<text x=\"20\" y=\"" << (top + H - bottom) / 2 << "\" transform=\"rotate(-90 20 " << (top + H - bottom) / 2
       << ")\" text-anchor=\"middle\">p</text>\n";

    os << "<polyline fill=\"none\" stroke=\"#333\" stroke-dasharray=\"5,3\" points=\"";
    for (int k = 0; k <= 100; ++k) {
        const double a = a0 + (a1 - a0) * k / 100.0;
        os << X(a) << ',' << Y(1.0 + 2.0 / (n + a)) << ' ';
    }
    os << "\"/>\n";

    for (const auto& c : report.cells) {
        os << "<circle cx=\"" << X(c.alpha) << "\" cy=\"" << Y(c.p) << "\" r=\"7\" fill=\"" << color_for(c.kind)
           << "\"><title>" << xml_escape(std::string(to_string(c.kind)) + ": " + c.reason) << "</title></circle>\n";
    }

    const double lx = W - right + 20;
    double ly = top + 10;
    for (CellKind k : {CellKind::BlowUp, CellKind::GlobalCandidate, CellKind::Inconclusive}) {
        os << "<circle cx=\"" << lx << "\" cy=\"" << ly << "\" r=\"6\" fill=\"" << color_for(k) << "\"/>\n";
        os << "<text x=\"" << lx + 12 << "\" y=\"" << ly + 4 << "\">" << to_string(k) << "</text>\n";
        ly += 22;
    }
    os << "<line x1=\"" << lx - 8 << "\" y1=\"" << ly << "\" x2=\"" << lx + 8 << "\" y2=\"" << ly
       << "\" stroke=\"#333\" stroke-dasharray=\"5,3\"/>\n";
    os << "<text x=\"" << lx + 12 << "\" y=\"" << ly + 4 << "\">p = 1 + 2/(n + alpha)</text>\n";

    os << "<text x=\"" << left << "\" y=\"" << H - 30 << "\" font-size=\"10\">"
       << "BlowUp means sup u crossed the numerical threshold for the tested datum only; it does not show that"
       << "</text>\n";
    os << "<text x=\"" << left << "\" y=\"" << H - 16 << "\" font-size=\"10\">"
       << "no positive global solution exists. GlobalCandidate means a converged run with non-trending decay."
       << "</text>\n";
    os << "</svg>\n";
    require(static_cast<bool>(os), ErrorCode::Io, "short write on " + file.string());
}

}  // namespace fujita
