// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include "fujita/blowup.hpp"
#include "fujita/config.hpp"
#include "fujita/errors.hpp"
#include "fujita/evolve.hpp"
#include "fujita/experiment.hpp"
#include "fujita/kernel.hpp"
#include "fujita/lorentz.hpp"
#include "fujita/numeric.hpp"
#include "fujita/semigroup.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fujita;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGaussianTol = 0.01;
constexpr double kRowMassTol = 1e-3;
constexpr double kCompositionTol = 2e-3;
constexpr double kSymmetryTol = 1e-8;
constexpr double kExponentTol = 0.05;
constexpr double kLorentzRrTol = 1e-6;
constexpr double kReconcileTol = 1e-8;
constexpr double kWeakExampleTol = 1e-6;
constexpr double kSplitStepTol = 2e-3;
constexpr double kKaplanTol = 1e-12;
constexpr double kDecaySlopeTol = 0.05;
constexpr double kNonTrendTol = 0.05;
constexpr double kStabilityTol = 0.2;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    void check(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) detail << "; ";
            detail << what;
            pass = false;
        }
    }
};

using Criterion = std::function<void(Verdict&)>;

const fs::path kData = FUJITA_TEST_DATA;
fs::path g_out;

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double gauss(double z, double t) {
    return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

// Relative weighted L1 distance between each interior row of the table and
// the mirrored Gaussian; interior means |x| <= R - 8 sqrt(t).
double worst_gaussian_error(const KernelTable& k) {
    const Grid& g = *k.grid;
    const auto x = g.nodes();
    const auto m = g.cell_mass();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (x[i] > g.radius() - 8.0 * std::sqrt(k.t)) continue;
        double diff = 0.0, ref = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double G = gauss(x[i] - x[j], k.t) + gauss(x[i] + x[j], k.t);
            diff += std::abs(k(i, j) - G) * m[j];
            ref += G * m[j];
        }
        worst = std::max(worst, diff / ref);
    }
    return worst;
}

void kernel_oracle(Verdict& v) {
    const GridPtr g = make_grid(WeightSpec::axis(0.0), 30.0, 512);
    for (double t : {0.25, 1.0, 4.0}) {
        const double e = worst_gaussian_error(build_kernel(g->spec(), g, t, 512));
        v.detail << "t=" << t << " err " << num(e) << ' ';
        v.check(e < kGaussianTol, "t=" + num(t) + " error " + num(e));
    }
}

void structural(Verdict& v) {
    const std::vector<double> times{0.25, 0.5, 1.0, 2.0, 4.0};
    for (const WeightSpec& spec : {WeightSpec::axis(0.0), WeightSpec::axis(0.5), WeightSpec::radial(0.0, 2),
                                   WeightSpec::radial(1.0, 2)}) {
        const GridPtr g = make_grid(spec, 30.0, 256);
        const KernelVerifyReport rep = verify_kernel(spec, g, times, 512);
        double mass = 0.0, comp = 0.0, sym = 0.0;
        for (const auto& r : rep.times) {
            mass = std::max(mass, r.row_mass_error);
            comp = std::max(comp, r.composition_error);
            sym = std::max(sym, r.symmetry_error);
            v.check(r.min_entry >= 0.0, spec.describe() + " negative entry");
        }
        v.check(mass <= kRowMassTol, spec.describe() + " row mass " + num(mass));
        v.check(comp < kCompositionTol, spec.describe() + " composition " + num(comp));
        v.check(sym <= kSymmetryTol, spec.describe() + " symmetry " + num(sym));
        v.detail << spec.describe() << ": " << num(mass) << '/' << num(comp) << '/' << num(sym) << ' ';
    }
}

void decay_exponents(Verdict& v) {
    const std::vector<double> times{4.0, 8.0, 16.0, 32.0, 64.0};
    for (const WeightSpec& spec : {WeightSpec::axis(0.5), WeightSpec::radial(1.0, 2)}) {
        const double h = spec.homogeneity();
        const GridPtr g = make_grid(spec, 2.0 * 7.43 * 8.0, 384);
        const Propagator prop(g);
        // q = 1 on a Gaussian; q = 2 on the borderline tail |x|^{-h/2}, since an
        // integrable datum would decay at the faster q = 1 rate
        const GridFunction gaussian = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
        const GridFunction tail =
            GridFunction::sample(g, [h](double x) { return std::pow(std::abs(x), -h / 2.0); }, Sampling::OuterEdge);
        for (auto [q, r] : {std::pair{1.0, kInf}, std::pair{1.0, 2.0}, std::pair{2.0, kInf}}) {
            const GridFunction& phi = q == 1.0 ? gaussian : tail;
            const double predicted = -h / 2.0 * (1.0 / q - (std::isinf(r) ? 0.0 : 1.0 / r));
            const DecayFit f = decay_rates(prop, phi, times, q, r, NormKind::Strong);
            const double rel = std::abs(f.fit.slope - predicted) / std::abs(predicted);
            v.check(rel <= kExponentTol, spec.describe() + " semigroup (" + num(q) + "," + num(r) + ") slope " +
                                             num(f.fit.slope) + " vs " + num(predicted));
        }
        // kernel rows: ||Gamma(x0,.,t)||_inf ~ t^{-h/2}, ||Gamma(x0,.,t)||_2 ~ t^{-h/4}
        std::vector<double> lt, lsup, ll2;
        for (double t : times) {
            const GridFunction row = origin_row(prop.table(t));
            lt.push_back(std::log(t));
            lsup.push_back(std::log(row.sup_norm()));
            ll2.push_back(std::log(lebesgue_norm(row, 2.0)));
        }
        const LineFit s = fit_line(lt, lsup), l = fit_line(lt, ll2);
        v.check(std::abs(s.slope + h / 2.0) <= kExponentTol * h / 2.0, spec.describe() + " kernel sup slope " + num(s.slope));
        v.check(std::abs(l.slope + h / 4.0) <= kExponentTol * h / 4.0, spec.describe() + " kernel L2 slope " + num(l.slope));
    }
}

GridFunction random_steps(const GridPtr& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pieces(2, 8);
    std::vector<double> cuts(static_cast<std::size_t>(pieces(rng)));
    for (double& c : cuts) c = g->radius() * u(rng);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> h(cuts.size() + 1);
    for (double& x : h) x = 0.1 + 3.0 * u(rng);
    h.back() = 0.0;
    return GridFunction::sample(g, [&](double x) {
        return h[static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), std::abs(x)) - cuts.begin())];
    });
}

void lorentz_suite(Verdict& v) {
    std::mt19937_64 rng(2024);
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 10.0, 256);
    for (int k = 0; k < 50; ++k) {
        const GridFunction f = random_steps(g, rng);
        const GridFunction h = random_steps(g, rng);
        for (double r : {1.0, 2.0, 4.0}) {
            double direct = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) direct += std::pow(f[i], r) * g->measure(i);
            direct = std::pow(direct, 1.0 / r);
            const LorentzNorm n = lorentz_norm(f, {r, r});
            v.check(std::abs(n.value - direct) <= kLorentzRrTol * direct, "L^{r,r} mismatch at r=" + num(r));
            v.check(std::abs(n.rearrangement_form - n.distribution_form) <= kReconcileTol * n.value,
                    "route mismatch at r=" + num(r));
        }
        for (const auto& c : inequality_suite(f, h, InequalityParams{}).checks)
            v.check(c.holds, c.name + " margin " + num(c.margin) + " on case " + std::to_string(k));
    }
    const GridPtr line = make_grid(WeightSpec::radial(0.0, 1), 100.0, 256, 2.0, GridGeometry::Radial);
    const GridFunction f =
        GridFunction::sample(line, [](double x) { return 1.0 / std::sqrt(std::abs(x)); }, Sampling::OuterEdge);
    const double w = weak_norm(f, 2.0);
    v.check(std::abs(w - std::sqrt(2.0)) <= kWeakExampleTol * std::sqrt(2.0), "weak example " + num(w));
}

void picard_invariants(Verdict& v) {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 30.0, 256);
    const Propagator prop(g);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> center(0.0, 2.0), width(0.5, 1.5), height(0.05, 0.5);
    const std::vector<double> times{0.25, 0.5, 1.0};
    for (int k = 0; k < 5; ++k) {
        const InitialDatum d = InitialDatum::bump(center(rng), width(rng), height(rng));
        const GridFunction u0 = sample(d, g);
        EvolveConfig cfg;
        cfg.p = 2.0;
        cfg.horizon = 1.0;
        cfg.record_times = times;
        const Trajectory tr = picard_iterate(u0, cfg, prop);
        const std::string tag = d.describe();
        v.check(tr.converged(), tag + " did not converge");
        const double scale = std::max(1.0, *std::max_element(tr.sup.begin(), tr.sup.end()));
        v.check(tr.min_monotone_gap >= -cfg.picard_tol * scale, tag + " monotone gap " + num(tr.min_monotone_gap));
        v.check(tr.min_duhamel_gap >= -cfg.picard_tol * scale, tag + " Duhamel gap " + num(tr.min_duhamel_gap));
        const auto oracle = split_step_solve(u0, 2.0, times, 2000);
        for (std::size_t i = 0; i < times.size(); ++i) {
            double d_sup = 0.0;
            for (std::size_t j = 0; j < u0.size(); ++j)
                d_sup = std::max(d_sup, std::abs(tr.snapshots[i][j] - oracle[i][j]));
            v.check(d_sup <= kSplitStepTol, tag + " split-step diff " + num(d_sup) + " at t=" + num(times[i]));
        }
    }
}

void combinatorics(Verdict& v) {
    const double a2 = std::exp(kaplan_log_ak(2.0, 2)), a3 = std::exp(kaplan_log_ak(2.0, 3));
    // direct products: A_2 = A_1^2 / 3, A_3 = A_2^2 / 7
    const double d2 = 1.0 / 3.0, d3 = d2 * d2 / 7.0;
    v.check(std::abs(a2 - d2) <= kKaplanTol * d2, "A_2 = " + num(a2));
    v.check(std::abs(a3 - d3) <= kKaplanTol * d3, "A_3 = " + num(a3));
    v.check(std::abs(d3 - 1.0 / 63.0) <= kKaplanTol, "direct A_3");
    const double bound = kaplan_log_cstar_bound(2.0);
    v.check(std::abs(bound - (1.0 + std::log(2.0)) * 1.5) <= kKaplanTol, "C* bound " + num(bound));
}

std::map<std::string, std::vector<std::string>> read_dichotomy(const fs::path& file) {
    std::ifstream is(file);
    std::string line;
    std::getline(is, line);
    std::map<std::string, std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (!cols.empty()) rows[cols[0]] = cols;
    }
    return rows;
}

double accepted_delta = FittedConstants::kUnset;

void run_sweep(const fs::path& out, int jobs) {
    RunRequest req;
    req.command = "sweep";
    req.config = kData / "sweep.conf";
    req.out_dir = out;
    req.jobs = jobs;
    req.seed = 1;
    std::ostringstream log;
    run_experiment(req, log);
}

void dichotomy(Verdict& v) {
    run_sweep(g_out / "sweep_a", 1);
    const auto rows = read_dichotomy(g_out / "sweep_a" / "dichotomy.csv");
    v.check(rows.size() == 4, "expected 4 cells, got " + std::to_string(rows.size()));
    // columns: p, alpha, outcome, escape_time, decay_slope, critical_log_slope, kaplan_crossing_time, accepted_delta, reason
    std::vector<std::vector<std::string>> cells;
    for (const auto& [k, r] : rows) cells.push_back(r);
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return std::stod(a[0]) < std::stod(b[0]); });
    if (cells.size() != 4) return;
    const char* expected[] = {"BlowUp", "BlowUp", "BlowUp", "GlobalCandidate"};
    for (int i = 0; i < 4; ++i) {
        v.detail << "p=" << cells[i][0] << ' ' << cells[i][2] << ' ';
        v.check(cells[i][2] == expected[i], "p=" + cells[i][0] + " gave " + cells[i][2] + " (" + cells[i][8] + ")");
    }
    const double log_slope = std::stod(cells[2][5]);
    v.check(log_slope > 0.0, "critical log slope " + num(log_slope));
    const double decay = std::stod(cells[3][4]);
    v.check(std::abs(decay + 0.5) <= kDecaySlopeTol, "sup decay slope " + num(decay));
    v.detail << "log slope " << num(log_slope) << " decay slope " << num(decay);
    accepted_delta = std::stod(cells[3][7]);
}

void decay_functionals(Verdict& v) {
    v.check(FittedConstants::is_set(accepted_delta), "no accepted supercritical run");
    if (!v.pass) return;
    const ExperimentConfig c = ExperimentConfig::from_file(ConfigFile::load(kData / "sweep.conf"));
    const ClassifyConfig cc = c.classify_config();
    const double p = 3.0;
    const GridPtr g = make_grid(c.weight, 7.43 * std::sqrt(cc.global_horizon), cc.cells, cc.grading);
    const Propagator prop(g);
    EvolveConfig ecfg = cc.evolve;
    ecfg.p = p;
    ecfg.horizon = cc.global_horizon;
    ecfg.keep_snapshots = false;
    const GlobalRun run =
        solve_global_small(InitialDatum::decay_profile(accepted_delta, p), g, p, 0.0, cc.smallness, prop, ecfg);
    v.check(run.trajectory.converged(), "accepted run did not converge");
    v.check(run.functionals.size() == 3, "expected q in {r*, 2r*, inf}");
    for (const auto& f : run.functionals) {
        v.detail << "q=" << num(f.q) << " slope " << num(f.last_quarter_slope) << ' ';
        v.check(std::isfinite(f.sup), "q=" + num(f.q) + " functional not finite");
        v.check(std::abs(f.last_quarter_slope) <= kNonTrendTol, "q=" + num(f.q) + " trending " + num(f.last_quarter_slope));
    }
}

void stability(Verdict& v) {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 30.0, 256);
    const Propagator prop(g);
    const GridFunction a = sample(InitialDatum::bump(0.0, 1.0, 0.2), g);
    auto ratio = [&](double eps) {
        GridFunction b = a;
        for (double& x : b.values) x += eps;
        return stability_check(a, b, 2.0, 1.0, prop);
    };
    const double r1 = ratio(1e-3), r2 = ratio(5e-4);
    v.detail << "ratios " << num(r1) << ' ' << num(r2);
    v.check(std::isfinite(r1) && std::isfinite(r2), "ratio not finite");
    v.check(std::abs(r1 - r2) <= kStabilityTol * r2, "ratio moved " + num(r1) + " -> " + num(r2));
}

std::string slurp(const fs::path& f) {
    std::ifstream is(f, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void determinism(Verdict& v) {
    run_sweep(g_out / "sweep_b", 2);
    const std::string a = slurp(g_out / "sweep_a" / "dichotomy.csv");
    const std::string b = slurp(g_out / "sweep_b" / "dichotomy.csv");
    v.check(!a.empty(), "first sweep produced no CSV");
    v.check(a == b, "dichotomy.csv differs between runs");
}

}  // namespace

int main(int argc, char** argv) {
    g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fujita_acceptance";
    fs::create_directories(g_out);
    const std::vector<std::pair<std::string, Criterion>> criteria{
        {"kernel oracle (a = 0 Gaussian)", kernel_oracle},
        {"kernel structure (mass, composition, symmetry)", structural},
        {"decay exponents", decay_exponents},
        {"Lorentz suite", lorentz_suite},
        {"Picard invariants and split-step oracle", picard_invariants},
        {"Kaplan combinatorics", combinatorics},
        {"dichotomy sweep", dichotomy},
        {"global decay functionals", decay_functionals},
        {"stability ratio", stability},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failures;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << "  ["
                  << num(secs) << " s] " << v.detail.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
