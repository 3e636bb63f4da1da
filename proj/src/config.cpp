#include "fujita/config.hpp"

#include "fujita/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace fujita {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i < s.size() && s[i] == '(') ++depth;
        if (i < s.size() && s[i] == ')') --depth;
        if (i == s.size() || (s[i] == sep && depth == 0)) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_plain(std::string_view t) {
    const std::string s = lower(trim(t));
    if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty(), ErrorCode::Config,
            "expected a number, got '" + s + "'");
    return v;
}

int parse_int(std::string_view t) {
    const std::string s = trim(t);
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty(), ErrorCode::Config,
            "expected an integer, got '" + s + "'");
    return v;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += format_double(v[k]);
    }
    return out;
}

const char* geometry_token(GridGeometry g) {
    switch (g) {
        case GridGeometry::HalfLineEven: return "half_line";
        case GridGeometry::FullLine: return "full_line";
        case GridGeometry::Radial: return "radial";
    }
    return "?";
}

const char* mode_token(EvolveMode m) {
    switch (m) {
        case EvolveMode::Picard: return "picard";
        case EvolveMode::Local: return "local";
        case EvolveMode::Global: return "global";
    }
    return "?";
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, std::string source) {
    ConfigFile cf;
    cf.source_ = std::move(source);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string at = cf.source_ + ":" + std::to_string(lineno) + ": ";
        require(eq != std::string::npos, ErrorCode::Config, at + "expected 'key = value', got '" + body + "'");
        ConfigEntry e{trim(body.substr(0, eq)), trim(body.substr(eq + 1)), lineno};
        require(!e.key.empty(), ErrorCode::Config, at + "missing key before '='");
        require(e.key.find_first_of(" \t") == std::string::npos, ErrorCode::Config,
                at + "key '" + e.key + "' contains whitespace");
        require(!e.value.empty(), ErrorCode::Config, at + e.key + ": missing value");
        for (const auto& prev : cf.entries_) {
            require(prev.key != e.key, ErrorCode::Config,
                    at + e.key + " repeats line " + std::to_string(prev.line));
        }
        cf.entries_.push_back(std::move(e));
    }
    cf.used_.assign(cf.entries_.size(), false);
    return cf;
}

ConfigFile ConfigFile::load(const std::filesystem::path& file) {
    std::ifstream is(file);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot read config " + file.string());
    ConfigFile cf = parse(is, file.string());
    cf.base_dir_ = file.parent_path();
    return cf;
}

const ConfigEntry* ConfigFile::find(std::string_view key) const {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (entries_[k].key == key) {
            used_[k] = true;
            return &entries_[k];
        }
    }
    return nullptr;
}

std::string ConfigFile::where(std::string_view key) const {
    for (const auto& e : entries_) {
        if (e.key == key) return source_ + ":" + std::to_string(e.line) + ": ";
    }
    return source_ + ": ";
}

void ConfigFile::reject_unused() const {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        require(used_[k], ErrorCode::Config,
                source_ + ":" + std::to_string(entries_[k].line) + ": unknown key '" + entries_[k].key + "'");
    }
}

double parse_real(std::string_view text) {
    const std::string s = trim(text);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_plain(s);
    const double num = parse_plain(s.substr(0, slash));
    const double den = parse_plain(s.substr(slash + 1));
    require(den != 0.0 && std::isfinite(den), ErrorCode::Config, "fraction '" + s + "' has a zero denominator");
    return num / den;
}

std::vector<double> parse_real_list(std::string_view text, std::optional<double> critical) {
    std::vector<double> out;
    for (const auto& tok : split(text, ',')) {
        require(!tok.empty(), ErrorCode::Config, "empty entry in list '" + std::string(text) + "'");
        if (lower(tok) == "critical") {
            require(critical.has_value(), ErrorCode::Config, "'critical' is not available here");
            out.push_back(*critical);
        } else {
            out.push_back(parse_real(tok));
        }
    }
    return out;
}

InitialDatum parse_datum(std::string_view text, const std::filesystem::path& base_dir) {
    std::string s = trim(text);
    double factor = 1.0;
    const auto close = s.rfind(')');
    const auto star = s.find('*', close == std::string::npos ? 0 : close);
    if (star != std::string::npos) {
        factor = parse_real(s.substr(star + 1));
        s = trim(s.substr(0, star));
    }
    if (lower(s) == "zero") return InitialDatum::zero();
    const auto open = s.find('(');
    require(open != std::string::npos && !s.empty() && s.back() == ')', ErrorCode::Config,
            "datum '" + s + "' is not of the form name(args)");
    const std::string name = lower(trim(s.substr(0, open)));
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    const auto args = split(inner, ',');
    auto nums = [&](std::size_t n) {
        require(args.size() == n, ErrorCode::Config,
                name + " takes " + std::to_string(n) + " argument(s), got " + std::to_string(args.size()));
        std::vector<double> v;
        for (const auto& a : args) v.push_back(parse_real(a));
        return v;
    };
    InitialDatum d;
    if (name == "bump") {
        const auto v = nums(3);
        d = InitialDatum::bump(v[0], v[1], v[2]);
    } else if (name == "decay_profile") {
        const auto v = nums(2);
        d = InitialDatum::decay_profile(v[0], v[1]);
    } else if (name == "indicator") {
        const auto v = nums(1);
        d = InitialDatum::indicator(v[0]);
    } else if (name == "table") {
        require(args.size() == 1 && !args[0].empty(), ErrorCode::Config, "table takes one path");
        std::filesystem::path path = args[0];
        if (path.is_relative()) path = base_dir / path;
        d = InitialDatum::table(path);
    } else {
        fail(ErrorCode::Config, "unknown datum '" + name +
                                    "': expected bump, decay_profile, indicator, table, or zero");
    }
    return factor == 1.0 ? d : d.scaled(factor);
}

std::vector<NormSpec> parse_norms(std::string_view text) {
    std::vector<NormSpec> out;
    if (lower(trim(text)) == "none") return out;
    for (const auto& tok : split(text, ',')) {
        const std::string t = lower(tok);
        if (t == "inf") {
            out.push_back({kInf, NormKind::Strong});
            continue;
        }
        const auto colon = t.find(':');
        require(colon != std::string::npos, ErrorCode::Config, "norm '" + tok + "' must be weak:q, strong:q, or inf");
        const std::string kind = trim(t.substr(0, colon));
        require(kind == "weak" || kind == "strong", ErrorCode::Config, "norm kind must be weak or strong, got '" + kind + "'");
        const double q = parse_real(t.substr(colon + 1));
        require(q >= 1.0, ErrorCode::Config, "norm index must be >= 1, got " + format_double(q));
        out.push_back({q, kind == "weak" ? NormKind::Weak : NormKind::Strong});
    }
    return out;
}

std::string describe_norms(const std::vector<NormSpec>& norms) {
    if (norms.empty()) return "none";
    std::string out;
    for (std::size_t k = 0; k < norms.size(); ++k) {
        if (k) out += ", ";
        if (std::isinf(norms[k].q)) {
            out += "inf";
        } else {
            out += std::string(to_string(norms[k].kind)) + ":" + format_double(norms[k].q);
        }
    }
    return out;
}

ExperimentConfig ExperimentConfig::from_file(const ConfigFile& file) {
    ExperimentConfig c;
    // Runs `fn` on the entry if present and prefixes any error with its location.
    auto with = [&](std::string_view key, const std::function<void(const std::string&)>& fn) {
        const ConfigEntry* e = file.find(key);
        if (!e) return;
        try {
            fn(e->value);
        } catch (const Error& err) {
            fail(ErrorCode::Config, file.where(key) + std::string(key) + ": " + err.what());
        }
    };
    auto check = [&](std::string_view key, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const Error& err) {
            fail(ErrorCode::Config, file.where(key) + err.what());
        }
    };

    std::string weight_case = "axis";
    with("weight.case", [&](const std::string& v) {
        weight_case = lower(v);
        require(weight_case == "axis" || weight_case == "radial", ErrorCode::Config, "expected axis or radial");
    });
    double exponent = 0.5;
    int dimension = weight_case == "axis" ? 1 : 2;
    with("weight.exponent", [&](const std::string& v) { exponent = parse_real(v); });
    with("weight.dimension", [&](const std::string& v) { dimension = parse_int(v); });
    check("weight.dimension", [&] { require(dimension >= 1, ErrorCode::Config, "weight.dimension must be >= 1"); });
    c.weight.kind = weight_case == "axis" ? WeightCase::AxisPower : WeightCase::RadialPower;
    c.weight.exponent = exponent;
    c.weight.dimension = dimension;
    // Unchecked construction so the exponent message reaches the user verbatim.
    check("weight.exponent", [&] { c.weight.validate(); });
    const double p_star = 1.0 + 2.0 / c.weight.homogeneity();

    with("grid.radius", [&](const std::string& v) {
        c.radius = lower(v) == "auto" ? 0.0 : parse_real(v);
        require(c.radius >= 0.0, ErrorCode::Config, "must be positive or auto");
    });
    with("grid.cells", [&](const std::string& v) {
        c.cells = parse_int(v);
        require(c.cells >= 16, ErrorCode::Config, "must be at least 16");
    });
    with("grid.grading", [&](const std::string& v) {
        c.grading = parse_real(v);
        require(c.grading >= 1.0, ErrorCode::Config, "must be at least 1");
    });
    with("grid.geometry", [&](const std::string& v) {
        const std::string g = lower(v);
        if (g == "auto") {
            c.geometry.reset();
        } else if (g == "half_line") {
            c.geometry = GridGeometry::HalfLineEven;
        } else if (g == "full_line") {
            c.geometry = GridGeometry::FullLine;
        } else if (g == "radial") {
            c.geometry = GridGeometry::Radial;
        } else {
            fail(ErrorCode::Config, "expected auto, half_line, full_line, or radial");
        }
        const bool radial = c.weight.kind == WeightCase::RadialPower;
        require(!c.geometry || (*c.geometry == GridGeometry::Radial) == radial, ErrorCode::Config,
                "geometry does not match weight.case");
    });
    check("weight.dimension", [&] {
        require(c.weight.kind == WeightCase::RadialPower || c.weight.dimension == 1, ErrorCode::Config,
                "axis-case grids are one-dimensional: weight.dimension must be 1");
    });

    with("kernel.times", [&](const std::string& v) {
        c.kernel_times = parse_real_list(v);
        for (double t : c.kernel_times) require(t > 0.0 && std::isfinite(t), ErrorCode::Config, "times must be positive");
    });
    with("kernel.steps", [&](const std::string& v) {
        c.kernel_steps = parse_int(v);
        require(c.kernel_steps >= 1, ErrorCode::Config, "must be positive");
    });

    c.evolve.p = 2.0;
    c.evolve.horizon = 1.0;
    with("evolve.mode", [&](const std::string& v) {
        const std::string m = lower(v);
        if (m == "picard") {
            c.mode = EvolveMode::Picard;
        } else if (m == "local") {
            c.mode = EvolveMode::Local;
        } else if (m == "global") {
            c.mode = EvolveMode::Global;
        } else {
            fail(ErrorCode::Config, "expected picard, local, or global");
        }
    });
    with("evolve.p", [&](const std::string& v) { c.evolve.p = parse_real_list(v, p_star).at(0); });
    with("evolve.u0", [&](const std::string& v) { c.u0 = parse_datum(v, file.base_dir()); });
    with("evolve.horizon", [&](const std::string& v) { c.evolve.horizon = parse_real(v); });
    with("evolve.duhamel_nodes", [&](const std::string& v) { c.evolve.duhamel_steps = parse_int(v); });
    with("evolve.picard_tol", [&](const std::string& v) { c.evolve.picard_tol = parse_real(v); });
    with("evolve.max_picard", [&](const std::string& v) { c.evolve.max_picard = parse_int(v); });
    with("evolve.blowup_factor", [&](const std::string& v) { c.evolve.blowup_factor = parse_real(v); });
    with("evolve.blowup_threshold", [&](const std::string& v) { c.evolve.blowup_threshold = parse_real(v); });
    with("evolve.contraction", [&](const std::string& v) { c.evolve.contraction = parse_real(v); });
    with("evolve.norms", [&](const std::string& v) { c.evolve.norms = parse_norms(v); });
    with("evolve.times", [&](const std::string& v) { c.evolve.record_times = parse_real_list(v); });
    with("evolve.r", [&](const std::string& v) { c.global_r = parse_real(v); });
    with("evolve.delta", [&](const std::string& v) { c.smallness = parse_real(v); });
    with("evolve.max_halvings", [&](const std::string& v) { c.max_halvings = parse_int(v); });
    if (c.evolve.norms.empty() && !file.find("evolve.norms")) {
        c.evolve.norms = {{2.0, NormKind::Strong}, {2.0, NormKind::Weak}};
    }
    check("evolve.p", [&] { c.evolve.validate(); });
    check("evolve.delta", [&] { require(c.smallness > 0.0, ErrorCode::Config, "evolve.delta must be positive"); });
    check("evolve.r", [&] {
        require(c.global_r == 0.0 || c.global_r >= 1.0, ErrorCode::Config, "evolve.r must be 0 (weak form) or >= 1");
    });

    with("sweep.alpha", [&](const std::string& v) { c.sweep_alpha = parse_real_list(v); });
    if (c.sweep_alpha.empty()) c.sweep_alpha = {c.weight.exponent};
    for (double a : c.sweep_alpha) {
        check("sweep.alpha", [&] {
            WeightSpec s = c.weight;
            s.exponent = a;
            s.validate();
        });
    }
    with("sweep.p", [&](const std::string& v) {
        c.sweep_p_critical = lower(v).find("critical") != std::string::npos;
        require(!c.sweep_p_critical || c.sweep_alpha.size() == 1, ErrorCode::Config,
                "'critical' needs a single sweep.alpha");
        c.sweep_p = parse_real_list(v, 1.0 + 2.0 / (c.weight.dimension + c.sweep_alpha.front()));
        for (double p : c.sweep_p) require(p > 1.0, ErrorCode::Config, "every p must exceed 1");
    });
    if (c.sweep_p.empty()) c.sweep_p = {c.evolve.p};
    with("sweep.blowup_horizon", [&](const std::string& v) { c.blowup_horizon = parse_real(v); });
    with("sweep.blowup_u0", [&](const std::string& v) { c.blowup_u0 = parse_datum(v, file.base_dir()); });
    with("sweep.global_u0", [&](const std::string& v) { c.global_u0 = parse_datum(v, file.base_dir()); });
    check("sweep.blowup_horizon", [&] { c.classify_config().validate(); });

    with("decay.q", [&](const std::string& v) { c.decay_q = parse_real_list(v); });
    with("decay.r", [&](const std::string& v) { c.decay_r = parse_real_list(v); });
    with("decay.kind", [&](const std::string& v) {
        const std::string k = lower(v);
        require(k == "weak" || k == "strong", ErrorCode::Config, "expected weak or strong");
        c.decay_kind = k == "weak" ? NormKind::Weak : NormKind::Strong;
    });
    with("decay.phi", [&](const std::string& v) {
        if (lower(trim(v)) != "auto") c.decay_phi = parse_datum(v, file.base_dir());
    });
    with("decay.times", [&](const std::string& v) { c.decay_times = parse_real_list(v); });
    check("decay.q", [&] {
        require(!c.decay_q.empty() && c.decay_q.size() == c.decay_r.size(), ErrorCode::Config,
                "decay.q and decay.r must list the same number of entries");
        for (std::size_t k = 0; k < c.decay_q.size(); ++k) {
            require(c.decay_q[k] >= 1.0 && c.decay_r[k] >= c.decay_q[k], ErrorCode::Config,
                    "decay pairs need 1 <= q <= r");
        }
    });

    with("seed", [&](const std::string& v) {
        std::uint64_t s = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
        require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::Config,
                "expected an unsigned integer");
        c.seed = s;
    });

    file.reject_unused();
    return c;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
    add("weight.case", weight.kind == WeightCase::AxisPower ? "axis" : "radial");
    add("weight.exponent", format_double(weight.exponent));
    add("weight.dimension", std::to_string(weight.dimension));
    add("grid.radius", radius > 0.0 ? format_double(radius) : "auto");
    add("grid.cells", std::to_string(cells));
    add("grid.grading", format_double(grading));
    add("grid.geometry", geometry ? geometry_token(*geometry) : "auto");
    add("kernel.times", join(kernel_times));
    add("kernel.steps", std::to_string(kernel_steps));
    add("evolve.mode", mode_token(mode));
    add("evolve.p", format_double(evolve.p));
    add("evolve.u0", u0.describe());
    add("evolve.horizon", format_double(evolve.horizon));
    add("evolve.duhamel_nodes", std::to_string(evolve.duhamel_steps));
    add("evolve.picard_tol", format_double(evolve.picard_tol));
    add("evolve.max_picard", std::to_string(evolve.max_picard));
    add("evolve.blowup_factor", format_double(evolve.blowup_factor));
    add("evolve.blowup_threshold", evolve.blowup_threshold > 0.0 ? format_double(evolve.blowup_threshold) : "auto");
    add("evolve.contraction", format_double(evolve.contraction));
    add("evolve.norms", describe_norms(evolve.norms));
    add("evolve.times", evolve.record_times.empty() ? "ladder" : join(evolve.record_times));
    add("evolve.r", format_double(global_r));
    add("evolve.delta", format_double(smallness));
    add("evolve.max_halvings", std::to_string(max_halvings));
    add("sweep.p", join(sweep_p));
    add("sweep.alpha", join(sweep_alpha));
    add("sweep.blowup_horizon", format_double(blowup_horizon));
    add("sweep.blowup_u0", blowup_u0.describe());
    add("sweep.global_u0", global_u0.describe());
    add("decay.q", join(decay_q));
    add("decay.r", join(decay_r));
    add("decay.kind", to_string(decay_kind));
    add("decay.phi", decay_phi ? decay_phi->describe() : "auto");
    add("decay.times", decay_times.empty() ? "ladder" : join(decay_times));
    add("seed", std::to_string(seed));
    return out;
}

ClassifyConfig ExperimentConfig::classify_config() const {
    ClassifyConfig cc;
    cc.evolve = evolve;
    cc.evolve.record_times.clear();
    cc.radius = radius;
    cc.cells = cells;
    cc.grading = grading;
    cc.blowup_horizon = blowup_horizon;
    cc.global_horizon = evolve.horizon;
    cc.blowup_u0 = blowup_u0;
    cc.global_u0 = global_u0;
    cc.smallness = smallness;
    cc.max_halvings = max_halvings;
    return cc;
}

}  // namespace fujita
