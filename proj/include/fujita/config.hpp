#pragma once

#include "fujita/blowup.hpp"
#include "fujita/evolve.hpp"
#include "fujita/weights.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fujita {

/// One `key = value` line of a config file.
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// Flat `dotted.key = value` text. `#` starts a comment; blank lines are
/// ignored; a repeated key is an error.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, std::string source = "<config>");
    static ConfigFile load(const std::filesystem::path& file);

    /// Marks the key as consumed.
    const ConfigEntry* find(std::string_view key) const;
    const std::string& source() const { return source_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }
    /// "source:line: " for a present key, "source: " otherwise.
    std::string where(std::string_view key) const;
    /// Throws Error(Config) naming the first entry nobody asked for.
    void reject_unused() const;

private:
    std::string source_;
    std::filesystem::path base_dir_;
    std::vector<ConfigEntry> entries_;
    mutable std::vector<bool> used_;
};

/// Decimal, "a/b" fraction, or "inf".
double parse_real(std::string_view text);

/// Comma-separated reals; the token `critical` maps to `critical` when given.
std::vector<double> parse_real_list(std::string_view text, std::optional<double> critical = std::nullopt);

/// bump(center, width, height) | decay_profile(delta, p) | indicator(radius)
/// | table(path) | zero; an optional "* factor" scales the amplitude.
InitialDatum parse_datum(std::string_view text, const std::filesystem::path& base_dir);

/// Comma-separated `weak:q`, `strong:q`, or `inf`.
std::vector<NormSpec> parse_norms(std::string_view text);

std::string describe_norms(const std::vector<NormSpec>& norms);

enum class EvolveMode { Picard, Local, Global };

struct ExperimentConfig {
    WeightSpec weight = WeightSpec::axis(0.5);
    /// 0 selects a radius from the longest time in play.
    double radius = 0.0;
    int cells = 512;
    double grading = 2.0;
    std::optional<GridGeometry> geometry;

    std::vector<double> kernel_times{0.25, 0.5, 1.0, 2.0, 4.0};
    int kernel_steps = 512;

    EvolveMode mode = EvolveMode::Picard;
    EvolveConfig evolve;
    InitialDatum u0 = InitialDatum::bump(0.0, 1.0, 1.0);
    double global_r = 0.0;
    double smallness = 1.0;
    int max_halvings = 10;

    std::vector<double> sweep_p;
    std::vector<double> sweep_alpha;
    bool sweep_p_critical = false;
    double blowup_horizon = 256.0;
    InitialDatum blowup_u0 = InitialDatum::bump(0.0, 1.0, 1.0);
    InitialDatum global_u0 = InitialDatum::decay_profile(0.5, 3.0);

    std::vector<double> decay_q{1.0, 2.0};
    std::vector<double> decay_r{2.0, kInf};
    NormKind decay_kind = NormKind::Strong;
    /// Unset selects a Gaussian for q = 1 and the self-similar tail |x|^{-h/q} for q > 1.
    std::optional<InitialDatum> decay_phi;
    std::vector<double> decay_times;

    std::uint64_t seed = 0;

    /// Reads every known key, validates it against the module preconditions,
    /// and rejects unknown keys. Errors carry "source:line: ".
    static ExperimentConfig from_file(const ConfigFile& file);

    /// Fully resolved key/value pairs, defaults included, in a fixed order.
    std::vector<std::pair<std::string, std::string>> resolved() const;

    ClassifyConfig classify_config() const;
};

}  // namespace fujita
