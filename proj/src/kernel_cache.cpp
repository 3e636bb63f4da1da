#include "fujita/kernel_cache.hpp"

#include "fujita/errors.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fujita {

namespace {

constexpr std::array<char, 4> kMagic{'F', 'J', 'K', 'T'};
constexpr std::uint32_t kVersion = 1;

struct Header {
    std::int32_t kind = 0;
    double exponent = 0.0;
    std::int32_t dimension = 0;
    std::uint64_t grid_hash = 0;
    double t = 0.0;
    std::int32_t steps = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
};

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void get(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}

Header header_for(const Grid& grid, double t, int steps) {
    const WeightSpec s = grid.spec();
    Header h;
    h.kind = static_cast<std::int32_t>(s.kind);
    h.exponent = s.exponent;
    h.dimension = s.dimension;
    h.grid_hash = grid.hash();
    h.t = t;
    h.steps = steps;
    h.rows = h.cols = grid.size();
    return h;
}

}  // namespace

void write_kernel_table(const std::filesystem::path& file, const KernelTable& table) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write kernel table " + file.string());
    const Header h = header_for(*table.grid, table.t, table.steps);
    os.write(kMagic.data(), kMagic.size());
    put(os, kVersion);
    put(os, h.kind);
    put(os, h.exponent);
    put(os, h.dimension);
    put(os, h.grid_hash);
    put(os, h.t);
    put(os, h.steps);
    put(os, h.rows);
    put(os, h.cols);
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) put(os, table.values(i, j));
    }
    require(static_cast<bool>(os), ErrorCode::Io, "short write on kernel table " + file.string());
}

KernelTable read_kernel_table(const std::filesystem::path& file, GridPtr grid) {
    std::ifstream is(file, std::ios::binary);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot read kernel table " + file.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    std::uint32_t version = 0;
    get(is, version);
    require(static_cast<bool>(is) && magic == kMagic && version == kVersion, ErrorCode::Io,
            "not a kernel table file: " + file.string());
    Header h;
    get(is, h.kind);
    get(is, h.exponent);
    get(is, h.dimension);
    get(is, h.grid_hash);
    get(is, h.t);
    get(is, h.steps);
    get(is, h.rows);
    get(is, h.cols);
    require(static_cast<bool>(is), ErrorCode::Io, "truncated kernel table header: " + file.string());

    const Header want = header_for(*grid, h.t, h.steps);
    require(h.kind == want.kind && h.exponent == want.exponent && h.dimension == want.dimension &&
                h.grid_hash == want.grid_hash && h.rows == want.rows && h.cols == want.cols,
            ErrorCode::GridMismatch, "kernel table key does not match the grid: " + file.string());

    KernelTable table;
    table.grid = std::move(grid);
    table.t = h.t;
    table.steps = h.steps;
    table.values.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) get(is, table.values(i, j));
    }
    require(static_cast<bool>(is), ErrorCode::Io, "truncated kernel table body: " + file.string());
    return table;
}

KernelCache::KernelCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    require(!ec, ErrorCode::Io, "cannot create kernel cache directory " + dir_.string());
}

std::filesystem::path KernelCache::path_for(const Grid& grid, double t, int steps) const {
    std::uint64_t tbits = 0;
    std::memcpy(&tbits, &t, sizeof t);
    char name[96];
    std::snprintf(name, sizeof name, "k_%016llx_%016llx_%d.fjkt", static_cast<unsigned long long>(grid.hash()),
                  static_cast<unsigned long long>(tbits), steps);
    return dir_ / name;
}

std::optional<KernelTable> KernelCache::load(GridPtr grid, double t, int steps) const {
    const auto file = path_for(*grid, t, steps);
    if (!std::filesystem::exists(file)) return std::nullopt;
    KernelTable table = read_kernel_table(file, std::move(grid));
    if (table.t != t || table.steps != steps) return std::nullopt;
    return table;
}

void KernelCache::store(const KernelTable& table) const {
    const auto file = path_for(*table.grid, table.t, table.steps);
    const auto tmp = file.string() + ".tmp";
    write_kernel_table(tmp, table);
    std::filesystem::rename(tmp, file);
}

KernelTable KernelCache::get_or_build(GridPtr grid, double t, int steps) const {
    if (auto hit = load(grid, t, steps)) return std::move(*hit);
    KernelTable table = build_kernel(grid->spec(), grid, t, steps);
    store(table);
    return table;
}

}  // namespace fujita
