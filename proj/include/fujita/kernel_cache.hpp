#pragma once

#include "fujita/kernel.hpp"

#include <filesystem>
#include <optional>

namespace fujita {

/// On-disk store of kernel tables keyed by (weight, grid hash, t, steps).
///
/// File layout, little-endian: magic "FJKT", u32 version, i32 case,
/// f64 exponent, i32 dimension, u64 grid hash, f64 t, i32 steps,
/// u64 rows, u64 cols, then rows*cols f64 in row-major order.
class KernelCache {
public:
    explicit KernelCache(std::filesystem::path dir);

    const std::filesystem::path& directory() const { return dir_; }
    std::filesystem::path path_for(const Grid& grid, double t, int steps) const;

    /// Loads a table when a file with a matching header exists.
    std::optional<KernelTable> load(GridPtr grid, double t, int steps) const;
    void store(const KernelTable& table) const;

    /// build_kernel with the cache in front of it (steps = 0 is not cached).
    KernelTable get_or_build(GridPtr grid, double t, int steps) const;

private:
    std::filesystem::path dir_;
};

void write_kernel_table(const std::filesystem::path& file, const KernelTable& table);
/// Throws Error(Io) on a malformed file, Error(GridMismatch) on a key mismatch.
KernelTable read_kernel_table(const std::filesystem::path& file, GridPtr grid);

}  // namespace fujita
