#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

#include <Eigen/Dense>

#include "ovtk/time_grid.hpp"

namespace ovtk {

// ---------------------------------------------------------------------------
// Counter-based generator (Philox 4x32-10). A draw is a pure function of
// (seed, path index, step index), so results do not depend on evaluation
// order, thread count, or how many draws other paths consumed.
// ---------------------------------------------------------------------------

namespace philox {

struct Block {
    std::array<std::uint32_t, 4> counter;
    std::array<std::uint32_t, 2> key;
};

inline void round_once(Block& b) {
    constexpr std::uint64_t kMulA = 0xD2511F53u;
    constexpr std::uint64_t kMulB = 0xCD9E8D57u;
    const std::uint64_t p0 = kMulA * b.counter[0];
    const std::uint64_t p1 = kMulB * b.counter[2];
    const auto lo0 = static_cast<std::uint32_t>(p0), hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1), hi1 = static_cast<std::uint32_t>(p1 >> 32);
    b.counter = {hi1 ^ b.counter[1] ^ b.key[0], lo1, hi0 ^ b.counter[3] ^ b.key[1], lo0};
    b.key[0] += 0x9E3779B9u;  // golden-ratio increment
    b.key[1] += 0xBB67AE85u;
}

/// Ten-round Philox 4x32 keyed by a 64-bit seed, counter = (step, path).
inline std::array<std::uint32_t, 4> generate(std::uint64_t seed, std::uint64_t path,
                                             std::uint64_t step) {
    Block b;
    b.counter = {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                 static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    b.key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (int r = 0; r < 10; ++r) round_once(b);
    return b.counter;
}

/// Uniform in (0,1) from a 64-bit word, never exactly 0 or 1.
inline double to_unit(std::uint64_t v) {
    return (static_cast<double>(v >> 11) + 0.5) * 0x1p-53;
}

}  // namespace philox

/// Standard normal draw addressed by (seed, path, step). Box-Muller on two
/// 64-bit uniforms taken from one Philox block.
double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

/// Brownian increments on a uniform grid: dw(i, k) ~ N(0, dt) for path i,
/// interval [t_k, t_{k+1}). Materialized n_paths x n_steps, row-major by path.
///
/// Determinism: entries are pure functions of (seed, i, k, dt). Extending the
/// grid to more steps at equal dt leaves the leading columns bit-identical.
struct BrownianLattice {
    TimeGrid grid;
    std::uint64_t seed = 0;
    Eigen::ArrayXXd increments;  // n_paths x n_steps

    std::size_t n_paths() const { return static_cast<std::size_t>(increments.rows()); }
    double dw(std::size_t path, std::size_t k) const {
        return increments(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(k));
    }
};

BrownianLattice make_lattice(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                             unsigned n_threads = 1);

}  // namespace ovtk
