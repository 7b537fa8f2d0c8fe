#include "ovtk/brownian.hpp"

#include <cmath>
#include <numbers>

#include "ovtk/errors.hpp"
#include "ovtk/parallel.hpp"

namespace ovtk {

double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    const auto words = philox::generate(seed, path, step);
    const std::uint64_t a = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
    const double u1 = philox::to_unit(a);
    const double u2 = philox::to_unit(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianLattice make_lattice(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                             unsigned n_threads) {
    if (n_paths == 0) throw InputError("make_lattice: n_paths must be >= 1");
    BrownianLattice lat;
    lat.grid = grid;
    lat.seed = seed;
    lat.increments.resize(static_cast<Eigen::Index>(n_paths),
                          static_cast<Eigen::Index>(grid.n_steps));
    const double scale = std::sqrt(grid.dt());
    auto* data = &lat.increments;
    parallel_for(n_paths, resolve_threads(n_threads), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t k = 0; k < grid.n_steps; ++k)
                (*data)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                    scale * normal_draw(seed, i, k);
    });
    return lat;
}

}  // namespace ovtk
