#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "ovtk/errors.hpp"

namespace ovtk {

/// Uniform time grid on [0, t_end] with n_steps intervals.
/// Nodes are t_k = k * dt, k = 0..n_steps, dt = t_end / n_steps.
struct TimeGrid {
    double t_end = 0.0;
    std::size_t n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double t_end_, std::size_t n_steps_) : t_end(t_end_), n_steps(n_steps_) {
        if (!(t_end > 0.0) || !std::isfinite(t_end))
            throw InputError("TimeGrid: t_end must be finite and > 0, got " + std::to_string(t_end));
        if (n_steps == 0) throw InputError("TimeGrid: n_steps must be >= 1");
    }

    double dt() const { return t_end / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double node(std::size_t k) const { return static_cast<double>(k) * dt(); }

    /// Index of the node equal to t, if t lies on the grid (relative tolerance 1e-9).
    std::optional<std::size_t> index_of(double t) const {
        if (!(t >= 0.0) || t > t_end * (1.0 + 1e-12)) return std::nullopt;
        const double k = std::round(t / dt());
        if (k < 0.0 || k > static_cast<double>(n_steps)) return std::nullopt;
        const auto ki = static_cast<std::size_t>(k);
        if (std::abs(node(ki) - t) > 1e-9 * std::max(1.0, std::abs(t))) return std::nullopt;
        return ki;
    }

    /// Index lookup that throws InputError naming the offending value.
    std::size_t require_node(double t) const {
        if (auto k = index_of(t)) return *k;
        throw InputError("time " + std::to_string(t) + " is not a node of the grid (dt = " +
                         std::to_string(dt()) + ", t_end = " + std::to_string(t_end) + ")");
    }

    bool operator==(const TimeGrid& o) const { return t_end == o.t_end && n_steps == o.n_steps; }
};

/// Grid over the sub-horizon [0, T]; T must be a node of `g`.
inline TimeGrid sub_grid(const TimeGrid& g, double T) {
    const std::size_t k = g.require_node(T);
    if (k == 0) throw InputError("sub_grid: horizon must be positive");
    return TimeGrid(g.node(k), k);
}

}  // namespace ovtk
