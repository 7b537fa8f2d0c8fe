#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "ovtk/errors.hpp"
#include "ovtk/time_grid.hpp"

namespace ovtk {

/// Per-path values on the nodes of a grid: n_paths x (n_steps + 1), row = path.
/// Construction rejects non-finite entries.
struct PathEnsemble {
    TimeGrid grid;
    Eigen::ArrayXXd values;

    PathEnsemble() = default;
    PathEnsemble(TimeGrid g, Eigen::ArrayXXd v) : grid(g), values(std::move(v)) {
        if (static_cast<std::size_t>(values.cols()) != grid.n_nodes())
            throw InputError("PathEnsemble: column count " + std::to_string(values.cols()) +
                             " does not match grid nodes " + std::to_string(grid.n_nodes()));
        if (values.rows() < 1) throw InputError("PathEnsemble: need at least one path");
        if (!values.isFinite().all())
            throw NumericalError("PathEnsemble: non-finite entry rejected");
    }

    std::size_t n_paths() const { return static_cast<std::size_t>(values.rows()); }
    double at(std::size_t path, std::size_t k) const {
        return values(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(k));
    }
};

/// CSV: header line `# t_end=<v> n_steps=<n> n_paths=<m>`, then one row per
/// path with n_steps+1 comma-separated doubles (shortest round-trip form).
void write_ensemble_csv(const PathEnsemble& e, const std::string& path);
PathEnsemble read_ensemble_csv(const std::string& path);

/// Binary dump: magic "OVTK1", then u64 n_paths, u64 n_steps, f64 t_end,
/// then row-major doubles. All fields little-endian.
void write_ensemble_binary(const PathEnsemble& e, const std::string& path);
PathEnsemble read_ensemble_binary(const std::string& path);

}  // namespace ovtk
