#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/brownian.hpp"
#include "ovtk/ensemble.hpp"
#include "ovtk/model.hpp"
#include "ovtk/policy.hpp"
#include "ovtk/stats.hpp"

namespace ovtk {

struct SimulateOptions {
    double blowup_guard = 1e12;  // |x| beyond this aborts with path/step info
    unsigned n_threads = 1;
};

/// Forward Euler-Maruyama output: state, applied control, exogenous processes
/// (parallel to model.exogenous), and the number of clamping events.
struct SimulationResult {
    PathEnsemble x;
    PathEnsemble u;
    std::vector<PathEnsemble> exo;
    std::uint64_t clamp_count = 0;

    Scenario scenario_at(std::size_t path, std::size_t k, std::vector<double>& scratch) const {
        scratch.resize(exo.size());
        for (std::size_t j = 0; j < exo.size(); ++j) scratch[j] = exo[j].at(path, k);
        return Scenario{std::span<const double>(scratch.data(), scratch.size())};
    }
};

/// x_{k+1} = x_k + f(t_k, u_k, x_k) dt + sigma(t_k, u_k, x_k) dW_k, x_0 = model.x0.
/// The control applied at t_k is the policy value clamped to the hull; the
/// final column of `u` holds the (clamped) policy value at t_end.
SimulationResult simulate_forward(const ModelSpec& model, const ControlPolicy& policy,
                                  const BrownianLattice& lattice,
                                  const SimulateOptions& opts = {});

/// Streaming per-path accumulation: for each requested horizon index K (grid
/// step counts), the left-endpoint reward sum J_i = sum_{k<K} g(...) dt per
/// path, without materializing ensembles. Same path recursion as
/// simulate_forward, bit for bit.
struct PathAccumulators {
    // One vector of length n_paths per requested horizon.
    std::vector<Eigen::VectorXd> reward;
    std::uint64_t clamp_count = 0;
};

PathAccumulators accumulate_reward(const ModelSpec& model, const ControlPolicy& policy,
                                   const BrownianLattice& lattice,
                                   const std::vector<std::size_t>& horizon_steps,
                                   const SimulateOptions& opts = {});

/// Monte Carlo estimate of E integral_0^T g dt under `policy` (fresh simulation
/// on `lattice` up to node T) with a 95% CI.
MeanCI estimate_value(const ModelSpec& model, const ControlPolicy& policy,
                      const BrownianLattice& lattice, double T, const SimulateOptions& opts = {});

/// Reward sums for an already materialized simulation (left-endpoint rule).
Eigen::VectorXd reward_sums(const ModelSpec& model, const SimulationResult& sim,
                            std::size_t horizon_step, unsigned n_threads = 1);

}  // namespace ovtk
