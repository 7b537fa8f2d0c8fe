#include "ovtk/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "ovtk/fmt.hpp"
#include "ovtk/parallel.hpp"

namespace ovtk {

namespace {

/// One Euler-Maruyama pass over a range of paths. Every consumer of simulated
/// paths (materializing, reward-accumulating, certificate quadratures) funnels
/// through this loop so their state/control sequences agree bit for bit.
///
/// node_sink(path, k, t, x, u, scenario) fires at every node 0..n_steps; for
/// k < n_steps it fires before the step that consumes (x_k, u_k).
template <class NodeSink>
std::uint64_t euler_span(const ModelSpec& model, const ControlPolicy& policy,
                         const BrownianLattice& lattice, double blowup_guard, std::size_t begin,
                         std::size_t end, NodeSink&& node_sink) {
    const TimeGrid& grid = lattice.grid;
    const double dt = grid.dt();
    std::uint64_t clamps = 0;
    std::vector<double> exo(model.exogenous.size());
    for (std::size_t i = begin; i < end; ++i) {
        double x = model.x0;
        for (std::size_t j = 0; j < exo.size(); ++j) exo[j] = model.exogenous[j].initial;
        for (std::size_t k = 0; k <= grid.n_steps; ++k) {
            const double t = grid.node(k);
            const Scenario w{std::span<const double>(exo)};
            const double raw = policy.evaluate(t, i, k, x, w);
            if (!std::isfinite(raw))
                throw NumericalError("control policy '" + policy.label() +
                                     "' returned a non-finite value at path " +
                                     std::to_string(i) + ", step " + std::to_string(k));
            const double u = model.control_set.clamp_to_hull(raw);
            if (u != raw) ++clamps;
            node_sink(i, k, t, x, u, w);
            if (k == grid.n_steps) break;
            const double dw = lattice.dw(i, k);
            const double x_next =
                x + model.f(t, u, x, w) * dt + model.sigma(t, u, x, w) * dw;
            if (!std::isfinite(x_next) || std::abs(x_next) > blowup_guard)
                throw NumericalError("state blow-up under policy '" + policy.label() +
                                     "': x = " + format_sci(x_next, 3) + " at path " +
                                     std::to_string(i) + ", step " + std::to_string(k + 1) +
                                     " (t = " + format_double(grid.node(k + 1)) + ")");
            for (std::size_t j = 0; j < exo.size(); ++j)
                exo[j] = model.exogenous[j].step(t, exo[j], dw, dt);
            x = x_next;
        }
    }
    return clamps;
}

}  // namespace

SimulationResult simulate_forward(const ModelSpec& model, const ControlPolicy& policy,
                                  const BrownianLattice& lattice, const SimulateOptions& opts) {
    const TimeGrid& grid = lattice.grid;
    const auto n_paths = static_cast<Eigen::Index>(lattice.n_paths());
    const auto n_nodes = static_cast<Eigen::Index>(grid.n_nodes());
    Eigen::ArrayXXd xs(n_paths, n_nodes), us(n_paths, n_nodes);
    std::vector<Eigen::ArrayXXd> exo(model.exogenous.size());
    for (auto& e : exo) e.resize(n_paths, n_nodes);

    std::atomic<std::uint64_t> clamp_total{0};
    parallel_for(lattice.n_paths(), resolve_threads(opts.n_threads),
                 [&](std::size_t b, std::size_t e) {
                     const std::uint64_t clamps = euler_span(
                         model, policy, lattice, opts.blowup_guard, b, e,
                         [&](std::size_t i, std::size_t k, double, double x, double u,
                             const Scenario& w) {
                             const auto ii = static_cast<Eigen::Index>(i);
                             const auto kk = static_cast<Eigen::Index>(k);
                             xs(ii, kk) = x;
                             us(ii, kk) = u;
                             for (std::size_t j = 0; j < exo.size(); ++j)
                                 exo[j](ii, kk) = w.exo[j];
                         });
                     clamp_total.fetch_add(clamps, std::memory_order_relaxed);
                 });

    SimulationResult out;
    out.x = PathEnsemble(grid, std::move(xs));
    out.u = PathEnsemble(grid, std::move(us));
    out.exo.reserve(exo.size());
    for (auto& e : exo) out.exo.emplace_back(grid, std::move(e));
    out.clamp_count = clamp_total.load();
    return out;
}

PathAccumulators accumulate_reward(const ModelSpec& model, const ControlPolicy& policy,
                                   const BrownianLattice& lattice,
                                   const std::vector<std::size_t>& horizon_steps,
                                   const SimulateOptions& opts) {
    const TimeGrid& grid = lattice.grid;
    for (std::size_t K : horizon_steps)
        if (K > grid.n_steps)
            throw InputError("horizon step " + std::to_string(K) + " beyond grid (" +
                             std::to_string(grid.n_steps) + " steps)");
    const double dt = grid.dt();

    PathAccumulators acc;
    acc.reward.assign(horizon_steps.size(),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lattice.n_paths())));

    // Horizon cut points sorted by node index; each path walks them in order.
    std::vector<std::pair<std::size_t, std::size_t>> cuts;  // (node K, horizon slot)
    for (std::size_t s = 0; s < horizon_steps.size(); ++s) cuts.emplace_back(horizon_steps[s], s);
    std::sort(cuts.begin(), cuts.end());

    std::atomic<std::uint64_t> clamp_total{0};
    parallel_for(lattice.n_paths(), resolve_threads(opts.n_threads),
                 [&](std::size_t b, std::size_t e) {
                     double running = 0.0;
                     std::size_t next_cut = 0;
                     std::size_t current = b;
                     const std::uint64_t clamps = euler_span(
                         model, policy, lattice, opts.blowup_guard, b, e,
                         [&](std::size_t i, std::size_t k, double t, double x, double u,
                             const Scenario& w) {
                             if (i != current || k == 0) {
                                 running = 0.0;
                                 next_cut = 0;
                                 current = i;
                             }
                             // running == sum_{j<k} g dt at entry to node k.
                             while (next_cut < cuts.size() && cuts[next_cut].first == k) {
                                 acc.reward[cuts[next_cut].second](
                                     static_cast<Eigen::Index>(i)) = running;
                                 ++next_cut;
                             }
                             if (k < grid.n_steps) running += model.g(t, u, x, w) * dt;
                         });
                     clamp_total.fetch_add(clamps, std::memory_order_relaxed);
                 });
    acc.clamp_count = clamp_total.load();
    return acc;
}

MeanCI estimate_value(const ModelSpec& model, const ControlPolicy& policy,
                      const BrownianLattice& lattice, double T, const SimulateOptions& opts) {
    const std::size_t K = lattice.grid.require_node(T);
    const PathAccumulators acc = accumulate_reward(model, policy, lattice, {K}, opts);
    return mean_ci(acc.reward[0]);
}

Eigen::VectorXd reward_sums(const ModelSpec& model, const SimulationResult& sim,
                            std::size_t horizon_step, unsigned n_threads) {
    const TimeGrid& grid = sim.x.grid;
    if (horizon_step > grid.n_steps)
        throw InputError("horizon step " + std::to_string(horizon_step) + " beyond grid");
    const double dt = grid.dt();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sim.x.n_paths()));
    parallel_for(sim.x.n_paths(), resolve_threads(n_threads), [&](std::size_t b, std::size_t e) {
        std::vector<double> scratch;
        for (std::size_t i = b; i < e; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < horizon_step; ++k) {
                const Scenario w = sim.scenario_at(i, k, scratch);
                s += model.g(grid.node(k), sim.u.at(i, k), sim.x.at(i, k), w) * dt;
            }
            out(static_cast<Eigen::Index>(i)) = s;
        }
    });
    return out;
}

}  // namespace ovtk
