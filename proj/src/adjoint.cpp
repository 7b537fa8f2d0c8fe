#include "ovtk/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ovtk/model_checks.hpp"
#include "ovtk/parallel.hpp"
#include "ovtk/stats.hpp"

namespace ovtk {

namespace {

// Gauss-Legendre 5-point rule on [-1, 1]; exact through degree 9, which makes
// the deterministic-driver quadrature far more accurate than the Euler grid.
constexpr double kGlNode[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
constexpr double kGlWeight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};

/// Raw regression variables at node k: candidate state, then exogenous values.
Eigen::MatrixXd features_at(const SimulationResult& sim, std::size_t k) {
    const auto n = static_cast<Eigen::Index>(sim.x.n_paths());
    Eigen::MatrixXd vars(n, 1 + static_cast<Eigen::Index>(sim.exo.size()));
    vars.col(0) = sim.x.values.col(static_cast<Eigen::Index>(k)).matrix();
    for (std::size_t j = 0; j < sim.exo.size(); ++j)
        vars.col(1 + static_cast<Eigen::Index>(j)) =
            sim.exo[j].values.col(static_cast<Eigen::Index>(k)).matrix();
    return vars;
}

void check_alignment(const SimulationResult& candidate, const BrownianLattice& lattice) {
    if (!(candidate.x.grid == lattice.grid))
        throw InputError("candidate simulation and Brownian lattice use different grids");
    if (candidate.x.n_paths() != lattice.n_paths())
        throw InputError("candidate simulation and Brownian lattice have different path counts");
}

}  // namespace

std::string to_string(AdjointSolverKind k) {
    switch (k) {
        case AdjointSolverKind::kLsmc: return "lsmc";
        case AdjointSolverKind::kExplicitTail: return "explicit-tail";
        case AdjointSolverKind::kAnalyticTail: return "analytic-tail";
    }
    return "unknown";
}

AdjointRunInfo adjoint_backward(const ModelSpec& model, const SimulationResult& candidate,
                                const BrownianLattice& lattice, double T,
                                const AdjointOptions& opts,
                                const std::function<void(const AdjointStep&)>& sink) {
    check_alignment(candidate, lattice);
    const TimeGrid& grid = lattice.grid;
    const std::size_t K = grid.require_node(T);
    if (K == 0) throw InputError("adjoint horizon must be positive");
    const double dt = grid.dt();
    const auto n = static_cast<Eigen::Index>(lattice.n_paths());
    const unsigned n_threads = resolve_threads(opts.n_threads);

    AdjointSolverKind kind;
    if (opts.method == AdjointMethod::kLsmc) {
        kind = AdjointSolverKind::kLsmc;
    } else {
        const bool state_free = is_state_free(model);
        if (!state_free && opts.method == AdjointMethod::kExplicitTail)
            throw InputError("explicit tail solver requires f_x = 0 and sigma_x = 0; model '" +
                             model.name + "' is state dependent");
        if (!state_free)
            kind = AdjointSolverKind::kLsmc;
        else
            kind = has_deterministic_gx(model) ? AdjointSolverKind::kAnalyticTail
                                               : AdjointSolverKind::kExplicitTail;
    }

    AdjointRunInfo info;
    info.solver = kind;
    info.n_steps = K;
    const auto KK = static_cast<Eigen::Index>(K);
    info.diag.r2_p = Eigen::VectorXd::Ones(KK);
    info.diag.r2_h = Eigen::VectorXd::Ones(KK);
    info.diag.degree_used = Eigen::VectorXd::Zero(KK);

    if (kind == AdjointSolverKind::kAnalyticTail) {
        std::vector<double> exo0(model.exogenous.size());
        for (std::size_t j = 0; j < exo0.size(); ++j) exo0[j] = model.exogenous[j].initial;
        const double u_ref = 0.5 * (model.control_set.hull_lo() + model.control_set.hull_hi());
        auto gx = [&](double t) {
            return model.g_x(t, u_ref, model.x0, Scenario{std::span<const double>(exo0)});
        };
        info.det_increments.resize(KK);
        for (std::size_t k = 0; k < K; ++k) {
            const double a = grid.node(k), b = grid.node(k + 1);
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double s = 0.0;
            for (int q = 0; q < 5; ++q) s += kGlWeight[q] * gx(mid + half * kGlNode[q]);
            info.det_increments(static_cast<Eigen::Index>(k)) = half * s;
        }
        Eigen::VectorXd p(n), pp(n);
        const Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
        double p_tail = 0.0, pair_tail = 0.0;
        for (std::size_t k = K; k-- > 0;) {
            p_tail += info.det_increments(static_cast<Eigen::Index>(k));
            if (k + 1 < K) pair_tail += gx(grid.node(k + 1)) * dt;
            p.setConstant(p_tail);
            pp.setConstant(pair_tail);
            sink(AdjointStep{k, p, h, pp, 1.0, 1.0, 0});
        }
        return info;
    }

    // Regression branches. `p_next` always holds the fitted costate at k+1.
    Eigen::VectorXd p_next = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd tail;
    if (kind == AdjointSolverKind::kExplicitTail) tail = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y_h(n), y_p(n);
    for (std::size_t k = K; k-- > 0;) {
        const double t = grid.node(k);
        const StepRegressor reg(opts.basis, features_at(candidate, k));
        parallel_for(static_cast<std::size_t>(n), n_threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                y_h(static_cast<Eigen::Index>(i)) =
                    p_next(static_cast<Eigen::Index>(i)) * lattice.dw(i, k) / dt;
        });
        double r2h = 1.0, r2p = 1.0;
        const Eigen::VectorXd h = reg.fit(y_h, &r2h);
        Eigen::VectorXd p, pp;
        if (kind == AdjointSolverKind::kLsmc) {
            pp = reg.fit(p_next);
            parallel_for(static_cast<std::size_t>(n), n_threads,
                         [&](std::size_t b, std::size_t e) {
                             std::vector<double> scratch;
                             for (std::size_t i = b; i < e; ++i) {
                                 const auto ii = static_cast<Eigen::Index>(i);
                                 const Scenario w = candidate.scenario_at(i, k, scratch);
                                 y_p(ii) = p_next(ii) +
                                           hamiltonian_x(model, t, candidate.u.at(i, k),
                                                         candidate.x.at(i, k), p_next(ii), h(ii),
                                                         w) *
                                               dt;
                             }
                         });
            p = reg.fit(y_p, &r2p);
        } else {
            // tail currently holds the realized sums I_{k+1} = sum_{j>k} g_x dt.
            pp = reg.fit(tail);
            parallel_for(static_cast<std::size_t>(n), n_threads,
                         [&](std::size_t b, std::size_t e) {
                             std::vector<double> scratch;
                             for (std::size_t i = b; i < e; ++i) {
                                 const Scenario w = candidate.scenario_at(i, k, scratch);
                                 tail(static_cast<Eigen::Index>(i)) +=
                                     model.g_x(t, candidate.u.at(i, k), candidate.x.at(i, k), w) *
                                     dt;
                             }
                         });
            p = reg.fit(tail, &r2p);
        }
        const auto kk = static_cast<Eigen::Index>(k);
        info.diag.r2_p(kk) = r2p;
        info.diag.r2_h(kk) = r2h;
        info.diag.degree_used(kk) = reg.degree_used();
        info.diag.degree_reductions += reg.reductions();
        sink(AdjointStep{k, p, h, pp, r2p, r2h, reg.degree_used()});
        p_next = std::move(p);
    }
    info.degree_reductions = info.diag.degree_reductions;
    return info;
}

namespace {

AdjointSolution materialize(const ModelSpec& model, const SimulationResult& candidate,
                            const BrownianLattice& lattice, double T, const AdjointOptions& opts) {
    const std::size_t K = lattice.grid.require_node(T);
    const auto n = static_cast<Eigen::Index>(lattice.n_paths());
    const auto KK = static_cast<Eigen::Index>(K);
    Eigen::ArrayXXd p(n, KK + 1), h(n, KK + 1), pp(n, KK + 1);
    p.col(KK).setZero();
    h.col(KK).setZero();
    pp.col(KK).setZero();
    AdjointRunInfo info =
        adjoint_backward(model, candidate, lattice, T, opts, [&](const AdjointStep& s) {
            const auto kk = static_cast<Eigen::Index>(s.k);
            p.col(kk) = s.p.array();
            h.col(kk) = s.h.array();
            pp.col(kk) = s.p_pair.array();
        });
    AdjointSolution sol;
    sol.horizon = lattice.grid.node(K);
    sol.solver = info.solver;
    sol.basis = opts.basis;
    const TimeGrid sg = sub_grid(lattice.grid, sol.horizon);
    sol.p = PathEnsemble(sg, std::move(p));
    sol.h = PathEnsemble(sg, std::move(h));
    sol.p_pair = PathEnsemble(sg, std::move(pp));
    sol.diag = info.diag;
    sol.det_increments = info.det_increments;
    return sol;
}

}  // namespace

AdjointSolution solve_adjoint_lsmc(const ModelSpec& model, const SimulationResult& candidate,
                                   const BrownianLattice& lattice, double T,
                                   const RegressionBasis& basis, unsigned n_threads) {
    AdjointOptions opts;
    opts.method = AdjointMethod::kLsmc;
    opts.basis = basis;
    opts.n_threads = n_threads;
    return materialize(model, candidate, lattice, T, opts);
}

AdjointSolution solve_adjoint_explicit(const ModelSpec& model, const SimulationResult& candidate,
                                       const BrownianLattice& lattice, double T,
                                       const RegressionBasis& basis, unsigned n_threads) {
    AdjointOptions opts;
    opts.method = AdjointMethod::kExplicitTail;
    opts.basis = basis;
    opts.n_threads = n_threads;
    return materialize(model, candidate, lattice, T, opts);
}

AdjointSolution solve_adjoint(const ModelSpec& model, const SimulationResult& candidate,
                              const BrownianLattice& lattice, double T,
                              const AdjointOptions& opts) {
    return materialize(model, candidate, lattice, T, opts);
}

void adjoint_diagnostics(const ModelSpec& model, const SimulationResult& candidate,
                         const BrownianLattice& lattice, AdjointSolution& sol,
                         unsigned n_threads) {
    check_alignment(candidate, lattice);
    const TimeGrid& grid = lattice.grid;
    const std::size_t K = sol.p.grid.n_steps;
    if (grid.require_node(sol.p.grid.t_end) != K)
        throw InputError("adjoint solution grid is not aligned with the lattice");
    if (sol.p.n_paths() != lattice.n_paths())
        throw InputError("adjoint solution and lattice have different path counts");
    const double dt = grid.dt();
    const auto n = static_cast<Eigen::Index>(lattice.n_paths());
    const unsigned nt = resolve_threads(n_threads);
    const auto KK = static_cast<Eigen::Index>(K);
    sol.diag.resid_mean.resize(KK);
    sol.diag.resid_se.resize(KK);
    sol.diag.resid_z.resize(KK);
    const bool analytic = sol.solver == AdjointSolverKind::kAnalyticTail;

    Eigen::VectorXd rho(n), h_tilde(n);
    for (std::size_t k = 0; k < K; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double t = grid.node(k);
        if (analytic) {
            rho = (sol.p.values.col(kk + 1) - sol.p.values.col(kk) + sol.det_increments(kk))
                      .matrix();
        } else {
            if (n >= 8) {
                // Cross-fitted martingale coefficient: each half is scored by
                // the other half's fit, so E[h~ dW] = 0 under the null and the
                // in-sample optimism of h does not tilt the residual.
                const Eigen::MatrixXd vars = features_at(candidate, k);
                Eigen::VectorXd y_h(n);
                parallel_for(static_cast<std::size_t>(n), nt,
                             [&](std::size_t b, std::size_t e) {
                                 for (std::size_t i = b; i < e; ++i)
                                     y_h(static_cast<Eigen::Index>(i)) =
                                         sol.p.at(i, k + 1) * lattice.dw(i, k) / dt;
                             });
                const Eigen::Index na = n / 2, nb = n - na;
                const StepRegressor reg_a(sol.basis, vars.topRows(na));
                const StepRegressor reg_b(sol.basis, vars.bottomRows(nb));
                h_tilde.head(na) = reg_b.predict(vars.topRows(na), reg_b.coefficients(y_h.tail(nb)));
                h_tilde.tail(nb) = reg_a.predict(vars.bottomRows(nb), reg_a.coefficients(y_h.head(na)));
            } else {
                h_tilde = sol.h.values.col(kk).matrix();
            }
            parallel_for(static_cast<std::size_t>(n), nt, [&](std::size_t b, std::size_t e) {
                std::vector<double> scratch;
                for (std::size_t i = b; i < e; ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    const Scenario w = candidate.scenario_at(i, k, scratch);
                    rho(ii) = sol.p.at(i, k + 1) - sol.p.at(i, k) +
                              hamiltonian_x(model, t, candidate.u.at(i, k), candidate.x.at(i, k),
                                            sol.p.at(i, k + 1), sol.h.at(i, k), w) *
                                  dt -
                              h_tilde(ii) * lattice.dw(i, k);
                }
            });
        }
        const MeanCI mc = mean_ci(rho);
        const double se = mc.ci95 / 1.96;
        sol.diag.resid_mean(kk) = mc.mean;
        sol.diag.resid_se(kk) = se;
        if (se > 0.0)
            sol.diag.resid_z(kk) = mc.mean / se;
        else
            sol.diag.resid_z(kk) = std::abs(mc.mean) <= 1e-12 ? 0.0 : 1e9;
    }
    sol.diag.max_abs_z = sol.diag.resid_z.cwiseAbs().maxCoeff();
    sol.diag.frac_z_above_3 =
        static_cast<double>((sol.diag.resid_z.cwiseAbs().array() > 3.0).count()) /
        static_cast<double>(K);
    sol.diag.residual_filled = true;
}

}  // namespace ovtk
