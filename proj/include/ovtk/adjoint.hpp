#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/basis.hpp"
#include "ovtk/brownian.hpp"
#include "ovtk/ensemble.hpp"
#include "ovtk/simulate.hpp"

namespace ovtk {

enum class AdjointMethod { kAuto, kLsmc, kExplicitTail };

/// How a solution was actually produced.
enum class AdjointSolverKind { kLsmc, kExplicitTail, kAnalyticTail };

std::string to_string(AdjointSolverKind k);

struct AdjointOptions {
    AdjointMethod method = AdjointMethod::kAuto;
    RegressionBasis basis;
    unsigned n_threads = 1;
};

/// Per-step regression quality collected during the backward pass, plus the
/// residual martingale statistics filled in by adjoint_diagnostics().
struct AdjointDiagnostics {
    Eigen::VectorXd r2_p, r2_h;       // size n_steps; 1.0 where regression was bypassed
    Eigen::VectorXd degree_used;      // effective polynomial degree per step
    int degree_reductions = 0;        // rank-deficiency repairs across all steps
    double terminal_residual = 0.0;   // max |p_T| over paths (0 by construction)

    // Residual test (filled by adjoint_diagnostics):
    Eigen::VectorXd resid_mean, resid_se, resid_z;  // size n_steps
    double max_abs_z = 0.0;
    double frac_z_above_3 = 0.0;
    bool residual_filled = false;
};

/// Costate estimate on the sub-grid [0, T].
///
/// `p` and `h` are the solution processes (p_T = 0 exactly; the final h column
/// is 0). `p_pair` holds the one-step-ahead conditional costate Ê_k[p_{k+1}]:
/// the value dual to the forward Euler step at t_k. Certificate quadratures
/// use (p_pair, h); with that pairing the linear-model equality between the
/// value gap and the certificate is exact at the discrete level.
struct AdjointSolution {
    double horizon = 0.0;
    AdjointSolverKind solver = AdjointSolverKind::kLsmc;
    RegressionBasis basis;
    PathEnsemble p, h, p_pair;
    AdjointDiagnostics diag;
    /// Analytic branch only: per-interval quadrature of the deterministic
    /// driver, p_k - p_{k+1} exactly.
    Eigen::VectorXd det_increments;
};

/// One backward step as seen by a streaming consumer. Columns are valid only
/// during the callback.
struct AdjointStep {
    std::size_t k;
    const Eigen::VectorXd& p;        // p at t_k (fitted)
    const Eigen::VectorXd& h;        // h at t_k
    const Eigen::VectorXd& p_pair;   // Ê_k[p_{k+1}]
    double r2_p, r2_h;
    int degree_used;
};

struct AdjointRunInfo {
    AdjointSolverKind solver;
    std::size_t n_steps = 0;
    int degree_reductions = 0;
    Eigen::VectorXd det_increments;  // analytic branch, else empty
    AdjointDiagnostics diag;         // regression stats only
};

/// Streaming backward induction: p_n = 0; for k = n-1..0 fit h_k from
/// p_{k+1} dW_k / dt, then p_k from p_{k+1} + H_x(t_k, u_k, x_k, p_{k+1}, h_k) dt,
/// both regressed on the features at t_k. The sink runs once per step,
/// k descending. `candidate` must have been simulated on `lattice`.
AdjointRunInfo adjoint_backward(const ModelSpec& model, const SimulationResult& candidate,
                                const BrownianLattice& lattice, double T,
                                const AdjointOptions& opts,
                                const std::function<void(const AdjointStep&)>& sink);

/// Backward-induction solver (materialized). Method kAuto picks the explicit
/// tail solver when f_x and sigma_x vanish on samples, else LSMC.
AdjointSolution solve_adjoint_lsmc(const ModelSpec& model, const SimulationResult& candidate,
                                   const BrownianLattice& lattice, double T,
                                   const RegressionBasis& basis = {}, unsigned n_threads = 1);

/// Tail-integral solver; requires f_x = 0 and sigma_x = 0 (checked on samples,
/// throws InputError otherwise). p_k regresses the realized tail sum of g_x;
/// with a deterministic g_x the regression is bypassed: p is the exact tail
/// integral (per-interval Gauss-Legendre) and h = 0.
AdjointSolution solve_adjoint_explicit(const ModelSpec& model, const SimulationResult& candidate,
                                       const BrownianLattice& lattice, double T,
                                       const RegressionBasis& basis = {}, unsigned n_threads = 1);

/// Dispatching front end used by the pipeline.
AdjointSolution solve_adjoint(const ModelSpec& model, const SimulationResult& candidate,
                              const BrownianLattice& lattice, double T,
                              const AdjointOptions& opts);

/// Fill the residual martingale test into sol.diag: per-step
/// rho_k = p_{k+1} - p_k + H_x(t_k, u_k, x_k, p_{k+1}, h_k) dt - h~_k dW_k,
/// where h~ is a cross-fitted (2-fold) version of h so the statistic is
/// unbiased under the null. Reports per-step mean, SE, and z = mean/SE.
void adjoint_diagnostics(const ModelSpec& model, const SimulationResult& candidate,
                         const BrownianLattice& lattice, AdjointSolution& sol,
                         unsigned n_threads = 1);

}  // namespace ovtk
