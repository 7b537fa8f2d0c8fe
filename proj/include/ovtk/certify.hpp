#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/adjoint.hpp"
#include "ovtk/model.hpp"
#include "ovtk/model_checks.hpp"
#include "ovtk/policy.hpp"
#include "ovtk/simulate.hpp"
#include "ovtk/stats.hpp"

namespace ovtk {

/// Ascending horizons, each a node of the working grid; at least 3.
struct HorizonSweep {
    std::vector<double> horizons;
    HorizonSweep() = default;
    explicit HorizonSweep(std::vector<double> h, const TimeGrid& grid);
};

/// Behavior of a challenger's certificate over the trailing third of the sweep.
enum class TailStatus {
    kNonpositive,        // every tail value has upper CI <= tol_zero
    kDecayingToZero,     // positive but shrinking geometrically toward 0
    kPositivePersistent, // lower CI above tol_zero and not decaying
    kIndeterminate,
};

std::string to_string(TailStatus s);

enum class Verdict { kOOEvidence, kWOOEvidence, kInconclusive, kRefuted };

std::string to_string(Verdict v);

struct TrendFit {
    double tail_mean = 0.0;
    double tail_slope = 0.0;  // least-squares slope of gamma vs T over the tail
    double tail_ratio = 0.0;  // gamma(T_m) / gamma(T_{m-1}), signed
    TailStatus status = TailStatus::kIndeterminate;
};

struct ChallengerSeries {
    std::string id;
    std::vector<double> gamma, gamma_ci, gap, gap_ci;  // per horizon
    std::uint64_t clamp_count = 0;
    TrendFit trend;
    double slack(std::size_t i) const { return gap[i] + gamma[i]; }
};

struct HorizonDiagnostics {
    double T = 0.0;
    AdjointSolverKind solver = AdjointSolverKind::kLsmc;
    double p0_mean = 0.0;            // mean costate at t = 0
    double mean_r2_p = 1.0, mean_r2_h = 1.0;
    double max_abs_z = 0.0, frac_z_above_3 = 0.0;
    int degree_reductions = 0;
    Eigen::VectorXd r2_p, r2_h, resid_z, resid_mean;  // per step
};

struct CertificateReport {
    std::string model_name;
    std::string candidate_id;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    double dt = 0.0;
    std::vector<double> horizons;
    ValidationReport validation;
    ConcavityReport concavity;
    bool linear_verified = false;
    std::vector<ChallengerSeries> challengers;
    std::vector<HorizonDiagnostics> horizon_diags;
    std::uint64_t candidate_clamps = 0;
    bool gaps_run = true;  // false in sweep mode: gap columns were not estimated
    Verdict verdict = Verdict::kInconclusive;
    double tol_zero = 1e-9;
    double decay_ratio_max = 0.9;
};

struct CertifyOptions {
    AdjointOptions adjoint;
    SimulateOptions simulate;
    ValidateOptions validate;
    ConcavityOptions concavity;
    double tol_zero = 1e-9;
    double decay_ratio_max = 0.9;
    bool run_gap = true;  // false: certificate series only (sweep mode)
};

/// Certificate integrand estimate: mean and CI of
///   sum_{k < K_T} H_u(t_k, u_k, x_k, p_pair_k, h_k) (v_k - u_k) dt
/// over paths, where (u, x) is the candidate trajectory, (p_pair, h) the
/// costate pairing, and v the challenger's control simulated on the same
/// lattice (its own state feeds feedback rules).
MeanCI estimate_gamma(const ModelSpec& model, const SimulationResult& candidate,
                      const AdjointSolution& adjoint, const ControlPolicy& challenger,
                      const BrownianLattice& lattice, double T,
                      const SimulateOptions& opts = {});

/// Paired-path estimate of J_T(candidate) - J_T(challenger) on a common lattice.
MeanCI estimate_gap(const ModelSpec& model, const ControlPolicy& candidate,
                    const ControlPolicy& challenger, const BrownianLattice& lattice, double T,
                    const SimulateOptions& opts = {});

struct CheckViolation {
    std::string challenger_id;
    double T = 0.0;
    double lhs = 0.0, rhs = 0.0;
};

struct CheckResult {
    bool applicable = false;
    bool pass = false;
    std::vector<CheckViolation> violations;
};

/// gap >= -gamma - 2 (gap_ci + gamma_ci) - atol at every (challenger, horizon).
/// Applicable only when the concavity check passed.
CheckResult check_gap_bound(const CertificateReport& report, double atol = 1e-9);

/// |gap + gamma| <= 2 (gap_ci + gamma_ci) + atol at every (challenger, horizon).
/// Applicable only when the model is linear-verified.
CheckResult check_linear_equality(const CertificateReport& report, double atol = 1e-9);

/// Tail classification of one certificate series; see TailStatus.
TrendFit fit_trend(const std::vector<double>& horizons, const std::vector<double>& gamma,
                   const std::vector<double>& gamma_ci, double tol_zero, double decay_ratio_max);

/// Full pipeline: validation, concavity probe, candidate simulation, costate
/// solve per horizon, certificate and gap series per challenger, trend fits,
/// verdict.
CertificateReport run_certification(const ModelSpec& model, const ControlPolicy& candidate,
                                    const std::vector<ControlPolicy>& challengers,
                                    const BrownianLattice& lattice, const HorizonSweep& sweep,
                                    const CertifyOptions& opts = {});

}  // namespace ovtk
