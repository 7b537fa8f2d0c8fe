#include "ovtk/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ovtk/parallel.hpp"

namespace ovtk {

namespace {

/// Left-endpoint reward sums of a materialized simulation at several node
/// cut points, one pass over the grid. Per path the accumulation runs in
/// ascending k, so the result is independent of the path partition.
std::vector<Eigen::VectorXd> reward_at_cuts(const ModelSpec& model, const SimulationResult& sim,
                                            const std::vector<std::size_t>& cut_steps,
                                            unsigned n_threads) {
    const TimeGrid& grid = sim.x.grid;
    const double dt = grid.dt();
    std::size_t k_max = 0;
    for (std::size_t K : cut_steps) {
        if (K > grid.n_steps)
            throw InputError("reward cut " + std::to_string(K) + " beyond grid");
        k_max = std::max(k_max, K);
    }
    std::vector<std::pair<std::size_t, std::size_t>> cuts;
    for (std::size_t s = 0; s < cut_steps.size(); ++s) cuts.emplace_back(cut_steps[s], s);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Eigen::VectorXd> out(
        cut_steps.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sim.x.n_paths())));
    parallel_for(sim.x.n_paths(), resolve_threads(n_threads), [&](std::size_t b, std::size_t e) {
        std::vector<double> scratch;
        for (std::size_t i = b; i < e; ++i) {
            double running = 0.0;
            std::size_t next = 0;
            for (std::size_t k = 0; k <= k_max; ++k) {
                while (next < cuts.size() && cuts[next].first == k) {
                    out[cuts[next].second](static_cast<Eigen::Index>(i)) = running;
                    ++next;
                }
                if (k == k_max) break;
                const Scenario w = sim.scenario_at(i, k, scratch);
                running += model.g(grid.node(k), sim.u.at(i, k), sim.x.at(i, k), w) * dt;
            }
        }
    });
    return out;
}

/// Per-path certificate quadrature sum_{k<K} H_u(t_k, u^, x^, p_pair_k, h_k)
/// (v_k - u^_k) dt against a challenger control table.
Eigen::VectorXd gamma_sums(const ModelSpec& model, const SimulationResult& candidate,
                           const AdjointSolution& adjoint, const PathEnsemble& challenger_u,
                           std::size_t K, unsigned n_threads) {
    const TimeGrid& grid = candidate.x.grid;
    const double dt = grid.dt();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(candidate.x.n_paths()));
    parallel_for(candidate.x.n_paths(), resolve_threads(n_threads),
                 [&](std::size_t b, std::size_t e) {
                     std::vector<double> scratch;
                     for (std::size_t k = 0; k < K; ++k) {
                         const double t = grid.node(k);
                         for (std::size_t i = b; i < e; ++i) {
                             const Scenario w = candidate.scenario_at(i, k, scratch);
                             const double hu = hamiltonian_u(
                                 model, t, candidate.u.at(i, k), candidate.x.at(i, k),
                                 adjoint.p_pair.at(i, k), adjoint.h.at(i, k), w);
                             out(static_cast<Eigen::Index>(i)) +=
                                 hu * (challenger_u.at(i, k) - candidate.u.at(i, k)) * dt;
                         }
                     }
                 });
    return out;
}

}  // namespace

HorizonSweep::HorizonSweep(std::vector<double> h, const TimeGrid& grid) : horizons(std::move(h)) {
    if (horizons.size() < 3)
        throw InputError("horizon sweep needs at least 3 horizons, got " +
                         std::to_string(horizons.size()));
    double prev = 0.0;
    for (double T : horizons) {
        if (!(T > prev))
            throw InputError("horizons must be strictly ascending and positive; offender: " +
                             std::to_string(T));
        grid.require_node(T);
        prev = T;
    }
}

std::string to_string(TailStatus s) {
    switch (s) {
        case TailStatus::kNonpositive: return "nonpositive";
        case TailStatus::kDecayingToZero: return "decaying-to-zero";
        case TailStatus::kPositivePersistent: return "positive-persistent";
        case TailStatus::kIndeterminate: return "indeterminate";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::kOOEvidence: return "overtaking-optimal-evidence";
        case Verdict::kWOOEvidence: return "weakly-overtaking-optimal-evidence";
        case Verdict::kInconclusive: return "inconclusive";
        case Verdict::kRefuted: return "refuted";
    }
    return "unknown";
}

MeanCI estimate_gamma(const ModelSpec& model, const SimulationResult& candidate,
                      const AdjointSolution& adjoint, const ControlPolicy& challenger,
                      const BrownianLattice& lattice, double T, const SimulateOptions& opts) {
    const std::size_t K = lattice.grid.require_node(T);
    if (adjoint.p_pair.grid.n_steps != K ||
        std::abs(adjoint.horizon - lattice.grid.node(K)) > 1e-12 * std::max(1.0, T))
        throw InputError("adjoint solution horizon does not match the requested horizon");
    const SimulationResult chal = simulate_forward(model, challenger, lattice, opts);
    const Eigen::VectorXd g =
        gamma_sums(model, candidate, adjoint, chal.u, K, resolve_threads(opts.n_threads));
    return mean_ci(g);
}

MeanCI estimate_gap(const ModelSpec& model, const ControlPolicy& candidate,
                    const ControlPolicy& challenger, const BrownianLattice& lattice, double T,
                    const SimulateOptions& opts) {
    const std::size_t K = lattice.grid.require_node(T);
    const PathAccumulators a = accumulate_reward(model, candidate, lattice, {K}, opts);
    const PathAccumulators b = accumulate_reward(model, challenger, lattice, {K}, opts);
    const Eigen::VectorXd diff = a.reward[0] - b.reward[0];
    return mean_ci(diff);
}

TrendFit fit_trend(const std::vector<double>& horizons, const std::vector<double>& gamma,
                   const std::vector<double>& gamma_ci, double tol_zero, double decay_ratio_max) {
    TrendFit fit;
    const std::size_t m = horizons.size();
    if (m != gamma.size() || m != gamma_ci.size())
        throw InputError("trend fit: series lengths disagree");
    if (m < 2) return fit;
    const std::size_t tail_len = std::max<std::size_t>(2, (m + 2) / 3);
    const std::size_t first = m - tail_len;

    double sum = 0.0;
    for (std::size_t i = first; i < m; ++i) sum += gamma[i];
    fit.tail_mean = sum / static_cast<double>(tail_len);

    // Least-squares slope of gamma against T over the tail.
    double st = 0.0, sg = 0.0, stt = 0.0, stg = 0.0;
    for (std::size_t i = first; i < m; ++i) {
        st += horizons[i];
        sg += gamma[i];
        stt += horizons[i] * horizons[i];
        stg += horizons[i] * gamma[i];
    }
    const double nl = static_cast<double>(tail_len);
    const double denom = nl * stt - st * st;
    fit.tail_slope = denom > 0.0 ? (nl * stg - st * sg) / denom : 0.0;

    const double prev = gamma[m - 2];
    fit.tail_ratio = std::abs(prev) > 1e-300 ? gamma[m - 1] / prev
                                             : (std::abs(gamma[m - 1]) <= tol_zero ? 0.0 : 1e18);

    bool nonpositive = true;
    for (std::size_t i = first; i < m; ++i)
        if (gamma[i] + gamma_ci[i] > tol_zero) nonpositive = false;

    bool decaying = true;
    for (std::size_t i = first; i < m; ++i)
        if (!(gamma[i] > tol_zero)) decaying = false;
    for (std::size_t i = first + 1; i < m && decaying; ++i) {
        if (!(gamma[i] < gamma[i - 1])) decaying = false;
        else if (!(gamma[i] / gamma[i - 1] <= decay_ratio_max)) decaying = false;
    }

    bool persistent = true;
    for (std::size_t i = first; i < m; ++i)
        if (!(gamma[i] - gamma_ci[i] > tol_zero)) persistent = false;

    if (nonpositive)
        fit.status = TailStatus::kNonpositive;
    else if (decaying)
        fit.status = TailStatus::kDecayingToZero;
    else if (persistent)
        fit.status = TailStatus::kPositivePersistent;
    else
        fit.status = TailStatus::kIndeterminate;
    return fit;
}

CheckResult check_gap_bound(const CertificateReport& report, double atol) {
    CheckResult res;
    res.applicable = report.concavity.pass;
    res.pass = true;
    if (!res.applicable) return res;
    for (const auto& ch : report.challengers) {
        for (std::size_t i = 0; i < report.horizons.size(); ++i) {
            const double rhs =
                -ch.gamma[i] - 2.0 * (ch.gap_ci[i] + ch.gamma_ci[i]) - atol;
            if (ch.gap[i] < rhs) {
                res.pass = false;
                res.violations.push_back({ch.id, report.horizons[i], ch.gap[i], rhs});
            }
        }
    }
    return res;
}

CheckResult check_linear_equality(const CertificateReport& report, double atol) {
    CheckResult res;
    res.applicable = report.linear_verified;
    res.pass = true;
    if (!res.applicable) return res;
    for (const auto& ch : report.challengers) {
        for (std::size_t i = 0; i < report.horizons.size(); ++i) {
            const double lhs = std::abs(ch.gap[i] + ch.gamma[i]);
            const double rhs = 2.0 * (ch.gap_ci[i] + ch.gamma_ci[i]) + atol;
            if (lhs > rhs) {
                res.pass = false;
                res.violations.push_back({ch.id, report.horizons[i], lhs, rhs});
            }
        }
    }
    return res;
}

CertificateReport run_certification(const ModelSpec& model, const ControlPolicy& candidate,
                                    const std::vector<ControlPolicy>& challengers,
                                    const BrownianLattice& lattice, const HorizonSweep& sweep,
                                    const CertifyOptions& opts) {
    if (challengers.empty()) throw InputError("certification needs at least one challenger");
    const TimeGrid& grid = lattice.grid;
    const unsigned n_threads = resolve_threads(opts.simulate.n_threads);

    CertificateReport report;
    report.model_name = model.name;
    report.candidate_id = candidate.label();
    report.seed = lattice.seed;
    report.n_paths = lattice.n_paths();
    report.dt = grid.dt();
    report.horizons = sweep.horizons;
    report.tol_zero = opts.tol_zero;
    report.decay_ratio_max = opts.decay_ratio_max;

    report.validation = validate_model(model, opts.validate);
    if (!report.validation.pass)
        throw InputError("model '" + model.name +
                         "' failed validation; declared partials or affine structure disagree "
                         "with the coefficients:\n" +
                         report.validation.summary());
    report.linear_verified = report.validation.linear_verified;
    report.concavity = check_concavity(model, opts.concavity);

    std::vector<std::size_t> steps;
    steps.reserve(sweep.horizons.size());
    for (double T : sweep.horizons) steps.push_back(grid.require_node(T));

    const SimulationResult cand = simulate_forward(model, candidate, lattice, opts.simulate);
    report.candidate_clamps = cand.clamp_count;
    const std::vector<Eigen::VectorXd> j_cand =
        opts.run_gap ? reward_at_cuts(model, cand, steps, n_threads)
                     : std::vector<Eigen::VectorXd>{};

    // One forward pass per challenger; keep only the control table and the
    // per-horizon reward sums, the rest of the simulation is dropped.
    struct ChallengerData {
        PathEnsemble u;
        std::vector<Eigen::VectorXd> reward;
        std::uint64_t clamps = 0;
    };
    std::vector<ChallengerData> chal;
    chal.reserve(challengers.size());
    for (const ControlPolicy& policy : challengers) {
        SimulationResult sim = simulate_forward(model, policy, lattice, opts.simulate);
        ChallengerData data;
        if (opts.run_gap) data.reward = reward_at_cuts(model, sim, steps, n_threads);
        data.clamps = sim.clamp_count;
        data.u = std::move(sim.u);
        chal.push_back(std::move(data));
    }

    report.challengers.resize(challengers.size());
    for (std::size_t j = 0; j < challengers.size(); ++j) {
        report.challengers[j].id = challengers[j].label();
        report.challengers[j].clamp_count = chal[j].clamps;
    }

    for (std::size_t hidx = 0; hidx < sweep.horizons.size(); ++hidx) {
        const double T = sweep.horizons[hidx];
        const std::size_t K = steps[hidx];
        AdjointSolution sol = solve_adjoint(model, cand, lattice, T, opts.adjoint);
        adjoint_diagnostics(model, cand, lattice, sol, n_threads);

        HorizonDiagnostics diag;
        diag.T = T;
        diag.solver = sol.solver;
        diag.p0_mean = mean_ci(Eigen::VectorXd(sol.p.values.col(0).matrix())).mean;
        diag.mean_r2_p = sol.diag.r2_p.size() ? sol.diag.r2_p.mean() : 1.0;
        diag.mean_r2_h = sol.diag.r2_h.size() ? sol.diag.r2_h.mean() : 1.0;
        diag.max_abs_z = sol.diag.max_abs_z;
        diag.frac_z_above_3 = sol.diag.frac_z_above_3;
        diag.degree_reductions = sol.diag.degree_reductions;
        diag.r2_p = sol.diag.r2_p;
        diag.r2_h = sol.diag.r2_h;
        diag.resid_z = sol.diag.resid_z;
        diag.resid_mean = sol.diag.resid_mean;
        report.horizon_diags.push_back(std::move(diag));

        for (std::size_t j = 0; j < challengers.size(); ++j) {
            const Eigen::VectorXd g = gamma_sums(model, cand, sol, chal[j].u, K, n_threads);
            const MeanCI mc = mean_ci(g);
            report.challengers[j].gamma.push_back(mc.mean);
            report.challengers[j].gamma_ci.push_back(mc.ci95);
            if (opts.run_gap) {
                const Eigen::VectorXd diff = j_cand[hidx] - chal[j].reward[hidx];
                const MeanCI gap = mean_ci(diff);
                report.challengers[j].gap.push_back(gap.mean);
                report.challengers[j].gap_ci.push_back(gap.ci95);
            } else {
                report.challengers[j].gap.push_back(0.0);
                report.challengers[j].gap_ci.push_back(0.0);
            }
        }
    }

    bool all_oo = true, all_woo = true, any_refuting = false;
    for (auto& ch : report.challengers) {
        ch.trend = fit_trend(report.horizons, ch.gamma, ch.gamma_ci, opts.tol_zero,
                             opts.decay_ratio_max);
        const TailStatus s = ch.trend.status;
        const bool oo = s == TailStatus::kNonpositive || s == TailStatus::kDecayingToZero;
        all_oo = all_oo && oo;
        // Weak form: enough that some tail horizon is consistent with
        // gamma <= 0, or that the series decays to zero.
        const std::size_t m = report.horizons.size();
        const std::size_t tail_len = std::max<std::size_t>(2, (m + 2) / 3);
        double min_lower = std::numeric_limits<double>::infinity();
        for (std::size_t i = m - tail_len; i < m; ++i)
            min_lower = std::min(min_lower, ch.gamma[i] - ch.gamma_ci[i]);
        all_woo = all_woo && (oo || min_lower <= opts.tol_zero);
        any_refuting = any_refuting || s == TailStatus::kPositivePersistent;
    }
    if (any_refuting && report.linear_verified)
        report.verdict = Verdict::kRefuted;
    else if (all_oo)
        report.verdict = Verdict::kOOEvidence;
    else if (all_woo)
        report.verdict = Verdict::kWOOEvidence;
    else
        report.verdict = Verdict::kInconclusive;
    return report;
}

}  // namespace ovtk
