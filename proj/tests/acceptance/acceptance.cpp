// Acceptance suite for the certification toolkit. Runs the eight release
// criteria at desk scale (2^14 paths, dt = 1/64, horizons {2,4,8,16,32}),
// prints one PASS/FAIL line per criterion with the measured numbers, and
// exits with the number of failed criteria.
//
// argv[1]: path to the built ovtk CLI binary (used by the worker-count
// determinism criterion, which shells out and byte-compares artifacts).

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/adjoint.hpp"
#include "ovtk/brownian.hpp"
#include "ovtk/certify.hpp"
#include "ovtk/fmt.hpp"
#include "ovtk/model.hpp"
#include "ovtk/model_checks.hpp"
#include "ovtk/policy.hpp"
#include "ovtk/scenarios.hpp"
#include "ovtk/simulate.hpp"
#include "ovtk/stats.hpp"
#include "ovtk/time_grid.hpp"

using namespace ovtk;
namespace fs = std::filesystem;

namespace {

// Absolute floor added to every CI-based tolerance. Deterministic fixtures
// have CI = 0 up to float roundoff; the floor absorbs that roundoff
// (~1e-12 observed) and never covers discretization-sized error (~1e-2).
constexpr double kAbsFloor = 1e-9;

constexpr std::size_t kPaths = std::size_t{1} << 14;
constexpr std::size_t kStepsPerUnit = 64;  // dt = 1/64
const std::vector<double> kHorizons{2.0, 4.0, 8.0, 16.0, 32.0};
constexpr std::uint64_t kSeed = 7;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Criterion {
    std::string title;
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "    [ok]   " : "    [FAIL] ") + what);
    }
    void note(const std::string& what) { notes.push_back("    [note] " + what); }
};

// ---------------------------------------------------------------------------
// Criterion 1 fixture: deterministic linear driver. f = u + a x, sigma
// constant, g = c x. The costate solves p' = -(c + a p), p_T = 0, so
// p_t = (c/a)(e^{a(T-t)} - 1), and f_x != 0 forces the regression solver.
// ---------------------------------------------------------------------------

ModelSpec linear_driver_fixture(double a, double c, double vol) {
    ModelSpec m;
    m.f = [a](double, double u, double x, const Scenario&) { return u + a * x; };
    m.f_u = [](double, double, double, const Scenario&) { return 1.0; };
    m.f_x = [a](double, double, double, const Scenario&) { return a; };
    m.sigma = [vol](double, double, double, const Scenario&) { return vol; };
    m.sigma_u = [](double, double, double, const Scenario&) { return 0.0; };
    m.sigma_x = m.sigma_u;
    m.g = [c](double, double, double x, const Scenario&) { return c * x; };
    m.g_u = m.sigma_u;
    m.g_x = [c](double, double, double, const Scenario&) { return c; };
    m.control_set = ControlSet::interval(-10.0, 10.0);
    m.x0 = 1.0;
    m.name = "linear-driver";
    return m;
}

struct LsmcFixture {
    ModelSpec model;
    BrownianLattice lattice;
    SimulationResult sim;
    AdjointSolution sol;
    double a = -0.5, c = 1.0, T = 4.0;
};

LsmcFixture make_lsmc_fixture() {
    LsmcFixture fx;
    fx.model = linear_driver_fixture(fx.a, fx.c, 0.2);
    TimeGrid grid(fx.T, static_cast<std::size_t>(fx.T * kStepsPerUnit));
    fx.lattice = make_lattice(grid, kPaths, kSeed);
    fx.sim = simulate_forward(fx.model, ControlPolicy::constant(0.0), fx.lattice);
    AdjointOptions opts;  // kAuto; f_x != 0 selects the regression branch
    fx.sol = solve_adjoint(fx.model, fx.sim, fx.lattice, fx.T, opts);
    return fx;
}

Criterion criterion1(const LsmcFixture& fx) {
    Criterion c;
    c.title = "regression costate matches the closed form on the linear-driver fixture";
    c.require(fx.sol.solver == AdjointSolverKind::kLsmc, "solver branch is the regression one");

    const auto K = static_cast<Eigen::Index>(fx.lattice.grid.n_steps);
    c.require((fx.sol.p.values.col(K) == 0.0).all(), "terminal costate is exactly 0");

    // RMS over time nodes of the cross-path mean against p_t = (c/a)(e^{a(T-t)}-1).
    double se2 = 0.0, sr2 = 0.0, sc2 = 0.0;
    const auto n = static_cast<double>(kPaths);
    for (Eigen::Index k = 0; k <= K; ++k) {
        const double t = fx.lattice.grid.node(static_cast<std::size_t>(k));
        const double ref = (fx.c / fx.a) * (std::exp(fx.a * (fx.T - t)) - 1.0);
        const Eigen::ArrayXd col = fx.sol.p.values.col(k);
        const double mean = col.mean();
        const double sd = std::sqrt((col - mean).square().sum() / (n - 1.0));
        const double ci = 1.96 * sd / std::sqrt(n);
        se2 += (mean - ref) * (mean - ref);
        sr2 += ref * ref;
        sc2 += ci * ci;
    }
    const auto nodes = static_cast<double>(K + 1);
    const double rms_err = std::sqrt(se2 / nodes);
    const double rms_ref = std::sqrt(sr2 / nodes);
    const double rms_ci = std::sqrt(sc2 / nodes);
    const double tol = std::max(0.02 * rms_ref, 3.0 * rms_ci);
    c.require(rms_err <= tol, "RMS error " + num(rms_err) + " <= max(2% of reference = " +
                                  num(0.02 * rms_ref) + ", 3 RMS CI = " + num(3.0 * rms_ci) + ")");
    c.note("reference RMS " + num(rms_ref) + ", relative RMS error " + num(rms_err / rms_ref));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 5: declared Hamiltonian slopes vs central differences of the
// assembled Hamiltonian at 1000 random points per built-in model.
// ---------------------------------------------------------------------------

double fd_slope(const ModelSpec& m, double t, double u, double x, double p, double h,
                const Scenario& w, bool in_u) {
    const double v = in_u ? u : x;
    const double step = 1e-5 * std::max(1.0, std::abs(v));
    const double lo = v - step, hi = v + step;
    const double f_hi = in_u ? hamiltonian(m, t, hi, x, p, h, w) : hamiltonian(m, t, u, hi, p, h, w);
    const double f_lo = in_u ? hamiltonian(m, t, lo, x, p, h, w) : hamiltonian(m, t, u, lo, p, h, w);
    return (f_hi - f_lo) / (hi - lo);
}

double worst_slope_error(const ModelSpec& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    double worst = 0.0;
    std::vector<double> exo(m.exogenous.size());
    for (int i = 0; i < 1000; ++i) {
        const double t = in(0.0, 32.0);
        const double u = in(m.control_set.hull_lo(), m.control_set.hull_hi());
        const double x = in(m.x0 - 5.0, m.x0 + 5.0);
        const double p = in(-5.0, 5.0);
        const double h = in(-5.0, 5.0);
        for (std::size_t j = 0; j < exo.size(); ++j)
            exo[j] = in(m.exogenous[j].sample_lo, m.exogenous[j].sample_hi);
        const Scenario w{std::span<const double>(exo.data(), exo.size())};
        const double eu = std::abs(fd_slope(m, t, u, x, p, h, w, true) -
                                   hamiltonian_u(m, t, u, x, p, h, w)) /
                          std::max(1.0, std::abs(hamiltonian_u(m, t, u, x, p, h, w)));
        const double ex = std::abs(fd_slope(m, t, u, x, p, h, w, false) -
                                   hamiltonian_x(m, t, u, x, p, h, w)) /
                          std::max(1.0, std::abs(hamiltonian_x(m, t, u, x, p, h, w)));
        worst = std::max(worst, std::max(eu, ex));
    }
    return worst;
}

Criterion criterion5() {
    Criterion c;
    c.title = "Hamiltonian slopes match central differences on every built-in model";
    const Example2Params prm;
    Example2Params momentum = prm;
    momentum.pi_constant = false;

    std::vector<std::pair<std::string, ModelSpec>> models;
    models.emplace_back("drift-toll", build_example1().model);
    models.emplace_back("adaptation (transformed)",
                        build_example2(prm, TimeGrid(2.0, 128), 1).bundle.model);
    models.emplace_back("adaptation (capital form)", example2_k_form(prm));
    models.emplace_back("adaptation (linearized)", example2_linearized(prm).model);
    models.emplace_back("adaptation (convex fault)", example2_planted_convex(prm));
    models.emplace_back("adaptation (stochastic rate)",
                        build_example2(momentum, TimeGrid(1.0, 64), 3, 256, 2).bundle.model);

    for (std::size_t i = 0; i < models.size(); ++i) {
        const double worst = worst_slope_error(models[i].second, 0x51ED5 + i);
        c.require(worst <= 1e-5, models[i].first + ": worst relative slope error " + num(worst) +
                                     " <= 1e-5 at 1000 points");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 8: concavity probe passes on the adaptation model and rejects
// the convex-fault variant, reporting the offending sample.
// ---------------------------------------------------------------------------

Criterion criterion8() {
    Criterion c;
    c.title = "concavity probe accepts the adaptation model and rejects the planted fault";
    const Example2Params prm;
    const ModelSpec good = build_example2(prm, TimeGrid(2.0, 128), 1).bundle.model;
    const ConcavityReport ok = check_concavity(good);
    c.require(ok.pass, "adaptation model concave; worst Hessian eigenvalue " +
                           num(ok.worst_eigenvalue) + " over " + std::to_string(ok.samples) +
                           " samples");

    const ConcavityReport bad = check_concavity(example2_planted_convex(prm));
    c.require(!bad.pass, "convex-fault model rejected");
    c.require(bad.worst_eigenvalue > 0.0,
              "offending sample has positive curvature " + num(bad.worst_eigenvalue));
    c.note("offending sample: t = " + num(bad.at_t) + ", u = " + num(bad.at_u) + ", x = " +
           num(bad.at_x) + ", p = " + num(bad.at_p) + ", h = " + num(bad.at_h));
    c.note(bad.summary());
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 6: per-step residual martingale statistic. On fixtures whose
// costate is deterministic the residual vanishes identically; on the
// regression fixture the cross-fitted statistic must stay inside its null
// band (|z| > 3 on at most 1% of steps, max |z| <= 6, vs null expectation
// 0.27% and ~4.2). A planted bias of 0.05 in one backward step must blow
// the statistic out of the band.
// ---------------------------------------------------------------------------

Criterion criterion6(const LsmcFixture& fx) {
    Criterion c;
    c.title = "residual martingale statistic is quiet when clean and loud when corrupted";

    c.require(fx.sol.diag.residual_filled, "regression-fixture diagnostics computed");
    c.require(fx.sol.diag.frac_z_above_3 <= 0.01,
              "regression fixture: |z| > 3 on fraction " + num(fx.sol.diag.frac_z_above_3) +
                  " of steps <= 1%");
    c.require(fx.sol.diag.max_abs_z <= 6.0,
              "regression fixture: max |z| = " + num(fx.sol.diag.max_abs_z) + " <= 6");

    {
        AdjointSolution bad = fx.sol;
        bad.p.values.col(128) += 0.05;  // planted bias in one backward step
        adjoint_diagnostics(fx.model, fx.sim, fx.lattice, bad);
        c.require(bad.diag.max_abs_z > 6.0, "regression fixture: planted 0.05 bias detected, max |z| = " +
                                                num(bad.diag.max_abs_z));
    }

    {  // drift-toll fixture: deterministic costate, residual exactly zero
        auto ex1 = build_example1();
        TimeGrid grid(4.0, 256);
        auto lat = make_lattice(grid, 512, 13);
        auto sim = simulate_forward(ex1.model, ex1.candidate, lat);
        auto sol = solve_adjoint(ex1.model, sim, lat, 4.0, AdjointOptions{});
        adjoint_diagnostics(ex1.model, sim, lat, sol);
        c.require(sol.diag.max_abs_z <= 6.0 && sol.diag.frac_z_above_3 <= 0.01,
                  "drift-toll fixture: max |z| = " + num(sol.diag.max_abs_z) + " (exactly 0 expected)");

        AdjointSolution bad = sol;
        bad.p.values.col(100) += 0.05;
        adjoint_diagnostics(ex1.model, sim, lat, bad);
        c.require(bad.diag.max_abs_z > 6.0,
                  "drift-toll fixture: planted 0.05 bias detected, max |z| = " + num(bad.diag.max_abs_z));
    }

    {  // adaptation fixture: deterministic costate as well
        const Example2Params prm;
        TimeGrid grid(8.0, 512);
        auto built = build_example2(prm, grid, 5);
        auto lat = make_lattice(grid, 512, 17);
        auto sim = simulate_forward(built.bundle.model, built.bundle.candidate, lat);
        auto sol = solve_adjoint(built.bundle.model, sim, lat, 8.0, AdjointOptions{});
        adjoint_diagnostics(built.bundle.model, sim, lat, sol);
        c.require(sol.diag.max_abs_z <= 6.0 && sol.diag.frac_z_above_3 <= 0.01,
                  "adaptation fixture: max |z| = " + num(sol.diag.max_abs_z) + " (exactly 0 expected)");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3: drift-toll certification at desk scale. The costate has
// the closed form e^{-t} - e^{-T}; the certificate must be nonpositive for
// the standard five challengers at every horizon with verdict OO-evidence;
// the linear-model identity gap = -certificate must hold within CI; and the
// flipped candidate/challenger pair must be refuted.
// ---------------------------------------------------------------------------

std::vector<ControlPolicy> standard_challengers(const ScenarioBundle& bundle, double t_first) {
    std::vector<ControlPolicy> ch = bundle.default_challengers;
    for (auto& n :
         default_needles(bundle.candidate, bundle.model.control_set, t_first, 2, 0.5, 0.5))
        ch.push_back(std::move(n));
    return ch;
}

Criterion criterion2(const CertificateReport& report, const ScenarioBundle& ex1,
                     const BrownianLattice& lattice) {
    Criterion c;
    c.title = "drift-toll certification: exact costate, nonpositive certificate, OO evidence";

    bool analytic = true;
    for (const auto& d : report.horizon_diags) analytic &= d.solver == AdjointSolverKind::kAnalyticTail;
    c.require(analytic, "deterministic tail-integral branch used at every horizon");

    {  // closed-form costate to 1e-10 on a small ensemble of the same grid
        auto lat = make_lattice(lattice.grid, 64, 13);
        auto sim = simulate_forward(ex1.model, ex1.candidate, lat);
        double worst = 0.0;
        for (double T : {2.0, 8.0, 32.0}) {
            auto sol = solve_adjoint(ex1.model, sim, lat, T, AdjointOptions{});
            const std::size_t K = lattice.grid.require_node(T);
            for (std::size_t k = 0; k <= K; ++k) {
                const double exact = std::exp(-lattice.grid.node(k)) - std::exp(-T);
                worst = std::max(worst, std::abs(sol.p.at(0, k) - exact));
                worst = std::max(worst, std::abs(sol.p.at(63, k) - exact));
            }
        }
        c.require(worst <= 1e-10,
                  "costate matches e^{-t} - e^{-T} at T in {2, 8, 32}; worst error " + num(worst));
    }

    c.require(report.challengers.size() == 5, "five challenger controls certified");
    double worst_margin = -1e300;
    for (const auto& ch : report.challengers)
        for (std::size_t i = 0; i < report.horizons.size(); ++i)
            worst_margin = std::max(worst_margin, ch.gamma[i] - 2.0 * ch.gamma_ci[i] - kAbsFloor);
    c.require(worst_margin <= 0.0, "certificate <= 0 within 2 CI at every (challenger, horizon); "
                                   "worst margin " + num(worst_margin));
    c.require(report.verdict == Verdict::kOOEvidence,
              "verdict: " + to_string(report.verdict));
    return c;
}

Criterion criterion3(const CertificateReport& report, const ScenarioBundle& ex1,
                     const BrownianLattice& lattice) {
    Criterion c;
    c.title = "linear-model identity holds and the flipped pair is refuted";

    const CheckResult eq = check_linear_equality(report, kAbsFloor);
    double worst = 0.0;
    for (const auto& ch : report.challengers)
        for (std::size_t i = 0; i < report.horizons.size(); ++i)
            worst = std::max(worst, std::abs(ch.gap[i] + ch.gamma[i]));
    c.require(eq.applicable, "identity check applicable (model verified linear)");
    c.require(eq.pass, "|gap + certificate| <= 2 (CI sums) at every (challenger, horizon); worst " +
                           num(worst));

    // Flipped roles: candidate u = 0 against challenger u = 1. The certificate
    // is positive and persistent, so a verified linear model must be refuted.
    std::vector<ControlPolicy> flipped{ControlPolicy::constant(1.0)};
    const CertificateReport rep2 =
        run_certification(ex1.model, ControlPolicy::constant(0.0), flipped, lattice,
                          HorizonSweep(kHorizons, lattice.grid), CertifyOptions{});
    c.require(rep2.verdict == Verdict::kRefuted, "flipped pair verdict: " + to_string(rep2.verdict));
    if (!rep2.challengers.empty())
        c.note("flipped certificate tail status: " + to_string(rep2.challengers[0].trend.status) +
               ", tail mean " + num(rep2.challengers[0].trend.tail_mean));
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 4: adaptation-model certification at desk scale.
//   (a) the certificate obeys the discounted envelope e^{-rT} q_bar du/delta;
//   (b) the T=32 over T=2 certificate ratio is demanded to sit within a
//       factor 3 of e^{-30 r} -- expected to FAIL: the exact ratio is
//       e^{-30r} (1-e^{-32 delta})/(1-e^{-2 delta}), and the envelope factor
//       grows 5.29x between those horizons, outside any factor-3 band;
//   (c) the measured gap matches the grid-matched closed-form oracle within
//       2 CI (the continuous-time closed form differs by the O(dt) Euler
//       bias, printed for reference -- no estimator can absorb that bias
//       inside a CI that vanishes under common random numbers);
//   (d) gap + certificate >= -2 CI for every challenger (concave bound);
//   (e) verdict OO-evidence with a decaying certificate tail.
// ---------------------------------------------------------------------------

Criterion criterion4(const BrownianLattice& lattice) {
    Criterion c;
    c.title = "adaptation-model certification: envelope, decay, oracle, bound, verdict";
    const Example2Params prm;
    auto built = build_example2(prm, lattice.grid, kSeed);
    const auto& bundle = built.bundle;
    const auto challengers = standard_challengers(bundle, kHorizons.front());
    const CertificateReport report =
        run_certification(bundle.model, bundle.candidate, challengers, lattice,
                          HorizonSweep(kHorizons, lattice.grid), CertifyOptions{});

    // (a) discounted envelope
    const double du = prm.u_hi - prm.u_lo;
    double worst_excess = -1e300;
    for (const auto& ch : report.challengers)
        for (std::size_t i = 0; i < report.horizons.size(); ++i) {
            const double bound = std::exp(-prm.r * report.horizons[i]) * built.q_bar * du / prm.delta;
            worst_excess = std::max(worst_excess, std::abs(ch.gamma[i]) - bound -
                                                      2.0 * ch.gamma_ci[i] - kAbsFloor);
        }
    c.require(worst_excess <= 0.0,
              "|certificate| <= e^{-rT} q_bar (u_hi - u_lo)/delta + 2 CI everywhere; worst excess " +
                  num(worst_excess));

    // (b) decay ratio on the first constant challenger (u = 0.5)
    const auto& s = report.challengers[0];
    const double ratio = s.gamma[4] / s.gamma[0];
    const double target = std::exp(-prm.r * 30.0);
    const bool in_band = ratio >= target / 3.0 && ratio <= target * 3.0;
    c.require(in_band, "certificate(32)/certificate(2) = " + num(ratio) +
                           " inside [" + num(target / 3.0) + ", " + num(target * 3.0) +
                           "] (factor 3 around e^{-30r} = " + num(target) + ")");
    const double predicted = target * (1.0 - std::exp(-prm.delta * 32.0)) /
                             (1.0 - std::exp(-prm.delta * 2.0));
    c.note("exact ratio for this challenger is e^{-30r}(1-e^{-32 delta})/(1-e^{-2 delta}) = " +
           num(predicted) + ": the (1-e^{-delta T}) envelope factor grows " +
           num((1.0 - std::exp(-prm.delta * 32.0)) / (1.0 - std::exp(-prm.delta * 2.0))) +
           "x between T=2 and T=32, so no admissible constant challenger can land in a "
           "factor-3 band around pure e^{-30r} decay; the demanded band does not contain "
           "the true value and this clause fails by design of the model, not the estimator");

    // (c) gap vs the closed-form oracle (grid-matched), continuous form for reference
    double worst_oracle = 0.0, worst_cont = 0.0, ci_scale = 0.0;
    for (std::size_t which : {std::size_t{0}, std::size_t{1}}) {
        const double u_bar = which == 0 ? 0.5 : 1.5;
        const auto& series = report.challengers[which];
        for (std::size_t i = 0; i < report.horizons.size(); ++i) {
            const std::size_t K = lattice.grid.require_node(report.horizons[i]);
            const double disc = oracle_gap_example2_const_grid(prm, u_bar, lattice.grid, K);
            const double cont = oracle_gap_example2_const(prm, u_bar, report.horizons[i]);
            worst_oracle = std::max(worst_oracle,
                                    std::abs(series.gap[i] - disc) - 2.0 * series.gap_ci[i]);
            worst_cont = std::max(worst_cont, std::abs(series.gap[i] - cont));
            ci_scale = std::max(ci_scale, series.gap_ci[i]);
        }
    }
    c.require(worst_oracle <= kAbsFloor,
              "gap matches the closed-form oracle (grid-matched) within 2 CI + floor; worst slack " +
                  num(worst_oracle));
    c.note("largest paired-gap CI is " + num(ci_scale) +
           " (the difference of paths is deterministic under common random numbers); distance to "
           "the continuous-time closed form is " + num(worst_cont) +
           " = the O(dt) Euler bias at dt = 1/64, quoted for reference");

    // (d) concave gap bound
    const CheckResult gb = check_gap_bound(report, kAbsFloor);
    c.require(gb.applicable && gb.pass,
              "gap + certificate >= -2 CI for every (challenger, horizon)");

    // (e) verdict
    c.require(report.verdict == Verdict::kOOEvidence, "verdict: " + to_string(report.verdict));
    std::string statuses;
    for (const auto& ch : report.challengers) {
        if (!statuses.empty()) statuses += ", ";
        statuses += ch.id + ": " + to_string(ch.trend.status);
    }
    c.note("challenger tail statuses -- " + statuses);
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 7: worker-count determinism of the CLI. Two full certification
// runs with the same seed but different thread counts must produce
// byte-identical CSV artifacts.
// ---------------------------------------------------------------------------

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Criterion criterion7(const std::string& cli) {
    Criterion c;
    c.title = "CLI certification is byte-identical across worker counts";
    if (cli.empty()) {
        c.require(false, "no CLI binary path supplied on the command line");
        return c;
    }
    const fs::path scratch = fs::temp_directory_path() / "ovtk-acceptance";
    std::error_code ec;
    fs::remove_all(scratch, ec);
    fs::create_directories(scratch);

    auto run = [&](int threads, const fs::path& out) {
        std::string cmd = "\"" + cli + "\" certify --scenario example2 --seed 11 --paths 16384" +
                          " --threads " + std::to_string(threads) + " --out \"" + out.string() +
                          "\" > \"" + (out.string() + ".log") + "\" 2>&1";
        return std::system(cmd.c_str());
    };
    const fs::path dir_a = scratch / "workers1", dir_b = scratch / "workers4";
    c.require(run(1, dir_a) == 0, "run with 1 worker exits 0");
    c.require(run(4, dir_b) == 0, "run with 4 workers exits 0");

    for (const char* name : {"gamma_series.csv", "certificate.csv", "diagnostics.csv"}) {
        const std::string a = read_bytes(dir_a / name), b = read_bytes(dir_b / name);
        c.require(!a.empty() && a == b,
                  std::string(name) + ": " + std::to_string(a.size()) + " bytes, byte-identical");
    }
    return c;
}

void print_criterion(std::size_t idx, const Criterion& c) {
    std::printf("%s criterion %zu: %s\n", c.pass ? "PASS" : "FAIL", idx + 1, c.title.c_str());
    for (const auto& line : c.notes) std::printf("%s\n", line.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::array<Criterion, 8> crit;

    try {
        crit[4] = criterion5();
        crit[7] = criterion8();

        {
            LsmcFixture fx = make_lsmc_fixture();
            adjoint_diagnostics(fx.model, fx.sim, fx.lattice, fx.sol);
            crit[0] = criterion1(fx);
            crit[5] = criterion6(fx);
        }

        {
            TimeGrid grid(32.0, 32 * kStepsPerUnit);
            const BrownianLattice lattice = make_lattice(grid, kPaths, kSeed);
            const auto ex1 = build_example1();
            const auto challengers = standard_challengers(ex1, kHorizons.front());
            const CertificateReport report =
                run_certification(ex1.model, ex1.candidate, challengers, lattice,
                                  HorizonSweep(kHorizons, grid), CertifyOptions{});
            crit[1] = criterion2(report, ex1, lattice);
            crit[2] = criterion3(report, ex1, lattice);
            crit[3] = criterion4(lattice);
        }

        crit[6] = criterion7(cli);
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance: unexpected exception: %s\n", e.what());
        return 8;
    }

    int failures = 0;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        print_criterion(i, crit[i]);
        if (!crit[i].pass) ++failures;
    }
    std::printf("acceptance: %d of 8 criteria failed\n", failures);
    return failures;
}
