#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ovtk/model.hpp"
#include "ovtk/policy.hpp"
#include "ovtk/time_grid.hpp"

namespace ovtk {

/// A ready-to-certify setup: model, the candidate control, and the default
/// challenger set (before needle perturbations are appended).
struct ScenarioBundle {
    ModelSpec model;
    ControlPolicy candidate;
    std::vector<ControlPolicy> default_challengers;
};

// ---------------------------------------------------------------------------
// Scenario A ("drift toll"): dx = u dt + sigma_t dW, x_0 = 0, u in [-1, 1],
// reward integrand w_t * x with a nonnegative deterministic weight w_t.
// The costate is the deterministic tail integral of w; the candidate u = 1
// is overtaking optimal.
// ---------------------------------------------------------------------------

struct Example1Params {
    double rho = 1.0;    // default weight w_t = exp(-rho t)
    double sigma = 0.2;  // default constant noise scale
    /// Optional overrides; when set they replace the defaults above.
    std::function<double(double)> weight_fn;  // w_t >= 0, bounded
    std::function<double(double)> sigma_fn;   // bounded
};

ScenarioBundle build_example1(const Example1Params& params = {});

/// Tail integral integral_t^T w_s ds. Closed form for the default weight,
/// Gauss-Legendre quadrature for an override.
double example1_tail_integral(const Example1Params& params, double t, double T);

/// Value gap J_T(candidate) - J_T(challenger) for a deterministic challenger
/// u(t), continuous time: integral_0^T w_t (integral_0^t (1 - u_s) ds) dt.
double oracle_gap_example1(const Example1Params& params, const std::function<double(double)>& u,
                           double T);

/// Exact value of the discrete estimator on `grid` up to node K (left-endpoint
/// sums over the Euler recursion), for CI-tight comparisons.
double oracle_gap_example1_grid(const Example1Params& params,
                                const std::function<double(double)>& u, const TimeGrid& grid,
                                std::size_t K);

// ---------------------------------------------------------------------------
// Scenario B ("capital with adaptation cost"): dk = (u - delta k) dt + s dW,
// k_0 > 0, u in [u_lo, u_hi], reward e^{-rt} (pi_t k - u - u^2/2).
// Worked in the transformed state x = e^{delta t} k, which removes the state
// from the drift. The candidate is u = q - 1 with q the discounted tail value
// of pi per unit of capital.
// ---------------------------------------------------------------------------

struct OUParams {
    double theta = 0.5;  // mean reversion rate
    double mean = 0.3;
    double vol = 0.05;
    double max = 0.6;    // pi clipped to [0, max]
};

struct Example2Params {
    double r = 0.05;
    double delta = 0.1;
    double sigma = 0.1;
    double k0 = 1.0;
    double u_lo = 0.0, u_hi = 2.0;
    bool pi_constant = true;
    double pi_bar = 0.3;
    OUParams ou;
    /// Extension beyond the working horizon for the q fit; the tail truncation
    /// error is bounded by ou.max * exp(-(r+delta)*extra) / (r+delta).
    double q_fit_extra_over_rpd = 10.0;  // extra = this / (r + delta)
};

struct Example2Build {
    ScenarioBundle bundle;          // transformed-state model
    double q_bar = 0.0;             // upper bound on the shadow value q
    double q_truncation_bound = 0.0;  // momentum branch: recorded tail bound
    std::vector<std::string> warnings;  // e.g. candidate leaving the control set
};

/// `grid` is the working grid (t_end = largest horizon); the momentum branch
/// fits its q tables on an extended lattice seeded independently of `seed`.
Example2Build build_example2(const Example2Params& params, const TimeGrid& grid,
                             std::uint64_t seed, std::size_t q_fit_paths = 4096,
                             int q_fit_degree = 3);

/// Untransformed twin (state k) for change-of-variable tests.
ModelSpec example2_k_form(const Example2Params& params);

/// Linear variant: adaptation cost dropped (reward e^{-rt}(pi k - u)).
ScenarioBundle example2_linearized(const Example2Params& params);

/// Fault fixture: adaptation cost sign flipped, making the reward convex in u.
ModelSpec example2_planted_convex(const Example2Params& params);

/// J_T(candidate) - J_T(u_bar) for the constant-pi branch and a constant
/// challenger, continuous time, closed form.
double oracle_gap_example2_const(const Example2Params& params, double u_bar, double T);

/// Same quantity for the discrete estimator on `grid` up to node K: exact
/// closed form of the Euler-mean recursion under left-endpoint sums.
double oracle_gap_example2_const_grid(const Example2Params& params, double u_bar,
                                      const TimeGrid& grid, std::size_t K);

/// Independent route for cross-checking the continuous oracle: composite
/// Simpson quadrature at resolution `dt_fine` of the same integrand.
double oracle_gap_example2_const_quadrature(const Example2Params& params, double u_bar, double T,
                                            double dt_fine = 1e-4);

/// Needle perturbation of a base policy: base + height on [t0, t0 + width).
ControlPolicy needle_challenger(const ControlPolicy& base, double t0, double width, double height);

/// Default needle set appended by the pipeline: `count` needles spread over
/// [0, T_first], heights alternating +-height_scale * hull_width / 2.
std::vector<ControlPolicy> default_needles(const ControlPolicy& candidate, const ControlSet& set,
                                           double t_first, int count, double height_scale = 0.5,
                                           double width = 0.5);

}  // namespace ovtk
