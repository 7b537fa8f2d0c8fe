#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovtk/model.hpp"

namespace ovtk {

struct ValidateOptions {
    std::size_t budget = 2048;      // sample points
    double t_max = 32.0;            // t sampled uniformly on [0, t_max]
    double x_halfwidth = 10.0;      // x sampled on x0 +- halfwidth * max(1,|x0|)
    double fd_step = 1e-5;          // central-difference step, scaled by max(1,|v|)
    double tolerance = 1e-5;        // max relative error accepted
    double affine_step = 1e-3;      // step for second-difference affinity probes
    double affine_tolerance = 1e-6;
    std::uint64_t seed = 0x5EEDull;
};

/// Worst observed disagreement between one declared partial and its
/// central-difference estimate.
struct PartialCheck {
    std::string name;        // "f_u", "sigma_x", ...
    double max_rel_err = 0.0;
    double at_t = 0.0, at_u = 0.0, at_x = 0.0;
    bool pass = true;
};

struct ValidationReport {
    std::vector<PartialCheck> partials;
    bool linear_declared = false;
    bool linear_verified = false;   // declared and confirmed by second differences
    double worst_second_diff = 0.0;
    bool pass = false;
    std::string summary() const;
};

/// Compare every declared partial against central differences of its parent
/// coefficient at sampled (t, u, x, exogenous) points; probe declared affinity.
ValidationReport validate_model(const ModelSpec& model, const ValidateOptions& opts = {});

struct ConcavityOptions {
    std::size_t budget = 2048;
    double t_min = 0.0;             // sample t >= t_min only
    double t_max = 32.0;
    double x_halfwidth = 10.0;
    double p_lo = -10.0, p_hi = 10.0;  // (p, h) sample box
    double h_lo = -10.0, h_hi = 10.0;
    double fd_step = 1e-4;
    double tolerance = 1e-3;        // absolute eigenvalue slack, absorbs FD noise
    std::uint64_t seed = 0xC0FFEEull;
};

struct ConcavityReport {
    bool pass = false;
    std::size_t samples = 0;
    double worst_eigenvalue = 0.0;  // largest Hessian eigenvalue seen
    double at_t = 0.0, at_u = 0.0, at_x = 0.0, at_p = 0.0, at_h = 0.0;
    std::string summary() const;
};

/// Sampled check that (u, x) -> H(t, u, x, p, h) is concave: the 2x2
/// finite-difference Hessian must be negative semidefinite at every sample.
ConcavityReport check_concavity(const ModelSpec& model, const ConcavityOptions& opts = {});

/// True when f_x and sigma_x vanish at every sampled point (state-free costate
/// dynamics; enables the tail-integral solver).
bool is_state_free(const ModelSpec& model, std::size_t budget = 512,
                   std::uint64_t seed = 0xFACEull);

/// True when g_x at fixed t shows no dependence on (u, x, exogenous) across
/// samples; the costate is then deterministic.
bool has_deterministic_gx(const ModelSpec& model, std::size_t budget = 512,
                          std::uint64_t seed = 0xFACEull);

}  // namespace ovtk
