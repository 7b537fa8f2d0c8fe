#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ovtk/control_set.hpp"
#include "ovtk/errors.hpp"

namespace ovtk {

/// Point-in-time view of the exogenous processes a coefficient may read.
/// Empty for models whose coefficients depend on (t, u, x) only.
struct Scenario {
    std::span<const double> exo;

    double value(std::size_t j) const {
        if (j >= exo.size()) throw InputError("Scenario: exogenous index out of range");
        return exo[j];
    }
    static Scenario none() { return Scenario{}; }
};

/// One exogenous scalar process, advanced on the same Brownian increments as
/// the state. `step` maps (t_k, current value, dW_k, dt) to the value at t_{k+1}.
/// [sample_lo, sample_hi] is the range validation and concavity sampling draws from.
struct ExogenousSpec {
    std::string name;
    double initial = 0.0;
    std::function<double(double t, double v, double dw, double dt)> step;
    double sample_lo = 0.0;
    double sample_hi = 1.0;
};

using Coefficient = std::function<double(double t, double u, double x, const Scenario&)>;

/// Scalar controlled diffusion dx = f dt + sigma dW with running reward g,
/// all coefficients with declared first partials in u and x.
struct ModelSpec {
    Coefficient f, sigma, g;
    Coefficient f_u, f_x, sigma_u, sigma_x, g_u, g_x;
    ControlSet control_set = ControlSet::interval(-1.0, 1.0);
    double x0 = 0.0;
    std::vector<ExogenousSpec> exogenous;
    /// Declared affine-in-(u,x) structure of (f, sigma, g); verified, not trusted.
    bool linear_in_ux = false;
    std::string name = "model";
};

/// H(t,u,x,p,h) = p*f + h*sigma + g.
inline double hamiltonian(const ModelSpec& m, double t, double u, double x, double p, double h,
                          const Scenario& w = Scenario::none()) {
    return p * m.f(t, u, x, w) + h * m.sigma(t, u, x, w) + m.g(t, u, x, w);
}

/// dH/du = p*f_u + h*sigma_u + g_u.
inline double hamiltonian_u(const ModelSpec& m, double t, double u, double x, double p, double h,
                            const Scenario& w = Scenario::none()) {
    return p * m.f_u(t, u, x, w) + h * m.sigma_u(t, u, x, w) + m.g_u(t, u, x, w);
}

/// dH/dx = p*f_x + h*sigma_x + g_x. Also the driver of the costate equation.
inline double hamiltonian_x(const ModelSpec& m, double t, double u, double x, double p, double h,
                            const Scenario& w = Scenario::none()) {
    return p * m.f_x(t, u, x, w) + h * m.sigma_x(t, u, x, w) + m.g_x(t, u, x, w);
}

}  // namespace ovtk
