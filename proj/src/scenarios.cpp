#include "ovtk/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ovtk/brownian.hpp"
#include "ovtk/errors.hpp"
#include "ovtk/fmt.hpp"

namespace ovtk {
namespace {

// Gauss-Legendre 5 on [-1, 1].
constexpr double kGlNode[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
constexpr double kGlWeight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};

/// Composite 5-point quadrature with panels no wider than max_panel. Panel
/// width 1/512 keeps panel edges on the binary lattice, so piecewise-constant
/// integrands that switch at grid nodes are exact.
template <class F>
double integrate(const F& f, double a, double b, double max_panel = 1.0 / 512.0) {
    if (!(b > a)) return 0.0;
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / max_panel - 1e-12));
    const double h = (b - a) / static_cast<double>(std::max<std::size_t>(n, 1));
    double total = 0.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
        const double mid = a + (static_cast<double>(i) + 0.5) * h;
        double panel = 0.0;
        for (int j = 0; j < 5; ++j) panel += kGlWeight[j] * f(mid + 0.5 * h * kGlNode[j]);
        total += 0.5 * h * panel;
    }
    return total;
}

Coefficient constant_coef(double v) {
    return [v](double, double, double, const Scenario&) { return v; };
}

std::function<double(double)> example1_weight(const Example1Params& params) {
    if (params.weight_fn) return params.weight_fn;
    const double rho = params.rho;
    return [rho](double t) { return std::exp(-rho * t); };
}

std::function<double(double)> example1_vol(const Example1Params& params) {
    if (params.sigma_fn) return params.sigma_fn;
    const double s = params.sigma;
    return [s](double) { return s; };
}

void check_example2_params(const Example2Params& p) {
    if (!(p.r > 0.0) || !(p.delta > 0.0))
        throw InputError("example2: discount r and decay delta must be > 0");
    if (!(p.sigma >= 0.0)) throw InputError("example2: sigma must be >= 0");
    if (!(p.u_lo < p.u_hi)) throw InputError("example2: control interval is empty");
    if (!(p.pi_bar >= 0.0)) throw InputError("example2: pi_bar must be >= 0");
    if (!(p.ou.max > 0.0) || !(p.ou.mean >= 0.0) || p.ou.mean > p.ou.max ||
        !(p.ou.theta >= 0.0) || !(p.ou.vol >= 0.0))
        throw InputError("example2: inadmissible exogenous-rate parameters");
    if (!std::isfinite(p.k0)) throw InputError("example2: k0 must be finite");
}

/// Transformed-state model x_t = e^{dt} k_t, which removes the state from the
/// drift: dx = e^{dt} u dt + sigma e^{dt} dW. Reward keeps its k-form meaning.
ModelSpec example2_transformed_model(const Example2Params& p, bool constant_rate) {
    const double r = p.r, d = p.delta;
    ModelSpec m;
    m.name = constant_rate ? "adaptation-constant" : "adaptation-momentum";
    m.control_set = ControlSet::interval(p.u_lo, p.u_hi);
    m.x0 = p.k0;
    m.linear_in_ux = false;
    m.f = [d](double t, double u, double, const Scenario&) { return std::exp(d * t) * u; };
    m.f_u = [d](double t, double, double, const Scenario&) { return std::exp(d * t); };
    m.f_x = constant_coef(0.0);
    const double sv = p.sigma;
    m.sigma = [d, sv](double t, double, double, const Scenario&) { return sv * std::exp(d * t); };
    m.sigma_u = constant_coef(0.0);
    m.sigma_x = constant_coef(0.0);
    m.g_u = [r](double t, double u, double, const Scenario&) {
        return -std::exp(-r * t) * (1.0 + u);
    };
    if (constant_rate) {
        const double pb = p.pi_bar;
        m.g = [r, d, pb](double t, double u, double x, const Scenario&) {
            return std::exp(-r * t) * (std::exp(-d * t) * pb * x - u - 0.5 * u * u);
        };
        m.g_x = [r, d, pb](double t, double, double, const Scenario&) {
            return std::exp(-(r + d) * t) * pb;
        };
    } else {
        m.g = [r, d](double t, double u, double x, const Scenario& w) {
            return std::exp(-r * t) * (std::exp(-d * t) * w.value(0) * x - u - 0.5 * u * u);
        };
        m.g_x = [r, d](double t, double, double, const Scenario& w) {
            return std::exp(-(r + d) * t) * w.value(0);
        };
        ExogenousSpec rate;
        rate.name = "pi";
        rate.initial = p.ou.mean;
        rate.sample_lo = 0.0;
        rate.sample_hi = p.ou.max;
        const double th = p.ou.theta, mu = p.ou.mean, eta = p.ou.vol, cap = p.ou.max;
        rate.step = [th, mu, eta, cap](double, double v, double dw, double dt) {
            return std::clamp(v + th * (mu - v) * dt + eta * dw, 0.0, cap);
        };
        m.exogenous.push_back(std::move(rate));
    }
    return m;
}

ControlPolicy shift_policy(const ControlPolicy& base, double shift) {
    std::string label = base.label() + (shift >= 0.0 ? "+" : "") + format_double(shift);
    return ControlPolicy::from_fn(
        [base, shift](double t, std::size_t i, std::size_t k, double x, const Scenario& w) {
            return base.evaluate(t, i, k, x, w) + shift;
        },
        std::move(label));
}

/// One node of the fitted shadow-value table: coefficients of a polynomial in
/// the standardized rate, beta over [1, z, ..., z^degree].
struct NodeFit {
    bool kept = true;  // false when the rate has no spread at this node
    double mean = 0.0;
    double sd = 1.0;
    Eigen::VectorXd beta;
};

double eval_node_fit(const NodeFit& nf, double rate) {
    if (!nf.kept) return nf.beta(0);
    const double z = (rate - nf.mean) / nf.sd;
    double acc = 0.0, pw = 1.0;
    for (Eigen::Index j = 0; j < nf.beta.size(); ++j) {
        acc += nf.beta(j) * pw;
        pw *= z;
    }
    return acc;
}

NodeFit fit_node(const Eigen::VectorXd& rate, const Eigen::VectorXd& target, int degree) {
    NodeFit nf;
    const auto n = rate.size();
    nf.mean = rate.mean();
    const double sd = std::sqrt((rate.array() - nf.mean).square().sum() /
                                static_cast<double>(n > 1 ? n - 1 : 1));
    if (sd <= 1e-12 * std::max(1.0, std::abs(nf.mean))) {
        nf.kept = false;
        nf.beta = Eigen::VectorXd::Constant(1, target.mean());
        return nf;
    }
    nf.sd = sd;
    const Eigen::ArrayXd z = (rate.array() - nf.mean) / sd;
    for (int deg = degree;; --deg) {
        Eigen::MatrixXd design(n, deg + 1);
        design.col(0).setOnes();
        for (int j = 1; j <= deg; ++j) design.col(j) = design.col(j - 1).array() * z;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() == design.cols() || deg == 0) {
            nf.beta = qr.solve(target);
            return nf;
        }
    }
}

}  // namespace

ScenarioBundle build_example1(const Example1Params& params) {
    const auto w = example1_weight(params);
    const auto vol = example1_vol(params);

    ModelSpec m;
    m.name = "drift-toll";
    m.control_set = ControlSet::interval(-1.0, 1.0);
    m.x0 = 0.0;
    m.linear_in_ux = true;
    m.f = [](double, double u, double, const Scenario&) { return u; };
    m.f_u = constant_coef(1.0);
    m.f_x = constant_coef(0.0);
    m.sigma = [vol](double t, double, double, const Scenario&) { return vol(t); };
    m.sigma_u = constant_coef(0.0);
    m.sigma_x = constant_coef(0.0);
    m.g = [w](double t, double, double x, const Scenario&) { return w(t) * x; };
    m.g_u = constant_coef(0.0);
    m.g_x = [w](double t, double, double, const Scenario&) { return w(t); };

    ScenarioBundle b;
    b.model = std::move(m);
    b.candidate = ControlPolicy::constant(1.0);
    b.default_challengers.push_back(ControlPolicy::constant(0.0));
    b.default_challengers.push_back(ControlPolicy::constant(-1.0));
    b.default_challengers.push_back(
        ControlPolicy::deterministic([](double t) { return std::sin(t); }, "sin"));
    return b;
}

double example1_tail_integral(const Example1Params& params, double t, double T) {
    if (!(T > t)) return 0.0;
    if (!params.weight_fn) {
        const double rho = params.rho;
        if (rho == 0.0) return T - t;
        return (std::exp(-rho * t) - std::exp(-rho * T)) / rho;
    }
    return integrate(params.weight_fn, t, T);
}

double oracle_gap_example1(const Example1Params& params, const std::function<double(double)>& u,
                           double T) {
    // gap = int_0^T w_t int_0^t (1 - u_s) ds dt = int_0^T (1 - u_s) W(s, T) ds
    // with W the tail integral of the weight.
    return integrate(
        [&](double s) { return (1.0 - u(s)) * example1_tail_integral(params, s, T); }, 0.0, T);
}

double oracle_gap_example1_grid(const Example1Params& params,
                                const std::function<double(double)>& u, const TimeGrid& grid,
                                std::size_t K) {
    if (K > grid.n_steps)
        throw InputError("oracle_gap_example1_grid: horizon index beyond the grid");
    const auto w = example1_weight(params);
    const double dt = grid.dt();
    double gap = 0.0;
    double drift_gap = 0.0;  // sum_{j<k} (1 - u(t_j)) dt, the mean state shortfall
    for (std::size_t k = 0; k < K; ++k) {
        const double t = grid.node(k);
        gap += w(t) * drift_gap * dt;
        drift_gap += (1.0 - u(t)) * dt;
    }
    return gap;
}

Example2Build build_example2(const Example2Params& params, const TimeGrid& grid,
                             std::uint64_t seed, std::size_t q_fit_paths, int q_fit_degree) {
    check_example2_params(params);
    const double rpd = params.r + params.delta;
    Example2Build out;

    if (params.pi_constant) {
        out.bundle.model = example2_transformed_model(params, true);
        out.q_bar = params.pi_bar / rpd;
        const double u_hat = out.q_bar - 1.0;
        out.bundle.candidate = ControlPolicy::constant(u_hat);
        if (u_hat < params.u_lo || u_hat > params.u_hi)
            out.warnings.push_back("candidate " + format_double(u_hat) +
                                   " lies outside the control interval [" +
                                   format_double(params.u_lo) + ", " +
                                   format_double(params.u_hi) +
                                   "]; simulation clamps it and counts the events");
    } else {
        if (q_fit_paths < 16)
            throw InputError("build_example2: q_fit_paths must be at least 16");
        if (q_fit_degree < 0)
            throw InputError("build_example2: q_fit_degree must be >= 0");
        out.bundle.model = example2_transformed_model(params, false);
        out.q_bar = params.ou.max / rpd;

        // Fit the shadow value q(t, pi) = E[int_t^inf e^{-(r+d)(s-t)} pi_s ds | pi_t]
        // by regressing realized discounted tails on pi over a lattice extended
        // well past the last horizon; the cut tail is worth at most the bound
        // recorded below. The fit uses its own draw stream so certification
        // noise never leaks into the candidate's definition.
        const double dt = grid.dt();
        const double extra_t = params.q_fit_extra_over_rpd / rpd;
        const auto extra_steps =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extra_t / dt - 1e-12)));
        const std::size_t n_q = grid.n_steps + extra_steps;
        out.q_truncation_bound =
            params.ou.max * std::exp(-rpd * static_cast<double>(extra_steps) * dt) / rpd;

        const std::uint64_t fit_seed = seed ^ 0xA5C3B2D1E4F59687ull;
        const double sqrt_dt = std::sqrt(dt);
        const auto n = static_cast<Eigen::Index>(q_fit_paths);
        Eigen::ArrayXXd rate(n, static_cast<Eigen::Index>(n_q) + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = params.ou.mean;
            for (std::size_t k = 0;; ++k) {
                rate(i, static_cast<Eigen::Index>(k)) = v;
                if (k == n_q) break;
                const double dw =
                    normal_draw(fit_seed, static_cast<std::uint64_t>(i), k) * sqrt_dt;
                v = std::clamp(v + params.ou.theta * (params.ou.mean - v) * dt +
                                   params.ou.vol * dw,
                               0.0, params.ou.max);
            }
        }

        // tail_k = pi_k dt + e^{-(r+d) dt} tail_{k+1}, the realized discounted
        // integral from t_k; its conditional mean given pi_k is q(t_k, pi_k).
        const double decay = std::exp(-rpd * dt);
        Eigen::VectorXd tail = Eigen::VectorXd::Zero(n);
        auto fits = std::make_shared<std::vector<NodeFit>>(grid.n_steps + 1);
        for (std::size_t k = n_q; k-- > 0;) {
            tail = rate.col(static_cast<Eigen::Index>(k)).matrix() * dt + decay * tail;
            if (k <= grid.n_steps)
                (*fits)[k] = fit_node(rate.col(static_cast<Eigen::Index>(k)), tail, q_fit_degree);
        }

        const double dt_cap = dt;
        const std::size_t last = grid.n_steps;
        out.bundle.candidate = ControlPolicy::from_fn(
            [fits, dt_cap, last](double t, std::size_t, std::size_t, double, const Scenario& w) {
                const auto idx = static_cast<std::size_t>(std::clamp(
                    std::llround(t / dt_cap), 0ll, static_cast<long long>(last)));
                return eval_node_fit((*fits)[idx], w.value(0)) - 1.0;
            },
            "q-feedback");
        if (params.u_lo > -1.0 || params.u_hi < out.q_bar - 1.0)
            out.warnings.push_back(
                "candidate q-feedback can leave the control interval [" +
                format_double(params.u_lo) + ", " + format_double(params.u_hi) +
                "]; simulation clamps it and counts the events");
    }

    out.bundle.default_challengers.push_back(ControlPolicy::constant(0.5));
    out.bundle.default_challengers.push_back(ControlPolicy::constant(1.5));
    out.bundle.default_challengers.push_back(shift_policy(out.bundle.candidate, 0.2));
    return out;
}

ModelSpec example2_k_form(const Example2Params& params) {
    check_example2_params(params);
    const double r = params.r, d = params.delta, pb = params.pi_bar;
    ModelSpec m;
    m.name = "adaptation-kform";
    m.control_set = ControlSet::interval(params.u_lo, params.u_hi);
    m.x0 = params.k0;
    m.linear_in_ux = false;
    m.f = [d](double, double u, double x, const Scenario&) { return u - d * x; };
    m.f_u = constant_coef(1.0);
    m.f_x = constant_coef(-d);
    m.sigma = constant_coef(params.sigma);
    m.sigma_u = constant_coef(0.0);
    m.sigma_x = constant_coef(0.0);
    m.g = [r, pb](double t, double u, double x, const Scenario&) {
        return std::exp(-r * t) * (pb * x - u - 0.5 * u * u);
    };
    m.g_u = [r](double t, double u, double, const Scenario&) {
        return -std::exp(-r * t) * (1.0 + u);
    };
    m.g_x = [r, pb](double t, double, double, const Scenario&) {
        return std::exp(-r * t) * pb;
    };
    return m;
}

ScenarioBundle example2_linearized(const Example2Params& params) {
    check_example2_params(params);
    const double r = params.r, d = params.delta, pb = params.pi_bar;
    ScenarioBundle b;
    b.model = example2_transformed_model(params, true);
    b.model.name = "adaptation-linearized";
    b.model.linear_in_ux = true;
    b.model.g = [r, d, pb](double t, double u, double x, const Scenario&) {
        return std::exp(-r * t) * (std::exp(-d * t) * pb * x - u);
    };
    b.model.g_u = [r](double t, double, double, const Scenario&) { return -std::exp(-r * t); };
    b.candidate = ControlPolicy::constant(1.0);
    b.default_challengers.push_back(ControlPolicy::constant(0.5));
    b.default_challengers.push_back(ControlPolicy::constant(1.5));
    return b;
}

ModelSpec example2_planted_convex(const Example2Params& params) {
    check_example2_params(params);
    const double r = params.r, d = params.delta, pb = params.pi_bar;
    ModelSpec m = example2_transformed_model(params, true);
    m.name = "adaptation-convex-fault";
    m.g = [r, d, pb](double t, double u, double x, const Scenario&) {
        return std::exp(-r * t) * (std::exp(-d * t) * pb * x - u + 0.5 * u * u);
    };
    m.g_u = [r](double t, double u, double, const Scenario&) {
        return std::exp(-r * t) * (-1.0 + u);
    };
    return m;
}

double oracle_gap_example2_const(const Example2Params& params, double u_bar, double T) {
    check_example2_params(params);
    const double r = params.r, d = params.delta;
    const double u_hat = params.pi_bar / (r + d) - 1.0;
    const double a = u_hat - u_bar;
    const double b = a * (1.0 + 0.5 * (u_hat + u_bar));
    const double er = (1.0 - std::exp(-r * T)) / r;
    const double erpd = (1.0 - std::exp(-(r + d) * T)) / (r + d);
    return (params.pi_bar * a / d) * (er - erpd) - b * er;
}

double oracle_gap_example2_const_grid(const Example2Params& params, double u_bar,
                                      const TimeGrid& grid, std::size_t K) {
    check_example2_params(params);
    if (K > grid.n_steps)
        throw InputError("oracle_gap_example2_const_grid: horizon index beyond the grid");
    const double r = params.r, d = params.delta;
    const double u_hat = params.pi_bar / (r + d) - 1.0;
    const double a = u_hat - u_bar;
    const double b = a * (1.0 + 0.5 * (u_hat + u_bar));
    const double dt = grid.dt();
    double gap = 0.0;
    double s = 0.0;  // sum_{j<k} e^{d t_j} dt, the transformed-state shortfall per unit a
    for (std::size_t k = 0; k < K; ++k) {
        const double t = grid.node(k);
        gap += std::exp(-r * t) * (std::exp(-d * t) * params.pi_bar * a * s - b) * dt;
        s += std::exp(d * t) * dt;
    }
    return gap;
}

double oracle_gap_example2_const_quadrature(const Example2Params& params, double u_bar, double T,
                                            double dt_fine) {
    check_example2_params(params);
    if (!(dt_fine > 0.0)) throw InputError("oracle_gap_example2_const_quadrature: dt_fine <= 0");
    const double r = params.r, d = params.delta;
    const double u_hat = params.pi_bar / (r + d) - 1.0;
    const double a = u_hat - u_bar;
    const double b = a * (1.0 + 0.5 * (u_hat + u_bar));
    const auto phi = [&](double t) {
        return std::exp(-r * t) * (params.pi_bar * a * (1.0 - std::exp(-d * t)) / d - b);
    };
    auto n = static_cast<std::size_t>(std::ceil(T / dt_fine));
    if (n % 2 == 1) ++n;
    if (n < 2) n = 2;
    const double h = T / static_cast<double>(n);
    double sum = phi(0.0) + phi(T);
    for (std::size_t i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * phi(h * static_cast<double>(i));
    return sum * h / 3.0;
}

ControlPolicy needle_challenger(const ControlPolicy& base, double t0, double width,
                                double height) {
    if (!(width > 0.0)) throw InputError("needle_challenger: width must be > 0");
    if (!(t0 >= 0.0)) throw InputError("needle_challenger: t0 must be >= 0");
    std::string label = base.label() + "+needle:" + format_double(t0) + ":" +
                        format_double(width) + ":" + format_double(height);
    const double t1 = t0 + width;
    return ControlPolicy::from_fn(
        [base, t0, t1, height](double t, std::size_t i, std::size_t k, double x,
                               const Scenario& w) {
            double v = base.evaluate(t, i, k, x, w);
            if (t >= t0 && t < t1) v += height;
            return v;
        },
        std::move(label));
}

std::vector<ControlPolicy> default_needles(const ControlPolicy& candidate, const ControlSet& set,
                                           double t_first, int count, double height_scale,
                                           double width) {
    std::vector<ControlPolicy> out;
    if (count <= 0) return out;
    if (!(t_first > 0.0)) throw InputError("default_needles: first horizon must be > 0");
    const double w = std::min(width, t_first);
    const double h = height_scale * 0.5 * set.hull_width();
    const double span = t_first - w;
    for (int i = 0; i < count; ++i) {
        const double t0 =
            count > 1 ? span * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        out.push_back(needle_challenger(candidate, t0, w, sign * h));
    }
    return out;
}

}  // namespace ovtk
