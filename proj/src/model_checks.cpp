#include "ovtk/model_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ovtk/brownian.hpp"
#include "ovtk/fmt.hpp"

namespace ovtk {

namespace {

double unit(std::uint64_t seed, std::uint64_t idx, std::uint64_t stream) {
    const auto w = philox::generate(seed, idx, stream);
    return philox::to_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
}

double in_range(double lo, double hi, std::uint64_t seed, std::uint64_t idx,
                std::uint64_t stream) {
    return lo + (hi - lo) * unit(seed, idx, stream);
}

struct SamplePoint {
    double t, u, x;
    std::vector<double> exo;
    Scenario scenario() const { return Scenario{std::span<const double>(exo)}; }
};

SamplePoint draw_point(const ModelSpec& m, std::uint64_t seed, std::uint64_t idx, double t_lo,
                       double t_hi, double x_halfwidth) {
    SamplePoint s;
    s.t = in_range(t_lo, t_hi, seed, idx, 0);
    s.u = in_range(m.control_set.hull_lo(), m.control_set.hull_hi(), seed, idx, 1);
    const double xr = x_halfwidth * std::max(1.0, std::abs(m.x0));
    s.x = in_range(m.x0 - xr, m.x0 + xr, seed, idx, 2);
    s.exo.resize(m.exogenous.size());
    for (std::size_t j = 0; j < m.exogenous.size(); ++j)
        s.exo[j] = in_range(m.exogenous[j].sample_lo, m.exogenous[j].sample_hi, seed, idx, 3 + j);
    return s;
}

enum class Coord { kU, kX };

double eval_shifted(const Coefficient& c, const SamplePoint& s, Coord which, double shift) {
    const Scenario w = s.scenario();
    return which == Coord::kU ? c(s.t, s.u + shift, s.x, w) : c(s.t, s.u, s.x + shift, w);
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& p : partials)
        os << "partial " << p.name << ": max_rel_err=" << format_sci(p.max_rel_err, 3) << " at (t="
           << format_sci(p.at_t, 3) << ", u=" << format_sci(p.at_u, 3) << ", x="
           << format_sci(p.at_x, 3) << ") " << (p.pass ? "ok" : "MISMATCH") << "\n";
    if (linear_declared)
        os << "affine structure: declared, " << (linear_verified ? "verified" : "REFUTED")
           << " (worst second difference " << format_sci(worst_second_diff, 3) << ")\n";
    else
        os << "affine structure: not declared\n";
    os << "model validation: " << (pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

ValidationReport validate_model(const ModelSpec& model, const ValidateOptions& opts) {
    if (!model.f || !model.sigma || !model.g || !model.f_u || !model.f_x || !model.sigma_u ||
        !model.sigma_x || !model.g_u || !model.g_x)
        throw InputError("model '" + model.name + "' is missing a coefficient or partial");
    for (const auto& e : model.exogenous) {
        if (!e.step) throw InputError("exogenous process '" + e.name + "' has no step function");
        if (!(e.sample_lo <= e.sample_hi))
            throw InputError("exogenous process '" + e.name + "' has an empty sample range");
    }

    ValidationReport report;
    report.linear_declared = model.linear_in_ux;

    struct Probe {
        const char* name;
        const Coefficient* parent;
        const Coefficient* declared;
        Coord coord;
    };
    const Probe probes[] = {
        {"f_u", &model.f, &model.f_u, Coord::kU},         {"f_x", &model.f, &model.f_x, Coord::kX},
        {"sigma_u", &model.sigma, &model.sigma_u, Coord::kU},
        {"sigma_x", &model.sigma, &model.sigma_x, Coord::kX},
        {"g_u", &model.g, &model.g_u, Coord::kU},         {"g_x", &model.g, &model.g_x, Coord::kX},
    };

    std::vector<SamplePoint> points;
    points.reserve(opts.budget);
    for (std::size_t i = 0; i < opts.budget; ++i)
        points.push_back(draw_point(model, opts.seed, i, 0.0, opts.t_max, opts.x_halfwidth));

    for (const Probe& pr : probes) {
        PartialCheck check;
        check.name = pr.name;
        for (const SamplePoint& s : points) {
            const double v = pr.coord == Coord::kU ? s.u : s.x;
            const double step = opts.fd_step * std::max(1.0, std::abs(v));
            const double hi = eval_shifted(*pr.parent, s, pr.coord, step);
            const double lo = eval_shifted(*pr.parent, s, pr.coord, -step);
            const double fd = (hi - lo) / (2.0 * step);
            const double declared = (*pr.declared)(s.t, s.u, s.x, s.scenario());
            const double denom = std::max({1.0, std::abs(fd), std::abs(declared)});
            const double rel = std::abs(declared - fd) / denom;
            if (rel > check.max_rel_err) {
                check.max_rel_err = rel;
                check.at_t = s.t;
                check.at_u = s.u;
                check.at_x = s.x;
            }
        }
        check.pass = check.max_rel_err <= opts.tolerance;
        report.partials.push_back(std::move(check));
    }

    // Affinity in (u, x): pure and mixed second differences of f, sigma, g must
    // vanish at every sample when the model declares linear structure.
    if (model.linear_in_ux) {
        const Coefficient* coeffs[] = {&model.f, &model.sigma, &model.g};
        double worst = 0.0;
        for (const SamplePoint& s : points) {
            const Scenario w = s.scenario();
            const double su = opts.affine_step * std::max(1.0, std::abs(s.u));
            const double sx = opts.affine_step * std::max(1.0, std::abs(s.x));
            for (const Coefficient* c : coeffs) {
                const double center = (*c)(s.t, s.u, s.x, w);
                const double scale = std::max(1.0, std::abs(center));
                const double duu = (*c)(s.t, s.u + su, s.x, w) - 2.0 * center +
                                   (*c)(s.t, s.u - su, s.x, w);
                const double dxx = (*c)(s.t, s.u, s.x + sx, w) - 2.0 * center +
                                   (*c)(s.t, s.u, s.x - sx, w);
                const double dux = (*c)(s.t, s.u + su, s.x + sx, w) -
                                   (*c)(s.t, s.u + su, s.x - sx, w) -
                                   (*c)(s.t, s.u - su, s.x + sx, w) +
                                   (*c)(s.t, s.u - su, s.x - sx, w);
                worst = std::max({worst, std::abs(duu) / (su * su * scale),
                                  std::abs(dxx) / (sx * sx * scale),
                                  std::abs(dux) / (4.0 * su * sx * scale)});
            }
        }
        report.worst_second_diff = worst;
        report.linear_verified = worst <= opts.affine_tolerance;
    }

    report.pass = std::all_of(report.partials.begin(), report.partials.end(),
                              [](const PartialCheck& c) { return c.pass; }) &&
                  (!report.linear_declared || report.linear_verified);
    return report;
}

std::string ConcavityReport::summary() const {
    std::ostringstream os;
    os << "hamiltonian concavity: " << (pass ? "PASS" : "FAIL") << " over " << samples
       << " samples, worst eigenvalue " << format_sci(worst_eigenvalue, 3) << " at (t="
       << format_sci(at_t, 3) << ", u=" << format_sci(at_u, 3) << ", x=" << format_sci(at_x, 3)
       << ", p=" << format_sci(at_p, 3) << ", h=" << format_sci(at_h, 3) << ")\n";
    return os.str();
}

ConcavityReport check_concavity(const ModelSpec& model, const ConcavityOptions& opts) {
    ConcavityReport report;
    report.samples = opts.budget;
    report.worst_eigenvalue = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < opts.budget; ++i) {
        SamplePoint s = draw_point(model, opts.seed, i, opts.t_min, opts.t_max, opts.x_halfwidth);
        const double p = in_range(opts.p_lo, opts.p_hi, opts.seed, i, 16);
        const double h = in_range(opts.h_lo, opts.h_hi, opts.seed, i, 17);
        const Scenario w = s.scenario();
        const double su = opts.fd_step * std::max(1.0, std::abs(s.u));
        const double sx = opts.fd_step * std::max(1.0, std::abs(s.x));
        auto H = [&](double du, double dx) {
            return hamiltonian(model, s.t, s.u + du, s.x + dx, p, h, w);
        };
        const double center = H(0, 0);
        const double a = (H(su, 0) - 2.0 * center + H(-su, 0)) / (su * su);
        const double c = (H(0, sx) - 2.0 * center + H(0, -sx)) / (sx * sx);
        const double b = (H(su, sx) - H(su, -sx) - H(-su, sx) + H(-su, -sx)) / (4.0 * su * sx);
        const double mid = 0.5 * (a + c);
        const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        const double lam = mid + rad;
        if (lam > report.worst_eigenvalue) {
            report.worst_eigenvalue = lam;
            report.at_t = s.t;
            report.at_u = s.u;
            report.at_x = s.x;
            report.at_p = p;
            report.at_h = h;
        }
    }
    report.pass = report.worst_eigenvalue <= opts.tolerance;
    return report;
}

bool is_state_free(const ModelSpec& model, std::size_t budget, std::uint64_t seed) {
    for (std::size_t i = 0; i < budget; ++i) {
        const SamplePoint s = draw_point(model, seed, i, 0.0, 32.0, 10.0);
        const Scenario w = s.scenario();
        const double tol =
            1e-12 * std::max({1.0, std::abs(model.f(s.t, s.u, s.x, w)),
                              std::abs(model.sigma(s.t, s.u, s.x, w))});
        if (std::abs(model.f_x(s.t, s.u, s.x, w)) > tol) return false;
        if (std::abs(model.sigma_x(s.t, s.u, s.x, w)) > tol) return false;
    }
    return true;
}

bool has_deterministic_gx(const ModelSpec& model, std::size_t budget, std::uint64_t seed) {
    const std::size_t n_times = std::max<std::size_t>(8, budget / 16);
    for (std::size_t it = 0; it < n_times; ++it) {
        const double t = in_range(0.0, 32.0, seed, it, 64);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < 16; ++j) {
            SamplePoint s = draw_point(model, seed ^ 0x6789ABCDull, it * 16 + j, 0.0, 32.0, 10.0);
            s.t = t;
            const double v = model.g_x(s.t, s.u, s.x, s.scenario());
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)})) return false;
    }
    return true;
}

}  // namespace ovtk
