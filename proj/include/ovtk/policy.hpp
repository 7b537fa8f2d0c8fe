#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "ovtk/ensemble.hpp"
#include "ovtk/model.hpp"

namespace ovtk {

/// A control rule evaluated along simulated paths. Four kinds:
///   constant        u
///   deterministic   u(t)
///   feedback        u(t, x, exogenous)
///   tabulated       per-(path, node) values on a fixed grid
/// Values are clamped to the control hull by the simulator, which counts
/// clamping events; evaluate() itself returns the raw value.
class ControlPolicy {
public:
    static ControlPolicy constant(double v, std::string label = "") {
        ControlPolicy p;
        p.fn_ = [v](double, std::size_t, std::size_t, double, const Scenario&) { return v; };
        p.label_ = label.empty() ? "const:" + format_value(v) : std::move(label);
        return p;
    }

    static ControlPolicy deterministic(std::function<double(double)> f, std::string label) {
        ControlPolicy p;
        p.fn_ = [f = std::move(f)](double t, std::size_t, std::size_t, double, const Scenario&) {
            return f(t);
        };
        p.label_ = std::move(label);
        return p;
    }

    static ControlPolicy feedback(std::function<double(double, double, const Scenario&)> f,
                                  std::string label) {
        ControlPolicy p;
        p.fn_ = [f = std::move(f)](double t, std::size_t, std::size_t, double x, const Scenario& w) {
            return f(t, x, w);
        };
        p.label_ = std::move(label);
        return p;
    }

    /// Full-signature rule. Lets callers wrap or combine existing policies,
    /// e.g. a base rule plus a localized perturbation.
    static ControlPolicy from_fn(
        std::function<double(double, std::size_t, std::size_t, double, const Scenario&)> f,
        std::string label) {
        ControlPolicy p;
        p.fn_ = std::move(f);
        p.label_ = std::move(label);
        return p;
    }

    static ControlPolicy tabulated(PathEnsemble table, std::string label = "tabulated") {
        ControlPolicy p;
        auto shared = std::make_shared<PathEnsemble>(std::move(table));
        p.fn_ = [shared](double, std::size_t path, std::size_t k, double, const Scenario&) {
            return shared->at(path, k);
        };
        p.label_ = std::move(label);
        return p;
    }

    double evaluate(double t, std::size_t path, std::size_t k, double x, const Scenario& w) const {
        return fn_(t, path, k, x, w);
    }

    const std::string& label() const { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }

private:
    static std::string format_value(double v);
    std::function<double(double, std::size_t, std::size_t, double, const Scenario&)> fn_;
    std::string label_ = "policy";
};

}  // namespace ovtk
