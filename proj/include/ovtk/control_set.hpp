#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ovtk/errors.hpp"

namespace ovtk {

/// Admissible control values: a closed interval [lo, hi] or a finite set.
/// The convex hull [hull_lo, hull_hi] is what policies are clamped to.
class ControlSet {
public:
    static ControlSet interval(double lo, double hi) {
        if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw InputError("ControlSet: invalid interval [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
        ControlSet s;
        s.lo_ = lo;
        s.hi_ = hi;
        return s;
    }

    static ControlSet finite(std::vector<double> values) {
        if (values.empty()) throw InputError("ControlSet: finite set must be non-empty");
        for (double v : values)
            if (!std::isfinite(v)) throw InputError("ControlSet: non-finite member");
        std::sort(values.begin(), values.end());
        ControlSet s;
        s.values_ = std::move(values);
        s.lo_ = s.values_.front();
        s.hi_ = s.values_.back();
        return s;
    }

    bool is_interval() const { return values_.empty(); }
    double hull_lo() const { return lo_; }
    double hull_hi() const { return hi_; }
    double hull_width() const { return hi_ - lo_; }
    const std::vector<double>& members() const { return values_; }

    bool contains(double u) const {
        if (is_interval()) return u >= lo_ && u <= hi_;
        for (double v : values_)
            if (u == v) return true;
        return false;
    }

    /// Nearest point of the hull. Used by simulation; clamping events are counted there.
    double clamp_to_hull(double u) const { return std::clamp(u, lo_, hi_); }

private:
    double lo_ = 0.0, hi_ = 0.0;
    std::vector<double> values_;  // empty <=> interval
};

}  // namespace ovtk
