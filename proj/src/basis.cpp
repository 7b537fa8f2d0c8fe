#include "ovtk/basis.hpp"

#include <cmath>
#include <functional>
#include <utility>

#include "ovtk/errors.hpp"

namespace ovtk {

std::vector<std::vector<int>> monomial_exponents(int n_vars, int degree) {
    std::vector<std::vector<int>> out;
    if (n_vars <= 0 || degree <= 0) return out;
    std::vector<int> cur(static_cast<std::size_t>(n_vars), 0);
    std::function<void(int, int)> rec = [&](int var, int remaining) {
        if (var == n_vars - 1) {
            cur[static_cast<std::size_t>(var)] = remaining;
            out.push_back(cur);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            cur[static_cast<std::size_t>(var)] = e;
            rec(var + 1, remaining - e);
        }
    };
    for (int total = 1; total <= degree; ++total) rec(0, total);
    return out;
}

StepRegressor::StepRegressor(const RegressionBasis& cfg, Eigen::MatrixXd vars) {
    if (vars.rows() < 1) throw InputError("regression needs at least one sample");
    build(cfg, vars);
}

void StepRegressor::build(const RegressionBasis& cfg, const Eigen::MatrixXd& vars) {
    const Eigen::Index n = vars.rows();
    standardize_ = cfg.standardize;
    n_raw_vars_ = vars.cols();

    // Drop variables with (numerically) zero spread; they carry no information
    // and would poison the standardization below.
    Eigen::MatrixXd z(n, vars.cols());
    std::vector<double> means, sds;
    for (Eigen::Index j = 0; j < vars.cols(); ++j) {
        const double mean = vars.col(j).mean();
        const double sd = std::sqrt((vars.col(j).array() - mean).square().sum() /
                                    static_cast<double>(n));
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) continue;
        const auto slot = static_cast<Eigen::Index>(keep_.size());
        if (standardize_)
            z.col(slot) = ((vars.col(j).array() - mean) / sd).matrix();
        else
            z.col(slot) = vars.col(j);
        keep_.push_back(j);
        means.push_back(mean);
        sds.push_back(sd);
    }
    const int n_active = static_cast<int>(keep_.size());
    means_ = Eigen::Map<const Eigen::VectorXd>(means.data(), n_active);
    sds_ = Eigen::Map<const Eigen::VectorXd>(sds.data(), n_active);
    const Eigen::MatrixXd z_kept = z.leftCols(n_active);

    // Build the design at the requested degree; back off whenever the columns
    // are rank deficient for this sample (few paths, collinear features).
    int degree = n_active == 0 ? 0 : cfg.degree;
    for (;; --degree, ++reductions_) {
        exps_ = monomial_exponents(n_active, degree);
        design_ = make_design(z_kept);
        qr_.compute(design_);
        qr_.setThreshold(1e-10);
        if (qr_.rank() == design_.cols() || degree == 0) break;
    }
    degree_used_ = degree;
}

Eigen::MatrixXd StepRegressor::make_design(const Eigen::MatrixXd& z) const {
    const Eigen::Index n = z.rows();
    Eigen::MatrixXd design(n, 1 + static_cast<Eigen::Index>(exps_.size()));
    design.col(0).setOnes();
    for (std::size_t m = 0; m < exps_.size(); ++m) {
        Eigen::ArrayXd col = Eigen::ArrayXd::Ones(n);
        for (Eigen::Index v = 0; v < z.cols(); ++v)
            for (int e = 0; e < exps_[m][static_cast<std::size_t>(v)]; ++e)
                col *= z.col(v).array();
        design.col(1 + static_cast<Eigen::Index>(m)) = col.matrix();
    }
    return design;
}

Eigen::VectorXd StepRegressor::fit(const Eigen::VectorXd& y, double* r2) const {
    if (y.size() != design_.rows())
        throw InputError("regression target length does not match sample count");
    const Eigen::VectorXd beta = qr_.solve(y);
    Eigen::VectorXd fitted = design_ * beta;
    if (r2) {
        const double mean = y.mean();
        const double ss_tot = (y.array() - mean).square().sum();
        const double ss_res = (y - fitted).array().square().sum();
        *r2 = ss_tot <= 1e-300 ? 1.0 : 1.0 - ss_res / ss_tot;
    }
    return fitted;
}

Eigen::VectorXd StepRegressor::coefficients(const Eigen::VectorXd& y) const {
    if (y.size() != design_.rows())
        throw InputError("regression target length does not match sample count");
    return qr_.solve(y);
}

Eigen::VectorXd StepRegressor::predict(const Eigen::MatrixXd& vars,
                                       const Eigen::VectorXd& beta) const {
    if (vars.cols() != n_raw_vars_)
        throw InputError("predict: variable count differs from the training set");
    if (beta.size() != design_.cols())
        throw InputError("predict: coefficient length differs from the feature count");
    const auto n_active = static_cast<Eigen::Index>(keep_.size());
    Eigen::MatrixXd z(vars.rows(), n_active);
    for (Eigen::Index m = 0; m < n_active; ++m) {
        if (standardize_)
            z.col(m) = ((vars.col(keep_[static_cast<std::size_t>(m)]).array() - means_(m)) /
                        sds_(m))
                           .matrix();
        else
            z.col(m) = vars.col(keep_[static_cast<std::size_t>(m)]);
    }
    return make_design(z) * beta;
}

}  // namespace ovtk
