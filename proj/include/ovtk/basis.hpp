#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace ovtk {

/// Polynomial regression basis in (state, exogenous...) up to a total degree.
/// Features are standardized per step (mean 0, sd 1 over paths) before the
/// monomials are formed; degenerate variables (sd ~ 0) are dropped, and a
/// rank-deficient design triggers automatic degree reduction.
struct RegressionBasis {
    int degree = 3;
    bool standardize = true;
};

/// Least-squares projector onto the basis span at one time node, factored once
/// and reusable across right-hand sides.
class StepRegressor {
public:
    /// vars: n_paths x n_vars raw variable columns (state first, then exogenous).
    StepRegressor(const RegressionBasis& cfg, Eigen::MatrixXd vars);

    /// Fitted values of the least-squares regression of y on the features.
    /// r2 (if non-null) receives 1 - SS_res/SS_tot, with r2 = 1 for a
    /// zero-variance target.
    Eigen::VectorXd fit(const Eigen::VectorXd& y, double* r2 = nullptr) const;

    /// Coefficient vector of the regression of y on the features.
    Eigen::VectorXd coefficients(const Eigen::VectorXd& y) const;

    /// Apply a coefficient vector to fresh raw variables (columns as in the
    /// constructor); the training standardization and monomial set are reused.
    /// This is what cross-fitting uses to score held-out paths.
    Eigen::VectorXd predict(const Eigen::MatrixXd& vars, const Eigen::VectorXd& beta) const;

    int degree_used() const { return degree_used_; }
    int n_features() const { return static_cast<int>(design_.cols()); }
    /// Number of degree reductions taken to reach full rank.
    int reductions() const { return reductions_; }

private:
    void build(const RegressionBasis& cfg, const Eigen::MatrixXd& vars);
    Eigen::MatrixXd make_design(const Eigen::MatrixXd& z) const;

    Eigen::MatrixXd design_;  // n_paths x n_features, standardized monomials
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    std::vector<Eigen::Index> keep_;        // raw columns with non-degenerate spread
    Eigen::VectorXd means_, sds_;           // standardization stats per kept column
    std::vector<std::vector<int>> exps_;    // monomials at degree_used_
    bool standardize_ = true;
    Eigen::Index n_raw_vars_ = 0;
    int degree_used_ = 0;
    int reductions_ = 0;
};

/// Exponent tuples (e_1..e_d) with 1 <= sum <= degree, graded order.
/// The constant feature is implicit and always present.
std::vector<std::vector<int>> monomial_exponents(int n_vars, int degree);

}  // namespace ovtk
