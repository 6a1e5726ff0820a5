#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "labavs/dataset.hpp"
#include "labavs/kernel.hpp"
#include "labavs/localreg.hpp"
#include "labavs/varset.hpp"

namespace labavs {

enum class SelectionMethod { hard_threshold, stepwise, local_lasso };

std::string_view to_string(SelectionMethod m);
/// Accepts "hard", "stepwise", "lasso" and the long enum spellings.
SelectionMethod parse_selection_method(std::string_view s);

struct SelectionConfig {
    SelectionMethod method = SelectionMethod::hard_threshold;
    double lambda = 0.0;

    void validate() const;
};

struct SelectionResult {
    VarSet relevant;
    VarSet redundant;
    /// |beta_j| (hard threshold), RSS increase ratio (stepwise) or |gamma_j| (lasso).
    Eigen::VectorXd scores;
};

/// Least squares of ytilde on xtilde with an intercept; |beta_j| < lambda is redundant.
SelectionResult select_hard_threshold(const StandardizedNeighborhood& nbhd, double lambda);

/// Relative RSS increase when each variable is dropped from the full local
/// linear fit; ratios below lambda are redundant.
SelectionResult select_stepwise(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw,
                                double lambda);

struct LassoOptions {
    double tolerance = 1e-9;  ///< on the largest coefficient change in a sweep
    int max_sweeps = 10000;
};

struct LassoSolution {
    double intercept = 0.0;
    Eigen::VectorXd coef;
    int sweeps = 0;
    double duality_gap = 0.0;
};

/// Cyclic coordinate descent for
///   sum_i (ytilde_i - g0 - xtilde_i . g)^2 + lambda * sum_j |g_j|
/// over the columns in `active`; other coefficients are held at zero.
/// Throws ConvergenceError after `max_sweeps`.
LassoSolution solve_local_lasso(const RowMatrix& xtilde, const Eigen::VectorXd& ytilde, VarSet active,
                                double lambda, const LassoOptions& opts = {});

/// Coefficients set exactly to zero are redundant.
SelectionResult select_local_lasso(const StandardizedNeighborhood& nbhd, double lambda, const LassoOptions& opts = {});

/// Dispatch on config.method at a query point with bandwidth bw.
SelectionResult select_variables(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw,
                                 const SelectionConfig& config);

}  // namespace labavs
