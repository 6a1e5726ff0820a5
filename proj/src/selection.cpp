#include "labavs/selection.hpp"

#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "labavs/errors.hpp"

namespace labavs {

namespace {

SelectionResult classify(const Eigen::VectorXd& scores, VarSet candidates, double lambda) {
    const auto d = static_cast<std::size_t>(scores.size());
    SelectionResult res;
    res.scores = scores;
    for (std::size_t j = 0; j < d; ++j) {
        if (candidates.contains(j) && !(scores[static_cast<Eigen::Index>(j)] < lambda)) res.relevant.insert(j);
    }
    res.redundant = res.relevant.complement(d);
    return res;
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

}  // namespace

std::string_view to_string(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::hard_threshold: return "hard";
        case SelectionMethod::stepwise: return "stepwise";
        case SelectionMethod::local_lasso: return "lasso";
    }
    return "?";
}

SelectionMethod parse_selection_method(std::string_view s) {
    if (s == "hard" || s == "hard_threshold") return SelectionMethod::hard_threshold;
    if (s == "stepwise") return SelectionMethod::stepwise;
    if (s == "lasso" || s == "local_lasso") return SelectionMethod::local_lasso;
    throw ConfigError("unknown selection method '" + std::string(s) + "'");
}

void SelectionConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite nonnegative number");
}

SelectionResult select_hard_threshold(const StandardizedNeighborhood& nbhd, double lambda) {
    const std::size_t d = nbhd.d();
    const VarSet usable = nbhd.non_degenerate();
    const auto vars = usable.indices();
    const auto n = nbhd.xtilde.rows();
    const auto p = static_cast<Eigen::Index>(vars.size() + 1);

    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    for (Eigen::Index c = 1; c < p; ++c) design.col(c) = nbhd.xtilde.col(static_cast<Eigen::Index>(vars[c - 1]));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p) throw DegenerateNeighborhood("collinear standardized design", nbhd.in_window);
    const Eigen::VectorXd beta = qr.solve(nbhd.ytilde);

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (Eigen::Index c = 1; c < p; ++c) scores[static_cast<Eigen::Index>(vars[c - 1])] = std::abs(beta[c]);
    return classify(scores, usable, lambda);
}

SelectionResult select_stepwise(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw,
                                double lambda) {
    const std::size_t d = data.d();
    const StandardizedNeighborhood nbhd = standardize(data, x_query, bw);
    const VarSet usable = nbhd.non_degenerate();
    const LocalFit full = fit_local_linear(data, x_query, bw, usable);

    // Residual sums below this are treated as an exact local fit.
    const double tss = nbhd.ytilde.squaredNorm();
    const double exact = 1e-20 * tss;

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (auto j : usable.indices()) {
        VarSet reduced = usable;
        reduced.erase(j);
        const double rss_j = fit_local_linear(data, x_query, bw, reduced).rss;
        double ratio;
        if (full.rss <= exact) {
            ratio = rss_j <= exact ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            ratio = (rss_j - full.rss) / full.rss;
        }
        scores[static_cast<Eigen::Index>(j)] = ratio;
    }
    return classify(scores, usable, lambda);
}

LassoSolution solve_local_lasso(const RowMatrix& xtilde, const Eigen::VectorXd& ytilde, VarSet active,
                                double lambda, const LassoOptions& opts) {
    // The unpenalised intercept is profiled out by centring rows.
    const auto d = xtilde.cols();
    const Eigen::RowVectorXd xmean = xtilde.colwise().mean();
    const double ymean = ytilde.mean();
    const Eigen::MatrixXd xc = xtilde.rowwise() - xmean;
    const Eigen::VectorXd yc = ytilde.array() - ymean;
    const Eigen::VectorXd col_ss = xc.colwise().squaredNorm();

    LassoSolution sol;
    sol.coef = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd resid = yc;
    const double half_lambda = 0.5 * lambda;

    for (sol.sweeps = 1; sol.sweeps <= opts.max_sweeps; ++sol.sweeps) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (!active.contains(static_cast<std::size_t>(j)) || col_ss[j] == 0.0) continue;
            const double old = sol.coef[j];
            const double rho = xc.col(j).dot(resid) + col_ss[j] * old;
            const double updated = soft_threshold(rho, half_lambda) / col_ss[j];
            if (updated != old) {
                resid -= (updated - old) * xc.col(j);
                sol.coef[j] = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (max_change < opts.tolerance) break;
    }

    // Gap between the primal objective and the dual value at the rescaled residual.
    const double primal = resid.squaredNorm() + lambda * sol.coef.lpNorm<1>();
    double max_corr = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (active.contains(static_cast<std::size_t>(j))) max_corr = std::max(max_corr, std::abs(xc.col(j).dot(resid)));
    }
    const double shrink = max_corr > half_lambda ? half_lambda / max_corr : 1.0;
    const Eigen::VectorXd theta = shrink * resid;
    const double dual = yc.squaredNorm() - (yc - theta).squaredNorm();
    sol.duality_gap = std::max(0.0, primal - dual);

    if (sol.sweeps > opts.max_sweeps) {
        throw ConvergenceError("local lasso did not converge", sol.duality_gap);
    }
    sol.intercept = ymean - xmean.dot(sol.coef);
    return sol;
}

SelectionResult select_local_lasso(const StandardizedNeighborhood& nbhd, double lambda, const LassoOptions& opts) {
    const VarSet usable = nbhd.non_degenerate();
    const LassoSolution sol = solve_local_lasso(nbhd.xtilde, nbhd.ytilde, usable, lambda, opts);
    const auto d = static_cast<std::size_t>(nbhd.d());

    SelectionResult res;
    res.scores = sol.coef.cwiseAbs();
    for (std::size_t j = 0; j < d; ++j) {
        if (usable.contains(j) && sol.coef[static_cast<Eigen::Index>(j)] != 0.0) res.relevant.insert(j);
    }
    res.redundant = res.relevant.complement(d);
    return res;
}

SelectionResult select_variables(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw,
                                 const SelectionConfig& config) {
    switch (config.method) {
        case SelectionMethod::hard_threshold:
            return select_hard_threshold(standardize(data, x_query, bw), config.lambda);
        case SelectionMethod::stepwise:
            return select_stepwise(data, x_query, bw, config.lambda);
        case SelectionMethod::local_lasso:
            return select_local_lasso(standardize(data, x_query, bw), config.lambda);
    }
    throw ConfigError("unknown selection method");
}

}  // namespace labavs
