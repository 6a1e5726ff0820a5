#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "labavs/dataset.hpp"
#include "labavs/labavs.hpp"

namespace labavs {

/// Estimators compared in the replicate studies.
enum class Estimator { labavs_a, labavs_b, loc1 };

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view s);

struct CvProtocol {
    enum class Kind { loocv, kfold };
    Kind kind = Kind::kfold;
    std::size_t folds = 5;
    std::uint64_t seed = 0;  ///< fold assignment for k-fold

    static CvProtocol leave_one_out() { return {Kind::loocv, 0, 0}; }
    static CvProtocol k_fold(std::size_t k, std::uint64_t seed = 0) { return {Kind::kfold, k, seed}; }
};

struct CvResult {
    double mse = 0.0;            ///< mean squared error over predicted rows
    std::size_t predicted = 0;   ///< rows that received a prediction
    std::size_t skipped = 0;     ///< folds whose refit or prediction was degenerate
    std::vector<std::size_t> fold_of;  ///< fold id of each row
    std::vector<double> predictions;   ///< held-out prediction per row, NaN if skipped
};

/// Leave-one-out error with a full pipeline refit per row. Needs n >= 10.
/// Throws EvaluationError when more than 10% of folds are skipped.
CvResult loocv_error(const Dataset& data, const FitOptions& options);

/// k-fold error with a seeded random fold assignment.
CvResult kfold_error(const Dataset& data, const FitOptions& options, std::size_t k, std::uint64_t seed);

/// LABAVS-A or LABAVS-B according to options.final_fit.
CvResult cross_validate(const Dataset& data, const FitOptions& options, const CvProtocol& protocol);
CvResult cross_validate(Estimator kind, const Dataset& data, const FitOptions& options, const CvProtocol& protocol);

/// Mean squared difference between predictions and test responses.
double test_error(const LabavsModel& model, const Dataset& test);
double mean_squared_error(std::span<const double> predicted, std::span<const double> actual);

struct Candidate {
    double lambda = 0.0;
    std::optional<double> bw_frac;  ///< overrides the nearest-neighbour fraction when set
};

struct CvReport {
    std::vector<Candidate> candidates;
    std::vector<double> cv_errors;  ///< +inf for candidates whose evaluation failed
    std::size_t chosen = 0;
};

/// Cross-validates each candidate and picks the smallest error, breaking ties
/// toward the larger lambda. Throws EvaluationError if every candidate fails.
CvReport select_lambda(const Dataset& data, const FitOptions& base, std::span<const Candidate> candidates,
                       const CvProtocol& protocol);

/// Trains `kind` on `train` and predicts every row of `queries`. LABAVS-A and
/// LABAVS-B override options.final_fit; LOC1 uses options.bandwidth only.
std::vector<double> fit_and_predict(Estimator kind, const FitOptions& options, const Dataset& train,
                                    const RowMatrix& queries);

}  // namespace labavs
