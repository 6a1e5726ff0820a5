#include "labavs/tuning.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "labavs/data.hpp"
#include "labavs/errors.hpp"
#include "labavs/parallel.hpp"

namespace labavs {

namespace {

constexpr double kMaxSkippedFraction = 0.10;

// Fits on everything outside `held_out` and predicts the held-out rows.
// Returns false when the fold is numerically degenerate.
bool run_fold(Estimator kind, const Dataset& data, const FitOptions& options, std::span<const std::size_t> held_out,
              std::span<const std::size_t> train_rows, std::vector<double>& predictions) {
    try {
        const Dataset train = data.subset(train_rows);
        RowMatrix queries(static_cast<Eigen::Index>(held_out.size()), static_cast<Eigen::Index>(data.d()));
        for (std::size_t r = 0; r < held_out.size(); ++r) {
            const auto xi = data.row(held_out[r]);
            for (std::size_t j = 0; j < data.d(); ++j) queries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = xi[j];
        }
        const std::vector<double> pred = fit_and_predict(kind, options, train, queries);
        for (std::size_t r = 0; r < held_out.size(); ++r) predictions[held_out[r]] = pred[r];
        return true;
    } catch (const DegenerateNeighborhood&) {
    } catch (const DegenerateGrid&) {
    } catch (const ConvergenceError&) {
    }
    for (auto i : held_out) predictions[i] = std::numeric_limits<double>::quiet_NaN();
    return false;
}

CvResult run_folds(Estimator kind, const Dataset& data, const FitOptions& options, std::vector<std::size_t> fold_of,
                   std::size_t folds) {
    const std::size_t n = data.n();
    CvResult res;
    res.fold_of = std::move(fold_of);
    res.predictions.assign(n, std::numeric_limits<double>::quiet_NaN());

    std::vector<std::vector<std::size_t>> held(folds), train(folds);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < folds; ++f) (res.fold_of[i] == f ? held[f] : train[f]).push_back(i);
    }
    std::vector<char> ok(folds, 0);
    detail::parallel_for(
        folds, [&](std::size_t f) { ok[f] = run_fold(kind, data, options, held[f], train[f], res.predictions) ? 1 : 0; },
        1);

    double sse = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        if (!ok[f]) {
            ++res.skipped;
            continue;
        }
        for (auto i : held[f]) {
            const double e = res.predictions[i] - data.y(i);
            sse += e * e;
            ++res.predicted;
        }
    }
    if (static_cast<double>(res.skipped) > kMaxSkippedFraction * static_cast<double>(folds)) {
        throw EvaluationError("too many degenerate cross-validation folds (" + std::to_string(res.skipped) + " of " +
                              std::to_string(folds) + ")");
    }
    if (res.predicted == 0) throw EvaluationError("no cross-validation predictions");
    res.mse = sse / static_cast<double>(res.predicted);
    return res;
}

Estimator estimator_of(const FitOptions& options) {
    return options.final_fit == FinalFit::full ? Estimator::labavs_a : Estimator::labavs_b;
}

CvResult loocv(Estimator kind, const Dataset& data, const FitOptions& options) {
    if (data.n() < 10) throw ConfigError("leave-one-out evaluation needs at least 10 observations");
    std::vector<std::size_t> fold_of(data.n());
    std::iota(fold_of.begin(), fold_of.end(), std::size_t{0});
    return run_folds(kind, data, options, std::move(fold_of), data.n());
}

CvResult kfold(Estimator kind, const Dataset& data, const FitOptions& options, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > data.n()) throw ConfigError("k-fold needs 2 <= k <= n");
    std::vector<std::size_t> order(data.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream rng(seed);
    for (std::size_t i = order.size(); i-- > 1;) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.next_u64() % (i + 1))]);
    }
    std::vector<std::size_t> fold_of(data.n());
    for (std::size_t r = 0; r < order.size(); ++r) fold_of[order[r]] = r % k;
    return run_folds(kind, data, options, std::move(fold_of), k);
}

}  // namespace

CvResult loocv_error(const Dataset& data, const FitOptions& options) {
    return loocv(estimator_of(options), data, options);
}

CvResult kfold_error(const Dataset& data, const FitOptions& options, std::size_t k, std::uint64_t seed) {
    return kfold(estimator_of(options), data, options, k, seed);
}

CvResult cross_validate(const Dataset& data, const FitOptions& options, const CvProtocol& protocol) {
    return cross_validate(estimator_of(options), data, options, protocol);
}

CvResult cross_validate(Estimator kind, const Dataset& data, const FitOptions& options, const CvProtocol& protocol) {
    if (protocol.kind == CvProtocol::Kind::loocv) return loocv(kind, data, options);
    return kfold(kind, data, options, protocol.folds, protocol.seed);
}

double mean_squared_error(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || predicted.empty()) {
        throw ConfigError("prediction and target lengths differ or are empty");
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - actual[i];
        sse += e * e;
    }
    return sse / static_cast<double>(predicted.size());
}

double test_error(const LabavsModel& model, const Dataset& test) {
    if (test.d() != model.data().d()) throw ConfigError("test data dimension does not match the model");
    const std::vector<double> pred = model.predict(test.predictors());
    return mean_squared_error(pred, std::span<const double>(test.response().data(), test.n()));
}

CvReport select_lambda(const Dataset& data, const FitOptions& base, std::span<const Candidate> candidates,
                       const CvProtocol& protocol) {
    if (candidates.size() < 2) throw ConfigError("lambda selection needs at least two candidates");
    CvReport report;
    report.candidates.assign(candidates.begin(), candidates.end());
    report.cv_errors.assign(candidates.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        FitOptions opts = base;
        opts.selection.lambda = candidates[c].lambda;
        if (candidates[c].bw_frac) opts.bandwidth = NearestNeighborBandwidth{*candidates[c].bw_frac};
        try {
            report.cv_errors[c] = cross_validate(data, opts, protocol).mse;
        } catch (const EvaluationError&) {
        }
    }
    bool any = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (!std::isfinite(report.cv_errors[c])) continue;
        const bool better = !any || report.cv_errors[c] < report.cv_errors[report.chosen] ||
                            (report.cv_errors[c] == report.cv_errors[report.chosen] &&
                             candidates[c].lambda > candidates[report.chosen].lambda);
        if (better) report.chosen = c;
        any = true;
    }
    if (!any) throw EvaluationError("every lambda candidate failed to evaluate");
    return report;
}

std::string_view to_string(Estimator e) {
    switch (e) {
        case Estimator::labavs_a: return "LABAVS-A";
        case Estimator::labavs_b: return "LABAVS-B";
        case Estimator::loc1: return "LOC1";
    }
    return "?";
}

Estimator parse_estimator(std::string_view s) {
    if (s == "LABAVS-A" || s == "labavs-a" || s == "a") return Estimator::labavs_a;
    if (s == "LABAVS-B" || s == "labavs-b" || s == "b") return Estimator::labavs_b;
    if (s == "LOC1" || s == "loc1") return Estimator::loc1;
    throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

std::vector<double> fit_and_predict(Estimator kind, const FitOptions& options, const Dataset& train,
                                    const RowMatrix& queries) {
    if (static_cast<std::size_t>(queries.cols()) != train.d()) throw ConfigError("query dimension mismatch");
    const std::size_t m = static_cast<std::size_t>(queries.rows());
    const std::size_t d = train.d();
    std::vector<double> out(m);
    if (kind == Estimator::loc1) {
        validate(options.bandwidth, train);
        detail::parallel_for(m, [&](std::size_t i) {
            out[i] = predict_local_linear(train, std::span<const double>(queries.data() + i * d, d), options.bandwidth);
        });
        return out;
    }
    FitOptions opts = options;
    opts.final_fit = kind == Estimator::labavs_a ? FinalFit::full : FinalFit::reduced;
    return LabavsModel::fit(train, opts).predict(queries);
}

}  // namespace labavs
