#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "labavs/data.hpp"
#include "labavs/errors.hpp"
#include "labavs/tuning.hpp"
#include "support.hpp"

using namespace labavs;

namespace {

FitOptions hard(double lambda, double frac = 0.25) {
    FitOptions o;
    o.selection = {SelectionMethod::hard_threshold, lambda};
    o.bandwidth = NearestNeighborBandwidth{frac};
    return o;
}

Dataset small(std::uint64_t seed, std::size_t n) {
    SimSpec s;
    s.seed = seed;
    s.n = n;
    return simulate(s);
}

}  // namespace

TEST_CASE("leave-one-out bookkeeping") {
    const Dataset data = small(1, 40);
    const FitOptions o = hard(0.55, 0.3);
    const CvResult r = loocv_error(data, o);
    CHECK(r.predicted + r.skipped == data.n());
    for (std::size_t i = 0; i < data.n(); ++i) CHECK(r.fold_of[i] == i);
    double sse = 0.0;
    for (std::size_t i = 0; i < data.n(); i += 7) {
        const LabavsModel m = LabavsModel::fit(data.without_row(i), o);
        CHECK(r.predictions[i] == m.predict(data.row(i)));
    }
    for (std::size_t i = 0; i < data.n(); ++i) sse += std::pow(r.predictions[i] - data.y(i), 2);
    CHECK(r.mse == doctest::Approx(sse / static_cast<double>(data.n())).epsilon(1e-14));
    CHECK_THROWS_AS(loocv_error(small(1, 9), o), ConfigError);
}

TEST_CASE("leave-one-out on a constant response is zero") {
    Dataset base = small(2, 40);
    const Dataset data(base.predictors(), Eigen::VectorXd::Constant(40, -1.5));
    CHECK(loocv_error(data, hard(0.55, 0.3)).mse < 1e-24);
}

TEST_CASE("leave-one-out on affine data is near the noise variance") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> e(0.0, 0.5);
    double ratio = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (int i = 0; i < 20; ++i) {
            const double a = u(rng);
            x.push_back({a});
            y.push_back(1.0 + 2.0 * a + e(rng));
        }
        FitOptions o = hard(0.0, 1.0);
        ratio += loocv_error(testing::make_dataset(x, y), o).mse / 0.25;
    }
    ratio /= reps;
    CHECK(ratio > 0.85);
    CHECK(ratio < 1.5);
}

TEST_CASE("k-fold assignment") {
    const Dataset data = small(4, 103);
    const CvResult a = kfold_error(data, hard(0.55, 0.3), 5, 17);
    const CvResult b = kfold_error(data, hard(0.55, 0.3), 5, 17);
    CHECK(a.fold_of == b.fold_of);
    CHECK(a.mse == b.mse);
    std::vector<std::size_t> sizes(5, 0);
    for (auto f : a.fold_of) ++sizes[f];
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    const CvResult c = kfold_error(data, hard(0.55, 0.3), 5, 18);
    CHECK(a.fold_of != c.fold_of);
    CHECK_THROWS_AS(kfold_error(data, hard(0.55), 1, 0), ConfigError);
}

TEST_CASE("test error") {
    const Dataset train = small(5, 300);
    SUBCASE("invariant to row order") {
        const LabavsModel m = LabavsModel::fit(train, hard(0.55));
        SimSpec s;
        s.seed = 5;
        s.n = 200;
        const Dataset test = simulate_test(s);
        std::vector<std::size_t> perm(test.n());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::mt19937_64 rng(5);
        std::shuffle(perm.begin(), perm.end(), rng);
        CHECK(test_error(m, test) == doctest::Approx(test_error(m, test.subset(perm))).epsilon(1e-13));
    }
    SUBCASE("perfect model on noiseless affine data") {
        Eigen::VectorXd y(static_cast<Eigen::Index>(train.n()));
        for (std::size_t i = 0; i < train.n(); ++i) y[static_cast<Eigen::Index>(i)] = 0.5 - train.row(i)[0] + 3.0 * train.row(i)[1];
        FitOptions o = hard(0.55);
        o.final_fit = FinalFit::full;
        const LabavsModel m = LabavsModel::fit(Dataset(train.predictors(), y), o);
        const Dataset probe = small(6, 100);
        Eigen::VectorXd yp(100);
        for (std::size_t i = 0; i < 100; ++i) yp[static_cast<Eigen::Index>(i)] = 0.5 - probe.row(i)[0] + 3.0 * probe.row(i)[1];
        CHECK(test_error(m, Dataset(probe.predictors(), yp)) < 1e-16);
    }
    SUBCASE("removing every variable predicts the training mean") {
        const LabavsModel m = LabavsModel::fit(train, hard(1e6));
        const Dataset test = small(7, 2000);
        const double ybar = train.response().mean();
        const double tmean = test.response().mean();
        const double var = (test.response().array() - tmean).square().mean();
        CHECK(m.predict(test.row(0)) == doctest::Approx(ybar).epsilon(1e-12));
        CHECK(test_error(m, test) == doctest::Approx(var + std::pow(ybar - tmean, 2)).epsilon(1e-9));
    }
    SUBCASE("dimension mismatch") {
        const LabavsModel m = LabavsModel::fit(train, hard(0.55));
        SimSpec s;
        s.d_extra = 1;
        s.n = 10;
        CHECK_THROWS_AS(test_error(m, simulate(s)), ConfigError);
    }
}

TEST_CASE("lambda selection") {
    const Dataset data = small(8, 200);
    SUBCASE("chosen is the minimum and ties go to the larger lambda") {
        const std::vector<Candidate> cands{{1e6, {}}, {0.3, {}}, {2e6, {}}};
        const CvReport r = select_lambda(data, hard(0.0), cands, CvProtocol::k_fold(5, 1));
        CHECK(r.cv_errors.size() == 3);
        const double best = *std::min_element(r.cv_errors.begin(), r.cv_errors.end());
        CHECK(r.cv_errors[r.chosen] == best);
        CHECK(r.cv_errors[0] == r.cv_errors[2]);
        if (r.cv_errors[0] == best) CHECK(r.chosen == 2);
    }
    SUBCASE("repeated candidate") {
        const std::vector<Candidate> cands{{0.55, {}}, {0.55, {}}};
        CHECK(select_lambda(data, hard(0.0), cands, CvProtocol::k_fold(5, 1)).chosen == 0);
    }
    SUBCASE("needs two candidates") {
        const std::vector<Candidate> one{{0.55, {}}};
        CHECK_THROWS_AS(select_lambda(data, hard(0.0), one, CvProtocol::k_fold(5, 1)), ConfigError);
    }
    SUBCASE("moderate pruning beats none with noise dimensions") {
        SimSpec s;
        s.seed = 9;
        s.d_extra = 2;
        const Dataset noisy = simulate(s);
        const std::vector<Candidate> cands{{0.0, {}}, {0.55, {}}};
        const CvReport r = select_lambda(noisy, hard(0.0, 0.2), cands, CvProtocol::k_fold(5, 2));
        CHECK(r.chosen == 1);
    }
}

TEST_CASE("estimators") {
    CHECK(parse_estimator("LABAVS-A") == Estimator::labavs_a);
    CHECK(parse_estimator("LABAVS-B") == Estimator::labavs_b);
    CHECK(parse_estimator("LOC1") == Estimator::loc1);
    CHECK_THROWS_AS(parse_estimator("GAM"), ConfigError);
    const Dataset data = small(10, 60);
    const CvResult r = cross_validate(Estimator::loc1, data, hard(0.55, 0.3), CvProtocol::leave_one_out());
    CHECK(r.predicted == 60);
    const LabavsModel none = LabavsModel::fit(data.without_row(5), hard(0.0, 0.3));
    CHECK(r.predictions[5] == doctest::Approx(none.predict(data.row(5))).epsilon(1e-10));
}
