#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "labavs/data.hpp"
#include "labavs/errors.hpp"
#include "support.hpp"

using namespace labavs;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p);
    f << s;
}

}  // namespace

TEST_CASE("huberised ramp") {
    CHECK(huberised(0.4) == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(0.4 * 0.4 == doctest::Approx(0.8 * 0.4 - 0.16).epsilon(1e-15));
    CHECK(huberised(-1.0) == 0.0);
    CHECK(huberised(0.0) == 0.0);
    CHECK(huberised(1.0) == doctest::Approx(0.64).epsilon(1e-15));
    CHECK(huberised(0.2) == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("two-dimensional truth") {
    CHECK(example1_truth(-1.0, -1.0) == 0.0);
    CHECK(example1_truth(0.3, -2.0) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(example1_truth(1.0, 1.0) == doctest::Approx(0.8 * std::sqrt(2.0) - 0.16).epsilon(1e-15));
    CHECK(example1_truth(1.0, 1.0) == doctest::Approx(0.97137).epsilon(1e-5));

    SUBCASE("continuous on a fine probe grid") {
        const double step = 1e-3;
        double worst = 0.0;
        for (double a = -2.0; a <= 2.0; a += 0.01) {
            for (double b = -2.0; b <= 2.0; b += 0.01) {
                worst = std::max(worst, std::abs(example1_truth(a + step, b) - example1_truth(a, b)));
                worst = std::max(worst, std::abs(example1_truth(a, b + step) - example1_truth(a, b)));
            }
        }
        CHECK(worst <= 0.8 * step + 1e-12);
    }
    SUBCASE("quadrant dependence") {
        for (double a = 0.05; a < 2.0; a += 0.1) {
            for (double b = 0.05; b < 2.0; b += 0.1) {
                CHECK(example1_truth(-a, -b) == 0.0);
                // (+,-): only the first coordinate matters.
                CHECK(example1_truth(a, -b) == example1_truth(a, -0.5));
                CHECK(example1_truth(-a, b) == example1_truth(-0.5, b));
                CHECK(example1_truth(a, b) != example1_truth(a, b + 0.05));
                CHECK(example1_truth(a, b) != example1_truth(a + 0.05, b));
            }
        }
    }
}

TEST_CASE("random streams") {
    RandomStream a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(a.next_u64() != c.next_u64());
    std::set<std::uint64_t> seeds;
    for (auto s : {StreamId::design, StreamId::extra_design, StreamId::noise, StreamId::test_design,
                   StreamId::test_extra_design, StreamId::test_noise}) {
        seeds.insert(derive_seed(7, s));
    }
    CHECK(seeds.size() == 6);
    RandomStream n(5);
    double sum = 0.0, sq = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
        const double z = n.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / m) < 0.01);
    CHECK(std::abs(sq / m - 1.0) < 0.01);
}

TEST_CASE("simulation") {
    SimSpec spec;
    spec.seed = 9;
    SUBCASE("deterministic") {
        const Dataset a = simulate(spec), b = simulate(spec);
        CHECK(a.predictors() == b.predictors());
        CHECK(a.response() == b.response());
    }
    SUBCASE("design on the square and names") {
        const Dataset a = simulate(spec);
        CHECK(a.n() == 500);
        CHECK(a.d() == 2);
        CHECK(a.predictors().minCoeff() >= -2.0);
        CHECK(a.predictors().maxCoeff() <= 2.0);
        CHECK(a.names() == std::vector<std::string>{"x1", "x2", "y"});
    }
    SUBCASE("extra dimensions do not touch the response") {
        SimSpec more = spec;
        more.d_extra = 3;
        const Dataset a = simulate(spec), b = simulate(more);
        CHECK(b.d() == 5);
        CHECK(a.response() == b.response());
        CHECK(a.predictors() == b.predictors().leftCols(2));
    }
    SUBCASE("test draw is separate") {
        const Dataset a = simulate(spec), t = simulate_test(spec);
        CHECK(a.predictors() != t.predictors());
        CHECK(simulate_test(spec).response() == t.response());
    }
    SUBCASE("noise variance") {
        SimSpec big = spec;
        big.n = 100000;
        const Dataset a = simulate(big);
        const auto truth = truth_values(a);
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < a.n(); ++i) {
            const double e = a.y(i) - truth[i];
            sum += e;
            sq += e * e;
        }
        const double mean = sum / static_cast<double>(a.n());
        CHECK(std::abs(sq / static_cast<double>(a.n()) - mean * mean - 0.09) < 0.002);
    }
    SUBCASE("validation") {
        SimSpec bad = spec;
        bad.noise_sd = 0.0;
        CHECK_THROWS_AS(simulate(bad), ConfigError);
        bad = spec;
        bad.n = 0;
        CHECK_THROWS_AS(simulate(bad), ConfigError);
    }
}

TEST_CASE("csv input") {
    const auto dir = testing::temp_dir("csv");
    SUBCASE("three by three") {
        write_text(dir / "a.csv", "u,v,resp\n1,2,3\n4,5,6\n7,8,9\n");
        const Dataset d = load_csv(dir / "a.csv");
        CHECK(d.n() == 3);
        CHECK(d.d() == 2);
        CHECK(d.y(2) == 9.0);
        CHECK(d.row(1)[1] == 5.0);
        CHECK(d.names() == std::vector<std::string>{"u", "v", "resp"});
    }
    SUBCASE("response by name and by index") {
        write_text(dir / "b.csv", "u,resp,v\n1,2,3\n4,5,6\n");
        CHECK(load_csv(dir / "b.csv", "resp").y(1) == 5.0);
        const Dataset d = load_csv(dir / "b.csv", "0");
        CHECK(d.y(1) == 4.0);
        CHECK(d.row(1)[0] == 5.0);
        CHECK_THROWS_AS(load_csv(dir / "b.csv", "missing"), ConfigError);
    }
    SUBCASE("blank cell names its location") {
        write_text(dir / "c.csv", "u,v,y\n1,2,3\n4,,6\n");
        try {
            load_csv(dir / "c.csv");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row() == 3);
            CHECK(e.column() == 2);
        }
    }
    SUBCASE("non-numeric and ragged rows") {
        write_text(dir / "d.csv", "u,y\n1,abc\n");
        CHECK_THROWS_AS(load_csv(dir / "d.csv"), ParseError);
        write_text(dir / "e.csv", "u,y\n1,2,3\n");
        CHECK_THROWS_AS(load_csv(dir / "e.csv"), ParseError);
        write_text(dir / "f.csv", "u,y\n");
        CHECK_THROWS_AS(load_csv(dir / "f.csv"), ParseError);
        CHECK_THROWS_AS(load_csv(dir / "nope.csv"), ConfigError);
    }
    SUBCASE("round trip") {
        SimSpec spec;
        spec.n = 50;
        spec.d_extra = 1;
        const Dataset a = simulate(spec);
        write_csv(a, dir / "r.csv");
        const Dataset b = load_csv(dir / "r.csv");
        CHECK(a.predictors() == b.predictors());
        CHECK(a.response() == b.response());
        CHECK(dataset_digest(a) == dataset_digest(b));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("unit-variance scaling and digest") {
    SimSpec spec;
    spec.n = 200;
    const Dataset a = simulate(spec);
    const ScaledDataset s = scale_unit_variance(a);
    for (Eigen::Index j = 0; j < 2; ++j) {
        const auto col = s.data.predictors().col(j);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.scale[static_cast<std::size_t>(j)] > 0.0);
    }
    CHECK(dataset_digest(a) == dataset_digest(simulate(spec)));
    CHECK(dataset_digest(a).rfind("fnv1a64:", 0) == 0);
    RowMatrix x = a.predictors();
    x(3, 1) = std::nextafter(x(3, 1), 10.0);
    CHECK(dataset_digest(Dataset(x, a.response())) != dataset_digest(a));
}
