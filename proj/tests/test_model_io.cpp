#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "labavs/data.hpp"
#include "labavs/errors.hpp"
#include "labavs/model_io.hpp"
#include "support.hpp"

using namespace labavs;
using nlohmann::json;

namespace {

StoredModel fitted(std::size_t d_extra, bool scaled, SelectionMethod method = SelectionMethod::hard_threshold) {
    SimSpec s;
    s.seed = 21;
    s.n = 300;
    s.d_extra = d_extra;
    Dataset data = simulate(s);
    FitOptions o;
    o.selection = {method, 0.55};
    StoredModel st{LabavsModel::fit(data, o), {}};
    if (scaled) {
        ScaledDataset sd = scale_unit_variance(data);
        st = StoredModel{LabavsModel::fit(sd.data, o), sd.scale};
    }
    return st;
}

double max_diff(const StoredModel& a, const StoredModel& b, std::size_t d) {
    RandomStream r(4);
    double worst = 0.0;
    std::vector<double> q(d);
    for (int i = 0; i < 100; ++i) {
        for (auto& v : q) v = r.uniform(-2.0, 2.0);
        worst = std::max(worst, std::abs(a.predict(q) - b.predict(q)));
    }
    return worst;
}

}  // namespace

TEST_CASE("round trip reproduces predictions exactly") {
    for (bool scaled : {false, true}) {
        for (std::size_t extra : {std::size_t{0}, std::size_t{1}}) {
            CAPTURE(scaled);
            CAPTURE(extra);
            const StoredModel a = fitted(extra, scaled);
            const std::string text = serialize_model(a);
            const StoredModel b = parse_model(text);
            CHECK(max_diff(a, b, 2 + extra) == 0.0);
            CHECK(serialize_model(b) == text);
            CHECK(b.predictor_scale == a.predictor_scale);
            CHECK(b.model.relevant_sets() == a.model.relevant_sets());
        }
    }
    const StoredModel lasso = fitted(0, false, SelectionMethod::local_lasso);
    CHECK(max_diff(lasso, parse_model(serialize_model(lasso)), 2) == 0.0);
}

TEST_CASE("file round trip") {
    const auto dir = testing::temp_dir("model");
    const StoredModel a = fitted(0, false);
    save_model(a, dir / "m.json");
    CHECK(max_diff(a, load_model(dir / "m.json"), 2) == 0.0);
    CHECK_THROWS_AS(load_model(dir / "missing.json"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed documents") {
    const std::string text = serialize_model(fitted(0, false));
    CHECK_THROWS_AS(parse_model("{not json"), ParseError);
    CHECK_THROWS_AS(parse_model("[]"), ParseError);
    SUBCASE("schema") {
        json doc = json::parse(text);
        doc["schema"] = "something-else";
        CHECK_THROWS_AS(parse_model(doc.dump()), ParseError);
    }
    SUBCASE("version") {
        json doc = json::parse(text);
        doc["version"] = kModelVersion + 1;
        CHECK_THROWS_AS(parse_model(doc.dump()), ParseError);
    }
    SUBCASE("digest") {
        json doc = json::parse(text);
        doc["dataset_digest"] = "fnv1a64:0000000000000000";
        CHECK_THROWS_AS(parse_model(doc.dump()), ParseError);
    }
    SUBCASE("tampered data") {
        json doc = json::parse(text);
        doc["data"]["y"][0] = doc["data"]["y"][0].get<double>() + 1.0;
        CHECK_THROWS_AS(parse_model(doc.dump()), ParseError);
    }
    SUBCASE("missing field") {
        json doc = json::parse(text);
        doc.erase("data");
        CHECK_THROWS_AS(parse_model(doc.dump()), ParseError);
    }
}
