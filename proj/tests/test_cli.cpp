#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "labavs/data.hpp"
#include "labavs/model_io.hpp"
#include "support.hpp"

using namespace labavs;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("fit summary") {
    const auto dir = testing::temp_dir("cli_fit");
    const std::string model = (dir / "m.json").string();
    SUBCASE("defaults find every pattern") {
        const Outcome r = run({"fit", "--simulate", "--seed", "1", "--out", model, "--format", "json"});
        REQUIRE(r.code == cli::kExitOk);
        const json s = json::parse(r.out);
        CHECK(s["distinct_patterns"] == 4);
        CHECK(s["pattern_counts"].size() == 4);
        CHECK(s["n"] == 500);
        CHECK(std::filesystem::exists(model));
        CHECK_FALSE(std::filesystem::exists(model + ".partial"));
    }
    SUBCASE("zero lambda keeps everything") {
        REQUIRE(run({"fit", "--simulate", "--lambda", "0", "--out", model, "--summary", (dir / "s.json").string(),
                     "--format", "json"})
                    .code == cli::kExitOk);
        const json s = json::parse(slurp(dir / "s.json"));
        CHECK(s["relevance_fraction"]["x1"] == 1.0);
        CHECK(s["relevance_fraction"]["x2"] == 1.0);
        const Outcome m = run({"map", "--model", model});
        REQUIRE(m.code == cli::kExitOk);
        const auto rows = lines(m.out);
        REQUIRE(rows.size() > 1);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find("\"{1,2}\"") != std::string::npos);
    }
    SUBCASE("lambda grid reports the cross-validation table") {
        const Outcome r = run({"fit", "--simulate", "--n", "150", "--lambda-grid", "0,0.55", "--out", model,
                               "--format", "json"});
        REQUIRE(r.code == cli::kExitOk);
        const json s = json::parse(r.out);
        CHECK(s.contains("cv"));
    }
    SUBCASE("text summary") {
        const Outcome r = run({"fit", "--simulate", "--out", model});
        REQUIRE(r.code == cli::kExitOk);
        CHECK(r.out.find("distinct relevant-set patterns: 4") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("input and configuration failures") {
    const auto dir = testing::temp_dir("cli_err");
    const std::string model = (dir / "m.json").string();
    SUBCASE("unreadable data") {
        const Outcome r = run({"fit", "--data", (dir / "none.csv").string(), "--out", model});
        CHECK(r.code == cli::kExitConfig);
        CHECK_FALSE(std::filesystem::exists(model));
        CHECK_FALSE(std::filesystem::exists(model + ".partial"));
    }
    SUBCASE("bad cell reported as json") {
        std::ofstream(dir / "bad.csv") << "a,b,y\n1,2,3\n1,x,3\n";
        const Outcome r = run({"--error-json", "fit", "--data", (dir / "bad.csv").string(), "--out", model});
        CHECK(r.code == cli::kExitConfig);
        const json e = json::parse(r.err)["error"];
        CHECK(e["type"] == "ParseError");
        CHECK(e["row"] == 3);
        CHECK(e["column"] == 2);
        CHECK_FALSE(std::filesystem::exists(model));
    }
    SUBCASE("conflicting sources") {
        CHECK(run({"fit", "--simulate", "--data", "x.csv", "--out", model}).code == cli::kExitConfig);
        CHECK(run({"fit", "--out", model}).code == cli::kExitConfig);
    }
    SUBCASE("unknown method") {
        CHECK(run({"fit", "--simulate", "--method", "ridge", "--out", model}).code == cli::kExitConfig);
    }
    SUBCASE("output equal to input") {
        const std::string data = (dir / "d.csv").string();
        REQUIRE(run({"simulate", "--n", "50", "--out", data}).code == cli::kExitOk);
        CHECK(run({"fit", "--data", data, "--out", data}).code == cli::kExitConfig);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("predict and map") {
    const auto dir = testing::temp_dir("cli_pm");
    const std::string model = (dir / "m.json").string();
    const std::string test = (dir / "t.csv").string();
    REQUIRE(run({"fit", "--simulate", "--seed", "2", "--out", model, "--summary", (dir / "s.txt").string()}).code ==
            cli::kExitOk);
    REQUIRE(run({"simulate", "--seed", "2", "--test", "--n", "20", "--out", test}).code == cli::kExitOk);

    SUBCASE("predictions match the stored model") {
        const Outcome r = run({"predict", "--model", model, "--data", test});
        REQUIRE(r.code == cli::kExitOk);
        const auto rows = lines(r.out);
        REQUIRE(rows.size() == 21);
        CHECK(rows[0] == "x1,x2,prediction");
        const StoredModel m = load_model(model);
        const Dataset t = load_csv(test);
        for (std::size_t i = 0; i < 20; ++i) {
            const std::string& row = rows[i + 1];
            CHECK(std::stod(row.substr(row.rfind(',') + 1)) == m.predict(t.row(i)));
        }
    }
    SUBCASE("map has one row per grid point") {
        const Outcome r = run({"map", "--model", model, "--format", "csv"});
        REQUIRE(r.code == cli::kExitOk);
        const auto rows = lines(r.out);
        CHECK(rows[0] == "x1,x2,relevant_set,lower_1,upper_1,lower_2,upper_2");
        CHECK(rows.size() - 1 == load_model(model).model.grid().size());
    }
    SUBCASE("higher dimensions need a slice") {
        const std::string m4 = (dir / "m4.json").string();
        REQUIRE(run({"fit", "--simulate", "--n", "200", "--d-extra", "1", "--out", m4, "--summary",
                     (dir / "s4.txt").string()})
                    .code == cli::kExitOk);
        CHECK(run({"map", "--model", m4}).code == cli::kExitConfig);
        const Outcome r = run({"map", "--model", m4, "--slice", "1,3"});
        REQUIRE(r.code == cli::kExitOk);
        CHECK(lines(r.out)[0].rfind("x1,x3,relevant_set", 0) == 0);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("eval report") {
    SUBCASE("single replicate has no spread") {
        const Outcome r = run({"eval", "--reps", "1", "--n", "200", "--n-test", "100", "--seed", "3"});
        REQUIRE(r.code == cli::kExitOk);
        const json j = json::parse(r.out);
        REQUIRE(j["results"].size() == 3);
        for (const auto& m : j["results"]) {
            CHECK(m["sd"].is_null());
            CHECK(m["errors"].size() == 1);
        }
        CHECK(j["seeds"] == json::array({3}));
    }
    SUBCASE("byte-identical reruns") {
        const std::vector<std::string> args{"eval", "--reps", "2", "--n", "150", "--n-test", "50", "--format", "csv"};
        const Outcome a = run(args), b = run(args);
        REQUIRE(a.code == cli::kExitOk);
        CHECK(a.out == b.out);
        CHECK(lines(a.out).size() == 7);
    }
    SUBCASE("estimator subset and rejected grid") {
        const Outcome r = run({"eval", "--reps", "1", "--n", "150", "--n-test", "50", "--estimators", "LOC1"});
        REQUIRE(r.code == cli::kExitOk);
        CHECK(json::parse(r.out)["results"].size() == 1);
        CHECK(run({"eval", "--lambda-grid", "0,1"}).code == cli::kExitConfig);
    }
    SUBCASE("cross-validation on a file") {
        const auto dir = testing::temp_dir("cli_eval");
        const std::string data = (dir / "d.csv").string();
        REQUIRE(run({"simulate", "--n", "120", "--out", data}).code == cli::kExitOk);
        const Outcome r = run({"eval", "--data", data, "--cv", "kfold", "--folds", "4"});
        REQUIRE(r.code == cli::kExitOk);
        CHECK(json::parse(r.out)["results"].size() == 3);
        std::filesystem::remove_all(dir);
    }
}
