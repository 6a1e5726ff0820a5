#include "labavs/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "labavs/data.hpp"
#include "labavs/errors.hpp"

namespace labavs {

using nlohmann::json;

namespace {

json half_width_json(HalfWidth h) {
    return h.is_infinite() ? json("inf") : json(h.value());
}

json bandwidth_json(const Bandwidth& bw) {
    json lower = json::array(), upper = json::array();
    for (std::size_t j = 0; j < bw.dim(); ++j) {
        lower.push_back(half_width_json(bw.lower[j]));
        upper.push_back(half_width_json(bw.upper[j]));
    }
    return {{"lower", lower}, {"upper", upper}};
}

json config_json(const FitOptions& o) {
    json bw;
    if (const auto* f = std::get_if<FixedBandwidth>(&o.bandwidth)) {
        bw = {{"kind", "fixed"}, {"h", f->h}};
    } else {
        bw = {{"kind", "nearest_neighbor"}, {"frac", std::get<NearestNeighborBandwidth>(o.bandwidth).frac}};
    }
    return {{"method", std::string(to_string(o.selection.method))},
            {"lambda", o.selection.lambda},
            {"bandwidth", bw},
            {"grid_spacing", *o.spacing},
            {"final_fit", std::string(to_string(o.final_fit))},
            {"shrink", std::string(to_string(o.shrink))}};
}

FitOptions config_from_json(const json& j) {
    FitOptions o;
    o.selection.method = parse_selection_method(j.at("method").get<std::string>());
    o.selection.lambda = j.at("lambda").get<double>();
    const json& bw = j.at("bandwidth");
    const auto kind = bw.at("kind").get<std::string>();
    if (kind == "fixed") {
        o.bandwidth = FixedBandwidth{bw.at("h").get<double>()};
    } else if (kind == "nearest_neighbor") {
        o.bandwidth = NearestNeighborBandwidth{bw.at("frac").get<double>()};
    } else {
        throw ParseError("unknown bandwidth kind '" + kind + "'", 0, 0);
    }
    o.spacing = j.at("grid_spacing").get<double>();
    o.final_fit = parse_final_fit(j.at("final_fit").get<std::string>());
    o.shrink = parse_shrink_mode(j.at("shrink").get<std::string>());
    return o;
}

}  // namespace

std::vector<double> StoredModel::to_model_units(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    if (predictor_scale.empty()) return out;
    if (predictor_scale.size() != out.size()) throw ConfigError("query dimension does not match the model");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] /= predictor_scale[j];
    return out;
}

std::string serialize_model(const StoredModel& stored) {
    const LabavsModel& m = stored.model;
    const Dataset& data = m.data();

    json x = json::array();
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto r = data.row(i);
        x.push_back(std::vector<double>(r.begin(), r.end()));
    }
    std::vector<double> y(data.response().data(), data.response().data() + data.n());

    json relevant = json::array(), bandwidths = json::array();
    for (std::size_t g = 0; g < m.grid().size(); ++g) {
        std::vector<std::size_t> one_based;
        for (auto j : m.relevant_sets()[g].indices()) one_based.push_back(j + 1);
        relevant.push_back(one_based);
        bandwidths.push_back(bandwidth_json(m.adjusted_bandwidths()[g]));
    }
    std::vector<bool> borrowed = m.borrowed();

    json doc = {
        {"schema", std::string(kModelSchema)},
        {"version", kModelVersion},
        {"dataset_digest", dataset_digest(data)},
        {"config", config_json(m.options())},
        {"predictor_scale", stored.predictor_scale},
        {"data", {{"names", data.names()}, {"x", x}, {"y", y}}},
        {"grid", {{"origin", m.grid().origin()}, {"spacing", m.grid().spacing()}, {"counts", m.grid().counts()}}},
        {"relevant_sets", relevant},
        {"borrowed", borrowed},
        {"fallback_count", m.fallback_count()},
        {"global_shrink_factor", m.global_shrink_factor()},
        {"adjusted_bandwidths", bandwidths},
    };
    return doc.dump(1) + "\n";
}

StoredModel parse_model(std::string_view text) {
    try {
        const json doc = json::parse(text.begin(), text.end());
        if (doc.at("schema").get<std::string>() != kModelSchema) throw ParseError("not a LABAVS model file", 0, 0);
        if (doc.at("version").get<int>() != kModelVersion) {
            throw ParseError("unsupported model version " + std::to_string(doc.at("version").get<int>()), 0, 0);
        }

        const json& jd = doc.at("data");
        const auto rows = jd.at("x").get<std::vector<std::vector<double>>>();
        const auto y = jd.at("y").get<std::vector<double>>();
        if (rows.empty() || rows.size() != y.size()) throw ParseError("inconsistent data block", 0, 0);
        RowMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.front().size()) throw ParseError("ragged data row", i + 1, 0);
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        Dataset data(std::move(x), Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())),
                     jd.at("names").get<std::vector<std::string>>());
        if (dataset_digest(data) != doc.at("dataset_digest").get<std::string>()) {
            throw ParseError("dataset digest mismatch", 0, 0);
        }

        const FitOptions options = config_from_json(doc.at("config"));
        const json& jg = doc.at("grid");
        Grid grid(jg.at("origin").get<std::vector<double>>(), jg.at("spacing").get<double>(),
                  jg.at("counts").get<std::vector<std::size_t>>());

        std::vector<VarSet> relevant;
        for (const auto& s : doc.at("relevant_sets")) {
            VarSet v;
            for (auto j : s.get<std::vector<std::size_t>>()) {
                if (j < 1 || j > data.d()) throw ParseError("relevant-set index out of range", 0, 0);
                v.insert(j - 1);
            }
            relevant.push_back(v);
        }
        auto borrowed = doc.at("borrowed").get<std::vector<bool>>();
        const auto fallback = doc.at("fallback_count").get<std::size_t>();

        StoredModel stored{LabavsModel::restore(std::move(data), options, std::move(grid), std::move(relevant),
                                                std::move(borrowed), fallback),
                           doc.at("predictor_scale").get<std::vector<double>>()};
        if (!stored.predictor_scale.empty() && stored.predictor_scale.size() != stored.model.data().d()) {
            throw ParseError("predictor_scale length mismatch", 0, 0);
        }
        return stored;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what(), 0, 0);
    }
}

void save_model(const StoredModel& stored, const std::filesystem::path& path) {
    const std::string text = serialize_model(stored);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

StoredModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace labavs
