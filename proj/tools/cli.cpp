#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "labavs/data.hpp"
#include "labavs/errors.hpp"
#include "labavs/labavs.hpp"
#include "labavs/model_io.hpp"
#include "labavs/parallel.hpp"
#include "labavs/tuning.hpp"

namespace labavs::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    // input
    std::string data_path;
    std::string response;
    bool simulate = false;
    std::size_t n = 500;
    std::size_t n_test = 500;
    std::size_t d_extra = 0;
    double noise_sd = 0.3;
    std::uint64_t seed = 1;
    bool test_split = false;

    // model
    std::string method = "hard";
    std::optional<double> lambda;
    std::vector<double> lambda_grid;
    std::optional<double> nn_frac;
    std::optional<double> fixed_h;
    std::optional<double> spacing;
    std::string final_fit = "reduced";
    std::string shrink = "local";
    bool scale = false;
    std::string cv = "kfold";
    std::size_t folds = 5;

    // eval
    std::size_t reps = 1;
    std::vector<std::string> estimators{"LABAVS-A", "LABAVS-B", "LOC1"};

    // output
    std::string model_path;
    std::string out_path;
    std::string summary_path;
    std::string format;
    std::vector<std::size_t> slice;
    bool error_json = false;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

std::string json_num(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    return fmt::format("{:.17g}", v);
}

std::string json_str(const std::string& s) { return nlohmann::json(s).dump(); }

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

// Writes through a sibling temporary so a failed command never leaves a
// half-written file behind.
void write_file(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write '" + path + "'");
        f << content;
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw ConfigError("cannot write '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot write '" + path + "': " + ec.message());
    }
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_file(path, content);
    }
}

void require_distinct(std::initializer_list<std::string> paths) {
    std::set<fs::path> seen;
    for (const auto& p : paths) {
        if (p.empty() || p == "-") continue;
        if (!seen.insert(fs::weakly_canonical(fs::path(p))).second) {
            throw ConfigError("input and output paths must be distinct ('" + p + "' repeats)");
        }
    }
}

SimSpec sim_spec(const Options& o, std::size_t n, std::uint64_t seed) {
    SimSpec spec;
    spec.n = n;
    spec.d_extra = o.d_extra;
    spec.noise_sd = o.noise_sd;
    spec.seed = seed;
    spec.validate();
    return spec;
}

Dataset load_input(const Options& o) {
    if (o.simulate == !o.data_path.empty()) throw ConfigError("give exactly one of --data or --simulate");
    if (o.simulate) return simulate(sim_spec(o, o.n, o.seed));
    return load_csv(o.data_path, o.response);
}

FitOptions fit_options(const Options& o) {
    FitOptions f;
    f.selection.method = parse_selection_method(o.method);
    f.selection.lambda = o.lambda.value_or(o.lambda_grid.empty() ? 0.55 : o.lambda_grid.front());
    if (o.fixed_h && o.nn_frac) throw ConfigError("--bandwidth and --nn-frac are mutually exclusive");
    if (o.fixed_h) {
        f.bandwidth = FixedBandwidth{*o.fixed_h};
    } else {
        f.bandwidth = NearestNeighborBandwidth{o.nn_frac.value_or(0.25)};
    }
    f.spacing = o.spacing;
    f.final_fit = parse_final_fit(o.final_fit);
    f.shrink = parse_shrink_mode(o.shrink);
    f.selection.validate();
    return f;
}

CvProtocol protocol(const Options& o) {
    if (o.cv == "loocv") return CvProtocol::leave_one_out();
    if (o.cv == "kfold") return CvProtocol::k_fold(o.folds, o.seed);
    throw ConfigError("unknown cross-validation protocol '" + o.cv + "'");
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Options& o, std::ostream& out) {
    const SimSpec spec = sim_spec(o, o.n, o.seed);
    const Dataset data = o.test_split ? simulate_test(spec) : simulate(spec);
    if (!o.format.empty() && o.format != "csv") throw ConfigError("simulate writes csv only");
    std::string text = fmt::format("{}\n", fmt::join(data.names(), ","));
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto xi = data.row(i);
        for (double v : xi) text += num(v) + ",";
        text += num(data.y(i)) + "\n";
    }
    emit(o.out_path, text, out);
    return kExitOk;
}

// ---------------------------------------------------------------- fit

std::string fit_summary(const StoredModel& stored, const Options& o, const std::optional<CvReport>& cv) {
    const LabavsModel& m = stored.model;
    const Dataset& data = m.data();
    const std::size_t d = data.d();
    const std::size_t g = m.grid().size();
    std::vector<std::size_t> hits(d, 0);
    std::map<std::string, std::size_t> patterns;
    for (const VarSet s : m.relevant_sets()) {
        for (auto j : s.indices()) ++hits[j];
        ++patterns[s.to_string()];
    }
    std::vector<std::string> names = data.names();
    names.resize(d);
    const double lambda = m.options().selection.lambda;

    if (o.format == "json") {
        std::string s = "{\n";
        s += fmt::format("  \"n\": {},\n  \"d\": {},\n", data.n(), d);
        s += fmt::format("  \"method\": {},\n  \"lambda\": {},\n",
                         json_str(std::string(to_string(m.options().selection.method))), json_num(lambda));
        s += fmt::format("  \"final_fit\": {},\n", json_str(std::string(to_string(m.options().final_fit))));
        s += fmt::format("  \"grid_points\": {},\n  \"grid_spacing\": {},\n", g, json_num(m.grid().spacing()));
        s += fmt::format("  \"fallback_count\": {},\n", m.fallback_count());
        s += "  \"relevance_fraction\": {";
        for (std::size_t j = 0; j < d; ++j) {
            s += fmt::format("{}{}: {}", j ? ", " : "", json_str(names[j]),
                             json_num(static_cast<double>(hits[j]) / static_cast<double>(g)));
        }
        s += "},\n";
        s += fmt::format("  \"distinct_patterns\": {},\n  \"pattern_counts\": {{", patterns.size());
        bool first = true;
        for (const auto& [k, c] : patterns) {
            s += fmt::format("{}{}: {}", first ? "" : ", ", json_str(k), c);
            first = false;
        }
        s += "}";
        if (cv) {
            s += ",\n  \"cv\": [";
            for (std::size_t c = 0; c < cv->candidates.size(); ++c) {
                s += fmt::format("{}{{\"lambda\": {}, \"error\": {}}}", c ? ", " : "",
                                 json_num(cv->candidates[c].lambda), json_num(cv->cv_errors[c]));
            }
            s += "]";
        }
        s += "\n}\n";
        return s;
    }
    if (o.format == "csv") {
        std::string s = "variable,relevance_fraction\n";
        for (std::size_t j = 0; j < d; ++j) {
            s += fmt::format("{},{}\n", csv_cell(names[j]), num(static_cast<double>(hits[j]) / static_cast<double>(g)));
        }
        return s;
    }

    std::string s;
    s += fmt::format("observations: {}  predictors: {}\n", data.n(), d);
    s += fmt::format("selection: {}  lambda: {}  final fit: {}\n", to_string(m.options().selection.method),
                     num(lambda), to_string(m.options().final_fit));
    if (cv) {
        s += "cross-validated lambda:\n";
        for (std::size_t c = 0; c < cv->candidates.size(); ++c) {
            s += fmt::format("  {:>8}  error {}{}\n", num(cv->candidates[c].lambda), num(cv->cv_errors[c]),
                             c == cv->chosen ? "  <- chosen" : "");
        }
    }
    s += fmt::format("grid: {} points, spacing {}", g, num(m.grid().spacing()));
    if (m.fallback_count() > 0) s += fmt::format(", {} borrowed from neighbours", m.fallback_count());
    s += "\nrelevant at grid points:\n";
    for (std::size_t j = 0; j < d; ++j) {
        s += fmt::format("  {:<12} {:6.1f}%\n", names[j], 100.0 * static_cast<double>(hits[j]) / static_cast<double>(g));
    }
    s += fmt::format("distinct relevant-set patterns: {}\n", patterns.size());
    for (const auto& [k, c] : patterns) s += fmt::format("  {:<16} {}\n", k, c);
    return s;
}

int cmd_fit(const Options& o, std::ostream& out) {
    require_distinct({o.data_path, o.out_path, o.summary_path});
    if (o.out_path.empty()) throw ConfigError("fit needs --out for the model file");
    if (o.lambda && !o.lambda_grid.empty()) throw ConfigError("--lambda and --lambda-grid are mutually exclusive");
    if (!o.format.empty() && o.format != "json" && o.format != "csv") throw ConfigError("unknown format '" + o.format + "'");

    Dataset data = load_input(o);
    std::vector<double> scale;
    if (o.scale) {
        ScaledDataset s = scale_unit_variance(data);
        data = std::move(s.data);
        scale = std::move(s.scale);
    }
    FitOptions opts = fit_options(o);

    std::optional<CvReport> cv;
    if (!o.lambda_grid.empty()) {
        std::vector<Candidate> cands;
        for (double l : o.lambda_grid) cands.push_back({l, std::nullopt});
        cv = select_lambda(data, opts, cands, protocol(o));
        opts.selection.lambda = cv->candidates[cv->chosen].lambda;
    }

    StoredModel stored{LabavsModel::fit(std::move(data), opts), std::move(scale)};
    const std::string model_text = serialize_model(stored);
    const std::string summary = fit_summary(stored, o, cv);
    write_file(o.out_path, model_text);
    emit(o.summary_path, summary, out);
    return kExitOk;
}

// ---------------------------------------------------------------- predict

RowMatrix query_matrix(const NumericTable& table, const Dataset& train) {
    const std::size_t d = train.d();
    std::vector<std::size_t> cols;
    const auto& names = train.names();
    if (!names.empty()) {
        for (std::size_t j = 0; j < d; ++j) {
            auto it = std::find(table.header.begin(), table.header.end(), names[j]);
            if (it == table.header.end()) break;
            cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
        }
    }
    if (cols.size() != d) {
        if (table.header.size() != d) {
            throw ConfigError(fmt::format("query file needs the {} predictor columns of the model", d));
        }
        cols.resize(d);
        for (std::size_t j = 0; j < d; ++j) cols[j] = j;
    }
    RowMatrix q(table.values.rows(), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) q.col(static_cast<Eigen::Index>(j)) = table.values.col(static_cast<Eigen::Index>(cols[j]));
    return q;
}

int cmd_predict(const Options& o, std::ostream& out) {
    if (o.model_path.empty() || o.data_path.empty()) throw ConfigError("predict needs --model and --data");
    require_distinct({o.model_path, o.data_path, o.out_path});
    const StoredModel stored = load_model(o.model_path);
    const NumericTable table = read_table(o.data_path);
    const RowMatrix q = query_matrix(table, stored.model.data());
    const std::size_t m = static_cast<std::size_t>(q.rows());
    const std::size_t d = static_cast<std::size_t>(q.cols());

    std::vector<double> pred(m);
    detail::parallel_for(m, [&](std::size_t i) {
        pred[i] = stored.predict(std::span<const double>(q.data() + i * d, d));
    });

    std::vector<std::string> names = stored.model.data().names();
    if (names.empty()) {
        for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
    }
    names.resize(d);

    std::string text;
    if (o.format == "json") {
        text = "{\"predictions\": [";
        for (std::size_t i = 0; i < m; ++i) text += (i ? ", " : "") + json_num(pred[i]);
        text += "]}\n";
    } else if (o.format.empty() || o.format == "csv") {
        for (const auto& nm : names) text += csv_cell(nm) + ",";
        text += "prediction\n";
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < d; ++j) text += num(q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) + ",";
            text += num(pred[i]) + "\n";
        }
    } else {
        throw ConfigError("unknown format '" + o.format + "'");
    }
    emit(o.out_path, text, out);
    return kExitOk;
}

// ---------------------------------------------------------------- map

int cmd_map(const Options& o, std::ostream& out) {
    if (o.model_path.empty()) throw ConfigError("map needs --model");
    require_distinct({o.model_path, o.out_path});
    const StoredModel stored = load_model(o.model_path);
    const LabavsModel& m = stored.model;
    const Grid& grid = m.grid();
    const std::size_t d = grid.dim();

    std::size_t a = 0, b = 1;
    if (!o.slice.empty()) {
        if (o.slice.size() != 2 || o.slice[0] == o.slice[1] || o.slice[0] < 1 || o.slice[1] < 1 ||
            o.slice[0] > d || o.slice[1] > d) {
            throw ConfigError(fmt::format("--slice needs two distinct axes in 1..{}", d));
        }
        a = o.slice[0] - 1;
        b = o.slice[1] - 1;
    } else if (d != 2) {
        throw ConfigError(fmt::format("model has {} predictors; choose two axes with --slice a,b", d));
    }
    if (d < 2) throw ConfigError("map needs at least two predictors");

    // Remaining axes are held at the lattice coordinate nearest their centre.
    std::vector<std::size_t> fixed(d);
    for (std::size_t j = 0; j < d; ++j) fixed[j] = (grid.counts()[j] - 1) / 2;

    auto unit = [&](std::size_t j) { return stored.predictor_scale.empty() ? 1.0 : stored.predictor_scale[j]; };
    const std::string xa = o.slice.empty() ? "x1" : fmt::format("x{}", a + 1);
    const std::string xb = o.slice.empty() ? "x2" : fmt::format("x{}", b + 1);

    std::vector<std::size_t> rows;
    std::vector<std::size_t> idx = fixed;
    for (std::size_t i = 0; i < grid.counts()[a]; ++i) {
        for (std::size_t k = 0; k < grid.counts()[b]; ++k) {
            idx[a] = i;
            idx[b] = k;
            rows.push_back(grid.flat_index(idx));
        }
    }
    std::sort(rows.begin(), rows.end());

    std::string text;
    const bool json = o.format == "json";
    if (!o.format.empty() && o.format != "csv" && !json) throw ConfigError("unknown format '" + o.format + "'");
    if (json) {
        text = "[\n";
    } else {
        text = xa + "," + xb + ",relevant_set";
        for (std::size_t j = 0; j < d; ++j) text += fmt::format(",lower_{0},upper_{0}", j + 1);
        text += "\n";
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t g = rows[r];
        const auto p = grid.point(g);
        const Bandwidth& bw = m.adjusted_bandwidths()[g];
        const std::string set = m.relevant_sets()[g].to_string();
        if (json) {
            std::string lo, hi;
            for (std::size_t j = 0; j < d; ++j) {
                lo += (j ? ", " : "") + json_num(bw.lower[j].value() * unit(j));
                hi += (j ? ", " : "") + json_num(bw.upper[j].value() * unit(j));
            }
            text += fmt::format("  {{{}: {}, {}: {}, \"relevant_set\": {}, \"lower\": [{}], \"upper\": [{}]}}{}\n",
                                json_str(xa), json_num(p[a] * unit(a)), json_str(xb), json_num(p[b] * unit(b)),
                                json_str(set), lo, hi, r + 1 < rows.size() ? "," : "");
        } else {
            text += fmt::format("{},{},\"{}\"", num(p[a] * unit(a)), num(p[b] * unit(b)), set);
            for (std::size_t j = 0; j < d; ++j) {
                text += "," + num(bw.lower[j].value() * unit(j)) + "," + num(bw.upper[j].value() * unit(j));
            }
            text += "\n";
        }
    }
    if (json) text += "]\n";
    emit(o.out_path, text, out);
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct MethodErrors {
    Estimator kind;
    std::vector<double> errors;
};

std::pair<double, std::optional<double>> mean_sd(const std::vector<double>& v) {
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, std::nullopt};
    double ss = 0.0;
    for (double e : v) ss += (e - mean) * (e - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

int cmd_eval(const Options& o, std::ostream& out) {
    require_distinct({o.data_path, o.out_path});
    if (!o.lambda_grid.empty()) throw ConfigError("eval takes a single --lambda");
    if (o.estimators.empty()) throw ConfigError("no estimators given");
    if (!o.format.empty() && o.format != "json" && o.format != "csv") throw ConfigError("unknown format '" + o.format + "'");
    const FitOptions opts = fit_options(o);
    std::vector<MethodErrors> results;
    for (const auto& e : o.estimators) results.push_back({parse_estimator(e), {}});

    std::vector<std::uint64_t> seeds;
    std::string protocol_json;
    if (!o.data_path.empty()) {
        if (o.simulate) throw ConfigError("give exactly one of --data or --simulate");
        Dataset data = load_csv(o.data_path, o.response);
        if (o.scale) data = scale_unit_variance(data).data;
        const CvProtocol proto = protocol(o);
        seeds.push_back(o.seed);
        for (auto& r : results) {
            const CvResult cvr = cross_validate(r.kind, data, opts, proto);
            r.errors.push_back(cvr.mse * static_cast<double>(cvr.predicted));
        }
        protocol_json = fmt::format("{{\"kind\": \"cross_validation\", \"cv\": {}, \"folds\": {}, \"n\": {}, "
                                    "\"metric\": \"sum of held-out squared errors\"}}",
                                    json_str(o.cv), o.cv == "loocv" ? data.n() : o.folds, data.n());
    } else {
        if (o.reps < 1) throw ConfigError("--reps must be at least 1");
        for (std::size_t r = 0; r < o.reps; ++r) seeds.push_back(o.seed + r);
        std::vector<std::vector<double>> err(o.reps, std::vector<double>(results.size()));
        detail::parallel_for(
            o.reps,
            [&](std::size_t r) {
                const Dataset train = simulate(sim_spec(o, o.n, seeds[r]));
                const Dataset test = simulate_test(sim_spec(o, o.n_test, seeds[r]));
                const std::vector<double> truth = truth_values(test);
                for (std::size_t k = 0; k < results.size(); ++k) {
                    const auto pred = fit_and_predict(results[k].kind, opts, train, test.predictors());
                    double sse = 0.0;
                    for (std::size_t i = 0; i < pred.size(); ++i) sse += (pred[i] - truth[i]) * (pred[i] - truth[i]);
                    err[r][k] = sse;
                }
            },
            1);
        for (std::size_t k = 0; k < results.size(); ++k) {
            for (std::size_t r = 0; r < o.reps; ++r) results[k].errors.push_back(err[r][k]);
        }
        protocol_json = fmt::format("{{\"kind\": \"simulation\", \"replicates\": {}, \"n\": {}, \"n_test\": {}, "
                                    "\"d_extra\": {}, \"noise_sd\": {}, "
                                    "\"metric\": \"sum over test points of squared error against the noiseless truth\"}}",
                                    o.reps, o.n, o.n_test, o.d_extra, json_num(o.noise_sd));
    }

    std::string text;
    if (o.format == "csv") {
        text = "method,replicate,seed,error\n";
        for (const auto& r : results) {
            for (std::size_t i = 0; i < r.errors.size(); ++i) {
                text += fmt::format("{},{},{},{}\n", to_string(r.kind), i, seeds[i], num(r.errors[i]));
            }
        }
    } else {
        text = "{\n";
        text += "  \"protocol\": " + protocol_json + ",\n";
        text += fmt::format("  \"config\": {{\"method\": {}, \"lambda\": {}, \"bandwidth\": {}, \"shrink\": {}}},\n",
                            json_str(o.method), json_num(opts.selection.lambda),
                            o.fixed_h ? fmt::format("{{\"fixed\": {}}}", json_num(*o.fixed_h))
                                      : fmt::format("{{\"nn_frac\": {}}}", json_num(o.nn_frac.value_or(0.25))),
                            json_str(o.shrink));
        text += fmt::format("  \"seeds\": [{}],\n", fmt::join(seeds, ", "));
        text += "  \"results\": [\n";
        for (std::size_t k = 0; k < results.size(); ++k) {
            const auto [mean, sd] = mean_sd(results[k].errors);
            std::string errs;
            for (std::size_t i = 0; i < results[k].errors.size(); ++i) errs += (i ? ", " : "") + json_num(results[k].errors[i]);
            text += fmt::format("    {{\"method\": {}, \"mean\": {}, \"sd\": {}, \"errors\": [{}]}}{}\n",
                                json_str(std::string(to_string(results[k].kind))), json_num(mean),
                                sd ? json_num(*sd) : "null", errs, k + 1 < results.size() ? "," : "");
        }
        text += "  ]\n}\n";
    }
    emit(o.out_path, text, out);
    return kExitOk;
}

// ---------------------------------------------------------------- errors

void report_error(std::ostream& err, bool as_json, std::string_view type, const std::string& message, int code,
                  const ParseError* parse = nullptr) {
    if (!as_json) {
        err << "error: " << message << "\n";
        return;
    }
    std::string s = fmt::format("{{\"error\": {{\"type\": {}, \"message\": {}, \"exit_code\": {}", json_str(std::string(type)),
                                json_str(message), code);
    if (parse) s += fmt::format(", \"row\": {}, \"column\": {}", parse->row(), parse->column());
    err << s << "}}\n";
}

void add_model_options(CLI::App* app, Options& o) {
    app->add_option("--method", o.method, "selection rule")->check(CLI::IsMember({"hard", "stepwise", "lasso"}));
    app->add_option("--lambda", o.lambda, "selection threshold (default 0.55)")->check(CLI::NonNegativeNumber);
    app->add_option("--nn-frac", o.nn_frac, "nearest-neighbour fraction for the starting bandwidth (default 0.25)");
    app->add_option("--bandwidth", o.fixed_h, "fixed starting half-width");
    app->add_option("--grid-spacing", o.spacing, "lattice spacing");
    app->add_option("--final-fit", o.final_fit, "reduced (LABAVS-B) or full (LABAVS-A)")
        ->check(CLI::IsMember({"reduced", "full"}));
    app->add_option("--shrink", o.shrink, "bandwidth shrinkage")->check(CLI::IsMember({"local", "global"}));
    app->add_flag("--scale-unit-variance", o.scale, "divide predictors by their standard deviation before fitting");
}

void add_sim_options(CLI::App* app, Options& o) {
    app->add_option("--n", o.n, "observations");
    app->add_option("--d-extra", o.d_extra, "extra pure-noise predictors");
    app->add_option("--noise-sd", o.noise_sd, "noise standard deviation");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Local linear regression with locally adaptive bandwidths and variable selection", "labavs"};
    app.require_subcommand(1);
    app.add_flag("--error-json", o.error_json, "report failures as JSON on stderr");

    auto* sim = app.add_subcommand("simulate", "draw a dataset from the two-dimensional test surface");
    add_sim_options(sim, o);
    sim->add_option("--seed", o.seed, "random seed");
    sim->add_flag("--test", o.test_split, "draw from the held-out test streams");
    sim->add_option("--out", o.out_path, "output CSV (stdout when omitted)");
    sim->add_option("--format", o.format, "csv");

    auto* fit = app.add_subcommand("fit", "fit a model and write it to a file");
    fit->add_option("--data", o.data_path, "training CSV");
    fit->add_option("--response", o.response, "response column name or 0-based index (default: last)");
    fit->add_flag("--simulate", o.simulate, "train on a simulated dataset");
    add_sim_options(fit, o);
    add_model_options(fit, o);
    fit->add_option("--lambda-grid", o.lambda_grid, "candidate thresholds chosen by cross-validation")->delimiter(',');
    fit->add_option("--cv", o.cv, "kfold or loocv")->check(CLI::IsMember({"kfold", "loocv"}));
    fit->add_option("--folds", o.folds, "folds for kfold");
    fit->add_option("--seed", o.seed, "simulation and fold seed");
    fit->add_option("--out", o.out_path, "model file");
    fit->add_option("--summary", o.summary_path, "summary file (stdout when omitted)");
    fit->add_option("--format", o.format, "summary format: text (default), csv or json");

    auto* pred = app.add_subcommand("predict", "predict at the rows of a CSV file");
    pred->add_option("--model", o.model_path, "model file")->required();
    pred->add_option("--data", o.data_path, "query CSV")->required();
    pred->add_option("--out", o.out_path, "output (stdout when omitted)");
    pred->add_option("--format", o.format, "csv or json");

    auto* map = app.add_subcommand("map", "export the relevant sets and bandwidths at the grid points");
    map->add_option("--model", o.model_path, "model file")->required();
    map->add_option("--out", o.out_path, "output (stdout when omitted)");
    map->add_option("--slice", o.slice, "two 1-based axes for models with more than two predictors")->delimiter(',');
    map->add_option("--format", o.format, "csv or json");

    auto* ev = app.add_subcommand("eval", "compare estimators over simulated replicates or by cross-validation");
    ev->add_option("--data", o.data_path, "CSV to cross-validate on (otherwise simulate)");
    ev->add_option("--response", o.response, "response column name or 0-based index");
    ev->add_flag("--simulate", o.simulate, "simulated replicates (the default without --data)");
    add_sim_options(ev, o);
    ev->add_option("--n-test", o.n_test, "test observations per replicate");
    ev->add_option("--reps", o.reps, "replicates");
    add_model_options(ev, o);
    ev->add_option("--lambda-grid", o.lambda_grid, "not supported for eval")->delimiter(',');
    ev->add_option("--estimators", o.estimators, "comma-separated subset of LABAVS-A,LABAVS-B,LOC1")->delimiter(',');
    ev->add_option("--cv", o.cv, "kfold or loocv")->check(CLI::IsMember({"kfold", "loocv"}));
    ev->add_option("--folds", o.folds, "folds for kfold");
    ev->add_option("--seed", o.seed, "first replicate seed");
    ev->add_option("--out", o.out_path, "report (stdout when omitted)");
    ev->add_option("--format", o.format, "json (default) or csv");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, o.error_json, "UsageError", e.what(), kExitConfig);
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o, out);
        if (fit->parsed()) return cmd_fit(o, out);
        if (pred->parsed()) return cmd_predict(o, out);
        if (map->parsed()) return cmd_map(o, out);
        return cmd_eval(o, out);
    } catch (const ParseError& e) {
        report_error(err, o.error_json, "ParseError", e.what(), kExitConfig, &e);
        return kExitConfig;
    } catch (const ConfigError& e) {
        report_error(err, o.error_json, "ConfigError", e.what(), kExitConfig);
        return kExitConfig;
    } catch (const DegenerateNeighborhood& e) {
        report_error(err, o.error_json, "DegenerateNeighborhood", e.what(), kExitNumeric);
        return kExitNumeric;
    } catch (const DegenerateGrid& e) {
        report_error(err, o.error_json, "DegenerateGrid", e.what(), kExitNumeric);
        return kExitNumeric;
    } catch (const ConvergenceError& e) {
        report_error(err, o.error_json, "ConvergenceError", e.what(), kExitNumeric);
        return kExitNumeric;
    } catch (const EvaluationError& e) {
        report_error(err, o.error_json, "EvaluationError", e.what(), kExitNumeric);
        return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        report_error(err, o.error_json, "IOError", e.what(), kExitConfig);
        return kExitConfig;
    } catch (const std::exception& e) {
        report_error(err, o.error_json, "Error", e.what(), kExitNumeric);
        return kExitNumeric;
    }
}

}  // namespace labavs::cli
