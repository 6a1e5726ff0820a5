#include "labavs/data.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "labavs/errors.hpp"

namespace labavs {

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t seed, StreamId stream) {
    // splitmix64 finaliser over seed and stream id
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double huberised(double x) noexcept {
    if (x <= 0.0) return 0.0;
    if (x <= 0.4) return x * x;
    return 0.8 * x - 0.16;
}

double example1_truth(double x1, double x2) noexcept {
    const double a = std::max(x1, 0.0);
    const double b = std::max(x2, 0.0);
    return huberised(std::sqrt(a * a + b * b));
}

void SimSpec::validate() const {
    if (n < 1) throw ConfigError("simulation needs n >= 1");
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw ConfigError("noise_sd must be positive");
    if (2 + d_extra > VarSet::max_dim) throw ConfigError("too many extra dimensions");
}

namespace {

Dataset generate(const SimSpec& spec, StreamId design, StreamId extra, StreamId noise) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto d = static_cast<Eigen::Index>(2 + spec.d_extra);
    RandomStream design_rng(derive_seed(spec.seed, design));
    RandomStream extra_rng(derive_seed(spec.seed, extra));
    RandomStream noise_rng(derive_seed(spec.seed, noise));

    RowMatrix x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = design_rng.uniform(-2.0, 2.0);
        x(i, 1) = design_rng.uniform(-2.0, 2.0);
        for (Eigen::Index j = 2; j < d; ++j) x(i, j) = extra_rng.uniform(-2.0, 2.0);
        y[i] = example1_truth(x(i, 0), x(i, 1)) + spec.noise_sd * noise_rng.normal();
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
    names.push_back("y");
    return Dataset(std::move(x), std::move(y), std::move(names));
}

}  // namespace

Dataset simulate(const SimSpec& spec) {
    return generate(spec, StreamId::design, StreamId::extra_design, StreamId::noise);
}

Dataset simulate_test(const SimSpec& spec) {
    return generate(spec, StreamId::test_design, StreamId::test_extra_design, StreamId::test_noise);
}

std::vector<double> truth_values(const Dataset& data) {
    if (data.d() < 2) throw ConfigError("truth needs at least two predictors");
    std::vector<double> out(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) out[i] = example1_truth(data.row(i)[0], data.row(i)[1]);
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

NumericTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header row in '" + path.string() + "'", 1, 0);
    NumericTable table;
    table.header = split_line(line);
    for (auto& h : table.header) h = trim(h);
    const std::size_t cols = table.header.size();

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != cols) {
            throw ParseError(fmt::format("row {} has {} cells, expected {}", row_no, cells.size(), cols), row_no, 0);
        }
        std::vector<double> values(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string cell = trim(cells[c]);
            double v = 0.0;
            const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v)) {
                throw ParseError(fmt::format("row {}, column {} ('{}'): non-numeric or missing value '{}'", row_no,
                                             c + 1, table.header[c], cell),
                                 row_no, c + 1);
            }
            values[c] = v;
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("no data rows in '" + path.string() + "'", row_no, 0);

    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < cols; ++c) {
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
    }
    return table;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& response) {
    const NumericTable table = read_table(path);
    const auto& header = table.header;
    const std::size_t cols = header.size();
    if (cols < 2) throw ParseError("need at least two columns", 1, 0);

    std::size_t resp = cols - 1;
    if (!response.empty()) {
        auto it = std::find(header.begin(), header.end(), response);
        if (it != header.end()) {
            resp = static_cast<std::size_t>(it - header.begin());
        } else {
            std::size_t idx = 0;
            const auto [p, ec] = std::from_chars(response.data(), response.data() + response.size(), idx);
            if (ec != std::errc() || p != response.data() + response.size() || idx >= cols) {
                throw ConfigError("unknown response column '" + response + "'");
            }
            resp = idx;
        }
    }

    const Eigen::Index n = table.values.rows();
    RowMatrix x(n, static_cast<Eigen::Index>(cols - 1));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index k = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = table.values(i, static_cast<Eigen::Index>(c));
            if (c == resp) {
                y[i] = v;
            } else {
                x(i, k++) = v;
            }
        }
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) {
        if (c != resp) names.push_back(header[c]);
    }
    names.push_back(header[resp]);
    return Dataset(std::move(x), std::move(y), std::move(names));
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    std::vector<std::string> names = data.names();
    if (names.empty()) {
        for (std::size_t j = 0; j < data.d(); ++j) names.push_back("x" + std::to_string(j + 1));
        names.push_back("y");
    }
    out << fmt::format("{}\n", fmt::join(names, ","));
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (double v : data.row(i)) out << fmt::format("{:.17g},", v);
        out << fmt::format("{:.17g}\n", data.y(i));
    }
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

ScaledDataset scale_unit_variance(const Dataset& data) {
    RowMatrix x = data.predictors();
    std::vector<double> scale(data.d(), 1.0);
    if (data.n() < 2) return {data, scale};
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        const double var = (x.col(j).array() - mean).square().sum() / static_cast<double>(data.n() - 1);
        const double sd = std::sqrt(var);
        if (sd > 0.0) {
            scale[static_cast<std::size_t>(j)] = sd;
            x.col(j) /= sd;
        }
    }
    return {Dataset(std::move(x), data.response(), data.names()), scale};
}

std::string dataset_digest(const Dataset& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    };
    mix(data.n());
    mix(data.d());
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (double v : data.row(i)) mix(std::bit_cast<std::uint64_t>(v));
        mix(std::bit_cast<std::uint64_t>(data.y(i)));
    }
    return fmt::format("fnv1a64:{:016x}", h);
}

}  // namespace labavs
