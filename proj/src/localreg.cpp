#include "labavs/localreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "labavs/errors.hpp"

namespace labavs {

namespace {

constexpr double kMaxConditionNumber = 1e10;

void check_query(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw) {
    if (x_query.size() != data.d() || bw.dim() != data.d() || bw.upper.size() != data.d()) {
        throw ConfigError("query point or bandwidth does not match the data dimension");
    }
}

}  // namespace

Dataset::Dataset(RowMatrix predictors, Eigen::VectorXd response, std::vector<std::string> names)
    : x_(std::move(predictors)), y_(std::move(response)), names_(std::move(names)) {
    if (x_.rows() < 1 || x_.cols() < 1) throw ConfigError("dataset needs at least one row and one predictor");
    if (x_.rows() != y_.size()) throw ConfigError("predictor and response row counts differ");
    if (static_cast<std::size_t>(x_.cols()) > VarSet::max_dim) throw ConfigError("at most 64 predictors supported");
    if (!x_.allFinite() || !y_.allFinite()) throw ConfigError("dataset contains non-finite values");
    if (!names_.empty() && names_.size() != d() + 1) throw ConfigError("column name count must be d + 1");
}

Dataset Dataset::without_row(std::size_t i) const {
    std::vector<std::size_t> rows;
    rows.reserve(n() - 1);
    for (std::size_t r = 0; r < n(); ++r) {
        if (r != i) rows.push_back(r);
    }
    return subset(rows);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    RowMatrix x(static_cast<Eigen::Index>(rows.size()), x_.cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(rows[r]);
        x.row(static_cast<Eigen::Index>(r)) = x_.row(src);
        y[static_cast<Eigen::Index>(r)] = y_[src];
    }
    return Dataset(std::move(x), std::move(y), names_);
}

double Window::total_weight() const {
    return std::accumulate(weight.begin(), weight.end(), 0.0);
}

Window window(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw, WeightScale scale) {
    check_query(data, x_query, bw);
    const std::size_t d = data.d();
    Window win;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto xi = data.row(i);
        double w = 1.0;
        for (std::size_t j = 0; j < d && w > 0.0; ++j) {
            const double delta = xi[j] - x_query[j];
            const HalfWidth h = bw.side(j, delta);
            if (scale == WeightScale::unit && !h.is_infinite()) {
                w *= tricube(delta / h.value());
            } else {
                w *= axis_weight(delta, h);
            }
        }
        if (w > 0.0) {
            win.index.push_back(i);
            win.weight.push_back(w);
        }
    }
    return win;
}

LocalFit fit_local_linear(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw, VarSet active) {
    check_query(data, x_query, bw);
    if (!active.subset_of(VarSet::all(data.d()))) throw ConfigError("active set exceeds the data dimension");

    const Window win = window(data, x_query, bw);
    const auto vars = active.indices();
    const auto p = static_cast<Eigen::Index>(vars.size() + 1);
    const auto m = static_cast<Eigen::Index>(win.size());
    if (m < p) throw DegenerateNeighborhood("too few observations for local linear fit", win.size());

    Eigen::MatrixXd z(m, p);
    Eigen::VectorXd y(m);
    Eigen::VectorXd w(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const std::size_t i = win.index[static_cast<std::size_t>(r)];
        const auto xi = data.row(i);
        z(r, 0) = 1.0;
        for (Eigen::Index c = 1; c < p; ++c) {
            const std::size_t j = vars[static_cast<std::size_t>(c - 1)];
            z(r, c) = xi[j] - x_query[j];
        }
        y[r] = data.y(i);
        w[r] = win.weight[static_cast<std::size_t>(r)];
    }

    Eigen::MatrixXd gram = z.transpose() * w.asDiagonal() * z;
    Eigen::VectorXd rhs = z.transpose() * (w.array() * y.array()).matrix();

    // Jacobi equilibration so the condition estimate reflects geometry, not units.
    Eigen::VectorXd scale = gram.diagonal().cwiseSqrt();
    for (Eigen::Index c = 0; c < p; ++c) {
        if (!(scale[c] > 0.0)) throw DegenerateNeighborhood("variable has no spread in window", win.size());
        scale[c] = 1.0 / scale[c];
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * gram * scale.asDiagonal();
    const Eigen::VectorXd scaled_rhs = scale.asDiagonal() * rhs;

    Eigen::VectorXd coef;
    Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    if (llt.info() == Eigen::Success && llt.rcond() * kMaxConditionNumber > 1.0) {
        coef = llt.solve(scaled_rhs);
    } else {
        const Eigen::MatrixXd a = w.cwiseSqrt().asDiagonal() * z * scale.asDiagonal();
        const Eigen::VectorXd b = w.cwiseSqrt().asDiagonal() * y;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < p) throw DegenerateNeighborhood("rank-deficient local design", win.size());
        coef = qr.solve(b);
    }
    coef = scale.asDiagonal() * coef;

    LocalFit fit;
    fit.intercept = coef[0];
    fit.slopes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.d()));
    for (Eigen::Index c = 1; c < p; ++c) {
        fit.slopes[static_cast<Eigen::Index>(vars[static_cast<std::size_t>(c - 1)])] = coef[c];
    }
    const Eigen::VectorXd resid = y - z * coef;
    fit.rss = (w.array() * resid.array().square()).sum();
    fit.effective_weight_sum = w.sum();
    fit.in_window = win.size();
    return fit;
}

LocalFit fit_local_constant(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw) {
    const Window win = window(data, x_query, bw);
    const double total = win.total_weight();
    if (!(total > 0.0)) throw DegenerateNeighborhood("no observation in window", win.size());

    double mean = 0.0;
    for (std::size_t r = 0; r < win.size(); ++r) mean += win.weight[r] * data.y(win.index[r]);
    mean /= total;
    double rss = 0.0;
    for (std::size_t r = 0; r < win.size(); ++r) {
        const double e = data.y(win.index[r]) - mean;
        rss += win.weight[r] * e * e;
    }

    LocalFit fit;
    fit.intercept = mean;
    fit.slopes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.d()));
    fit.rss = rss;
    fit.effective_weight_sum = total;
    fit.in_window = win.size();
    return fit;
}

VarSet StandardizedNeighborhood::non_degenerate() const {
    VarSet s;
    for (std::size_t j = 0; j < d(); ++j) {
        if (!degenerate(j)) s.insert(j);
    }
    return s;
}

StandardizedNeighborhood standardize(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw) {
    const Window win = window(data, x_query, bw, WeightScale::unit);
    const double total = win.total_weight();
    if (!(total > 0.0)) throw DegenerateNeighborhood("no observation in window", win.size());

    const auto n = static_cast<Eigen::Index>(data.n());
    const auto d = static_cast<Eigen::Index>(data.d());
    StandardizedNeighborhood nb;
    nb.in_window = win.size();
    nb.xbar = Eigen::VectorXd::Zero(d);
    nb.ybar = 0.0;
    for (std::size_t r = 0; r < win.size(); ++r) {
        const auto xi = data.row(win.index[r]);
        for (Eigen::Index j = 0; j < d; ++j) nb.xbar[j] += win.weight[r] * xi[static_cast<std::size_t>(j)];
        nb.ybar += win.weight[r] * data.y(win.index[r]);
    }
    nb.xbar /= total;
    nb.ybar /= total;

    nb.scale = Eigen::VectorXd::Zero(d);
    for (std::size_t r = 0; r < win.size(); ++r) {
        const auto xi = data.row(win.index[r]);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double c = xi[static_cast<std::size_t>(j)] - nb.xbar[j];
            nb.scale[j] += win.weight[r] * c * c;
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        nb.scale[j] = std::sqrt(nb.scale[j]);
        const double local_sd = nb.scale[j] / std::sqrt(total);
        if (local_sd <= 1e-12 * (1.0 + std::abs(nb.xbar[j]))) nb.scale[j] = 0.0;
    }

    nb.xtilde = RowMatrix::Zero(n, d);
    nb.ytilde = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < win.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(win.index[r]);
        const auto xi = data.row(win.index[r]);
        const double root_w = std::sqrt(win.weight[r]);
        for (Eigen::Index j = 0; j < d; ++j) {
            if (nb.scale[j] == 0.0) continue;
            nb.xtilde(i, j) = (xi[static_cast<std::size_t>(j)] - nb.xbar[j]) * root_w / nb.scale[j];
        }
        nb.ytilde[i] = (data.y(win.index[r]) - nb.ybar) * root_w;
    }
    return nb;
}

Bandwidth nn_bandwidth(const Dataset& data, std::span<const double> x_query, double frac) {
    if (x_query.size() != data.d()) throw ConfigError("query point does not match the data dimension");
    if (!(frac > 0.0 && frac <= 1.0)) throw ConfigError("nearest-neighbour fraction must lie in (0, 1]");
    const std::size_t n = data.n();
    const auto k = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
    if (k < data.d() + 2) {
        throw ConfigError("nearest-neighbour fraction covers fewer than d + 2 observations");
    }

    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.row(i);
        double m = 0.0;
        for (std::size_t j = 0; j < data.d(); ++j) m = std::max(m, std::abs(xi[j] - x_query[j]));
        dist[i] = m;
    }
    const double farthest = *std::max_element(dist.begin(), dist.end());
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    const double kth = dist[k - 1];

    // Kernel support is open, so the k-th neighbour needs h strictly above its
    // distance. Coincident points would give h = 0; floor it relative to the
    // data spread instead.
    const double floor = 1e-8 * (farthest > 0.0 ? farthest : 1.0);
    const double h = std::max(std::nextafter(kth, std::numeric_limits<double>::infinity()), floor);
    return Bandwidth::symmetric(data.d(), h);
}

void validate(const BandwidthSpec& spec, const Dataset& data) {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FixedBandwidth>) {
                if (!(s.h > 0.0)) throw ConfigError("fixed bandwidth must be positive");
            } else {
                if (!(s.frac > 0.0 && s.frac <= 1.0)) throw ConfigError("nearest-neighbour fraction must lie in (0, 1]");
                if (std::ceil(s.frac * static_cast<double>(data.n()) - 1e-9) < static_cast<double>(data.d() + 2)) {
                    throw ConfigError("nearest-neighbour fraction covers fewer than d + 2 observations");
                }
            }
        },
        spec);
}

Bandwidth initial_bandwidth(const Dataset& data, std::span<const double> x_query, const BandwidthSpec& spec) {
    if (const auto* fixed = std::get_if<FixedBandwidth>(&spec)) return Bandwidth::symmetric(data.d(), fixed->h);
    return nn_bandwidth(data, x_query, std::get<NearestNeighborBandwidth>(spec).frac);
}

double predict_local_linear(const Dataset& data, std::span<const double> x_query, const BandwidthSpec& spec) {
    const VarSet all = VarSet::all(data.d());
    const LocalFit fit = fit_with_widening(initial_bandwidth(data, x_query, spec), [&](const Bandwidth& bw) {
        return fit_local_linear(data, x_query, bw, all);
    });
    return fit.intercept;
}

}  // namespace labavs
