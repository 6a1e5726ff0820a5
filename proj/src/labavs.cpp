#include "labavs/labavs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "labavs/errors.hpp"
#include "labavs/parallel.hpp"

namespace labavs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge_width(HalfWidth hw) {
    return hw.is_infinite() ? kInf : hw.value();
}

// True if some grid point inside the axis-aligned box [lo, hi] (with the
// listed strict ends) has a relevant variable outside `allowed`.
bool box_has_bad_point(const Grid& grid, std::span<const VarSet> relevant_sets, VarSet allowed,
                       std::span<const double> lo, std::span<const double> hi, std::size_t axis, bool open_lo,
                       bool open_hi) {
    const std::size_t d = grid.dim();
    std::vector<std::size_t> first(d), last(d);
    for (std::size_t k = 0; k < d; ++k) {
        const bool is_axis = k == axis;
        const auto [f, l] = grid.index_range(k, lo[k], is_axis && open_lo, hi[k], is_axis && open_hi);
        if (f >= l) return false;
        first[k] = f;
        last[k] = l;
    }
    std::vector<std::size_t> idx = first;
    while (true) {
        if (!relevant_sets[grid.flat_index(idx)].subset_of(allowed)) return true;
        std::size_t k = d;
        while (k-- > 0) {
            if (++idx[k] < last[k]) break;
            idx[k] = first[k];
        }
        if (k == static_cast<std::size_t>(-1)) return false;
    }
}

Bandwidth bandwidth_from_box(std::span<const double> x, std::span<const double> lo, std::span<const double> hi,
                             const Bandwidth& initial, const std::vector<bool>& moved_lo,
                             const std::vector<bool>& moved_hi) {
    Bandwidth out = initial;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (moved_lo[j]) out.lower[j] = std::isinf(lo[j]) ? HalfWidth::infinite() : HalfWidth(x[j] - lo[j]);
        if (moved_hi[j]) out.upper[j] = std::isinf(hi[j]) ? HalfWidth::infinite() : HalfWidth(hi[j] - x[j]);
    }
    return out;
}

}  // namespace

std::string_view to_string(FinalFit f) {
    return f == FinalFit::reduced ? "reduced" : "full";
}

FinalFit parse_final_fit(std::string_view s) {
    if (s == "reduced") return FinalFit::reduced;
    if (s == "full") return FinalFit::full;
    throw ConfigError("final fit must be 'reduced' or 'full', got '" + std::string(s) + "'");
}

std::string_view to_string(ShrinkMode m) {
    return m == ShrinkMode::local ? "local" : "global";
}

ShrinkMode parse_shrink_mode(std::string_view s) {
    if (s == "local") return ShrinkMode::local;
    if (s == "global") return ShrinkMode::global;
    throw ConfigError("shrink mode must be 'local' or 'global', got '" + std::string(s) + "'");
}

std::vector<VarSet> GridClassification::relevant_sets() const {
    std::vector<VarSet> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(r.relevant);
    return out;
}

namespace {

GridClassification classify_with_initial(const Dataset& data, const Grid& grid, std::vector<Bandwidth> initial,
                                         const SelectionConfig& config) {
    config.validate();
    GridClassification out;
    out.results.resize(grid.size());
    out.degenerate.assign(grid.size(), false);
    std::vector<char> bad(grid.size(), 0);
    detail::parallel_for(grid.size(), [&](std::size_t g) {
        const auto x = grid.point(g);
        try {
            out.results[g] = select_variables(data, x, initial[g], config);
        } catch (const DegenerateNeighborhood&) {
            bad[g] = 1;
        }
    });
    out.initial = std::move(initial);

    std::vector<std::size_t> good;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!bad[g]) good.push_back(g);
    }
    if (good.empty()) throw DegenerateGrid("local selection failed at every grid point");
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!bad[g]) continue;
        const auto p = grid.point(g);
        std::size_t best = good.front();
        double best_dist = kInf;
        for (auto c : good) {
            const auto q = grid.point(c);
            double dist = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) dist += (p[j] - q[j]) * (p[j] - q[j]);
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        out.results[g] = out.results[best];
        out.degenerate[g] = true;
        ++out.fallback_count;
    }
    return out;
}

std::vector<Bandwidth> initial_at_grid(const Dataset& data, const Grid& grid, const BandwidthSpec& spec) {
    std::vector<Bandwidth> initial(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t g) {
        const auto x = grid.point(g);
        initial[g] = initial_bandwidth(data, x, spec);
    });
    return initial;
}

}  // namespace

GridClassification classify_grid(const Dataset& data, const Grid& grid, const BandwidthSpec& spec,
                                 const SelectionConfig& config) {
    validate(spec, data);
    if (grid.dim() != data.d()) throw ConfigError("grid dimension does not match the data");
    return classify_with_initial(data, grid, initial_at_grid(data, grid, spec), config);
}

Bandwidth expand_rectangle(const Grid& grid, std::span<const VarSet> relevant_sets, const BoundingBox& support,
                           std::span<const double> x, const Bandwidth& initial, VarSet relevant) {
    const std::size_t d = grid.dim();
    if (x.size() != d || initial.dim() != d || relevant_sets.size() != grid.size()) {
        throw ConfigError("expand_rectangle: dimension mismatch");
    }
    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        lo[j] = x[j] - edge_width(initial.lower[j]);
        hi[j] = x[j] + edge_width(initial.upper[j]);
    }
    std::vector<bool> moved_lo(d, false), moved_hi(d, false);
    // active[2j] grows the lower edge of axis j, active[2j+1] the upper edge.
    std::vector<bool> active(2 * d, false);
    for (std::size_t j = 0; j < d; ++j) {
        if (relevant.contains(j)) continue;
        active[2 * j] = std::isfinite(lo[j]);
        active[2 * j + 1] = std::isfinite(hi[j]);
    }

    const double step = grid.spacing();
    std::vector<double> slab_lo(d), slab_hi(d);
    bool any = std::find(active.begin(), active.end(), true) != active.end();
    while (any) {
        any = false;
        for (std::size_t j = 0; j < d; ++j) {
            for (int up = 0; up < 2; ++up) {
                const std::size_t dir = 2 * j + static_cast<std::size_t>(up);
                if (!active[dir]) continue;
                slab_lo = lo;
                slab_hi = hi;
                bool leaves_support;
                if (up) {
                    const double next = hi[j] + step;
                    leaves_support = next > support.hi[j];
                    slab_lo[j] = hi[j];
                    slab_hi[j] = leaves_support ? kInf : next;
                    if (box_has_bad_point(grid, relevant_sets, relevant, slab_lo, slab_hi, j, true, false)) {
                        active[dir] = false;
                        continue;
                    }
                    hi[j] = leaves_support ? kInf : next;
                    moved_hi[j] = true;
                } else {
                    const double next = lo[j] - step;
                    leaves_support = next < support.lo[j];
                    slab_lo[j] = leaves_support ? -kInf : next;
                    slab_hi[j] = lo[j];
                    if (box_has_bad_point(grid, relevant_sets, relevant, slab_lo, slab_hi, j, false, true)) {
                        active[dir] = false;
                        continue;
                    }
                    lo[j] = leaves_support ? -kInf : next;
                    moved_lo[j] = true;
                }
                if (leaves_support) {
                    active[dir] = false;
                } else {
                    any = true;
                }
            }
        }
    }
    return bandwidth_from_box(x, lo, hi, initial, moved_lo, moved_hi);
}

Bandwidth expand_rectangle(const Grid& grid, std::span<const VarSet> relevant_sets, const BoundingBox& support,
                           std::size_t g, const Bandwidth& initial) {
    const auto x = grid.point(g);
    return expand_rectangle(grid, relevant_sets, support, x, initial, relevant_sets[g]);
}

VarianceFactor variance_factor(std::span<const double> weights) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double w : weights) {
        sum += w;
        sum_sq += w * w;
    }
    if (!(sum > 0.0)) throw DegenerateNeighborhood("no observation in window", 0);
    return {sum_sq / (sum * sum)};
}

VarianceFactor variance_factor(const Dataset& data, std::span<const double> x, const Bandwidth& bw) {
    return variance_factor(window(data, x, bw).weight);
}

double shrink_factor(double m, std::size_t d_relevant, std::size_t d, double exponent_denominator) {
    if (d_relevant == 0 || d == 0) return 1.0;
    const double base = m * static_cast<double>(d_relevant) / static_cast<double>(d);
    return std::min(1.0, std::pow(base, 1.0 / exponent_denominator));
}

Bandwidth shrink_with_factor(const Bandwidth& initial, const Bandwidth& expanded, VarSet relevant, double factor) {
    Bandwidth out = expanded;
    if (!(factor < 1.0)) return out;
    for (auto j : relevant.indices()) {
        if (!initial.lower[j].is_infinite()) out.lower[j] = HalfWidth(initial.lower[j].value() * factor);
        if (!initial.upper[j].is_infinite()) out.upper[j] = HalfWidth(initial.upper[j].value() * factor);
    }
    return out;
}

Bandwidth shrink_local(const Dataset& data, std::span<const double> x, const Bandwidth& initial,
                       const Bandwidth& expanded, VarSet relevant) {
    const std::size_t d_rel = relevant.size();
    if (d_rel == 0) return expanded;
    double m = 1.0;
    if (!(expanded == initial)) {
        try {
            m = variance_factor(data, x, expanded).v / variance_factor(data, x, initial).v;
        } catch (const DegenerateNeighborhood&) {
            return expanded;
        }
    }
    const double factor = shrink_factor(m, d_rel, data.d(), static_cast<double>(d_rel) + 4.0);
    return shrink_with_factor(initial, expanded, relevant, factor);
}

double default_spacing(const Dataset& data, const BandwidthSpec& spec) {
    if (const auto* fixed = std::get_if<FixedBandwidth>(&spec)) return 0.5 * fixed->h;
    const double frac = std::get<NearestNeighborBandwidth>(spec).frac;
    std::vector<double> h(data.n());
    detail::parallel_for(data.n(), [&](std::size_t i) {
        h[i] = nn_bandwidth(data, data.row(i), frac).lower[0].value();
    });
    return 0.5 * *std::min_element(h.begin(), h.end());
}

LabavsModel::LabavsModel(Dataset data, FitOptions options, Grid grid)
    : data_(std::move(data)), options_(std::move(options)), grid_(std::move(grid)), support_(bounding_box(data_)) {}

LabavsModel LabavsModel::fit(Dataset data, const FitOptions& options) {
    options.selection.validate();
    validate(options.bandwidth, data);
    FitOptions opts = options;
    if (!opts.spacing) opts.spacing = default_spacing(data, opts.bandwidth);
    Grid grid = build_grid(data, *opts.spacing);

    LabavsModel model(std::move(data), opts, std::move(grid));
    std::vector<Bandwidth> initial = initial_at_grid(model.data_, model.grid_, opts.bandwidth);
    double min_h = kInf;
    for (const auto& bw : initial) {
        for (std::size_t j = 0; j < bw.dim(); ++j) min_h = std::min({min_h, bw.lower[j].value(), bw.upper[j].value()});
    }
    if (!(*opts.spacing < min_h)) {
        throw ConfigError("grid spacing " + std::to_string(*opts.spacing) +
                          " must be smaller than the starting bandwidth (" + std::to_string(min_h) + ")");
    }

    GridClassification cls = classify_with_initial(model.data_, model.grid_, std::move(initial), opts.selection);
    model.relevant_ = cls.relevant_sets();
    model.borrowed_ = std::move(cls.degenerate);
    model.fallback_count_ = cls.fallback_count;
    model.finish(std::move(cls.initial));
    return model;
}

LabavsModel LabavsModel::restore(Dataset data, const FitOptions& options, Grid grid, std::vector<VarSet> relevant,
                                 std::vector<bool> borrowed, std::size_t fallback_count) {
    if (relevant.size() != grid.size() || borrowed.size() != grid.size()) {
        throw ConfigError("relevant sets do not match the grid size");
    }
    if (!options.spacing || *options.spacing != grid.spacing()) throw ConfigError("grid spacing mismatch");
    LabavsModel model(std::move(data), options, std::move(grid));
    model.relevant_ = std::move(relevant);
    model.borrowed_ = std::move(borrowed);
    model.fallback_count_ = fallback_count;
    model.finish(initial_at_grid(model.data_, model.grid_, options.bandwidth));
    return model;
}

void LabavsModel::finish(std::vector<Bandwidth> initial) {
    initial_ = std::move(initial);
    const std::size_t count = grid_.size();
    expanded_.assign(count, Bandwidth{});
    detail::parallel_for(count, [&](std::size_t g) {
        expanded_[g] = expand_rectangle(grid_, relevant_, support_, g, initial_[g]);
    });

    global_factor_ = 1.0;
    if (options_.shrink == ShrinkMode::global) {
        std::vector<double> v_adj(count, 0.0), v_init(count, 0.0);
        std::vector<char> ok(count, 0);
        detail::parallel_for(count, [&](std::size_t g) {
            const auto x = grid_.point(g);
            try {
                v_adj[g] = variance_factor(data_, x, expanded_[g]).v;
                v_init[g] = variance_factor(data_, x, initial_[g]).v;
                ok[g] = 1;
            } catch (const DegenerateNeighborhood&) {
            }
        });
        double sum_adj = 0.0, sum_init = 0.0, sum_dprime = 0.0;
        for (std::size_t g = 0; g < count; ++g) {
            sum_dprime += static_cast<double>(relevant_[g].size());
            if (!ok[g]) continue;
            sum_adj += v_adj[g];
            sum_init += v_init[g];
        }
        const double mean_dprime = sum_dprime / static_cast<double>(count);
        if (sum_init > 0.0 && mean_dprime > 0.0) {
            const double m = sum_adj / sum_init;
            global_factor_ = std::min(1.0, std::pow(m * mean_dprime / static_cast<double>(data_.d()), 0.25));
        }
    }

    adjusted_.assign(count, Bandwidth{});
    detail::parallel_for(count, [&](std::size_t g) {
        if (options_.shrink == ShrinkMode::local) {
            const auto x = grid_.point(g);
            adjusted_[g] = shrink_local(data_, x, initial_[g], expanded_[g], relevant_[g]);
        } else {
            adjusted_[g] = shrink_with_factor(initial_[g], expanded_[g], relevant_[g], global_factor_);
        }
    });
}

Bandwidth LabavsModel::adjust(std::span<const double> x, const Bandwidth& initial, VarSet relevant) const {
    const Bandwidth expanded = expand_rectangle(grid_, relevant_, support_, x, initial, relevant);
    if (relevant.empty()) return expanded;
    if (options_.shrink == ShrinkMode::local) return shrink_local(data_, x, initial, expanded, relevant);
    return shrink_with_factor(initial, expanded, relevant, global_factor_);
}

VarSet LabavsModel::relevant_at(std::span<const double> x) const {
    return relevant_[grid_.nearest(x)];
}

Bandwidth LabavsModel::adjusted_bandwidth_at(std::span<const double> x) const {
    if (x.size() != data_.d()) throw ConfigError("query point does not match the model dimension");
    return adjust(x, initial_bandwidth(data_, x, options_.bandwidth), relevant_at(x));
}

double LabavsModel::predict(std::span<const double> x) const {
    if (x.size() != data_.d()) throw ConfigError("query point does not match the model dimension");
    const VarSet relevant = relevant_at(x);
    const Bandwidth bw = adjust(x, initial_bandwidth(data_, x, options_.bandwidth), relevant);
    const VarSet vars = options_.final_fit == FinalFit::full ? VarSet::all(data_.d()) : relevant;
    const LocalFit fit = fit_with_widening(bw, [&](const Bandwidth& b) {
        return vars.empty() ? fit_local_constant(data_, x, b) : fit_local_linear(data_, x, b, vars);
    });
    return fit.intercept;
}

std::vector<double> LabavsModel::predict(const RowMatrix& queries) const {
    if (static_cast<std::size_t>(queries.cols()) != data_.d()) {
        throw ConfigError("query matrix does not match the model dimension");
    }
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    detail::parallel_for(out.size(), [&](std::size_t i) {
        out[i] = predict(std::span<const double>(queries.data() + i * data_.d(), data_.d()));
    });
    return out;
}

std::vector<std::size_t> LabavsModel::d_prime() const {
    std::vector<std::size_t> out;
    out.reserve(relevant_.size());
    for (auto s : relevant_) out.push_back(s.size());
    return out;
}

}  // namespace labavs
