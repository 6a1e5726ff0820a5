#include "labavs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labavs/errors.hpp"

namespace labavs {

namespace {
constexpr std::size_t kMaxGridPoints = 20'000'000;
}

Grid::Grid(std::vector<double> origin, double spacing, std::vector<std::size_t> counts)
    : origin_(std::move(origin)), spacing_(spacing), counts_(std::move(counts)) {
    if (origin_.empty() || origin_.size() != counts_.size()) throw ConfigError("grid origin and counts must match");
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) throw ConfigError("grid spacing must be positive");
    strides_.assign(counts_.size(), 1);
    size_ = 1;
    for (std::size_t j = counts_.size(); j-- > 0;) {
        if (counts_[j] == 0) throw ConfigError("grid axis with zero points");
        strides_[j] = size_;
        if (size_ > kMaxGridPoints / counts_[j]) throw ConfigError("grid too large; increase the spacing");
        size_ *= counts_[j];
    }
}

std::vector<double> Grid::point(std::size_t flat) const {
    std::vector<double> p(dim());
    for (std::size_t j = 0; j < dim(); ++j) p[j] = coordinate(j, (flat / strides_[j]) % counts_[j]);
    return p;
}

std::vector<std::size_t> Grid::multi_index(std::size_t flat) const {
    std::vector<std::size_t> m(dim());
    for (std::size_t j = 0; j < dim(); ++j) m[j] = (flat / strides_[j]) % counts_[j];
    return m;
}

std::size_t Grid::flat_index(std::span<const std::size_t> multi) const {
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dim(); ++j) flat += multi[j] * strides_[j];
    return flat;
}

std::vector<std::vector<double>> Grid::points() const {
    std::vector<std::vector<double>> out;
    out.reserve(size_);
    for (std::size_t g = 0; g < size_; ++g) out.push_back(point(g));
    return out;
}

std::size_t Grid::nearest(std::span<const double> x) const {
    if (x.size() != dim()) throw ConfigError("query point does not match the grid dimension");
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dim(); ++j) {
        const double t = (x[j] - origin_[j]) / spacing_;
        // Round half down so equidistant queries go to the smaller index.
        double k = std::ceil(t - 0.5);
        k = std::clamp(k, 0.0, static_cast<double>(counts_[j] - 1));
        flat += static_cast<std::size_t>(k) * strides_[j];
    }
    return flat;
}

std::pair<std::size_t, std::size_t> Grid::index_range(std::size_t axis, double lo, bool open_lo, double hi,
                                                      bool open_hi) const {
    const std::size_t count = counts_[axis];
    auto below_lo = [&](std::size_t k) {
        const double c = coordinate(axis, k);
        return open_lo ? !(c > lo) : c < lo;
    };
    auto above_hi = [&](std::size_t k) {
        const double c = coordinate(axis, k);
        return open_hi ? !(c < hi) : c > hi;
    };
    std::size_t first = 0;
    if (std::isfinite(lo)) {
        const double t = std::floor((lo - origin_[axis]) / spacing_);
        first = t <= 0.0 ? 0 : std::min(count, static_cast<std::size_t>(t));
        while (first > 0 && !below_lo(first - 1)) --first;
        while (first < count && below_lo(first)) ++first;
    } else if (lo > 0.0) {
        return {count, count};
    }
    std::size_t last = count;
    if (std::isfinite(hi)) {
        const double t = std::ceil((hi - origin_[axis]) / spacing_) + 1.0;
        last = t <= 0.0 ? 0 : std::min(count, static_cast<std::size_t>(t));
        while (last > 0 && above_hi(last - 1)) --last;
        while (last < count && !above_hi(last)) ++last;
    } else if (hi < 0.0) {
        return {0, 0};
    }
    if (last < first) last = first;
    return {first, last};
}

BoundingBox bounding_box(const Dataset& data) {
    BoundingBox box;
    const auto& x = data.predictors();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        box.lo.push_back(x.col(j).minCoeff());
        box.hi.push_back(x.col(j).maxCoeff());
    }
    return box;
}

Grid build_grid(const Dataset& data, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("grid spacing must be positive");
    const BoundingBox box = bounding_box(data);
    std::vector<std::size_t> counts(data.d());
    bool any_span = false;
    for (std::size_t j = 0; j < data.d(); ++j) {
        const double range = box.hi[j] - box.lo[j];
        if (spacing < range) any_span = true;
        const double steps = std::ceil(range / spacing - 1e-9);
        if (steps > static_cast<double>(kMaxGridPoints)) throw ConfigError("grid too large; increase the spacing");
        counts[j] = static_cast<std::size_t>(std::max(0.0, steps)) + 1;
    }
    if (!any_span) throw DegenerateGrid("grid spacing is not smaller than the data range on any axis");
    return Grid(box.lo, spacing, std::move(counts));
}

}  // namespace labavs
