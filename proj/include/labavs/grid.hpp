#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "labavs/dataset.hpp"

namespace labavs {

/// Regular lattice origin + k * spacing, k_j = 0..counts[j]-1, over the data's
/// bounding box. Flat indices are lexicographic with the first axis slowest.
class Grid {
public:
    Grid(std::vector<double> origin, double spacing, std::vector<std::size_t> counts);

    std::size_t dim() const noexcept { return origin_.size(); }
    std::size_t size() const noexcept { return size_; }
    double spacing() const noexcept { return spacing_; }
    const std::vector<double>& origin() const noexcept { return origin_; }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }

    double coordinate(std::size_t axis, std::size_t k) const {
        return origin_[axis] + static_cast<double>(k) * spacing_;
    }
    std::vector<double> point(std::size_t flat) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;
    std::size_t flat_index(std::span<const std::size_t> multi) const;
    /// All lattice points in flat-index order.
    std::vector<std::vector<double>> points() const;

    /// Closest lattice point; ties resolve to the lexicographically smallest.
    std::size_t nearest(std::span<const double> x) const;

    /// Half-open index range [first, last) of lattice coordinates c along
    /// `axis` with lo <= c <= hi; either end may be made strict.
    std::pair<std::size_t, std::size_t> index_range(std::size_t axis, double lo, bool open_lo, double hi,
                                                    bool open_hi = false) const;

private:
    std::vector<double> origin_;
    double spacing_;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Per-axis minimum and maximum of the predictors.
struct BoundingBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

BoundingBox bounding_box(const Dataset& data);

/// Lattice inclusive of both ends of each axis' range. Throws ConfigError for
/// spacing <= 0 and DegenerateGrid when spacing >= range on every axis.
Grid build_grid(const Dataset& data, double spacing);

}  // namespace labavs
