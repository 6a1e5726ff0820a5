#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "labavs/dataset.hpp"
#include "labavs/kernel.hpp"
#include "labavs/varset.hpp"

namespace labavs {

/// Observations with strictly positive kernel weight at a query point.
struct Window {
    std::vector<std::size_t> index;
    std::vector<double> weight;

    std::size_t size() const noexcept { return index.size(); }
    double total_weight() const;
};

/// `density` uses the normalized product kernel; `unit` drops the 1/h factors so
/// that a point at the query gets weight K*(0)^d regardless of the window size.
enum class WeightScale { density, unit };

/// Gathers the in-window observations. Weight-0 ties at the window edge are out.
Window window(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw,
              WeightScale scale = WeightScale::density);

struct LocalFit {
    double intercept = 0.0;
    Eigen::VectorXd slopes;  ///< length d, zero for excluded variables
    double effective_weight_sum = 0.0;
    double rss = 0.0;  ///< kernel-weighted residual sum of squares
    std::size_t in_window = 0;
};

/// Weighted least squares with intercept and slopes on `active`, centred at
/// the query. Throws DegenerateNeighborhood when the design is rank deficient.
LocalFit fit_local_linear(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw, VarSet active);

/// Kernel-weighted mean of the response.
LocalFit fit_local_constant(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw);

/// Locally centred, weight-scaled and column-normalised data at a query point.
struct StandardizedNeighborhood {
    RowMatrix xtilde;        ///< n x d; rows outside the window are zero
    Eigen::VectorXd ytilde;  ///< n
    Eigen::VectorXd xbar;
    double ybar = 0.0;
    /// Square root of the weighted sum of squares per column; 0 marks a
    /// column with no local variation (its xtilde column is all zeros).
    Eigen::VectorXd scale;
    std::size_t in_window = 0;

    std::size_t d() const noexcept { return static_cast<std::size_t>(xtilde.cols()); }
    bool degenerate(std::size_t j) const { return scale[static_cast<Eigen::Index>(j)] == 0.0; }
    VarSet non_degenerate() const;
};

/// Throws DegenerateNeighborhood when the total weight is zero.
/// Weights are on the unit scale, so standardized slopes do not shrink as the
/// window widens or the dimension grows.
StandardizedNeighborhood standardize(const Dataset& data, std::span<const double> x_query, const Bandwidth& bw);

/// Symmetric L-infinity nearest-neighbour bandwidth covering ceil(frac*n)
/// observations with positive weight.
Bandwidth nn_bandwidth(const Dataset& data, std::span<const double> x_query, double frac);

/// How the starting bandwidth is chosen at each point.
struct FixedBandwidth {
    double h;
};
struct NearestNeighborBandwidth {
    double frac;
};
using BandwidthSpec = std::variant<FixedBandwidth, NearestNeighborBandwidth>;

void validate(const BandwidthSpec& spec, const Dataset& data);
Bandwidth initial_bandwidth(const Dataset& data, std::span<const double> x_query, const BandwidthSpec& spec);

/// Doubles every finite half-width until the fit succeeds (at most
/// `max_doublings` times). Used by every prediction path.
template <class FitFn>
LocalFit fit_with_widening(Bandwidth bw, FitFn&& fit, int max_doublings = 12);

/// Plain local linear regression on all variables (the LOC1 baseline).
double predict_local_linear(const Dataset& data, std::span<const double> x_query, const BandwidthSpec& spec);

}  // namespace labavs

#include "labavs/localreg_impl.hpp"
