#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "labavs/dataset.hpp"
#include "labavs/grid.hpp"
#include "labavs/kernel.hpp"
#include "labavs/localreg.hpp"
#include "labavs/selection.hpp"
#include "labavs/varset.hpp"

namespace labavs {

/// LABAVS-B fits on the relevant variables only; LABAVS-A keeps all of them.
enum class FinalFit { reduced, full };
enum class ShrinkMode { local, global };

std::string_view to_string(FinalFit f);
FinalFit parse_final_fit(std::string_view s);
std::string_view to_string(ShrinkMode m);
ShrinkMode parse_shrink_mode(std::string_view s);

struct FitOptions {
    SelectionConfig selection;
    BandwidthSpec bandwidth = NearestNeighborBandwidth{0.25};
    /// Lattice spacing; defaults to half the smallest starting bandwidth.
    std::optional<double> spacing;
    FinalFit final_fit = FinalFit::reduced;
    ShrinkMode shrink = ShrinkMode::local;
};

/// Selection outcome at every grid point under the starting bandwidth.
struct GridClassification {
    std::vector<SelectionResult> results;
    std::vector<Bandwidth> initial;
    std::vector<bool> degenerate;  ///< true where the result was borrowed from a neighbour
    std::size_t fallback_count = 0;

    std::vector<VarSet> relevant_sets() const;
};

/// Runs the configured selection rule at every grid point. Degenerate points
/// inherit the result of the nearest non-degenerate point.
GridClassification classify_grid(const Dataset& data, const Grid& grid, const BandwidthSpec& spec,
                                 const SelectionConfig& config);

/// Grows the redundant axes of the box `initial` centred at `x`, in steps of
/// the grid spacing, until each direction meets a grid point whose relevant
/// set is not contained in `relevant` (freeze) or would leave `support`
/// (becomes infinite). Axes in `relevant` are returned unchanged.
Bandwidth expand_rectangle(const Grid& grid, std::span<const VarSet> relevant_sets, const BoundingBox& support,
                           std::span<const double> x, const Bandwidth& initial, VarSet relevant);

/// Convenience overload anchored at grid point g.
Bandwidth expand_rectangle(const Grid& grid, std::span<const VarSet> relevant_sets, const BoundingBox& support,
                           std::size_t g, const Bandwidth& initial);

struct VarianceFactor {
    double v;
};

/// sum(w^2) / (sum w)^2 over kernel weights; DegenerateNeighborhood if sum w = 0.
VarianceFactor variance_factor(const Dataset& data, std::span<const double> x, const Bandwidth& bw);
VarianceFactor variance_factor(std::span<const double> weights);

/// Shrinkage multiplier min(1, (m * d_relevant / d)^(1 / exponent_denominator)).
double shrink_factor(double m, std::size_t d_relevant, std::size_t d, double exponent_denominator);

/// Local shrinkage: relevant half-widths become initial * min(1, (M* d'/d)^(1/(d'+4)))
/// with M* = V(x, expanded) / V(x, initial). Expanded axes keep their widths.
Bandwidth shrink_local(const Dataset& data, std::span<const double> x, const Bandwidth& initial,
                       const Bandwidth& expanded, VarSet relevant);

/// Applies a precomputed multiplier to the relevant axes of `expanded`.
Bandwidth shrink_with_factor(const Bandwidth& initial, const Bandwidth& expanded, VarSet relevant, double factor);

/// Fitted pipeline state. Immutable; predict() is safe to call concurrently.
class LabavsModel {
public:
    static LabavsModel fit(Dataset data, const FitOptions& options);

    double predict(std::span<const double> x) const;
    std::vector<double> predict(const RowMatrix& queries) const;

    /// Relevant set and final bandwidth at an arbitrary point (nearest grid
    /// point's relevant set, then expansion and shrinkage anchored at x).
    VarSet relevant_at(std::span<const double> x) const;
    Bandwidth adjusted_bandwidth_at(std::span<const double> x) const;

    const Dataset& data() const noexcept { return data_; }
    const FitOptions& options() const noexcept { return options_; }
    const Grid& grid() const noexcept { return grid_; }
    const BoundingBox& support() const noexcept { return support_; }
    const std::vector<VarSet>& relevant_sets() const noexcept { return relevant_; }
    const std::vector<Bandwidth>& initial_bandwidths() const noexcept { return initial_; }
    const std::vector<Bandwidth>& expanded_bandwidths() const noexcept { return expanded_; }
    const std::vector<Bandwidth>& adjusted_bandwidths() const noexcept { return adjusted_; }
    const std::vector<bool>& borrowed() const noexcept { return borrowed_; }
    std::size_t fallback_count() const noexcept { return fallback_count_; }
    double global_shrink_factor() const noexcept { return global_factor_; }
    std::vector<std::size_t> d_prime() const;

    /// Reassembles a model from persisted parts; expanded/adjusted bandwidths
    /// are recomputed from the relevant sets.
    static LabavsModel restore(Dataset data, const FitOptions& options, Grid grid, std::vector<VarSet> relevant,
                               std::vector<bool> borrowed, std::size_t fallback_count);

private:
    LabavsModel(Dataset data, FitOptions options, Grid grid);
    void finish(std::vector<Bandwidth> initial);
    Bandwidth adjust(std::span<const double> x, const Bandwidth& initial, VarSet relevant) const;

    Dataset data_;
    FitOptions options_;
    Grid grid_;
    BoundingBox support_;
    std::vector<VarSet> relevant_;
    std::vector<bool> borrowed_;
    std::size_t fallback_count_ = 0;
    std::vector<Bandwidth> initial_;
    std::vector<Bandwidth> expanded_;
    std::vector<Bandwidth> adjusted_;
    double global_factor_ = 1.0;
};

/// Spacing used when FitOptions::spacing is unset: h/2 for a fixed bandwidth,
/// half the smallest nearest-neighbour bandwidth over the observations otherwise.
double default_spacing(const Dataset& data, const BandwidthSpec& spec);

}  // namespace labavs
