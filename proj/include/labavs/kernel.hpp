#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace labavs {

/// One side of a kernel window along a single axis. Either a positive finite
/// length or infinite; an infinite half-width removes the axis from the kernel.
class HalfWidth {
public:
    /// Throws ConfigError unless value > 0 (NaN rejected, +inf accepted).
    explicit HalfWidth(double value);

    static HalfWidth infinite() { return HalfWidth(std::numeric_limits<double>::infinity()); }

    bool is_infinite() const noexcept { return value_ == std::numeric_limits<double>::infinity(); }
    double value() const noexcept { return value_; }

    friend bool operator==(HalfWidth, HalfWidth) = default;

private:
    double value_;
};

/// Diagonal, possibly asymmetric bandwidth: per-dimension half-widths below
/// (`lower`) and above (`upper`) the estimation point.
struct Bandwidth {
    std::vector<HalfWidth> lower;
    std::vector<HalfWidth> upper;

    static Bandwidth symmetric(std::size_t d, double h);
    static Bandwidth symmetric(std::vector<HalfWidth> widths);

    std::size_t dim() const noexcept { return lower.size(); }
    bool is_symmetric() const;

    /// Half-width that applies to an observation at signed offset `delta`
    /// (observation minus query) along axis j.
    const HalfWidth& side(std::size_t j, double delta) const { return delta < 0.0 ? lower[j] : upper[j]; }

    friend bool operator==(const Bandwidth&, const Bandwidth&) = default;
};

/// Normalised tricube (35/32)(1-u^2)^3 on |u| < 1.
double tricube(double u) noexcept;

/// Scaled one-dimensional factor (1/h) K*(delta/h), or 1 when h is infinite.
double axis_weight(double delta, HalfWidth h) noexcept;

/// Product-kernel weight of observation `x_obs` at query `x_query`.
/// Throws ConfigError on dimension mismatch.
double kernel_weight(std::span<const double> x_query, std::span<const double> x_obs, const Bandwidth& bw);

struct KernelConstants {
    double mu2;  ///< second moment of the univariate kernel
    double rk;   ///< integral of the squared univariate kernel
};

/// Moments of the univariate tricube computed by adaptive Gauss-Kronrod quadrature.
KernelConstants kernel_constants();

}  // namespace labavs
