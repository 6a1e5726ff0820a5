#include "labavs/kernel.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "labavs/errors.hpp"

namespace labavs {

HalfWidth::HalfWidth(double value) : value_(value) {
    if (!(value > 0.0)) {
        throw ConfigError("half-width must be positive, got " + std::to_string(value));
    }
}

Bandwidth Bandwidth::symmetric(std::size_t d, double h) {
    return symmetric(std::vector<HalfWidth>(d, HalfWidth(h)));
}

Bandwidth Bandwidth::symmetric(std::vector<HalfWidth> widths) {
    Bandwidth bw;
    bw.lower = widths;
    bw.upper = std::move(widths);
    return bw;
}

bool Bandwidth::is_symmetric() const {
    return lower == upper;
}

double tricube(double u) noexcept {
    if (!(std::abs(u) < 1.0)) return 0.0;
    const double t = 1.0 - u * u;
    return (35.0 / 32.0) * t * t * t;
}

double axis_weight(double delta, HalfWidth h) noexcept {
    if (h.is_infinite()) return 1.0;
    return tricube(delta / h.value()) / h.value();
}

double kernel_weight(std::span<const double> x_query, std::span<const double> x_obs, const Bandwidth& bw) {
    const std::size_t d = x_query.size();
    if (x_obs.size() != d || bw.lower.size() != d || bw.upper.size() != d) {
        throw ConfigError("kernel_weight: dimension mismatch");
    }
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double delta = x_obs[j] - x_query[j];
        w *= axis_weight(delta, bw.side(j, delta));
        if (w == 0.0) break;
    }
    return w;
}

KernelConstants kernel_constants() {
    using boost::math::quadrature::gauss_kronrod;
    constexpr unsigned max_depth = 30;
    constexpr double tol = 1e-12;
    // The integrands are polynomials on the support, so splitting at 0 is
    // enough for the adaptive rule to converge to machine precision.
    auto integrate = [&](auto f) {
        double err = 0.0;
        return gauss_kronrod<double, 31>::integrate(f, -1.0, 0.0, max_depth, tol, &err) +
               gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, max_depth, tol, &err);
    };
    KernelConstants c{};
    c.mu2 = integrate([](double x) { return x * x * tricube(x); });
    c.rk = integrate([](double x) {
        const double k = tricube(x);
        return k * k;
    });
    return c;
}

}  // namespace labavs
