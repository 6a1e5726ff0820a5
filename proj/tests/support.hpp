#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "labavs/dataset.hpp"
#include "labavs/kernel.hpp"

namespace testing {

using labavs::Dataset;
using labavs::RowMatrix;

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d, double noise = 0.1) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> e(0.0, noise);
    RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = u(rng);
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            s += std::sin(2.0 * v + static_cast<double>(j));
        }
        y[static_cast<Eigen::Index>(i)] = s + e(rng);
    }
    return Dataset(std::move(x), std::move(y));
}

inline Dataset make_dataset(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    RowMatrix m(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(x.front().size()));
    Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i][j];
        v[static_cast<Eigen::Index>(i)] = y[i];
    }
    return Dataset(std::move(m), std::move(v));
}

// Plain tricube product weight computed from scratch, with an optional 1/h.
inline double oracle_weight(const std::vector<double>& q, std::span<const double> xi, const labavs::Bandwidth& bw,
                            bool scaled) {
    double w = 1.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double delta = xi[j] - q[j];
        const double h = delta < 0 ? bw.lower[j].value() : bw.upper[j].value();
        if (std::isinf(h)) continue;
        const double u = delta / h;
        const double k = std::abs(u) < 1.0 ? 35.0 / 32.0 * std::pow(1.0 - u * u, 3) : 0.0;
        w *= scaled ? k / h : k;
    }
    return w;
}

// Solves A z = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t p = b.size();
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < p; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < p; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> z(p);
    for (std::size_t c = p; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < p; ++k) s -= a[c][k] * z[k];
        z[c] = s / a[c][c];
    }
    return z;
}

// Weighted least squares of y on [1, x_j - q_j for j in cols]; returns
// (intercept, slopes over cols) and the weighted RSS.
struct WlsResult {
    std::vector<double> coef;
    double rss = 0.0;
};

inline WlsResult dense_wls(const Dataset& data, const std::vector<double>& q, const std::vector<double>& w,
                           const std::vector<std::size_t>& cols) {
    const std::size_t p = cols.size() + 1;
    std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    auto design = [&](std::size_t i) {
        std::vector<double> z(p, 1.0);
        const auto xi = data.row(i);
        for (std::size_t c = 0; c < cols.size(); ++c) z[c + 1] = xi[cols[c]] - q[cols[c]];
        return z;
    };
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (w[i] == 0.0) continue;
        const auto z = design(i);
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = 0; c < p; ++c) a[r][c] += w[i] * z[r] * z[c];
            b[r] += w[i] * z[r] * data.y(i);
        }
    }
    WlsResult out;
    out.coef = gauss_solve(a, b);
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (w[i] == 0.0) continue;
        const auto z = design(i);
        double fit = 0.0;
        for (std::size_t r = 0; r < p; ++r) fit += z[r] * out.coef[r];
        out.rss += w[i] * (data.y(i) - fit) * (data.y(i) - fit);
    }
    return out;
}

// Accelerated proximal gradient for
//   sum_i (y_i - g0 - x_i . g)^2 + lambda * |g|_1
// with the intercept unpenalized, on the listed columns.
inline std::vector<double> fista_lasso(const RowMatrix& x, const Eigen::VectorXd& y, const std::vector<std::size_t>& cols,
                                       double lambda, int iters = 200000) {
    const auto n = x.rows();
    const std::size_t p = cols.size();
    // Step size from the largest eigenvalue of 2 [1 X]^T [1 X].
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(p + 1));
    z.col(0).setOnes();
    for (std::size_t c = 0; c < p; ++c) z.col(static_cast<Eigen::Index>(c + 1)) = x.col(static_cast<Eigen::Index>(cols[c]));
    Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p + 1));
    const Eigen::MatrixXd g = z.transpose() * z;
    for (int k = 0; k < 500; ++k) v = (g * v).normalized();
    const double lip = 2.0 * v.dot(g * v) * 1.01;
    const double step = 1.0 / lip;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
    Eigen::VectorXd prev = beta, mom = beta;
    double t = 1.0;
    for (int it = 0; it < iters; ++it) {
        const Eigen::VectorXd grad = -2.0 * z.transpose() * (y - z * mom);
        Eigen::VectorXd next = mom - step * grad;
        for (Eigen::Index c = 1; c < next.size(); ++c) {
            const double thr = step * lambda;
            next[c] = next[c] > thr ? next[c] - thr : (next[c] < -thr ? next[c] + thr : 0.0);
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        mom = next + ((t - 1.0) / tn) * (next - beta);
        prev = beta;
        beta = next;
        t = tn;
        if (it > 100 && (beta - prev).lpNorm<Eigen::Infinity>() < 1e-15) break;
    }
    return std::vector<double>(beta.data(), beta.data() + beta.size());
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("labavs_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing
