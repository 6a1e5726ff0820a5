#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace labavs {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x d predictors and an n-vector response. Immutable once built.
class Dataset {
public:
    /// Throws ConfigError on empty input, size mismatch, or non-finite values.
    Dataset(RowMatrix predictors, Eigen::VectorXd response, std::vector<std::string> names = {});

    std::size_t n() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(x_.cols()); }

    const RowMatrix& predictors() const noexcept { return x_; }
    const Eigen::VectorXd& response() const noexcept { return y_; }

    std::span<const double> row(std::size_t i) const {
        return {x_.data() + i * d(), d()};
    }
    double y(std::size_t i) const { return y_[static_cast<Eigen::Index>(i)]; }

    /// Column names for predictors followed by the response; empty when unnamed.
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Copy without row i.
    Dataset without_row(std::size_t i) const;
    /// Copy restricted to the listed rows, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;

private:
    RowMatrix x_;
    Eigen::VectorXd y_;
    std::vector<std::string> names_;
};

}  // namespace labavs
