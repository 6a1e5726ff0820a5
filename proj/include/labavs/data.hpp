#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "labavs/dataset.hpp"
#include "labavs/varset.hpp"

namespace labavs {

/// Seeded random stream with platform-independent output: the engine is
/// std::mt19937_64 (fully specified by the standard) and the uniform and
/// normal transforms are implemented here rather than by the library's
/// distributions, whose algorithms are unspecified.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// Standard normal by Box-Muller; the second variate is cached.
    double normal();
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Named sub-streams derived from one user seed. Different names give
/// statistically independent streams for the same seed.
enum class StreamId : std::uint64_t {
    design = 1,
    extra_design = 2,
    noise = 3,
    test_design = 4,
    test_extra_design = 5,
    test_noise = 6,
};

std::uint64_t derive_seed(std::uint64_t seed, StreamId stream);

/// g(x) = x^2 on (0, 0.4], 0.8x - 0.16 above, 0 at or below zero.
double huberised(double x) noexcept;

/// Huberised norm of the positive parts of the first two coordinates.
double example1_truth(double x1, double x2) noexcept;

struct SimSpec {
    std::size_t n = 500;
    std::size_t d_extra = 0;
    double noise_sd = 0.3;
    std::uint64_t seed = 1;

    void validate() const;
};

/// X uniform on [-2, 2]^(2 + d_extra), Y = example1_truth(X1, X2) + N(0, noise_sd^2).
/// The two genuine coordinates, the extra coordinates and the noise come from
/// separate streams, so the response does not depend on d_extra.
Dataset simulate(const SimSpec& spec);

/// Same generator on the test streams of the seed (disjoint from the training draw).
Dataset simulate_test(const SimSpec& spec);

/// Noiseless truth at each row of a dataset's first two predictors.
std::vector<double> truth_values(const Dataset& data);

struct NumericTable {
    std::vector<std::string> header;
    RowMatrix values;
};

/// Header row plus numeric cells. ParseError carries the 1-based row and column.
NumericTable read_table(const std::filesystem::path& path);

/// Comma-separated numeric file with one header row. `response` is a column
/// name, or a 0-based column index when no header matches. Empty selects the
/// last column.
Dataset load_csv(const std::filesystem::path& path, const std::string& response = "");

/// Writes predictors then response. Values use 17 significant digits.
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Predictors divided by their sample standard deviation; returns the divisors.
struct ScaledDataset {
    Dataset data;
    std::vector<double> scale;
};
ScaledDataset scale_unit_variance(const Dataset& data);

/// 64-bit FNV-1a over dimensions and the bit patterns of every value.
std::string dataset_digest(const Dataset& data);

}  // namespace labavs
