#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "labavs/labavs.hpp"

namespace labavs {

inline constexpr std::string_view kModelSchema = "labavs-model";
inline constexpr int kModelVersion = 1;

/// A fitted model plus the predictor scaling applied before fitting (empty
/// when the predictors were used as given).
struct StoredModel {
    LabavsModel model;
    std::vector<double> predictor_scale;

    /// Query in original units mapped to the model's coordinates.
    std::vector<double> to_model_units(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return model.predict(to_model_units(x)); }
};

/// Self-describing JSON document: schema id, version, dataset digest,
/// configuration, training data, grid, relevant sets and bandwidths.
std::string serialize_model(const StoredModel& stored);

/// Throws ParseError for malformed documents, unknown schema/version, or a
/// dataset digest that does not match the embedded data.
StoredModel parse_model(std::string_view text);

void save_model(const StoredModel& stored, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

}  // namespace labavs
