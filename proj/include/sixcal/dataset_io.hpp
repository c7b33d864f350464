#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "sixcal/autocalib.hpp"
#include "sixcal/synthetic.hpp"

namespace sixcal {

inline constexpr int kDatasetVersion = 1;

// Human-readable description of the dataset layout, printed with schema
// errors.
extern const char* const kDatasetSchemaText;

// Raised for datasets that do not follow the layout; the message names the
// offending field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"version", "seed", "K", "cameras":[{"R","t"}], "points", "observations":
// [[view, point, u, v], ...], "outlier_mask", "noise_px"}. Observations
// are listed view-major; every (view, point) pair appears once.
nlohmann::json DatasetToJson(const SyntheticDataset& ds);

// Clean projections are recomputed from K, the poses and the points.
// Throws SchemaError.
SyntheticDataset DatasetFromJson(const nlohmann::json& j);

// Throws SchemaError for unparsable text, std::runtime_error for IO.
SyntheticDataset LoadDataset(const std::string& path);
void SaveDataset(const SyntheticDataset& ds, const std::string& path);

nlohmann::json CalibrationToJson(const CalibrationResult& r);

}  // namespace sixcal
