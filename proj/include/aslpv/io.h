#pragma once

// JSON and CSV serialization of models, scheduling descriptions and
// trajectories. Matrices are row-major nested arrays.

#include <optional>
#include <string>

#include "json.hpp"

#include "aslpv/models.h"
#include "aslpv/simulation.h"

namespace aslpv {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json matrix_to_json(const Matrix& m);
/// Accepts [[...], ...]; an empty array with a known column count is 0 x cols.
Matrix matrix_from_json(const Json& j, const std::string& what,
                        std::optional<Eigen::Index> cols_if_empty = {});

/// A model document: the system plus its declared second moments p.
struct ModelDocument {
  AsLpvSsa system;
  std::vector<double> p;
  std::optional<Json> provenance;
};

Json model_to_json(const AsLpvSsa& s, const std::vector<double>& p,
                   const std::optional<Json>& provenance = {});
/// ParseError on schema violations, including declared sizes that disagree
/// with the matrices.
ModelDocument model_from_json(const Json& j);

Json scheduling_to_json(const SchedulingSpec& spec);
SchedulingSpec scheduling_from_json(const Json& j);

/// ParseError when the file is missing or not valid JSON.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// Columns t, mu_1.., y_1.., then x_1.. and v_1.. when present.
std::string trajectory_to_csv(const Trajectory& traj);
/// Reads the columns written by trajectory_to_csv; seeds come from a sidecar.
Trajectory trajectory_from_csv(const std::string& text);

Json trajectory_sidecar(const Trajectory& traj, const SchedulingSpec& spec,
                        const std::string& model_hash);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

/// Round-trippable decimal rendering of a double.
std::string format_double(double v);

}  // namespace aslpv
