#pragma once

#include "qendy/baselines.hpp"
#include "qendy/dictionary.hpp"
#include "qendy/dynamics.hpp"
#include "qendy/quadmodel.hpp"
#include "qendy/reduction.hpp"
#include "qendy/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace qendy::io {

using Json = nlohmann::json;

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Header line plus rows, written with format_double.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& rows);
struct CsvTable {
  std::vector<std::string> header;
  Matrix rows;
};
/// Reads a numeric CSV; `has_header` selects whether the first line is a header.
CsvTable read_csv(const std::filesystem::path& path, bool has_header = true);

/// "t,x1,...,xn".
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);
/// "x1,...,xn,dx1,...,dxn"; provenance is not stored in the file.
void write_training_set(const std::filesystem::path& path, const TrainingSet& ts);
TrainingSet read_training_set(const std::filesystem::path& path, Provenance provenance = Provenance::External);
/// Headerless m x D data.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& data);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

/// {state_dim, basis, G?}
Json dictionary_to_json(const Dictionary& d);
Dictionary dictionary_from_json(const Json& j);

/// {kind: "qendy", state_dim, dictionary, A, B, C, G, lambda, m, provenance, force_c_zero}
Json model_to_json(const QuadraticModel& model);
QuadraticModel model_from_json(const Json& j);
/// {kind: "sindy", state_dim, dictionary, Xi}
Json sindy_to_json(const SindyModel& model);
SindyModel sindy_from_json(const Json& j);
/// {kind: "gedmd", state_dim, dictionary, Theta}
Json gedmd_to_json(const GedmdModel& model);
GedmdModel gedmd_from_json(const Json& j);
/// {mean, components, singular_values, spectrum}
Json pca_to_json(const PcaBasis& basis);
PcaBasis pca_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace qendy::io
