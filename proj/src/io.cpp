#include "qendy/io.hpp"

#include "qendy/error.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace qendy::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw NumericError("could not format number");
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, const fs::path& path, std::size_t line) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InputError(path.string() + ":" + std::to_string(line) + ": '" + t + "' is not a number");
  }
  return v;
}

void expect_json(bool ok, const std::string& what) {
  if (!ok) throw InputError("JSON: " + what);
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InputError("JSON " + what + ": unknown key '" + key + "'");
  }
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& rows) {
  if (!header.empty() && static_cast<Eigen::Index>(header.size()) != rows.cols()) {
    throw InputError("CSV header and row width differ");
  }
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << format_double(rows(r, c));
    out << '\n';
  }
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

CsvTable read_csv(const fs::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::vector<std::vector<double>> values;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (has_header && table.header.empty() && values.empty()) {
      for (const std::string& c : cells) table.header.push_back(trim(c));
      width = cells.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                       " columns, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const std::string& c : cells) row.push_back(parse_cell(c, path, lineno));
    values.push_back(std::move(row));
  }
  table.rows.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];
  }
  return table;
}

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  for (std::size_t i = 1; i <= traj.dim(); ++i) header.push_back("x" + std::to_string(i));
  Matrix rows(traj.states.rows(), traj.states.cols() + 1);
  rows << traj.times, traj.states;
  write_csv(path, header, rows);
}

Trajectory read_trajectory(const fs::path& path) {
  const CsvTable t = read_csv(path, true);
  if (t.header.size() < 2 || t.header[0] != "t") throw InputError(path.string() + ": trajectory header must be t,x1,...");
  Trajectory traj;
  traj.times = t.rows.col(0);
  traj.states = t.rows.rightCols(t.rows.cols() - 1);
  return traj;
}

void write_training_set(const fs::path& path, const TrainingSet& ts) {
  std::vector<std::string> header;
  for (std::size_t i = 1; i <= ts.dim(); ++i) header.push_back("x" + std::to_string(i));
  for (std::size_t i = 1; i <= ts.dim(); ++i) header.push_back("dx" + std::to_string(i));
  Matrix rows(ts.states.rows(), 2 * ts.states.cols());
  rows << ts.states, ts.derivatives;
  write_csv(path, header, rows);
}

TrainingSet read_training_set(const fs::path& path, Provenance provenance) {
  const CsvTable t = read_csv(path, true);
  if (t.header.empty() || t.header.size() % 2 != 0) {
    throw InputError(path.string() + ": training header must be x1,...,xn,dx1,...,dxn");
  }
  const std::size_t n = t.header.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (t.header[i] != "x" + std::to_string(i + 1) || t.header[n + i] != "dx" + std::to_string(i + 1)) {
      throw InputError(path.string() + ": training header must be x1,...,xn,dx1,...,dxn");
    }
  }
  if (t.rows.rows() == 0) throw InputError(path.string() + ": training file has no samples");
  TrainingSet ts;
  ts.states = t.rows.leftCols(static_cast<Eigen::Index>(n));
  ts.derivatives = t.rows.rightCols(static_cast<Eigen::Index>(n));
  ts.provenance = provenance;
  return ts;
}

Matrix read_matrix_csv(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("data file '" + path.string() + "' does not exist");
  Matrix m = read_csv(path, false).rows;
  if (m.rows() == 0) throw InputError(path.string() + ": no data rows");
  return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& data) { write_csv(path, {}, data); }

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  expect_json(j.is_array(), what + " must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = 0;
  if (rows > 0) {
    expect_json(j[0].is_array(), what + " must be a list of rows");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    expect_json(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols, what + " rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      expect_json(v.is_number(), what + " entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  expect_json(j.is_array(), what + " must be a list");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    expect_json(j[i].is_number(), what + " entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json dictionary_to_json(const Dictionary& d) {
  Json basis = Json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    // Keep the user's spelling when it parses back to the same tree.
    std::string text = d.basis()[i].render();
    try {
      if (parse_expr(d.names()[i]) == d.basis()[i]) text = d.names()[i];
    } catch (const SyntaxError&) {
    }
    basis.push_back(text);
  }
  Json j{{"state_dim", d.state_dim()}, {"basis", basis}};
  if (d.full_state_override()) j["G"] = matrix_to_json(*d.full_state_override());
  return j;
}

Dictionary dictionary_from_json(const Json& j) {
  expect_json(j.is_object(), "dictionary must be an object");
  reject_unknown(j, {"state_dim", "basis", "G"}, "dictionary");
  expect_json(j.contains("state_dim") && j["state_dim"].is_number_unsigned(), "dictionary.state_dim must be a positive integer");
  expect_json(j.contains("basis") && j["basis"].is_array(), "dictionary.basis must be a list of strings");
  std::vector<std::string> basis;
  for (const Json& e : j["basis"]) {
    expect_json(e.is_string(), "dictionary.basis must be a list of strings");
    basis.push_back(e.get<std::string>());
  }
  Dictionary d = Dictionary::parse(j["state_dim"].get<std::size_t>(), basis);
  if (j.contains("G")) d = d.with_full_state_override(matrix_from_json(j["G"], "dictionary.G"));
  return d;
}

Json model_to_json(const QuadraticModel& model) {
  const ModelMetadata& meta = model.metadata();
  return Json{{"kind", "qendy"},
              {"state_dim", model.dictionary().state_dim()},
              {"dictionary", dictionary_to_json(model.dictionary())},
              {"A", matrix_to_json(model.a())},
              {"B", matrix_to_json(model.b())},
              {"C", vector_to_json(model.c())},
              {"G", matrix_to_json(model.g())},
              {"lambda", meta.lambda},
              {"m", meta.samples},
              {"provenance", to_string(meta.provenance)},
              {"force_c_zero", meta.force_c_zero}};
}

QuadraticModel model_from_json(const Json& j) {
  expect_json(j.is_object(), "model must be an object");
  reject_unknown(j, {"kind", "state_dim", "dictionary", "A", "B", "C", "G", "lambda", "m", "provenance", "force_c_zero"},
                 "model");
  expect_json(j.value("kind", "") == "qendy", "model.kind must be \"qendy\"");
  for (const char* key : {"dictionary", "A", "B", "C", "G"}) {
    expect_json(j.contains(key), std::string("model is missing '") + key + "'");
  }
  const Dictionary d = dictionary_from_json(j["dictionary"]);
  if (j.contains("state_dim")) expect_json(j["state_dim"] == d.state_dim(), "model.state_dim disagrees with its dictionary");
  ModelMetadata meta;
  meta.lambda = j.value("lambda", 0.0);
  meta.samples = j.value("m", std::size_t{0});
  meta.provenance = provenance_from_string(j.value("provenance", std::string("external")));
  meta.force_c_zero = j.value("force_c_zero", false);
  return QuadraticModel(d, matrix_from_json(j["A"], "model.A"), matrix_from_json(j["B"], "model.B"),
                        vector_from_json(j["C"], "model.C"), matrix_from_json(j["G"], "model.G"), meta);
}

Json sindy_to_json(const SindyModel& model) {
  return Json{{"kind", "sindy"},
              {"state_dim", model.dict.state_dim()},
              {"dictionary", dictionary_to_json(model.dict)},
              {"Xi", matrix_to_json(model.xi)}};
}

SindyModel sindy_from_json(const Json& j) {
  expect_json(j.is_object(), "model must be an object");
  reject_unknown(j, {"kind", "state_dim", "dictionary", "Xi"}, "sindy model");
  expect_json(j.value("kind", "") == "sindy", "model.kind must be \"sindy\"");
  expect_json(j.contains("dictionary") && j.contains("Xi"), "sindy model needs dictionary and Xi");
  SindyModel m{dictionary_from_json(j["dictionary"]), matrix_from_json(j["Xi"], "Xi")};
  expect_json(static_cast<std::size_t>(m.xi.rows()) == m.dict.state_dim() &&
                  static_cast<std::size_t>(m.xi.cols()) == m.dict.size(),
              "Xi must be n x N");
  return m;
}

Json gedmd_to_json(const GedmdModel& model) {
  return Json{{"kind", "gedmd"},
              {"state_dim", model.dict.state_dim()},
              {"dictionary", dictionary_to_json(model.dict)},
              {"Theta", matrix_to_json(model.theta)}};
}

GedmdModel gedmd_from_json(const Json& j) {
  expect_json(j.is_object(), "model must be an object");
  reject_unknown(j, {"kind", "state_dim", "dictionary", "Theta"}, "gedmd model");
  expect_json(j.value("kind", "") == "gedmd", "model.kind must be \"gedmd\"");
  expect_json(j.contains("dictionary") && j.contains("Theta"), "gedmd model needs dictionary and Theta");
  GedmdModel m{dictionary_from_json(j["dictionary"]), matrix_from_json(j["Theta"], "Theta")};
  expect_json(static_cast<std::size_t>(m.theta.rows()) == m.dict.size() && m.theta.rows() == m.theta.cols(),
              "Theta must be N x N");
  return m;
}

Json pca_to_json(const PcaBasis& basis) {
  return Json{{"mean", vector_to_json(basis.mean)},
              {"components", matrix_to_json(basis.components)},
              {"singular_values", vector_to_json(basis.singular_values)},
              {"spectrum", vector_to_json(basis.spectrum)}};
}

PcaBasis pca_from_json(const Json& j) {
  expect_json(j.is_object(), "PCA basis must be an object");
  reject_unknown(j, {"mean", "components", "singular_values", "spectrum"}, "PCA basis");
  PcaBasis b;
  b.mean = vector_from_json(j.at("mean"), "mean");
  b.components = matrix_from_json(j.at("components"), "components");
  b.singular_values = vector_from_json(j.at("singular_values"), "singular_values");
  b.spectrum = j.contains("spectrum") ? vector_from_json(j["spectrum"], "spectrum") : b.singular_values;
  expect_json(b.components.cols() == b.mean.size() && b.components.rows() == b.singular_values.size(),
              "PCA basis dimensions are inconsistent");
  return b;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace qendy::io
