#include "aslpv/io.h"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "aslpv/errors.h"

namespace aslpv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Json& require_key(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

int require_int(const Json& j, const char* key, int min_value) {
  const Json& v = require_key(j, key);
  if (!v.is_number_integer() || v.get<long long>() < min_value) {
    throw ParseError(std::string("field \"") + key +
                     "\" must be an integer >= " + std::to_string(min_value));
  }
  return v.get<int>();
}

std::vector<double> require_reals(const Json& j, const char* key) {
  const Json& v = require_key(j, key);
  if (!v.is_array()) {
    throw ParseError(std::string("field \"") + key + "\" must be an array");
  }
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) {
      throw ParseError(std::string("field \"") + key + "\" must hold numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

MatrixFamily family_from_json(const Json& j, const char* key, int count,
                              Eigen::Index rows, Eigen::Index cols) {
  const Json& v = require_key(j, key);
  if (!v.is_array() || static_cast<int>(v.size()) != count) {
    throw ParseError(std::string("field \"") + key + "\" must list " +
                     std::to_string(count) + " matrices");
  }
  MatrixFamily out;
  for (std::size_t s = 0; s < v.size(); ++s) {
    const std::string what = std::string(key) + "[" + std::to_string(s + 1) + "]";
    Matrix m = matrix_from_json(v[s], what, cols);
    if (m.rows() == 0 && rows == 0) m.resize(0, cols);
    if (m.rows() != rows || m.cols() != cols) {
      throw ParseError(what + " must be " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
    out.push_back(std::move(m));
  }
  return out;
}

Matrix sized_matrix(const Json& j, const char* key, Eigen::Index rows,
                    Eigen::Index cols) {
  Matrix m = matrix_from_json(require_key(j, key), key, cols);
  if (m.rows() == 0 && rows == 0) m.resize(0, cols);
  if (m.rows() != rows || m.cols() != cols) {
    throw ParseError(std::string(key) + " must be " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  return m;
}

Json family_to_json(const MatrixFamily& family) {
  Json out = Json::array();
  for (const Matrix& m : family) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, int line) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("line " + std::to_string(line) + ": bad number \"" +
                     text + "\"");
  }
  return v;
}

// Documents without a version field are read as the current version.
void check_schema_version(const Json& j) {
  const auto it = j.find("schema_version");
  if (it == j.end()) return;
  if (!it->is_number_integer() || it->get<long long>() != kSchemaVersion) {
    throw ParseError("unsupported schema_version " + it->dump() + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what,
                        std::optional<Eigen::Index> cols_if_empty) {
  if (!j.is_array()) throw ParseError(what + " must be a nested array");
  if (j.empty()) return Matrix(0, cols_if_empty.value_or(0));
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()),
           static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(what + " must have rows of equal length");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ParseError(what + " holds a non-number");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j[i][k].get<double>();
    }
  }
  return m;
}

Json model_to_json(const AsLpvSsa& s, const std::vector<double>& p,
                   const std::optional<Json>& provenance) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["pdim"] = s.pdim();
  j["n"] = s.n();
  j["ny"] = s.ny();
  j["m"] = s.m();
  j["A"] = family_to_json(s.A);
  j["K"] = family_to_json(s.K);
  j["C"] = matrix_to_json(s.C);
  j["F"] = matrix_to_json(s.F);
  j["Q"] = family_to_json(s.Q);
  j["p"] = p;
  if (provenance) j["provenance"] = *provenance;
  return j;
}

ModelDocument model_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("model must be a JSON object");
    check_schema_version(j);
    const int pdim = require_int(j, "pdim", 1);
    const int n = require_int(j, "n", 0);
    const int ny = require_int(j, "ny", 1);
    const int m = require_int(j, "m", 0);
    ModelDocument doc;
    AsLpvSsa& s = doc.system;
    s.A = family_from_json(j, "A", pdim, n, n);
    s.K = family_from_json(j, "K", pdim, n, m);
    s.C = sized_matrix(j, "C", ny, n);
    s.F = sized_matrix(j, "F", ny, m);
    s.Q = family_from_json(j, "Q", pdim, m, m);
    doc.p = require_reals(j, "p");
    if (static_cast<int>(doc.p.size()) != pdim) {
      throw ParseError("p must have pdim entries");
    }
    for (double v : doc.p) {
      if (!(v > 0)) throw ParseError("p entries must be positive");
    }
    if (j.contains("provenance")) doc.provenance = j.at("provenance");
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

Json scheduling_to_json(const SchedulingSpec& spec) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["pdim"] = spec.pdim();
  j["family"] = spec.family_name();
  std::visit(Overloaded{
                 [&](const WhiteNoiseUniform& f) { j["bounds"] = f.bounds; },
                 [&](const DiscreteIID& f) {
                   j["probabilities"] = f.probabilities;
                 },
                 [&](const ConstantPlusWhite& f) { j["bounds"] = f.bounds; }},
             spec.family());
  if (spec.alpha()) j["alpha"] = *spec.alpha();
  j["p"] = spec.p();
  return j;
}

SchedulingSpec scheduling_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("scheduling must be a JSON object");
    check_schema_version(j);
    const int pdim = require_int(j, "pdim", 1);
    const Json& family = require_key(j, "family");
    if (!family.is_string()) throw ParseError("family must be a string");
    const std::string name = family.get<std::string>();
    std::optional<std::vector<double>> alpha;
    if (j.contains("alpha")) alpha = require_reals(j, "alpha");

    SchedulingFamily parsed;
    int expected = 0;
    if (name == "white_noise_uniform") {
      const auto bounds = require_reals(j, "bounds");
      expected = static_cast<int>(bounds.size());
      parsed = WhiteNoiseUniform{bounds};
    } else if (name == "discrete_iid") {
      const auto probs = require_reals(j, "probabilities");
      expected = static_cast<int>(probs.size());
      parsed = DiscreteIID{probs};
    } else if (name == "constant_plus_white") {
      const auto bounds = require_reals(j, "bounds");
      expected = static_cast<int>(bounds.size()) + 1;
      parsed = ConstantPlusWhite{bounds};
    } else {
      throw ParseError("unknown scheduling family \"" + name + "\"");
    }
    if (expected != pdim) {
      throw ParseError("scheduling parameters do not match pdim = " +
                       std::to_string(pdim));
    }
    try {
      return SchedulingSpec(parsed, alpha);
    } catch (const DomainError& e) {
      throw ParseError(std::string("scheduling: ") + e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scheduling: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("failed writing " + path);
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t";
  auto header = [&](const char* prefix, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i) {
      out += ",";
      out += prefix;
      out += std::to_string(i);
    }
  };
  header("mu_", traj.mu.cols());
  header("y_", traj.y.cols());
  if (traj.x) header("x_", traj.x->cols());
  if (traj.v) header("v_", traj.v->cols());
  out += "\n";
  auto row = [&](const Matrix& m, Eigen::Index t) {
    for (Eigen::Index i = 0; i < m.cols(); ++i) {
      out += ",";
      out += format_double(m(t, i));
    }
  };
  for (Eigen::Index t = 0; t < traj.y.rows(); ++t) {
    out += std::to_string(t);
    row(traj.mu, t);
    row(traj.y, t);
    if (traj.x) row(*traj.x, t);
    if (traj.v) row(*traj.v, t);
    out += "\n";
  }
  return out;
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto columns = split(line, ',');
  if (columns.empty() || columns[0] != "t") {
    throw ParseError("trajectory CSV must start with a t column");
  }
  // Column groups in order: mu, y, x, v.
  const std::vector<std::string> prefixes = {"mu_", "y_", "x_", "v_"};
  std::vector<int> counts(prefixes.size(), 0);
  std::size_t group = 0;
  for (std::size_t c = 1; c < columns.size(); ++c) {
    while (group < prefixes.size() &&
           columns[c].rfind(prefixes[group], 0) != 0) {
      ++group;
    }
    if (group == prefixes.size() ||
        columns[c] != prefixes[group] + std::to_string(counts[group] + 1)) {
      throw ParseError("unexpected trajectory column \"" + columns[c] + "\"");
    }
    ++counts[group];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw ParseError("trajectory CSV needs mu and y columns");
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(columns.size()) + " cells");
    }
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      values.push_back(parse_double(cells[c], line_no));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("trajectory CSV has no samples");

  const auto T = static_cast<Eigen::Index>(rows.size());
  std::vector<Matrix> blocks;
  int offset = 0;
  for (int count : counts) {
    Matrix block(T, count);
    for (Eigen::Index t = 0; t < T; ++t) {
      for (int i = 0; i < count; ++i) block(t, i) = rows[t][offset + i];
    }
    offset += count;
    blocks.push_back(std::move(block));
  }
  Trajectory traj;
  traj.length = static_cast<int>(T);
  traj.mu = std::move(blocks[0]);
  traj.y = std::move(blocks[1]);
  if (counts[2] > 0) traj.x = std::move(blocks[2]);
  if (counts[3] > 0) traj.v = std::move(blocks[3]);
  return traj;
}

Json trajectory_sidecar(const Trajectory& traj, const SchedulingSpec& spec,
                        const std::string& model_hash) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["T"] = traj.length;
  j["seed"] = traj.seed;
  if (traj.noise_seed) j["noise_seed"] = *traj.noise_seed;
  j["burn_in"] = traj.burn_in;
  j["scheduling"] = scheduling_to_json(spec);
  j["model_sha256"] = model_hash;
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  }
  return out.str();
}

}  // namespace aslpv
