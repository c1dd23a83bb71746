#include "h2net/network_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "h2net/errors.hpp"

namespace h2net {

using nlohmann::json;

FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".mtx" ? FileFormat::MatrixMarket : FileFormat::Json;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "field '" + field + "' must be an array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  for (const auto& row : j) {
    if (!row.is_array())
      throw Error(ErrorCode::SchemaError, "field '" + field + "' must be an array of rows");
    if (cols < 0) cols = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != cols)
      throw Error(ErrorCode::SchemaError, "field '" + field + "' has ragged rows");
  }
  Matrix M(rows, std::max<Index>(cols, 0));
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < M.cols(); ++k) {
      const json& x = j[i][k];
      if (!x.is_number())
        throw Error(ErrorCode::SchemaError, "field '" + field + "' has a non-numeric entry");
      M(i, k) = x.get<double>();
    }
  return M;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "field '" + field + "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) {
    if (!j[i].is_number())
      throw Error(ErrorCode::SchemaError, "field '" + field + "' has a non-numeric entry");
    v(i) = j[i].get<double>();
  }
  return v;
}

json network_to_json(const SecondOrderNetwork& net) {
  json j;
  j["n"] = net.nodes();
  j["alpha"] = net.alpha();
  j["beta"] = net.beta();
  j["V_diag"] = vector_to_json(net.v_diag());
  j["L"] = matrix_to_json(net.laplacian());
  j["F"] = matrix_to_json(net.F());
  j["H"] = matrix_to_json(net.H());
  if (net.damping_override()) j["D"] = matrix_to_json(*net.damping_override());
  return j;
}

namespace {

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw Error(ErrorCode::SchemaError, std::string("missing field '") + field + "'");
  return *it;
}

double require_number(const json& j, const char* field) {
  const json& x = require(j, field);
  if (!x.is_number()) throw Error(ErrorCode::SchemaError, std::string("field '") + field + "' must be a number");
  return x.get<double>();
}

}  // namespace

SecondOrderNetwork network_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "network file must be a JSON object");
  const json& jn = require(j, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 1)
    throw Error(ErrorCode::SchemaError, "field 'n' must be a positive integer");
  const Index n = jn.get<Index>();
  const double alpha = require_number(j, "alpha");
  const double beta = require_number(j, "beta");
  Vector v = vector_from_json(require(j, "V_diag"), "V_diag");
  Matrix L = matrix_from_json(require(j, "L"), "L");
  Matrix F = matrix_from_json(require(j, "F"), "F");
  Matrix H = matrix_from_json(require(j, "H"), "H");
  std::optional<Matrix> D;
  if (j.contains("D")) D = matrix_from_json(j["D"], "D");
  if (L.rows() != n || L.cols() != n)
    throw Error(ErrorCode::SchemaError, "field 'L' must be n x n");
  return SecondOrderNetwork(std::move(v), std::move(L), alpha, beta, std::move(F), std::move(H),
                            std::move(D));
}

json reduced_to_json(const ReducedModel& red) {
  json j;
  j["kind"] = "reduced-model";
  j["r"] = red.r;
  j["Kr_hat"] = matrix_to_json(red.Kr_hat);
  j["Dr_hat"] = matrix_to_json(red.Dr_hat);
  j["Fr_hat"] = matrix_to_json(red.Fr_hat);
  j["Hr_hat"] = matrix_to_json(red.Hr_hat);
  j["W"] = matrix_to_json(red.W);
  j["gamma"] = red.gamma;
  j["X1_eigenvalues"] = vector_to_json(red.z);
  if (red.damping)
    j["damping"] = {{"alpha", red.damping->alpha}, {"beta", red.damping->beta}};
  else
    j["damping"] = nullptr;
  return j;
}

ReducedModel reduced_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "reduced-model file must be a JSON object");
  ReducedModel red;
  red.Kr_hat = matrix_from_json(require(j, "Kr_hat"), "Kr_hat");
  red.Dr_hat = matrix_from_json(require(j, "Dr_hat"), "Dr_hat");
  red.Fr_hat = matrix_from_json(require(j, "Fr_hat"), "Fr_hat");
  red.Hr_hat = matrix_from_json(require(j, "Hr_hat"), "Hr_hat");
  red.r = red.Kr_hat.rows();
  if (j.contains("W")) red.W = matrix_from_json(j["W"], "W");
  if (j.contains("X1_eigenvalues")) red.z = vector_from_json(j["X1_eigenvalues"], "X1_eigenvalues");
  red.gamma = j.contains("gamma") && j["gamma"].is_number() ? j["gamma"].get<double>() : 0.0;
  if (j.contains("damping") && j["damping"].is_object())
    red.damping = ProportionalDamping{require_number(j["damping"], "alpha"),
                                      require_number(j["damping"], "beta")};
  const Index r = red.r;
  if (red.Kr_hat.cols() != r || red.Dr_hat.rows() != r || red.Dr_hat.cols() != r ||
      red.Fr_hat.rows() != r || red.Hr_hat.cols() != r)
    throw Error(ErrorCode::SchemaError, "reduced-model matrices have inconsistent sizes");
  return red;
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, "JSON parse error at line " + std::to_string(line) +
                                           ", column " + std::to_string(col) + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Matrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, "Matrix Market line " + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(in, line)) fail("empty input");
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, fmt, field, symmetry;
  header >> banner >> object >> fmt >> field >> symmetry;
  for (auto* s : {&object, &fmt, &field, &symmetry})
    for (auto& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (banner != "%%MatrixMarket" || object != "matrix" || fmt != "coordinate")
    fail("expected '%%MatrixMarket matrix coordinate' header");
  if (field != "real" && field != "integer" && field != "pattern") fail("unsupported field " + field);
  if (symmetry != "symmetric" && symmetry != "general") fail("unsupported symmetry " + symmetry);

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream size(line);
    if (!(size >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0) fail("bad size line");
    break;
  }
  if (rows < 0) fail("missing size line");
  Matrix M = Matrix::Zero(rows, cols);
  long long seen = 0;
  while (seen < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double x = 1.0;
    if (!(entry >> i >> j)) fail("bad entry");
    if (field != "pattern" && !(entry >> x)) fail("missing value");
    if (i < 1 || i > rows || j < 1 || j > cols) fail("index out of range");
    M(i - 1, j - 1) = x;
    if (symmetry == "symmetric") M(j - 1, i - 1) = x;
    ++seen;
  }
  if (seen < nnz) fail("expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen));
  return M;
}

void write_matrix_market(std::ostream& out, const Matrix& M) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  if (linalg::symmetry_defect(M) > 0.0) throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
  long long nnz = 0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = j; i < M.rows(); ++i)
      if (M(i, j) != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << M.rows() << " " << M.cols() << " " << nnz << "\n";
  out << std::setprecision(17);
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = j; i < M.rows(); ++i)
      if (M(i, j) != 0.0) out << i + 1 << " " << j + 1 << " " << M(i, j) << "\n";
}

SecondOrderNetwork load_network(const std::filesystem::path& path, FileFormat format, double alpha,
                                double beta) {
  const std::string text = read_text_file(path);
  if (format == FileFormat::MatrixMarket) {
    std::istringstream in(text);
    return build_grounded_system(read_matrix_market(in), alpha, beta);
  }
  return network_from_json(parse_json_text(text));
}

SecondOrderNetwork load_network(const std::filesystem::path& path) {
  return load_network(path, format_from_path(path));
}

void save_network(const SecondOrderNetwork& net, const std::filesystem::path& path, FileFormat format) {
  if (format == FileFormat::MatrixMarket) {
    std::ostringstream out;
    write_matrix_market(out, net.laplacian());
    write_text_file(path, out.str());
    return;
  }
  write_text_file(path, network_to_json(net).dump(2) + "\n");
}

void save_network(const SecondOrderNetwork& net, const std::filesystem::path& path) {
  save_network(net, path, format_from_path(path));
}

}  // namespace h2net
