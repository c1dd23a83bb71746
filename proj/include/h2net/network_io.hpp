#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "h2net/network.hpp"
#include "h2net/reduction.hpp"

namespace h2net {

enum class FileFormat { Json, MatrixMarket };

/// Picks MatrixMarket for ".mtx", Json otherwise.
FileFormat format_from_path(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& M);
nlohmann::json vector_to_json(const Vector& v);
/// `field` names the value in SchemaError messages.
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);
Vector vector_from_json(const nlohmann::json& j, const std::string& field);

/// Schema: {"n", "alpha", "beta", "V_diag", "L", "F", "H"} with an optional
/// explicit damping matrix "D". Matrices are nested row arrays.
nlohmann::json network_to_json(const SecondOrderNetwork& net);
SecondOrderNetwork network_from_json(const nlohmann::json& j);

/// Reduced-model file: the projected matrices, W, gamma and the damping
/// coefficients of the model it came from.
nlohmann::json reduced_to_json(const ReducedModel& red);
ReducedModel reduced_from_json(const nlohmann::json& j);

/// Throws ParseError carrying line and column of the failure.
nlohmann::json parse_json_text(std::string_view text);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Symmetric coordinate format. Only the lower triangle is written.
Matrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, const Matrix& M);

/// A Matrix Market file holds L alone; the network around it is the
/// grounded construction with the given damping coefficients.
SecondOrderNetwork load_network(const std::filesystem::path& path, FileFormat format,
                                double alpha = 0.97, double beta = 0.15);
SecondOrderNetwork load_network(const std::filesystem::path& path);
void save_network(const SecondOrderNetwork& net, const std::filesystem::path& path,
                  FileFormat format);
void save_network(const SecondOrderNetwork& net, const std::filesystem::path& path);

}  // namespace h2net
