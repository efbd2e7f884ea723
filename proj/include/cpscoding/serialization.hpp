#pragma once

#include <string>

#include <json.hpp>

#include "cpscoding/attack_sequence.hpp"
#include "cpscoding/coding.hpp"
#include "cpscoding/estimation.hpp"
#include "cpscoding/linalg.hpp"

namespace cpscoding {

using json = nlohmann::json;

// Matrices are row-major nested arrays, vectors flat arrays. The `field`
// argument names the value in ConfigInvalid messages.
json to_json(const Matrix& m);
json to_json(const Vector& v);
Matrix matrix_from_json(const json& j, const std::string& field);
Vector vector_from_json(const json& j, const std::string& field);

json to_json(const AttackSequence& a);
AttackSequence attack_from_json(const json& j, const std::string& field = "attack");

json to_json(const CodingMatrix& c);
CodingMatrix coding_from_json(const json& j, const std::string& field = "coding");

json to_json(const KalmanDesign& d);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace cpscoding
