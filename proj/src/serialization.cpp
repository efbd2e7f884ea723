#include "cpscoding/serialization.hpp"

#include <fstream>

#include "cpscoding/error.hpp"

namespace cpscoding {

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    fail(ErrorKind::ConfigInvalid, field + ": expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    fail(ErrorKind::ConfigInvalid, field + ": expected a non-empty array of rows");
  }
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(ErrorKind::ConfigInvalid, field + ": row " + std::to_string(r) +
                                         " does not have " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        fail(ErrorKind::ConfigInvalid, field + ": entry (" + std::to_string(r) + ", " +
                                           std::to_string(c) + ") is not a number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) fail(ErrorKind::ConfigInvalid, field + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      fail(ErrorKind::ConfigInvalid, field + ": entry " + std::to_string(i) + " is not a number");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

json series_to_json(const Series& s) {
  json out = json::array();
  for (const auto& v : s) out.push_back(to_json(v));
  return out;
}

Series series_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) fail(ErrorKind::ConfigInvalid, field + ": expected an array of vectors");
  Series s;
  for (std::size_t k = 0; k < j.size(); ++k) {
    s.push_back(vector_from_json(j[k], field + "[" + std::to_string(k) + "]"));
    if (s.back().size() != s.front().size()) {
      fail(ErrorKind::ConfigInvalid, field + ": vectors have different lengths");
    }
  }
  return s;
}

}  // namespace

json to_json(const AttackSequence& a) {
  json j;
  j["y_a"] = series_to_json(a.y_a);
  j["u_a"] = series_to_json(a.u_a);
  j["budget"] = a.budget;
  json meta;
  meta["origin"] = a.meta.origin;
  if (a.meta.eigenvalue) meta["eigenvalue"] = *a.meta.eigenvalue;
  if (a.meta.eigenvector) meta["eigenvector"] = to_json(*a.meta.eigenvector);
  if (a.meta.y_star) meta["y_star"] = to_json(*a.meta.y_star);
  if (a.meta.scale) meta["scale"] = *a.meta.scale;
  meta["phase1_length"] = a.meta.phase1_length;
  if (a.meta.sigma_hat) meta["sigma_hat"] = to_json(*a.meta.sigma_hat);
  j["meta"] = std::move(meta);
  return j;
}

AttackSequence attack_from_json(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("y_a")) {
    fail(ErrorKind::ConfigInvalid, field + ": expected an object with y_a");
  }
  AttackSequence a;
  a.y_a = series_from_json(j.at("y_a"), field + ".y_a");
  if (a.y_a.empty()) fail(ErrorKind::ConfigInvalid, field + ".y_a: empty");
  if (j.contains("u_a")) {
    a.u_a = series_from_json(j.at("u_a"), field + ".u_a");
    if (a.u_a.size() != a.y_a.size()) {
      fail(ErrorKind::ConfigInvalid, field + ".u_a: length differs from y_a");
    }
  } else {
    const int m = j.value("m", 1);
    a.u_a.assign(a.y_a.size(), Vector::Zero(m));
  }
  a.budget = j.value("budget", 0.0);
  if (j.contains("meta")) {
    const json& m = j.at("meta");
    a.meta.origin = m.value("origin", std::string("external"));
    if (m.contains("eigenvalue")) a.meta.eigenvalue = m.at("eigenvalue").get<double>();
    if (m.contains("eigenvector")) a.meta.eigenvector = vector_from_json(m.at("eigenvector"), field + ".meta.eigenvector");
    if (m.contains("y_star")) a.meta.y_star = vector_from_json(m.at("y_star"), field + ".meta.y_star");
    if (m.contains("scale")) a.meta.scale = m.at("scale").get<double>();
    a.meta.phase1_length = m.value("phase1_length", 0);
    if (m.contains("sigma_hat")) a.meta.sigma_hat = matrix_from_json(m.at("sigma_hat"), field + ".meta.sigma_hat");
  }
  return a;
}

json to_json(const CodingMatrix& c) {
  json j;
  j["sigma"] = to_json(c.sigma());
  j["sigma_inv"] = to_json(c.sigma_inv());
  j["created_at"] = c.created_at();
  if (c.provenance() == Provenance::Manual) {
    j["provenance"] = "manual";
  } else {
    j["provenance"] = "givens";
    j["scale"] = c.scale();
    json rots = json::array();
    for (const auto& r : c.rotations()) rots.push_back({{"i", r.i}, {"j", r.j}, {"theta", r.theta}});
    j["rotations"] = std::move(rots);
  }
  return j;
}

CodingMatrix coding_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) fail(ErrorKind::ConfigInvalid, field + ": expected an object");
  const std::string prov = j.value("provenance", std::string("manual"));
  const int created = j.value("created_at", 0);
  if (prov == "givens") {
    if (!j.contains("rotations") || !j.contains("sigma")) {
      fail(ErrorKind::ConfigInvalid, field + ": givens coding needs rotations and sigma");
    }
    std::vector<GivensRotation> rots;
    for (const auto& r : j.at("rotations")) {
      rots.push_back({r.at("i").get<int>(), r.at("j").get<int>(), r.at("theta").get<double>()});
    }
    const int p = static_cast<int>(j.at("sigma").size());
    return CodingMatrix::composed(std::move(rots), p, j.value("scale", 1.0), created);
  }
  if (prov != "manual") fail(ErrorKind::ConfigInvalid, field + ".provenance: unknown value '" + prov + "'");
  if (!j.contains("sigma")) fail(ErrorKind::ConfigInvalid, field + ": missing sigma");
  return CodingMatrix::manual(matrix_from_json(j.at("sigma"), field + ".sigma"), created);
}

json to_json(const KalmanDesign& d) {
  json j;
  j["P"] = to_json(d.P);
  j["K"] = to_json(d.K);
  j["F"] = to_json(d.F);
  j["innovation_cov"] = to_json(d.S);
  j["alpha"] = d.alpha;
  j["confidence"] = d.confidence;
  j["mode"] = d.mode == DetectorMode::InnovationCov ? "innovation_cov" : "state_cov";
  j["literal_fallback"] = d.literal_fallback;
  j["iterations"] = d.iterations;
  j["spectral_radius_F"] = spectral_radius(d.F);
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ConfigInvalid, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path);
  f << j.dump(2) << "\n";
}

}  // namespace cpscoding
