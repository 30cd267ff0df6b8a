#include "qef/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qef/errors.hpp"

namespace qef {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

Matrix read_matrix(const json& doc, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const json& node = doc.at(key);
  if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != rows) {
    std::ostringstream os;
    os << "\"" << key << "\" must be an array of " << rows << " rows";
    parse_fail(os.str());
  }
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = node[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      std::ostringstream os;
      os << "\"" << key << "\" row " << i << " must have " << cols << " entries";
      parse_fail(os.str());
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) {
        std::ostringstream os;
        os << "\"" << key << "\"[" << i << "][" << k << "] is not a number";
        parse_fail(os.str());
      }
      out(i, k) = v.get<double>();
    }
  }
  return out;
}

json write_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

OqhoModel parse_model_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    parse_fail(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("model file must contain a JSON object");
  for (const char* key : {"n", "m", "Theta", "A", "B"}) {
    if (!doc.contains(key)) parse_fail(std::string("missing field \"") + key + "\"");
  }
  if (!doc["n"].is_number_integer() || !doc["m"].is_number_integer()) {
    parse_fail("\"n\" and \"m\" must be integers");
  }
  const long long n = doc["n"].get<long long>();
  const long long m = doc["m"].get<long long>();
  if (n <= 0 || n % 2 != 0) parse_fail("\"n\" must be even and positive");
  if (m <= 0 || m % 2 != 0) parse_fail("\"m\" must be even and positive");

  Matrix theta = read_matrix(doc, "Theta", n, n);
  Matrix a = read_matrix(doc, "A", n, n);
  Matrix b = read_matrix(doc, "B", n, m);
  std::optional<Matrix> c, r, coupling;
  if (doc.contains("C")) c = read_matrix(doc, "C", m, n);
  if (doc.contains("R")) r = read_matrix(doc, "R", n, n);
  if (doc.contains("M")) coupling = read_matrix(doc, "M", m, n);
  try {
    return OqhoModel(std::move(theta), std::move(a), std::move(b), std::move(c), std::move(r),
                     std::move(coupling));
  } catch (const Error& e) {
    parse_fail(e.what());
  }
}

OqhoModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open model file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model_json(buffer.str());
}

std::string model_to_json(const OqhoModel& model, int indent) {
  json doc = json::object();
  doc["n"] = model.n();
  doc["m"] = model.m();
  doc["Theta"] = write_matrix(model.theta());
  doc["A"] = write_matrix(model.a());
  doc["B"] = write_matrix(model.b());
  if (model.c()) doc["C"] = write_matrix(*model.c());
  if (model.energy()) doc["R"] = write_matrix(*model.energy());
  if (model.coupling()) doc["M"] = write_matrix(*model.coupling());
  return doc.dump(indent);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

}  // namespace qef
