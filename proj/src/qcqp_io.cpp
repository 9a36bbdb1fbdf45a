#include "sgdpa/qcqp_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "sgdpa/errors.hpp"

namespace sgdpa {
namespace {

using nlohmann::json;

void append_real(std::string& out, double v) {
  if (std::isinf(v)) {
    out += v > 0 ? "\"inf\"" : "\"-inf\"";
    return;
  }
  if (std::isnan(v)) throw ValidationError("cannot serialize NaN");
  out += format_real(v);
}

template <class Range>
void append_array(std::string& out, const Range& values) {
  out += '[';
  bool first = true;
  for (double v : values) {
    if (!first) out += ", ";
    first = false;
    append_real(out, v);
  }
  out += ']';
}

void append_vector(std::string& out, const Vector& v) {
  append_array(out, std::vector<double>(v.data(), v.data() + v.size()));
}

void append_row_major(std::string& out, const Matrix& m) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  append_array(out, values);
}

double real_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("expected a real number, got " + j.dump());
}

Vector vector_from(const json& j, std::size_t expected, const std::string& name) {
  if (!j.is_array()) throw ValidationError(name + " must be an array");
  if (j.size() != expected) {
    throw DimensionError(name + " has " + std::to_string(j.size()) + " entries, expected " +
                         std::to_string(expected));
  }
  Vector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) v(static_cast<Eigen::Index>(i)) = real_from(j[i]);
  return v;
}

Matrix matrix_from(const json& j, std::size_t n, const std::string& name) {
  const Vector flat = vector_from(j, n * n, name);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat(static_cast<Eigen::Index>(r * n + c));
    }
  }
  return m;
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string instance_to_json(const QcqpInstance& instance) {
  instance.validate();
  std::string out;
  out += "{\n  \"n\": " + std::to_string(instance.dimension());
  out += ",\n  \"m\": " + std::to_string(instance.num_constraints());
  out += ",\n  \"Q_f\": ";
  append_row_major(out, instance.Q_f);
  out += ",\n  \"q_f\": ";
  append_vector(out, instance.q_f);
  out += ",\n  \"constraints\": [";
  for (std::size_t i = 0; i < instance.constraints.size(); ++i) {
    const auto& c = instance.constraints[i];
    out += i == 0 ? "\n    {\"Q\": " : ",\n    {\"Q\": ";
    append_row_major(out, c.Q);
    out += ", \"q\": ";
    append_vector(out, c.q);
    out += ", \"b\": ";
    append_real(out, c.b);
    out += '}';
  }
  out += "\n  ],\n  \"simple_set\": {\"kind\": \"" + to_string(instance.simple_set.kind()) + "\"";
  if (instance.simple_set.kind() == SimpleSet::Kind::box) {
    out += ", \"lower\": ";
    append_vector(out, instance.simple_set.lower());
    out += ", \"upper\": ";
    append_vector(out, instance.simple_set.upper());
  }
  out += '}';
  if (instance.start_point || !instance.provenance_json.empty()) {
    out += ",\n  \"metadata\": {";
    bool first = true;
    if (instance.start_point) {
      out += "\"start_point\": ";
      append_vector(out, *instance.start_point);
      first = false;
    }
    if (!instance.provenance_json.empty()) {
      if (!first) out += ", ";
      out += "\"generator\": " + instance.provenance_json;
    }
    out += '}';
  }
  out += "\n}\n";
  return out;
}

QcqpInstance instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed instance document: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("instance document must be an object");

  const auto n = require(doc, "n").get<std::size_t>();
  const auto m = require(doc, "m").get<std::size_t>();
  if (n < 1 || m < 1) throw ValidationError("instance needs n >= 1 and m >= 1");

  QcqpInstance inst;
  inst.Q_f = matrix_from(require(doc, "Q_f"), n, "Q_f");
  inst.q_f = vector_from(require(doc, "q_f"), n, "q_f");

  const auto& cons = require(doc, "constraints");
  if (!cons.is_array() || cons.size() != m) {
    throw DimensionError("constraints must be an array of m entries");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::string name = "constraints[" + std::to_string(i) + "]";
    QuadraticConstraint c;
    c.Q = matrix_from(require(cons[i], "Q"), n, name + ".Q");
    c.q = vector_from(require(cons[i], "q"), n, name + ".q");
    c.b = real_from(require(cons[i], "b"));
    inst.constraints.push_back(std::move(c));
  }

  if (doc.contains("simple_set")) {
    const auto& set = doc.at("simple_set");
    const auto kind = require(set, "kind").get<std::string>();
    if (kind == "nonnegative_orthant") {
      inst.simple_set = SimpleSet::nonnegative_orthant();
    } else if (kind == "full_space") {
      inst.simple_set = SimpleSet::full_space();
    } else if (kind == "box") {
      inst.simple_set = SimpleSet::box(vector_from(require(set, "lower"), n, "lower"),
                                       vector_from(require(set, "upper"), n, "upper"));
    } else {
      throw ValidationError("unknown simple_set kind '" + kind + "'");
    }
  }

  if (doc.contains("metadata")) {
    const auto& meta = doc.at("metadata");
    if (meta.contains("start_point")) inst.start_point = vector_from(meta.at("start_point"), n, "start_point");
    if (meta.contains("generator")) inst.provenance_json = meta.at("generator").dump();
  }
  inst.validate();
  return inst;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void write_instance(const QcqpInstance& instance, const std::filesystem::path& path) {
  write_text_file(path, instance_to_json(instance));
}

QcqpInstance read_instance(const std::filesystem::path& path) {
  return instance_from_json(read_text_file(path));
}

}  // namespace sgdpa
