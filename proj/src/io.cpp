#include "srwrate/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srwrate/errors.hpp"

namespace srwrate {

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // keep it a JSON float, so "1" round-trips as a number of float type
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace {

void write_string(std::ostringstream& os, const std::string& s) {
  // nlohmann already knows the escaping rules.
  os << Json(s).dump();
}

void write_json(std::ostringstream& os, const Json& j, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (pretty) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        write_string(os, it.key());
        os << (pretty ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << (pretty ? ", " : ",");
        first = false;
        write_json(os, v, -1, 0);
      }
      os << ']';
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent, 0);
  return os.str();
}

Json measure_to_json(const DiscreteMeasure& mu) {
  Json points = Json::array();
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < mu.dim(); ++c) row.push_back(mu.points()(i, c));
    points.push_back(std::move(row));
  }
  Json weights = Json::array();
  for (Eigen::Index i = 0; i < mu.size(); ++i) weights.push_back(mu.weights()[i]);
  Json out;
  out["dim"] = mu.dim();
  out["points"] = std::move(points);
  out["weights"] = std::move(weights);
  return out;
}

DiscreteMeasure measure_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("measure JSON must be an object");
  for (const char* key : {"dim", "points", "weights"}) {
    if (!j.contains(key)) throw InvalidArgument(std::string("measure JSON lacks \"") + key + "\"");
  }
  const Json& jdim = j.at("dim");
  if (!jdim.is_number_integer() || jdim.get<long long>() < 1) {
    throw InvalidArgument("\"dim\" must be a positive integer");
  }
  const auto dim = static_cast<Eigen::Index>(jdim.get<long long>());
  const Json& jp = j.at("points");
  const Json& jw = j.at("weights");
  if (!jp.is_array() || !jw.is_array()) {
    throw InvalidArgument("\"points\" and \"weights\" must be arrays");
  }
  if (jp.size() != jw.size()) throw InvalidArgument("points/weights length mismatch");
  const auto n = static_cast<Eigen::Index>(jp.size());
  Matrix points(n, dim);
  Vector weights(n);
  auto number = [](const Json& v) {
    if (!v.is_number()) throw InvalidArgument("non-numeric entry in measure JSON");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InvalidArgument("measure JSON contains NaN or Inf");
    return x;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = jp[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw InvalidArgument("point " + std::to_string(i) + " does not have length dim");
    }
    for (Eigen::Index c = 0; c < dim; ++c) points(i, c) = number(row[static_cast<std::size_t>(c)]);
    weights[i] = number(jw[static_cast<std::size_t>(i)]);
  }
  return DiscreteMeasure(std::move(points), std::move(weights));
}

DiscreteMeasure load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open measure file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("malformed measure file " + path.string() + ": " + e.what());
  }
  return measure_from_json(j);
}

void save_measure(const DiscreteMeasure& mu, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write measure file " + path.string());
  out << dump_json(measure_to_json(mu)) << '\n';
}

}  // namespace srwrate
