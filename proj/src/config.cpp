#include "degenbill/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace degenbill {

using nlohmann::json;

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"disk", "flat_cylinder", "separable_square",
                                                 "concave_quartic"};
  return names;
}

DomainConfig preset_config(const std::string& name) {
  DomainConfig c;
  c.name = name;
  c.dimension = 2;
  if (name == "disk") {
    c.phi = "0.5*(1 - x1^2 - x2^2)";
    c.bbox_lower = {-1.5, -1.5};
    c.bbox_upper = {1.5, 1.5};
    c.so_invariant = true;
  } else if (name == "concave_quartic") {
    c.phi = "0.5*(1 - x1^2 - x2^2 - 0.1*x1^4)";
    c.bbox_lower = {-1.5, -1.5};
    c.bbox_upper = {1.5, 1.5};
  } else if (name == "separable_square") {
    c.phi = "(1 - x1^2)*(1 - x2^2)/(2*(2 - x1^2 - x2^2))";
    c.bbox_lower = {-1.2, -1.2};
    c.bbox_upper = {1.2, 1.2};
    c.separable = {"(1 - x1^2)/2", "(1 - x2^2)/2"};
  } else if (name == "flat_cylinder") {
    // G = (ds^2 + dq^2)/s on R/(2 pi) x (0, inf)
    c.phi = "x2";
    c.boundary.kind = BoundarySpec::Kind::PeriodicStrip;
    c.boundary.period = 2.0 * std::numbers::pi;
    c.bbox_lower = {-1e6, -1.0};
    c.bbox_upper = {1e6, 10.0};
    c.collar_threshold = 0.05;
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  return c;
}

namespace {

template <class T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "has the wrong type");
  }
}

std::vector<double> get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    v.push_back(j[i].get<double>());
  }
  return v;
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

DomainConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
  reject_unknown(j, "", {"preset", "name", "dimension", "metric", "phi", "boundary", "bbox", "collar",
                         "integrator", "flags"});
  DomainConfig c;
  bool have_preset = false;
  if (j.contains("preset")) {
    c = preset_config(get_as<std::string>(j["preset"], "preset"));
    have_preset = true;
  }
  if (j.contains("name")) c.name = get_as<std::string>(j["name"], "name");
  if (j.contains("dimension")) {
    c.dimension = get_as<int>(j["dimension"], "dimension");
    if (c.dimension < 1 || c.dimension > kMaxDim)
      throw ConfigError("dimension", "must be between 1 and " + std::to_string(kMaxDim));
  }
  if (j.contains("phi")) {
    const json& p = j["phi"];
    if (p.is_string()) {
      c.phi = p.get<std::string>();
    } else if (p.is_object() && p.contains("preset")) {
      const DomainConfig base = preset_config(get_as<std::string>(p["preset"], "phi.preset"));
      const int dim = c.dimension;
      const auto lo = c.bbox_lower, hi = c.bbox_upper;
      const std::string name = c.name;
      const bool keep_box = !lo.empty();
      c = base;
      c.dimension = dim;
      if (keep_box && j.contains("bbox")) {
        c.bbox_lower = lo;
        c.bbox_upper = hi;
      }
      if (j.contains("name")) c.name = name;
    } else {
      throw ConfigError("phi", "expected an expression string or {\"preset\": name}");
    }
  } else if (!have_preset) {
    throw ConfigError("phi", "missing");
  }
  if (j.contains("metric")) {
    const json& m = j["metric"];
    if (m.is_string()) {
      if (m.get<std::string>() != "euclidean") throw ConfigError("metric", "unknown metric kind");
      c.metric_kind = MetricKind::Euclidean;
      c.metric_entries.clear();
    } else if (m.is_object()) {
      reject_unknown(m, "metric", {"kind", "entries"});
      const std::string kind = m.contains("kind") ? get_as<std::string>(m["kind"], "metric.kind") : "";
      c.metric_entries.clear();
      if (kind == "euclidean") {
        c.metric_kind = MetricKind::Euclidean;
      } else if (kind == "diagonal") {
        c.metric_kind = MetricKind::Diagonal;
        if (!m.contains("entries") || !m["entries"].is_array())
          throw ConfigError("metric.entries", "expected an array of expressions");
        for (std::size_t i = 0; i < m["entries"].size(); ++i)
          c.metric_entries.push_back(
              get_as<std::string>(m["entries"][i], "metric.entries[" + std::to_string(i) + "]"));
      } else if (kind == "general") {
        c.metric_kind = MetricKind::General;
        if (!m.contains("entries") || !m["entries"].is_array())
          throw ConfigError("metric.entries", "expected an array of rows");
        const json& rows = m["entries"];
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const std::string rp = "metric.entries[" + std::to_string(i) + "]";
          if (!rows[i].is_array()) throw ConfigError(rp, "expected a row of expressions");
          for (std::size_t k = 0; k < rows[i].size(); ++k)
            c.metric_entries.push_back(
                get_as<std::string>(rows[i][k], rp + "[" + std::to_string(k) + "]"));
        }
      } else {
        throw ConfigError("metric.kind", "must be euclidean, diagonal or general");
      }
    } else {
      throw ConfigError("metric", "expected a string or object");
    }
  }
  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    if (!b.is_object()) throw ConfigError("boundary", "expected an object");
    reject_unknown(b, "boundary", {"kind", "center", "period"});
    const std::string kind = b.contains("kind") ? get_as<std::string>(b["kind"], "boundary.kind") : "star";
    if (kind == "star") {
      c.boundary.kind = BoundarySpec::Kind::Star;
      if (b.contains("center")) {
        const auto v = get_vector(b["center"], "boundary.center");
        if (v.size() != 2) throw ConfigError("boundary.center", "expected 2 components");
        c.boundary.center = Vec(2);
        c.boundary.center << v[0], v[1];
      }
    } else if (kind == "periodic_strip") {
      c.boundary.kind = BoundarySpec::Kind::PeriodicStrip;
      if (b.contains("period")) c.boundary.period = get_as<double>(b["period"], "boundary.period");
      if (!(c.boundary.period > 0.0)) throw ConfigError("boundary.period", "must be positive");
    } else {
      throw ConfigError("boundary.kind", "must be star or periodic_strip");
    }
  }
  if (j.contains("bbox")) {
    const json& b = j["bbox"];
    if (!b.is_object()) throw ConfigError("bbox", "expected an object");
    reject_unknown(b, "bbox", {"lower", "upper"});
    if (b.contains("lower")) c.bbox_lower = get_vector(b["lower"], "bbox.lower");
    if (b.contains("upper")) c.bbox_upper = get_vector(b["upper"], "bbox.upper");
  }
  if (j.contains("collar")) {
    const json& b = j["collar"];
    if (!b.is_object()) throw ConfigError("collar", "expected an object");
    reject_unknown(b, "collar", {"phi_threshold"});
    if (b.contains("phi_threshold")) {
      c.collar_threshold = get_as<double>(b["phi_threshold"], "collar.phi_threshold");
      if (!(c.collar_threshold > 0.0)) throw ConfigError("collar.phi_threshold", "must be positive");
    }
  }
  if (j.contains("integrator")) {
    const json& b = j["integrator"];
    if (!b.is_object()) throw ConfigError("integrator", "expected an object");
    reject_unknown(b, "integrator", {"tol", "max_time"});
    if (b.contains("tol")) c.integrator.tol = get_as<double>(b["tol"], "integrator.tol");
    if (b.contains("max_time")) c.integrator.max_time = get_as<double>(b["max_time"], "integrator.max_time");
    if (!(c.integrator.tol > 0.0 && c.integrator.tol < 1e-2))
      throw ConfigError("integrator.tol", "must lie in (0, 1e-2)");
    if (!(c.integrator.max_time > 0.0)) throw ConfigError("integrator.max_time", "must be positive");
  }
  if (j.contains("flags")) {
    const json& b = j["flags"];
    if (!b.is_object()) throw ConfigError("flags", "expected an object");
    reject_unknown(b, "flags", {"so_invariant", "separable"});
    if (b.contains("so_invariant")) c.so_invariant = get_as<bool>(b["so_invariant"], "flags.so_invariant");
    if (b.contains("separable")) {
      c.separable.clear();
      const json& s = b["separable"];
      if (!s.is_array()) throw ConfigError("flags.separable", "expected an array of expressions");
      for (std::size_t i = 0; i < s.size(); ++i)
        c.separable.push_back(get_as<std::string>(s[i], "flags.separable[" + std::to_string(i) + "]"));
    }
  }
  return c;
}

FieldExpr parse_field(const std::string& text, int n, const std::string& path) {
  try {
    return parse_expression(text, n);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

DomainConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return from_json(j);
}

DomainConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::shared_ptr<const Domain> build_domain(const DomainConfig& c) {
  const int n = c.dimension;
  if (c.phi.empty()) throw ConfigError("phi", "missing");
  const FieldExpr phi = parse_field(c.phi, n, "phi");

  MetricField metric = MetricField::euclidean(n);
  if (c.metric_kind == MetricKind::Diagonal) {
    if (static_cast<int>(c.metric_entries.size()) != n)
      throw ConfigError("metric.entries", "diagonal metric needs " + std::to_string(n) + " entries");
    std::vector<FieldExpr> e;
    for (int i = 0; i < n; ++i)
      e.push_back(parse_field(c.metric_entries[i], n, "metric.entries[" + std::to_string(i) + "]"));
    metric = MetricField::diagonal(std::move(e));
  } else if (c.metric_kind == MetricKind::General) {
    if (static_cast<int>(c.metric_entries.size()) != n * n)
      throw ConfigError("metric.entries", "general metric needs an n x n array");
    std::vector<FieldExpr> e;
    for (int i = 0; i < n * n; ++i)
      e.push_back(parse_field(c.metric_entries[i], n,
                              "metric.entries[" + std::to_string(i / n) + "][" + std::to_string(i % n) + "]"));
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k)
        if (!(e[i * n + k] == e[k * n + i]))
          throw ConfigError("metric.entries", "general metric must be symmetric");
    metric = MetricField::general(std::move(e), n);
  }

  if (static_cast<int>(c.bbox_lower.size()) != n || static_cast<int>(c.bbox_upper.size()) != n)
    throw ConfigError("bbox", "lower and upper need " + std::to_string(n) + " components");
  Box box;
  box.lower = Vec(n);
  box.upper = Vec(n);
  for (int i = 0; i < n; ++i) {
    box.lower[i] = c.bbox_lower[i];
    box.upper[i] = c.bbox_upper[i];
    if (!(box.lower[i] < box.upper[i])) throw ConfigError("bbox", "lower must be below upper");
  }

  DomainFlags flags;
  flags.so_invariant = c.so_invariant;
  if (!c.separable.empty()) {
    if (static_cast<int>(c.separable.size()) != n)
      throw ConfigError("flags.separable", "needs one factor per coordinate");
    for (int i = 0; i < n; ++i)
      flags.separable.push_back(parse_field(c.separable[i], n, "flags.separable[" + std::to_string(i) + "]"));
  }

  const double eps = c.collar_threshold;

  try {
    auto d = std::make_shared<const Domain>(c.name, n, std::move(metric), phi, c.boundary, eps, box,
                                            std::move(flags));
    d->validate();
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("phi", std::string("domain validation failed: ") + e.what());
  }
}

std::shared_ptr<const Domain> make_preset(const std::string& name) {
  return build_domain(preset_config(name));
}

}  // namespace degenbill
