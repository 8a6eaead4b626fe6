#include "degenbill/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace degenbill {

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw Error("unknown output format '" + s + "' (expected csv or json)");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error("table row has the wrong number of columns");
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_number(r[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json Table::json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < r.size(); ++i) o[columns[i]] = number(r[i]);
    arr.push_back(std::move(o));
  }
  return arr;
}

void write_text(const std::string& s, const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw Error("cannot write " + file.string());
  f << s;
  if (!f) throw Error("write failed for " + file.string());
}

void write_json(const nlohmann::json& j, const std::filesystem::path& file) { write_text(j.dump(2) + "\n", file); }

std::string write_table(const Table& t, const std::filesystem::path& dir, const std::string& stem, Format f) {
  const std::string name = stem + (f == Format::Csv ? ".csv" : ".json");
  if (f == Format::Csv)
    write_text(t.csv(), dir / name);
  else
    write_json(t.json(), dir / name);
  return name;
}

nlohmann::json to_json(const NormalFormData& nf) {
  nlohmann::json j;
  j["L"] = nf.L;
  j["q_grid"] = nf.q_grid;
  j["k_values"] = nf.k_values;
  j["b0_values"] = nf.b0_values;
  j["fit_residuals"] = nf.fit_residuals;
  j["s_window"] = {nf.s_min, nf.s_max};
  j["s_consistency"] = nf.s_consistency;
  j["k_interp_error"] = nf.k_interp_error;
  return j;
}

nlohmann::json to_json(const InvariantCircleFit& fit) {
  nlohmann::json j;
  j["epsilon"] = fit.epsilon;
  j["epsilon_circle"] = fit.epsilon_circle;
  j["q0"] = fit.q0;
  nlohmann::json modes = nlohmann::json::array();
  for (int k = 0; k <= fit.modes; ++k) modes.push_back({{"k", k}, {"cos", fit.a[k]}, {"sin", fit.b[k]}});
  j["fourier_modes"] = modes;
  j["rotation_number"] = fit.rotation_number;
  j["rotation_spread"] = fit.rotation_spread;
  j["residual"] = fit.residual;
  j["deviation"] = fit.deviation;
  j["orbit_len"] = fit.orbit_len;
  return j;
}

nlohmann::json to_json(const ComparisonTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) rows.push_back({{"p", r.p}, {"q_error", r.q_error}, {"p_error", r.p_error}});
  return {{"rows", rows}, {"q_slope", number(t.q_slope)}, {"p_slope", number(t.p_slope)}};
}

nlohmann::json to_json(const Event& e) {
  nlohmann::json j;
  j["type"] = e.type == Event::Type::Switch ? "switch" : e.type == Event::Type::Crossing ? "crossing" : "turning";
  j["t"] = e.t;
  j["x"] = std::vector<double>(e.point.x.data(), e.point.x.data() + e.point.x.size());
  j["chart"] = e.point.chart == Chart::Collar ? "collar" : "interior";
  j["sheet"] = e.point.sheet;
  if (e.type == Event::Type::Crossing) {
    j["q"] = e.section.q;
    j["p"] = e.section.p;
    j["new_sheet"] = e.section.sheet;
    j["eta_error"] = e.eta_error;
  }
  return j;
}

}  // namespace degenbill
