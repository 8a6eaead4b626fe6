#pragma once

// Deterministic CSV / JSON writers. Numbers in CSV are printed with 17
// significant digits so repeated runs are byte-identical.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "degenbill/invariants.hpp"

namespace degenbill {

enum class Format { Csv, Json };

Format parse_format(const std::string& s);
std::string format_number(double x);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string csv() const;
  nlohmann::json json() const;
};

// Writes dir/stem.csv or dir/stem.json; returns the file name.
std::string write_table(const Table& t, const std::filesystem::path& dir, const std::string& stem, Format f);
void write_json(const nlohmann::json& j, const std::filesystem::path& file);
void write_text(const std::string& s, const std::filesystem::path& file);

nlohmann::json number(double x);  // null for non-finite values

nlohmann::json to_json(const NormalFormData& nf);
nlohmann::json to_json(const InvariantCircleFit& fit);
nlohmann::json to_json(const ComparisonTable& t);
nlohmann::json to_json(const Event& e);

}  // namespace degenbill
