#pragma once

// Domain configuration: built-in presets and the JSON config format.
//
// {
//   "preset": "disk",                      // optional base; other fields override it
//   "dimension": 2,
//   "metric": "euclidean" | {"kind": "diagonal", "entries": ["1", "1 + x1^2"]}
//                         | {"kind": "general", "entries": [["1", "0"], ["0", "1"]]},
//   "phi": "0.5*(1 - x1^2 - x2^2)" | {"preset": "disk"},
//   "boundary": {"kind": "star", "center": [0, 0]} | {"kind": "periodic_strip", "period": 6.28},
//   "bbox": {"lower": [-1.5, -1.5], "upper": [1.5, 1.5]},
//   "collar": {"phi_threshold": 0.025},
//   "integrator": {"tol": 1e-10, "max_time": 1000},
//   "flags": {"so_invariant": true, "separable": ["(1 - x1^2)/2", "(1 - x2^2)/2"]}
// }

#include <memory>
#include <string>
#include <vector>

#include "degenbill/geometry.hpp"

namespace degenbill {

class ConfigError : public Error {
public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

struct IntegratorSettings {
  double tol = 1e-10;
  double max_time = 1e3;
};

struct DomainConfig {
  std::string name = "custom";
  int dimension = 2;
  MetricKind metric_kind = MetricKind::Euclidean;
  std::vector<std::string> metric_entries;
  std::string phi;
  BoundarySpec boundary;
  std::vector<double> bbox_lower;
  std::vector<double> bbox_upper;
  double collar_threshold = 0.0;  // 0 selects 0.05 * max phi
  IntegratorSettings integrator;
  bool so_invariant = false;
  std::vector<std::string> separable;
};

const std::vector<std::string>& preset_names();
DomainConfig preset_config(const std::string& name);

DomainConfig parse_config_text(const std::string& json_text);
DomainConfig load_config_file(const std::string& path);

// Parses expressions, builds and validates the domain. Errors carry field paths.
std::shared_ptr<const Domain> build_domain(const DomainConfig& cfg);
std::shared_ptr<const Domain> make_preset(const std::string& name);

}  // namespace degenbill
