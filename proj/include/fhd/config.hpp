#pragma once

#include <string>
#include <vector>

#include "fhd/dynamics.hpp"
#include "fhd/model.hpp"

namespace fhd {

struct GridConfig {
  int dim = 2;
  int m = 64;
};

struct SweepConfig {
  std::vector<double> epsilons;  // strictly decreasing
  std::string preset = "gaussian-bump-flock";
  int workers = 4;
  double perturb_delta = 0.0;  // initial-density mismatch amplitude
  bool forcing = true;         // inject the manufactured sources
};

struct OutputConfig {
  std::string directory = "out";
  bool write_snapshots = true;
};

struct RunConfig {
  GridConfig grid;
  ModelSpec model;  // forcing left null; the harness attaches sources
  IntegratorConfig integrator;
  SweepConfig sweep;
  OutputConfig output;
};

// Sectioned key = value text; sections [grid], [model], [integrator], [sweep],
// [output]; full-line # comments. Unknown sections or keys, duplicate keys,
// and malformed values are all errors — configs are reproducibility records,
// so nothing is skipped silently. Kernel tables use terms like
// "1,0:0.25; 1,1:-0.1" (wavevector:coefficient, cosine basis); sine terms are
// rejected because they would break the evenness hypothesis.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Normalized dump that parses back to an equivalent RunConfig; stored next to
// run outputs so audits can rebuild the model.
std::string write_config(const RunConfig& cfg);

}  // namespace fhd
