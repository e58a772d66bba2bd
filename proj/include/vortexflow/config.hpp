#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vortexflow/dynamics.hpp"
#include "vortexflow/weakform.hpp"

namespace vflow {

inline constexpr const char* version_string = "1.0.0";

// Structured text: "[section]" headers followed by "key = value" lines; '#'
// starts a comment. Sections and keys may repeat.
struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const;
  // Last value of `key`; ConfigError when absent.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> all(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer_or(const std::string& key, long fallback) const;
};

struct ConfigFile {
  std::string source;  // file name for messages
  std::vector<ConfigSection> sections;

  static ConfigFile parse(const std::string& text, const std::string& source = "<config>");
  static ConfigFile load(const std::string& path);
  const ConfigSection* find(const std::string& name) const;
  std::vector<const ConfigSection*> all(const std::string& name) const;
  // Sections and entries in order, one "key=value" per line.
  std::string canonical() const;
};

// Decimal number, optionally followed by "pi" ("2pi", "-0.5*pi", "pi").
double parse_number(const std::string& s);
// Comma- or whitespace-separated numbers.
std::vector<double> parse_numbers(const std::string& s);

struct TimeParams {
  double T = 0.0;
  double dt = 0.0;
  Scheme scheme = Scheme::RK4;
};

struct RunConfig {
  std::string path;      // config file ("" when parsed from text)
  std::string base_dir;  // relative file names resolve against this
  DomainDescriptor domain;
  int n = 128;
  std::string cache;  // solver cache file, empty for none
  FlowState initial;  // gamma as given (not yet completed)
  TimeParams time;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::vector<std::string> tests;  // audit test-function specs
  int levels = 3;
  std::vector<int> force_components;
  ForceOptions force;
  std::string probe_points;
  KernelSamplePlan kernels;
  std::uint64_t hash = 0;  // FNV-1a of the canonical config plus referenced files
};

RunConfig parse_run_config(const ConfigFile& cfg, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

// "constant c" | "bump cx cy r0 r1 [a]" | "localizer index inner outer" |
// "poly cx cy r0 r1 c0 c1 c2 c3" | "ybar seed [scale]"
TestFunction parse_test_function(const std::string& spec, const Domain& d);

// Two columns x,y per row; '#' comments and a non-numeric header are skipped.
std::vector<Vec2> read_points_csv(const std::string& path);

// Columns t, x_k, y_k for every atom then blob, then gamma_j.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
// Positions and circulations from the file, strengths and radii from `initial`.
// The time grid must be uniform.
Trajectory read_trajectory_csv(const std::string& path, const FlowState& initial, Scheme scheme = Scheme::RK4);

}  // namespace vflow
