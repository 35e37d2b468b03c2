#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pqsched::cli {

struct SimulateArgs {
  std::filesystem::path config;
  std::vector<std::string> policies;  // empty: all four
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  std::size_t grid_points = 11;
  std::string charging = "truncate";
  std::optional<std::pair<double, double>> arrival_shift;  // amplitude, angular frequency
  std::filesystem::path out;
};

struct LowerBoundArgs {
  std::filesystem::path config;
  std::size_t paths = 1000;
  std::size_t steps = 1000;
  std::uint64_t seed = 1;
  std::string method = "auto";
  std::filesystem::path out;
};

struct SelectModelArgs {
  std::filesystem::path config;
  std::vector<std::filesystem::path> models;
  std::filesystem::path out;
};

struct TriageArgs {
  std::filesystem::path config;
  std::string zfl_grid = "0.05:0.48:44";
  std::optional<double> ztx;
  std::optional<std::string> ztx_grid;
  std::size_t paths = 1000;
  std::size_t steps = 1000;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

struct EstimateArgs {
  std::filesystem::path data;
  std::optional<double> threshold;
  double alpha = 0.0;
  std::size_t num_classes = 0;
  std::size_t grid_points = 101;
  std::filesystem::path out;
};

/// Each command writes its CSV outputs into `out`, then manifest.json last,
/// and returns the list of files written (manifest included).
std::vector<std::filesystem::path> cmd_simulate(const SimulateArgs& args);
std::vector<std::filesystem::path> cmd_lower_bound(const LowerBoundArgs& args);
std::vector<std::filesystem::path> cmd_select_model(const SelectModelArgs& args);
std::vector<std::filesystem::path> cmd_triage(const TriageArgs& args);
std::vector<std::filesystem::path> cmd_estimate(const EstimateArgs& args);

/// Parses "a:b:n" into n equally spaced values from a to b.
std::vector<double> parse_grid(const std::string& text);

/// Full command-line entry point. Returns 0 exactly when a manifest was written.
int run_cli(int argc, const char* const* argv);

}  // namespace pqsched::cli
