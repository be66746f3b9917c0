#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irlv/channel.hpp"
#include "irlv/geometry.hpp"
#include "irlv/neuralnet.hpp"
#include "irlv/planner.hpp"

namespace irlv {

enum class PlanMode { CrossEntropy, Auc, Both, TwoStage };

struct CircularSettings {
  double r_out_m = 40.0;
  double roi_width_m = 25.0;
  double roi_height_m = 25.0;
  double r_min_m = 4.0;
  double angular_resolution = 1e-4;
  std::size_t train_size = 20'000;
  std::size_t test_size = 10'000;
  std::size_t np_samples = 100'000;
};

struct DatasetSettings {
  std::size_t train_size = 100'000;
  double train_fraction = 0.7;
  double p0 = 0.5;
};

struct NnSettings {
  int hidden_neurons = 8;
  int hidden_layers = 2;
  double learning_rate = 0.05;
  int epochs = 200;
  std::size_t batch_size = 128;
};

struct PsoSettings {
  std::size_t particles = 6;
  double inertia = 0.7298;
  double c1 = 1.4961;
  double c2 = 1.4961;
  std::size_t max_iterations = 50;
  std::size_t stall_iterations = 5;
  double tolerance = 1e-4;
  PlanMode mode = PlanMode::Both;
};

struct EvalSettings {
  std::size_t realizations = 5;
  std::size_t roc_grid_points = 200;
  std::vector<int> sweep_hidden_neurons{2, 4, 8, 16};
  std::vector<std::size_t> sweep_train_sizes{1'000, 10'000, 100'000};
  std::size_t field_realizations = 500;
  std::size_t field_export = 1;
  double max_lag_m = 150.0;
};

/// Seeds are mandatory; nothing derives from the wall clock.
struct Seeds {
  std::uint64_t field = 0;
  std::uint64_t dataset = 0;
  std::uint64_t init = 0;
  std::uint64_t pso = 0;
};

/// Effective experiment configuration. Sections mirror the library modules.
struct RunConfig {
  StreetScenario::Layout layout;
  Rectangle roi = StreetScenario::default_roi(StreetScenario::Layout{});
  std::vector<Position> base_stations =
      StreetScenario::default_base_stations(StreetScenario::Layout{});
  CircularSettings circular;
  ChannelParams channel;
  DatasetSettings dataset;
  NnSettings nn;
  PsoSettings pso;
  EvalSettings eval;
  Seeds seeds;
  std::filesystem::path output_dir = "out";

  StreetScenario street_scenario() const;
  CircularScenario circular_scenario() const;
  /// Canonical `section.key = value` listing of every setting, sorted.
  std::string canonical() const;
  std::string hash() const;
};

/// Parses the INI format. Unknown sections/keys, malformed values and missing
/// seeds raise ConfigError naming the key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

std::string plan_mode_name(PlanMode mode);
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// `[scenario]` snippet listing base-station positions in config syntax.
std::string placement_snippet(std::span<const Position> placement);

}  // namespace irlv
