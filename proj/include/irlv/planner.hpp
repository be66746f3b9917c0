#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "irlv/channel.hpp"
#include "irlv/geometry.hpp"
#include "irlv/neuralnet.hpp"

namespace irlv {

enum class Objective { CrossEntropy, Auc };

/// Both planning metrics of one trained network: final training cross entropy
/// (bits) and the AUC of its ROC on the held-out part.
struct PlacementEval {
  double ce_bits = 0.0;
  double auc = 0.0;
  friend bool operator==(const PlacementEval&, const PlacementEval&) = default;
};

double objective_value(const PlacementEval& eval, Objective objective);

struct PlacementEvalConfig {
  ChannelParams channel;
  std::size_t train_size = 10'000;  // S
  double train_fraction = 0.7;      // the pool holds S / train_fraction samples
  double p0 = 0.5;
  int hidden_neurons = 8;
  int hidden_layers = 2;
  TrainConfig train;
  std::uint64_t dataset_seed = 1;
  std::uint64_t init_seed = 1;
};

/// Generates a pool of labeled samples for the placement (fields are fixed per
/// base-station index), splits, normalizes with training statistics, trains a
/// fresh network and scores the held-out part.
PlacementEval evaluate_placement(const StreetScenario& scenario, std::span<const Position> placement,
                                 std::span<const ShadowingField> fields,
                                 const PlacementEvalConfig& config);

/// Dataset pipeline shared with the experiment driver.
struct TrainedModel {
  TrainResult trained;
  FeatureStats stats;
  std::vector<double> test_scores;
  std::vector<int> test_labels;
};
TrainedModel train_and_score(const Scenario& scenario, std::span<const ShadowingField> fields,
                             const PlacementEvalConfig& config);

using PlacementObjective = std::function<PlacementEval(std::span<const Position>)>;

struct PsoConfig {
  std::size_t particles = 6;
  double inertia = 0.7298;
  double c1 = 1.4961;
  double c2 = 1.4961;
  std::size_t max_iterations = 50;
  std::size_t stall_iterations = 5;
  double tolerance = 1e-4;
  Objective objective = Objective::CrossEntropy;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;

  void validate() const;
};

/// Candidate placement flattened as (x0, y0, x1, y1, ...).
struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_value = 0.0;
  PlacementEval last_eval;
};

struct IterationRecord {
  double global_best = 0.0;
  PlacementEval global_best_eval;
  std::vector<double> particle_values;
};

struct SwarmState {
  std::vector<Particle> particles;
  std::vector<Rng> rngs;  // one stream per particle
  std::vector<double> global_best_position;
  double global_best = 0.0;
  PlacementEval global_best_eval;
  std::size_t iteration = 0;
  std::vector<IterationRecord> history;  // history[0] is the initial evaluation
};

std::vector<Position> unflatten(std::span<const double> flat);
std::vector<double> flatten(std::span<const Position> positions);

/// Uniform positions over `bounds`, velocities uniform in +-extent/10 per axis,
/// every particle evaluated once. `initial` optionally fixes starting positions.
SwarmState init_swarm(const PsoConfig& config, const Rectangle& bounds, std::size_t n_bs,
                      const PlacementObjective& objective,
                      std::span<const std::vector<double>> initial = {});

/// v <- w v + phi1 (o_p - x) + phi2 (o_G - x), x <- clamp(x + v), with phi1 and
/// phi2 drawn per coordinate.
void step_particle(Particle& particle, std::span<const double> global_best, const PsoConfig& config,
                   const Rectangle& bounds, Rng& rng);

/// One synchronous iteration: move every particle, evaluate, update bests.
void advance_swarm(SwarmState& swarm, const PsoConfig& config, const Rectangle& bounds,
                   const PlacementObjective& objective);

struct PsoResult {
  std::vector<Position> best_placement;
  PlacementEval best_eval;
  std::vector<IterationRecord> history;
  std::vector<std::vector<double>> final_particle_bests;

  std::vector<double> objective_history() const;
};

/// Iterates until the global best moves by at most `tolerance` for
/// `stall_iterations` consecutive iterations or `max_iterations` is reached.
PsoResult run_pso(const PsoConfig& config, const Rectangle& bounds, std::size_t n_bs,
                  const PlacementObjective& objective,
                  std::span<const std::vector<double>> initial = {});

/// Cross-entropy stage to convergence, then an AUC stage started from the
/// first stage's personal bests.
struct TwoStageResult {
  PsoResult ce_stage;
  PsoResult auc_stage;
};
TwoStageResult run_two_stage(PsoConfig config, const Rectangle& bounds, std::size_t n_bs,
                             const PlacementObjective& objective);

}  // namespace irlv
