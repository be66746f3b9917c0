#include "irlv/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "irlv/dataset.hpp"
#include "irlv/evaluation.hpp"

namespace irlv {

double objective_value(const PlacementEval& eval, Objective objective) {
  return objective == Objective::CrossEntropy ? eval.ce_bits : eval.auc;
}

TrainedModel train_and_score(const Scenario& scenario, std::span<const ShadowingField> fields,
                             const PlacementEvalConfig& config) {
  const auto pool_size = static_cast<std::size_t>(
      std::ceil(static_cast<double>(config.train_size) / config.train_fraction));
  const Dataset pool =
      generate_dataset(scenario, fields, config.channel, pool_size, config.p0, config.dataset_seed);
  const auto [raw_train, raw_test] = split(pool, config.train_fraction);
  const Dataset train_set = normalize(raw_train);
  const FeatureStats& stats = *train_set.stats();
  const Dataset test_set = apply_stats(raw_test, stats);

  const auto sizes = make_layer_sizes(static_cast<int>(train_set.dim()), config.hidden_neurons,
                                      config.hidden_layers);
  TrainedModel out{train(init_mlp(sizes, config.init_seed), train_set, config.train), stats, {}, {}};
  out.test_scores = forward_all(out.trained.model, test_set);
  out.test_labels.assign(test_set.labels().begin(), test_set.labels().end());
  return out;
}

PlacementEval evaluate_placement(const StreetScenario& scenario, std::span<const Position> placement,
                                 std::span<const ShadowingField> fields,
                                 const PlacementEvalConfig& config) {
  const StreetScenario placed =
      scenario.with_base_stations({placement.begin(), placement.end()});
  const TrainedModel model = train_and_score(placed, fields, config);
  return {model.trained.final_ce_bits, auc(empirical_roc(model.test_scores, model.test_labels))};
}

// ---------------------------------------------------------------------------

void PsoConfig::validate() const {
  if (particles < 1) throw std::invalid_argument("PSO needs at least one particle");
  if (!(inertia >= 0.0 && c1 >= 0.0 && c2 >= 0.0))
    throw std::invalid_argument("PSO coefficients must be nonnegative");
  if (stall_iterations < 1) throw std::invalid_argument("stall iterations must be positive");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
}

std::vector<Position> unflatten(std::span<const double> flat) {
  if (flat.size() % 2) throw std::invalid_argument("flattened placement has odd length");
  std::vector<Position> out(flat.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {flat[2 * i], flat[2 * i + 1]};
  return out;
}

std::vector<double> flatten(std::span<const Position> positions) {
  std::vector<double> out;
  out.reserve(2 * positions.size());
  for (Position p : positions) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

namespace {

double lower_bound_of(const Rectangle& bounds, std::size_t coord) {
  return coord % 2 ? bounds.min().y : bounds.min().x;
}
double upper_bound_of(const Rectangle& bounds, std::size_t coord) {
  return coord % 2 ? bounds.max().y : bounds.max().x;
}

std::vector<PlacementEval> evaluate_all(const std::vector<Particle>& particles,
                                        const PlacementObjective& objective, std::size_t jobs) {
  std::vector<PlacementEval> evals(particles.size());
  parallel_for(particles.size(), jobs, [&](std::size_t p) {
    evals[p] = objective(unflatten(particles[p].position));
  });
  return evals;
}

IterationRecord snapshot(const SwarmState& swarm, const PsoConfig& config) {
  IterationRecord r{swarm.global_best, swarm.global_best_eval, {}};
  for (const Particle& p : swarm.particles)
    r.particle_values.push_back(objective_value(p.last_eval, config.objective));
  return r;
}

}  // namespace

SwarmState init_swarm(const PsoConfig& config, const Rectangle& bounds, std::size_t n_bs,
                      const PlacementObjective& objective,
                      std::span<const std::vector<double>> initial) {
  config.validate();
  if (n_bs == 0) throw std::invalid_argument("placement needs at least one base station");
  const std::size_t dims = 2 * n_bs;
  SwarmState swarm;
  for (std::size_t p = 0; p < config.particles; ++p) {
    Rng& rng = swarm.rngs.emplace_back(derive_seed(config.seed, p));
    Particle particle;
    for (std::size_t k = 0; k < dims; ++k) {
      const double lo = lower_bound_of(bounds, k);
      const double hi = upper_bound_of(bounds, k);
      const double vmax = (hi - lo) / 10.0;
      particle.position.push_back(uniform(rng, lo, hi));
      particle.velocity.push_back(uniform(rng, -vmax, vmax));
    }
    if (p < initial.size()) {
      if (initial[p].size() != dims) throw std::invalid_argument("initial placement size mismatch");
      for (std::size_t k = 0; k < dims; ++k)
        particle.position[k] =
            std::clamp(initial[p][k], lower_bound_of(bounds, k), upper_bound_of(bounds, k));
    }
    swarm.particles.push_back(std::move(particle));
  }

  const auto evals = evaluate_all(swarm.particles, objective, config.jobs);
  for (std::size_t p = 0; p < swarm.particles.size(); ++p) {
    Particle& particle = swarm.particles[p];
    particle.last_eval = evals[p];
    particle.best_position = particle.position;
    particle.best_value = objective_value(evals[p], config.objective);
    if (p == 0 || particle.best_value < swarm.global_best) {
      swarm.global_best = particle.best_value;
      swarm.global_best_eval = evals[p];
      swarm.global_best_position = particle.position;
    }
  }
  swarm.history.push_back(snapshot(swarm, config));
  return swarm;
}

void step_particle(Particle& particle, std::span<const double> global_best, const PsoConfig& config,
                   const Rectangle& bounds, Rng& rng) {
  for (std::size_t k = 0; k < particle.position.size(); ++k) {
    const double phi1 = config.c1 > 0.0 ? uniform(rng, 0.0, config.c1) : 0.0;
    const double phi2 = config.c2 > 0.0 ? uniform(rng, 0.0, config.c2) : 0.0;
    const double x = particle.position[k];
    double& v = particle.velocity[k];
    v = config.inertia * v + phi1 * (particle.best_position[k] - x) + phi2 * (global_best[k] - x);
    particle.position[k] =
        std::clamp(x + v, lower_bound_of(bounds, k), upper_bound_of(bounds, k));
  }
}

void advance_swarm(SwarmState& swarm, const PsoConfig& config, const Rectangle& bounds,
                   const PlacementObjective& objective) {
  const std::vector<double> leader = swarm.global_best_position;
  for (std::size_t p = 0; p < swarm.particles.size(); ++p)
    step_particle(swarm.particles[p], leader, config, bounds, swarm.rngs[p]);

  const auto evals = evaluate_all(swarm.particles, objective, config.jobs);
  for (std::size_t p = 0; p < swarm.particles.size(); ++p) {
    Particle& particle = swarm.particles[p];
    particle.last_eval = evals[p];
    const double value = objective_value(evals[p], config.objective);
    if (value < particle.best_value) {
      particle.best_value = value;
      particle.best_position = particle.position;
    }
    if (value < swarm.global_best) {
      swarm.global_best = value;
      swarm.global_best_eval = evals[p];
      swarm.global_best_position = particle.position;
    }
  }
  ++swarm.iteration;
  swarm.history.push_back(snapshot(swarm, config));
}

std::vector<double> PsoResult::objective_history() const {
  std::vector<double> out;
  for (const IterationRecord& r : history) out.push_back(r.global_best);
  return out;
}

PsoResult run_pso(const PsoConfig& config, const Rectangle& bounds, std::size_t n_bs,
                  const PlacementObjective& objective,
                  std::span<const std::vector<double>> initial) {
  SwarmState swarm = init_swarm(config, bounds, n_bs, objective, initial);
  std::size_t stalled = 0;
  while (swarm.iteration < config.max_iterations && stalled < config.stall_iterations) {
    const double previous = swarm.global_best;
    advance_swarm(swarm, config, bounds, objective);
    stalled = previous - swarm.global_best <= config.tolerance ? stalled + 1 : 0;
  }
  PsoResult result{unflatten(swarm.global_best_position), swarm.global_best_eval,
                   std::move(swarm.history), {}};
  for (const Particle& p : swarm.particles) result.final_particle_bests.push_back(p.best_position);
  return result;
}

TwoStageResult run_two_stage(PsoConfig config, const Rectangle& bounds, std::size_t n_bs,
                             const PlacementObjective& objective) {
  TwoStageResult result;
  config.objective = Objective::CrossEntropy;
  result.ce_stage = run_pso(config, bounds, n_bs, objective);
  config.objective = Objective::Auc;
  config.seed = derive_seed(config.seed, 0x5eed);
  result.auc_stage =
      run_pso(config, bounds, n_bs, objective, result.ce_stage.final_particle_bests);
  return result;
}

}  // namespace irlv
