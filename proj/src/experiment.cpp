#include "irlv/experiment.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "irlv/channel.hpp"
#include "irlv/dataset.hpp"
#include "irlv/neuralnet.hpp"
#include "irlv/np_oracle.hpp"
#include "irlv/planner.hpp"

namespace irlv {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Collects the outputs of one run; files are written once each.
class Artifacts {
 public:
  Artifacts(const RunConfig& config, const RunOptions& options, std::string command)
      : dir_(options.out_dir.empty() ? config.output_dir : options.out_dir) {
    manifest_.command = std::move(command);
    manifest_.config_hash = config.hash();
    manifest_.seeds = config.seeds;
    manifest_.seed_offset = options.seed_offset;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error(dir_.string() + ": " + ec.message());
  }

  void write(const std::string& relative, const std::string& text) {
    const std::filesystem::path path = dir_ / relative;
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, text);
    manifest_.files.push_back({relative, sha256_hex(text)});
  }

  nlohmann::json& summary() { return manifest_.summary; }

  RunManifest finish() {
    std::sort(manifest_.files.begin(), manifest_.files.end(),
              [](const EmittedFile& a, const EmittedFile& b) { return a.path < b.path; });
    write_file_atomic(dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
    return manifest_;
  }

 private:
  std::filesystem::path dir_;
  RunManifest manifest_;
};

std::string roc_csv(const RocCurve& roc) {
  std::ostringstream out;
  write_roc_csv(out, roc);
  return out.str();
}

/// The curve sampled at each grid abscissa, so curves share their p_fa column.
RocCurve on_grid(const RocCurve& roc, std::span<const double> grid) {
  return average_roc(std::span<const RocCurve>(&roc, 1), grid);
}

PlacementEvalConfig eval_config(const RunConfig& config, std::size_t train_size,
                                int hidden_neurons, std::size_t k, std::uint64_t offset) {
  PlacementEvalConfig ec;
  ec.channel = config.channel;
  ec.train_size = train_size;
  ec.train_fraction = config.dataset.train_fraction;
  ec.p0 = config.dataset.p0;
  ec.hidden_neurons = hidden_neurons;
  ec.hidden_layers = config.nn.hidden_layers;
  ec.dataset_seed = realization_seed(config.seeds.dataset, k, offset);
  ec.init_seed = realization_seed(config.seeds.init, k, offset);
  ec.train.learning_rate = config.nn.learning_rate;
  ec.train.epochs = config.nn.epochs;
  ec.train.batch_size = config.nn.batch_size;
  ec.train.seed = derive_seed(ec.init_seed, 1);
  return ec;
}

std::vector<std::vector<ShadowingField>> street_fields(const RunConfig& config,
                                                       const StreetScenario& scenario,
                                                       std::uint64_t offset, std::size_t jobs) {
  std::vector<std::vector<ShadowingField>> fields(config.eval.realizations);
  parallel_for(fields.size(), jobs, [&](std::size_t k) {
    fields[k] = generate_shadowing_fields(scenario, config.channel,
                                          realization_seed(config.seeds.field, k, offset));
  });
  return fields;
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t base, std::size_t k, std::uint64_t offset) {
  return derive_seed(base, static_cast<std::uint64_t>(k) + offset);
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seeds"] = {{"field", seeds.field},
                {"dataset", seeds.dataset},
                {"init", seeds.init},
                {"pso", seeds.pso},
                {"offset", seed_offset}};
  j["versions"] = {{"irlv", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  j["files"] = nlohmann::json::array();
  for (const EmittedFile& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
  j["summary"] = summary;
  return j;
}

int exit_code_for(std::exception_ptr error) {
  if (!error) return kExitOk;
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const NumericError&) {
    return kExitNumeric;
  } catch (const std::domain_error&) {
    return kExitNumeric;
  } catch (...) {
    return kExitOther;
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot write");
    out << text;
    out.close();
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

RunManifest cmd_roc(const RunConfig& config, const RunOptions& options) {
  Artifacts out(config, options, "roc");
  const StreetScenario scenario = config.street_scenario();
  const auto fields = street_fields(config, scenario, options.seed_offset, options.jobs);

  struct Task {
    int hidden_neurons;
    std::size_t train_size;
    std::size_t k;
  };
  std::vector<Task> tasks;
  for (int nh : config.eval.sweep_hidden_neurons)
    for (std::size_t s : config.eval.sweep_train_sizes)
      for (std::size_t k = 0; k < config.eval.realizations; ++k) tasks.push_back({nh, s, k});

  std::vector<RocCurve> curves(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto ec = eval_config(config, t.train_size, t.hidden_neurons, t.k, options.seed_offset);
    const TrainedModel model = train_and_score(scenario, fields[t.k], ec);
    curves[i] = empirical_roc(model.test_scores, model.test_labels);
  });

  const auto grid = uniform_grid(config.eval.roc_grid_points);
  std::string summary_csv = "hidden_neurons,train_size,realization,auc\n";
  nlohmann::json combos = nlohmann::json::array();
  const std::size_t r = config.eval.realizations;
  for (std::size_t first = 0; first < tasks.size(); first += r) {
    const Task& t = tasks[first];
    const std::string stem =
        "roc/nh" + std::to_string(t.hidden_neurons) + "_s" + std::to_string(t.train_size);
    std::vector<double> aucs;
    for (std::size_t k = 0; k < r; ++k) {
      const RocCurve& c = curves[first + k];
      aucs.push_back(auc(c));
      out.write(stem + "_r" + std::to_string(k) + ".csv", roc_csv(c));
      summary_csv += std::to_string(t.hidden_neurons) + "," + std::to_string(t.train_size) + "," +
                     std::to_string(k) + "," + fmt(aucs.back()) + "\n";
    }
    double mean = 0.0;
    for (double a : aucs) mean += a;
    mean /= static_cast<double>(aucs.size());
    const RocCurve averaged =
        average_roc(std::span<const RocCurve>(curves.data() + first, r), grid);
    out.write(stem + "_mean.csv", roc_csv(averaged));
    summary_csv += std::to_string(t.hidden_neurons) + "," + std::to_string(t.train_size) +
                   ",mean," + fmt(mean) + "\n";
    combos.push_back({{"hidden_neurons", t.hidden_neurons},
                      {"train_size", t.train_size},
                      {"mean_auc", mean},
                      {"auc_of_mean_curve", auc(averaged)}});
  }
  out.write("auc_summary.csv", summary_csv);
  out.summary()["combinations"] = combos;
  return out.finish();
}

// ---------------------------------------------------------------------------

NpComparison compare_with_np(const RunConfig& config, int hidden_neurons,
                             std::uint64_t seed_offset) {
  const CircularScenario scenario = config.circular_scenario();
  const SectorGeometry geometry(scenario, config.circular.angular_resolution);
  ChannelParams channel = config.channel;
  channel.sigma_db = 0.0;
  const auto fields = generate_shadowing_fields(scenario, channel, 0);

  const std::uint64_t data_seed = realization_seed(config.seeds.dataset, 0, seed_offset);
  const std::uint64_t init_seed = realization_seed(config.seeds.init, 0, seed_offset);
  const double p0 = config.dataset.p0;
  const Dataset raw_train = generate_dataset(scenario, fields, channel, config.circular.train_size,
                                             p0, derive_seed(data_seed, 0));
  const Dataset raw_test = generate_dataset(scenario, fields, channel, config.circular.test_size,
                                            p0, derive_seed(data_seed, 1));
  const Dataset train_set = normalize(raw_train);
  const Dataset test_set = apply_stats(raw_test, *train_set.stats());

  TrainConfig tc;
  tc.learning_rate = config.nn.learning_rate;
  tc.epochs = config.nn.epochs;
  tc.batch_size = config.nn.batch_size;
  tc.seed = derive_seed(init_seed, 1);
  const auto sizes = make_layer_sizes(static_cast<int>(train_set.dim()), hidden_neurons,
                                      config.nn.hidden_layers);
  const TrainResult trained = train(init_mlp(sizes, init_seed), train_set, tc);

  NpComparison result;
  result.ce_bits = trained.final_ce_bits;
  result.nn_scores = forward_all(trained.model, test_set);
  result.labels.assign(raw_test.labels().begin(), raw_test.labels().end());
  const double prior0 = static_cast<double>(raw_train.count_label(0)) /
                        static_cast<double>(raw_train.size());
  double mae = 0.0;
  for (std::size_t i = 0; i < raw_test.size(); ++i) {
    const double a = raw_test.sample(i)[0];
    result.np_scores.push_back(-llr(a, geometry, channel));
    result.np_posteriors.push_back(posterior_h1(a, prior0, geometry, channel));
    mae += std::abs(result.nn_scores[i] - result.np_posteriors.back());
  }
  result.posterior_mae = mae / static_cast<double>(raw_test.size());
  result.nn_roc = empirical_roc(result.nn_scores, result.labels);
  result.np_roc = empirical_roc(result.np_scores, result.labels);
  return result;
}

RunManifest cmd_np_compare(const RunConfig& config, const RunOptions& options) {
  Artifacts out(config, options, "np-compare");
  const CircularScenario scenario = config.circular_scenario();
  const SectorGeometry geometry(scenario, config.circular.angular_resolution);
  ChannelParams channel = config.channel;
  channel.sigma_db = 0.0;

  const auto& sweep = config.eval.sweep_hidden_neurons;
  std::vector<NpComparison> runs(sweep.size());
  parallel_for(sweep.size(), options.jobs, [&](std::size_t i) {
    runs[i] = compare_with_np(config, sweep[i], options.seed_offset);
  });
  const auto thetas = default_theta_grid();
  const NpRoc oracle =
      np_roc(geometry, channel, config.circular.np_samples, thetas,
             realization_seed(config.seeds.dataset, 0, options.seed_offset) ^ 0x6e70ULL);

  const auto grid = uniform_grid(config.eval.roc_grid_points);
  // The NP test scored on the held-out samples does not depend on the network.
  out.write("np_roc.csv", roc_csv(on_grid(runs.front().np_roc, grid)));
  std::ostringstream sweep_csv;
  write_threshold_roc_csv(sweep_csv, oracle.sweep);
  out.write("np_threshold_sweep.csv", sweep_csv.str());

  nlohmann::json networks = nlohmann::json::array();
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const NpComparison& r = runs[i];
    out.write("nn_roc_nh" + std::to_string(sweep[i]) + ".csv", roc_csv(on_grid(r.nn_roc, grid)));
    networks.push_back({{"hidden_neurons", sweep[i]},
                        {"train_ce_bits", r.ce_bits},
                        {"auc_nn", auc(r.nn_roc)},
                        {"max_gap_vs_np_same_samples", max_vertical_gap(r.nn_roc, r.np_roc, 0.05, 0.95)},
                        {"max_gap_vs_np_oracle", max_vertical_gap(r.nn_roc, oracle.curve, 0.05, 0.95)},
                        {"posterior_mae", r.posterior_mae}});
  }
  out.summary()["geometry"] = {{"r_out_m", scenario.r_out()},
                               {"roi_width_m", scenario.roi().width()},
                               {"roi_height_m", scenario.roi().height()},
                               {"r_min_m", scenario.r_min()}};
  out.summary()["auc_np_same_samples"] = auc(runs.front().np_roc);
  out.summary()["auc_np_oracle"] = auc(oracle.curve);
  out.summary()["gap_range"] = {0.05, 0.95};
  out.summary()["networks"] = networks;
  return out.finish();
}

// ---------------------------------------------------------------------------

namespace {

struct PlanRun {
  std::vector<double> global_best;
  std::vector<PlacementEval> best_eval;
  std::vector<std::vector<double>> particle_values;
  std::vector<Position> best_placement;
};

void append(PlanRun& run, const PsoResult& result) {
  for (const IterationRecord& r : result.history) {
    run.global_best.push_back(r.global_best);
    run.best_eval.push_back(r.global_best_eval);
    run.particle_values.push_back(r.particle_values);
  }
  run.best_placement = result.best_placement;
}

}  // namespace

RunManifest cmd_plan(const RunConfig& config, const RunOptions& options) {
  Artifacts out(config, options, "plan");
  const StreetScenario scenario = config.street_scenario();
  const auto fields = street_fields(config, scenario, options.seed_offset, options.jobs);

  std::vector<std::string> objectives;
  switch (config.pso.mode) {
    case PlanMode::CrossEntropy: objectives = {"ce"}; break;
    case PlanMode::Auc: objectives = {"auc"}; break;
    case PlanMode::Both: objectives = {"ce", "auc"}; break;
    case PlanMode::TwoStage: objectives = {"two-stage"}; break;
  }

  struct Task {
    std::size_t train_size;
    std::string objective;
    std::size_t k;
  };
  std::vector<Task> tasks;
  for (std::size_t s : config.eval.sweep_train_sizes)
    for (const std::string& o : objectives)
      for (std::size_t k = 0; k < config.eval.realizations; ++k) tasks.push_back({s, o, k});

  std::vector<PlanRun> runs(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto ec =
        eval_config(config, t.train_size, config.nn.hidden_neurons, t.k, options.seed_offset);
    const std::span<const ShadowingField> f = fields[t.k];
    const PlacementObjective objective = [&](std::span<const Position> placement) {
      return evaluate_placement(scenario, placement, f, ec);
    };
    PsoConfig pso;
    pso.particles = config.pso.particles;
    pso.inertia = config.pso.inertia;
    pso.c1 = config.pso.c1;
    pso.c2 = config.pso.c2;
    pso.max_iterations = config.pso.max_iterations;
    pso.stall_iterations = config.pso.stall_iterations;
    pso.tolerance = config.pso.tolerance;
    pso.seed = realization_seed(config.seeds.pso, t.k, options.seed_offset);
    pso.jobs = 1;
    const std::size_t n_bs = scenario.base_stations().size();
    if (t.objective == "two-stage") {
      const TwoStageResult r = run_two_stage(pso, scenario.bounds(), n_bs, objective);
      append(runs[i], r.ce_stage);
      append(runs[i], r.auc_stage);
    } else {
      pso.objective = t.objective == "ce" ? Objective::CrossEntropy : Objective::Auc;
      append(runs[i], run_pso(pso, scenario.bounds(), n_bs, objective));
    }
  });

  std::size_t grid_len = 0;
  for (const PlanRun& r : runs) grid_len = std::max(grid_len, r.global_best.size());

  std::string history = "train_size,objective,realization,iteration,global_best,best_ce_bits,best_auc\n";
  std::string particles = "train_size,objective,realization,iteration,particle,value\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    const std::string prefix =
        std::to_string(t.train_size) + "," + t.objective + "," + std::to_string(t.k) + ",";
    const PlanRun& r = runs[i];
    for (std::size_t it = 0; it < r.global_best.size(); ++it) {
      history += prefix + std::to_string(it) + "," + fmt(r.global_best[it]) + "," +
                 fmt(r.best_eval[it].ce_bits) + "," + fmt(r.best_eval[it].auc) + "\n";
      for (std::size_t p = 0; p < r.particle_values[it].size(); ++p)
        particles += prefix + std::to_string(it) + "," + std::to_string(p) + "," +
                     fmt(r.particle_values[it][p]) + "\n";
    }
    out.write("plan/best_" + t.objective + "_s" + std::to_string(t.train_size) + "_r" +
                  std::to_string(t.k) + ".cfg",
              placement_snippet(r.best_placement));
  }
  out.write("plan/history.csv", history);
  out.write("plan/particles.csv", particles);

  // Mean AUC of the best placement so far, padded with each run's last value.
  const std::size_t r_count = config.eval.realizations;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> means;
  nlohmann::json groups = nlohmann::json::array();
  std::map<std::size_t, std::map<std::string, double>> final_means;
  for (std::size_t first = 0; first < tasks.size(); first += r_count) {
    const Task& t = tasks[first];
    std::vector<double> mean(grid_len, 0.0);
    nlohmann::json iterations = nlohmann::json::array();
    for (std::size_t k = 0; k < r_count; ++k) {
      const PlanRun& r = runs[first + k];
      iterations.push_back(r.global_best.size() - 1);
      for (std::size_t it = 0; it < grid_len; ++it)
        mean[it] += r.best_eval[std::min(it, r.best_eval.size() - 1)].auc;
    }
    for (double& m : mean) m /= static_cast<double>(r_count);
    columns.push_back(t.objective + "_s" + std::to_string(t.train_size));
    nlohmann::json g = {{"train_size", t.train_size},
                        {"objective", t.objective},
                        {"initial_mean_auc", mean.front()},
                        {"final_mean_auc", mean.back()},
                        {"iterations", iterations}};
    if (t.objective == "ce")
      g["proxy_status"] =
          mean.back() > mean.front() ? "below proxy-validity size" : "ok";
    groups.push_back(g);
    final_means[t.train_size][t.objective] = mean.back();
    means.push_back(std::move(mean));
  }
  std::string mean_csv = "iteration";
  for (const std::string& c : columns) mean_csv += "," + c;
  mean_csv += "\n";
  for (std::size_t it = 0; it < grid_len; ++it) {
    mean_csv += std::to_string(it);
    for (const auto& m : means) mean_csv += "," + fmt(m[it]);
    mean_csv += "\n";
  }
  out.write("plan/mean_auc.csv", mean_csv);

  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& [s, by_objective] : final_means)
    if (by_objective.count("ce") && by_objective.count("auc"))
      gaps.push_back({{"train_size", s},
                      {"abs_mean_auc_gap", std::abs(by_objective.at("ce") - by_objective.at("auc"))}});
  out.summary()["groups"] = groups;
  out.summary()["ce_vs_auc"] = gaps;
  return out.finish();
}

// ---------------------------------------------------------------------------

RunManifest cmd_field(const RunConfig& config, const RunOptions& options) {
  Artifacts out(config, options, "field");
  const StreetScenario scenario = config.street_scenario();
  const ChannelParams& channel = config.channel;
  const double h = channel.grid_spacing_m;
  const auto max_lag = static_cast<std::size_t>(std::floor(config.eval.max_lag_m / h + 1e-9));

  const std::size_t n = config.eval.field_realizations;
  std::vector<std::vector<double>> sums(n);
  std::vector<std::vector<std::uint64_t>> counts(n);
  std::vector<std::vector<ShadowingField>> exported(config.eval.field_export);
  parallel_for(n, options.jobs, [&](std::size_t k) {
    auto fields = generate_shadowing_fields(
        scenario, channel, realization_seed(config.seeds.field, k, options.seed_offset));
    for (const ShadowingField& f : fields) accumulate_lag_products(f, max_lag, sums[k], counts[k]);
    if (k < exported.size()) exported[k] = std::move(fields);
  });

  for (std::size_t k = 0; k < exported.size(); ++k)
    for (std::size_t b = 0; b < exported[k].size(); ++b) {
      const std::string stem = "field/r" + std::to_string(k) + "_bs" + std::to_string(b);
      std::ostringstream csv;
      write_field_csv(csv, exported[k][b]);
      out.write(stem + ".csv", csv.str());
      std::ostringstream bin;
      write_field_binary(bin, exported[k][b]);
      out.write(stem + ".bin", bin.str());
    }

  const double var = channel.sigma_db * channel.sigma_db;
  const double dc = channel.decorrelation_m;
  std::string cov = "lag_m,empirical,theory,relative_deviation\n";
  double worst = 0.0;
  nlohmann::json key_lags = nlohmann::json::object();
  for (std::size_t m = 0; m <= max_lag; ++m) {
    double s = 0.0;
    std::uint64_t c = 0;
    for (std::size_t k = 0; k < n; ++k) {
      s += sums[k][m];
      c += counts[k][m];
    }
    const double lag = h * static_cast<double>(m);
    const double empirical = s / static_cast<double>(c);
    const double theory = var * std::exp(-lag / dc);
    const double deviation = theory > 0.0 ? std::abs(empirical - theory) / theory : 0.0;
    cov += fmt(lag) + "," + fmt(empirical) + "," + fmt(theory) + "," + fmt(deviation) + "\n";
    if (lag <= 2.0 * dc + 1e-9) worst = std::max(worst, deviation);
    for (const auto& [name, target] : {std::pair{"half_dc", dc / 2}, std::pair{"dc", dc},
                                       std::pair{"two_dc", 2 * dc}})
      if (std::abs(lag - target) < 1e-9 * dc)
        key_lags[name] = {{"lag_m", lag}, {"empirical", empirical}, {"theory", theory},
                          {"relative_deviation", deviation}};
  }
  out.write("field_covariance.csv", cov);
  out.summary()["realizations"] = n;
  out.summary()["fields_per_realization"] = scenario.base_stations().size();
  out.summary()["max_relative_deviation_up_to_2dc"] = worst;
  out.summary()["key_lags"] = key_lags;
  return out.finish();
}

}  // namespace irlv
