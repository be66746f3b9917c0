// Command-line driver for the location-verification experiments.
#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>

#include "irlv/common.hpp"
#include "irlv/config.hpp"
#include "irlv/experiment.hpp"

namespace {

using Command = std::function<irlv::RunManifest(const irlv::RunConfig&, const irlv::RunOptions&)>;

const char* error_kind(int code) {
  switch (code) {
    case irlv::kExitConfig: return "config error";
    case irlv::kExitNumeric: return "numeric failure";
    default: return "error";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"In-region location verification experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  irlv::RunOptions options;

  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"roc", {"ROC curves of trained networks over hidden sizes and training sizes", irlv::cmd_roc}},
      {"np-compare", {"network ROC against the Neyman-Pearson test on the circular map", irlv::cmd_np_compare}},
      {"plan", {"base-station placement by particle swarm optimization", irlv::cmd_plan}},
      {"field", {"shadowing fields and their covariance diagnostic", irlv::cmd_field}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--seed-offset", options.seed_offset, "added to every realization index");
    sub->add_option("--jobs", options.jobs, "parallel jobs")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? irlv::kExitOk : irlv::kExitConfig;
  }
  options.out_dir = out_dir;

  try {
    const irlv::RunConfig config = irlv::load_config(config_path);
    for (const auto& [name, entry] : commands) {
      if (!app.got_subcommand(name)) continue;
      const irlv::RunManifest manifest = entry.second(config, options);
      std::printf("%s: %zu files, config %s\n", name.c_str(), manifest.files.size(),
                  manifest.config_hash.substr(0, 12).c_str());
    }
  } catch (const std::exception& e) {
    const int code = irlv::exit_code_for(std::current_exception());
    std::fprintf(stderr, "%s: %s\n", error_kind(code), e.what());
    return code;
  }
  return irlv::kExitOk;
}
