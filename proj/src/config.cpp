#include "irlv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

namespace irlv {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw ConfigError(key + ": " + what + " (got '" + value + "')");
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
    bad_value(key, text, "expected a finite number");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    bad_value(key, text, "expected a nonnegative integer");
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
  bool required = false;
};

using Registry = std::map<std::string, Field>;

template <typename Member>
Field real(Member member, std::function<bool(double)> ok, const char* what) {
  return {[=](RunConfig& c, const std::string& key, const std::string& value) {
            const double v = parse_double(key, value);
            if (!ok(v)) bad_value(key, value, what);
            member(c) = v;
          },
          [=](const RunConfig& c) { return fmt(member(c)); }};
}

template <typename T, typename Member>
Field integer(Member member, std::uint64_t min_value, bool required = false) {
  return {[=](RunConfig& c, const std::string& key, const std::string& value) {
            const std::uint64_t v = parse_u64(key, value);
            if (v < min_value) bad_value(key, value, ("must be at least " + std::to_string(min_value)).c_str());
            member(c) = static_cast<T>(v);
          },
          [=](const RunConfig& c) {
            return std::to_string(static_cast<std::uint64_t>(member(c)));
          },
          required};
}

bool positive(double v) { return v > 0.0; }
bool nonnegative(double v) { return v >= 0.0; }
bool open_unit(double v) { return v > 0.0 && v < 1.0; }

Position parse_point(const std::string& key, const std::string& text) {
  const auto parts = split_on(text, ',');
  if (parts.size() != 2) bad_value(key, text, "expected 'x, y'");
  return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

PlanMode parse_mode(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "ce") return PlanMode::CrossEntropy;
  if (s == "auc") return PlanMode::Auc;
  if (s == "both") return PlanMode::Both;
  if (s == "two-stage") return PlanMode::TwoStage;
  bad_value(key, text, "expected ce, auc, both or two-stage");
}

const Registry& registry() {
  static const Registry r = [] {
    Registry m;
    m["scenario.map_side_m"] = real([](auto& c) -> auto& { return c.layout.map_side_m; },
                                    positive, "must be positive");
    m["scenario.building_side_m"] =
        real([](auto& c) -> auto& { return c.layout.building_side_m; }, positive,
             "must be positive");
    m["scenario.street_width_m"] =
        real([](auto& c) -> auto& { return c.layout.street_width_m; }, positive,
             "must be positive");
    m["scenario.roi"] = {
        [](RunConfig& c, const std::string& key, const std::string& value) {
          const auto parts = split_on(value, ',');
          if (parts.size() != 4) bad_value(key, value, "expected 'x0, y0, x1, y1'");
          const Position lo{parse_double(key, parts[0]), parse_double(key, parts[1])};
          const Position hi{parse_double(key, parts[2]), parse_double(key, parts[3])};
          if (!(lo.x < hi.x && lo.y < hi.y)) bad_value(key, value, "empty rectangle");
          c.roi = Rectangle(lo, hi);
        },
        [](const RunConfig& c) {
          return join(std::vector<double>{c.roi.min().x, c.roi.min().y, c.roi.max().x,
                                          c.roi.max().y});
        }};
    m["scenario.bs"] = {
        [](RunConfig& c, const std::string& key, const std::string& value) {
          std::vector<Position> bs;
          for (const std::string& item : split_on(value, ';'))
            if (!item.empty()) bs.push_back(parse_point(key, item));
          if (bs.empty()) bad_value(key, value, "needs at least one base station");
          c.base_stations = std::move(bs);
        },
        [](const RunConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.base_stations.size(); ++i) {
            if (i) out += "; ";
            out += fmt(c.base_stations[i].x) + ", " + fmt(c.base_stations[i].y);
          }
          return out;
        }};

    m["circular.r_out_m"] = real([](auto& c) -> auto& { return c.circular.r_out_m; },
                                 positive, "must be positive");
    m["circular.roi_width_m"] =
        real([](auto& c) -> auto& { return c.circular.roi_width_m; }, positive,
             "must be positive");
    m["circular.roi_height_m"] =
        real([](auto& c) -> auto& { return c.circular.roi_height_m; }, positive,
             "must be positive");
    m["circular.r_min_m"] = real([](auto& c) -> auto& { return c.circular.r_min_m; },
                                 positive, "must be positive");
    m["circular.angular_resolution"] =
        real([](auto& c) -> auto& { return c.circular.angular_resolution; },
             [](double v) { return v > 0.0 && v <= 1e-3; }, "must lie in (0, 1e-3]");
    m["circular.train_size"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.circular.train_size; }, 2);
    m["circular.test_size"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.circular.test_size; }, 2);
    m["circular.np_samples"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.circular.np_samples; }, 10'000);

    m["channel.carrier_hz"] = real([](auto& c) -> auto& { return c.channel.carrier_hz; },
                                   positive, "must be positive");
    m["channel.sigma_db"] = real([](auto& c) -> auto& { return c.channel.sigma_db; },
                                 nonnegative, "must be nonnegative");
    m["channel.decorrelation_m"] =
        real([](auto& c) -> auto& { return c.channel.decorrelation_m; }, positive,
             "must be positive");
    m["channel.bs_height_m"] =
        real([](auto& c) -> auto& { return c.channel.bs_height_m; }, positive,
             "must be positive");
    m["channel.grid_spacing_m"] =
        real([](auto& c) -> auto& { return c.channel.grid_spacing_m; }, positive,
             "must be positive");

    m["dataset.train_size"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.dataset.train_size; }, 2);
    m["dataset.train_fraction"] =
        real([](auto& c) -> auto& { return c.dataset.train_fraction; }, open_unit,
             "must lie in (0, 1)");
    m["dataset.p0"] = real([](auto& c) -> auto& { return c.dataset.p0; }, open_unit,
                           "must lie in (0, 1)");

    m["nn.hidden_neurons"] =
        integer<int>([](auto& c) -> auto& { return c.nn.hidden_neurons; }, 1);
    m["nn.hidden_layers"] = integer<int>([](auto& c) -> auto& { return c.nn.hidden_layers; }, 1);
    m["nn.learning_rate"] = real([](auto& c) -> auto& { return c.nn.learning_rate; },
                                 positive, "must be positive");
    m["nn.epochs"] = integer<int>([](auto& c) -> auto& { return c.nn.epochs; }, 0);
    m["nn.batch_size"] =
        integer<std::size_t>([](auto& c) -> auto& { return c.nn.batch_size; }, 1);

    m["pso.particles"] =
        integer<std::size_t>([](auto& c) -> auto& { return c.pso.particles; }, 1);
    m["pso.inertia"] = real([](auto& c) -> auto& { return c.pso.inertia; }, nonnegative,
                            "must be nonnegative");
    m["pso.c1"] = real([](auto& c) -> auto& { return c.pso.c1; }, nonnegative,
                       "must be nonnegative");
    m["pso.c2"] = real([](auto& c) -> auto& { return c.pso.c2; }, nonnegative,
                       "must be nonnegative");
    m["pso.max_iterations"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.pso.max_iterations; }, 0);
    m["pso.stall_iterations"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.pso.stall_iterations; }, 1);
    m["pso.tolerance"] = real([](auto& c) -> auto& { return c.pso.tolerance; },
                              nonnegative, "must be nonnegative");
    m["pso.objective"] = {
        [](RunConfig& c, const std::string& key, const std::string& value) {
          c.pso.mode = parse_mode(key, value);
        },
        [](const RunConfig& c) { return plan_mode_name(c.pso.mode); }};

    m["eval.realizations"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.eval.realizations; }, 1);
    m["eval.roc_grid_points"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.eval.roc_grid_points; }, 2);
    m["eval.sweep_hidden_neurons"] = {
        [](RunConfig& c, const std::string& key, const std::string& value) {
          std::vector<int> v;
          for (const std::string& item : split_on(value, ',')) {
            const std::uint64_t n = parse_u64(key, item);
            if (n < 1 || n > 4096) bad_value(key, value, "entries must lie in [1, 4096]");
            v.push_back(static_cast<int>(n));
          }
          c.eval.sweep_hidden_neurons = std::move(v);
        },
        [](const RunConfig& c) { return join(c.eval.sweep_hidden_neurons); }};
    m["eval.sweep_train_sizes"] = {
        [](RunConfig& c, const std::string& key, const std::string& value) {
          std::vector<std::size_t> v;
          for (const std::string& item : split_on(value, ',')) {
            const std::uint64_t n = parse_u64(key, item);
            if (n < 2) bad_value(key, value, "entries must be at least 2");
            v.push_back(n);
          }
          c.eval.sweep_train_sizes = std::move(v);
        },
        [](const RunConfig& c) { return join(c.eval.sweep_train_sizes); }};
    m["eval.field_realizations"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.eval.field_realizations; }, 2);
    m["eval.field_export"] = integer<std::size_t>(
        [](auto& c) -> auto& { return c.eval.field_export; }, 0);
    m["eval.max_lag_m"] = real([](auto& c) -> auto& { return c.eval.max_lag_m; },
                               positive, "must be positive");

    m["seeds.field"] = integer<std::uint64_t>(
        [](auto& c) -> auto& { return c.seeds.field; }, 0, true);
    m["seeds.dataset"] = integer<std::uint64_t>(
        [](auto& c) -> auto& { return c.seeds.dataset; }, 0, true);
    m["seeds.init"] = integer<std::uint64_t>(
        [](auto& c) -> auto& { return c.seeds.init; }, 0, true);
    m["seeds.pso"] = integer<std::uint64_t>(
        [](auto& c) -> auto& { return c.seeds.pso; }, 0, true);

    m["output.dir"] = {
        [](RunConfig& c, const std::string& key, const std::string& value) {
          const std::string s = trim(value);
          if (s.empty()) bad_value(key, value, "must not be empty");
          c.output_dir = s;
        },
        [](const RunConfig& c) { return c.output_dir.generic_string(); }};
    return m;
  }();
  return r;
}

void validate(const RunConfig& c) {
  try {
    (void)c.street_scenario();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  try {
    (void)c.circular_scenario();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("circular: ") + e.what());
  }
  try {
    c.channel.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("channel: ") + e.what());
  }
  if (c.channel.grid_spacing_m > c.channel.decorrelation_m / 5.0)
    throw ConfigError("channel.grid_spacing_m: grid too coarse for d_c");
  if (c.eval.sweep_hidden_neurons.empty())
    throw ConfigError("eval.sweep_hidden_neurons: must not be empty");
  if (c.eval.sweep_train_sizes.empty())
    throw ConfigError("eval.sweep_train_sizes: must not be empty");
  if (c.eval.field_export > c.eval.field_realizations)
    throw ConfigError("eval.field_export: exceeds eval.field_realizations");
}

}  // namespace

StreetScenario RunConfig::street_scenario() const {
  return StreetScenario(layout, roi, base_stations);
}

CircularScenario RunConfig::circular_scenario() const {
  return CircularScenario::with_nearest_corner(circular.r_out_m, circular.roi_width_m,
                                               circular.roi_height_m, circular.r_min_m);
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, field] : registry()) out += key + " = " + field.get(*this) + "\n";
  return out;
}

std::string RunConfig::hash() const { return sha256_hex(canonical()); }

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig config;
  std::set<std::string> seen;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section + ": expected a [section]");
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      const auto it = registry().find(key);
      if (it == registry().end()) throw ConfigError(key + ": unknown key");
      it->second.set(config, key, value.data());
      seen.insert(key);
    }
  }
  for (const auto& [key, field] : registry())
    if (field.required && !seen.count(key)) throw ConfigError(key + ": missing required key");

  // Scenario defaults follow the layout unless given explicitly.
  if (!seen.count("scenario.roi")) config.roi = StreetScenario::default_roi(config.layout);
  if (!seen.count("scenario.bs"))
    config.base_stations = StreetScenario::default_base_stations(config.layout);
  validate(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  return parse_config(in);
}

std::string plan_mode_name(PlanMode mode) {
  switch (mode) {
    case PlanMode::CrossEntropy: return "ce";
    case PlanMode::Auc: return "auc";
    case PlanMode::Both: return "both";
    case PlanMode::TwoStage: return "two-stage";
  }
  return "?";
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot read");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

std::string placement_snippet(std::span<const Position> placement) {
  std::string out = "[scenario]\nbs = ";
  for (std::size_t i = 0; i < placement.size(); ++i) {
    if (i) out += "; ";
    out += fmt(placement[i].x) + ", " + fmt(placement[i].y);
  }
  return out + "\n";
}

}  // namespace irlv
