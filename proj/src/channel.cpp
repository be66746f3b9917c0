#include "irlv/channel.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace irlv {

void ChannelParams::validate() const {
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  if (!(sigma_db >= 0.0)) throw std::invalid_argument("shadowing std must be nonnegative");
  if (!(decorrelation_m > 0.0)) throw std::invalid_argument("decorrelation distance must be positive");
  if (!(bs_height_m > 0.0)) throw std::invalid_argument("antenna height must be positive");
  if (!(speed_of_light > 0.0)) throw std::invalid_argument("speed of light must be positive");
  if (!(grid_spacing_m > 0.0)) throw std::invalid_argument("grid spacing must be positive");
}

double path_loss_los_db(double d, const ChannelParams& params) {
  if (!(d > 0.0)) throw std::invalid_argument("nonpositive distance");
  return 20.0 * std::log10(params.carrier_hz * 4.0 * std::numbers::pi * d / params.speed_of_light);
}

double path_loss_nlos_db(double d, const ChannelParams& params) {
  if (!(d > 0.0)) throw std::invalid_argument("nonpositive distance");
  const double h = params.bs_height_m;
  if (!(h > 0.0)) throw std::invalid_argument("nonpositive antenna height");
  const double f_mhz = params.carrier_hz / 1e6;
  return 40.0 * (1.0 - 4e-3 * h) * std::log10(d / 1e3) - 18.0 * std::log10(h) +
         21.0 * std::log10(f_mhz) + 80.0;
}

// ---------------------------------------------------------------------------

ShadowingField::ShadowingField(Position origin, double spacing, std::size_t nx, std::size_t ny,
                               std::vector<double> values, double sigma_db,
                               double decorrelation_m, std::uint64_t seed)
    : origin_(origin),
      spacing_(spacing),
      nx_(nx),
      ny_(ny),
      values_(std::move(values)),
      sigma_db_(sigma_db),
      decorrelation_m_(decorrelation_m),
      seed_(seed) {
  if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("field grid needs at least 2x2 nodes");
  if (!(spacing_ > 0.0)) throw std::invalid_argument("field spacing must be positive");
  if (values_.size() != nx_ * ny_) throw std::invalid_argument("field value count mismatch");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("field values must be finite");
}

namespace {

std::size_t grid_nodes(double extent, double spacing) {
  return static_cast<std::size_t>(std::ceil(extent / spacing - 1e-9)) + 1;
}

// Smallest 2^a 3^b 5^c >= n.
std::size_t fft_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftBuffer {
  explicit FftBuffer(std::size_t rows, std::size_t cols) : size(rows * cols) {
    data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size));
    if (!data) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), data, data,
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(data);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  void execute() { fftw_execute(plan); }

  std::size_t size;
  fftw_complex* data = nullptr;
  fftw_plan plan = nullptr;
};

// Square roots of the scaled circulant eigenvalues, sqrt(lambda / M), for a torus
// of mx x my nodes embedding the target grid.
struct Embedding {
  std::size_t mx = 0;
  std::size_t my = 0;
  std::vector<double> sqrt_eigen;
};

Embedding build_embedding(std::size_t nx, std::size_t ny, double spacing, double sigma,
                          double dc) {
  std::size_t mx = fft_size(2 * (nx - 1));
  std::size_t my = fft_size(2 * (ny - 1));
  constexpr int kMaxGrowth = 4;
  for (int attempt = 0;; ++attempt) {
    FftBuffer buf(my, mx);
    for (std::size_t j = 0; j < my; ++j) {
      const double dy = spacing * static_cast<double>(std::min(j, my - j));
      for (std::size_t i = 0; i < mx; ++i) {
        const double dx = spacing * static_cast<double>(std::min(i, mx - i));
        buf.data[j * mx + i][0] = sigma * sigma * std::exp(-std::hypot(dx, dy) / dc);
        buf.data[j * mx + i][1] = 0.0;
      }
    }
    buf.execute();
    double max_eig = 0.0;
    double min_eig = 0.0;
    for (std::size_t k = 0; k < buf.size; ++k) {
      max_eig = std::max(max_eig, buf.data[k][0]);
      min_eig = std::min(min_eig, buf.data[k][0]);
    }
    // Exponential covariance embeds nonnegatively on large enough tori; otherwise
    // grow the torus and finally clip the residual negative spectrum.
    if (min_eig >= -1e-9 * max_eig || attempt == kMaxGrowth) {
      Embedding e{mx, my, std::vector<double>(buf.size)};
      const double m = static_cast<double>(buf.size);
      for (std::size_t k = 0; k < buf.size; ++k)
        e.sqrt_eigen[k] = std::sqrt(std::max(buf.data[k][0], 0.0) / m);
      return e;
    }
    mx = fft_size(mx + mx / 2);
    my = fft_size(my + my / 2);
  }
}

std::shared_ptr<const Embedding> cached_embedding(std::size_t nx, std::size_t ny, double spacing,
                                                  double sigma, double dc) {
  using Key = std::tuple<std::size_t, std::size_t, double, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Embedding>> cache;
  const Key key{nx, ny, spacing, sigma, dc};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto e = std::make_shared<const Embedding>(build_embedding(nx, ny, spacing, sigma, dc));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(e)).first->second;
}

std::vector<double> sample_dense(std::size_t nx, std::size_t ny, double spacing, double sigma,
                                 double dc, Rng& rng) {
  const std::size_t n = nx * ny;
  Eigen::MatrixXd cov(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      const double dx = spacing * (static_cast<double>(a % nx) - static_cast<double>(b % nx));
      const double dy = spacing * (static_cast<double>(a / nx) - static_cast<double>(b / nx));
      cov(a, b) = cov(b, a) = sigma * sigma * std::exp(-std::hypot(dx, dy) / dc);
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("shadowing covariance not positive definite");
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = normal(rng);
  const Eigen::VectorXd v = llt.matrixL() * z;
  return {v.data(), v.data() + n};
}

std::vector<double> sample_circulant(std::size_t nx, std::size_t ny, double spacing, double sigma,
                                     double dc, Rng& rng) {
  const auto embedding = cached_embedding(nx, ny, spacing, sigma, dc);
  FftBuffer buf(embedding->my, embedding->mx);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < buf.size; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    buf.data[k][0] = embedding->sqrt_eigen[k] * re;
    buf.data[k][1] = embedding->sqrt_eigen[k] * im;
  }
  buf.execute();
  std::vector<double> values(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) values[j * nx + i] = buf.data[j * embedding->mx + i][0];
  return values;
}

}  // namespace

ShadowingField generate_shadowing_field(const Rectangle& extent, const ChannelParams& params,
                                        std::uint64_t seed) {
  params.validate();
  const double h = params.grid_spacing_m;
  if (h > params.decorrelation_m / 5.0 * (1.0 + 1e-12))
    throw std::invalid_argument("grid too coarse for d_c");
  const std::size_t nx = std::max<std::size_t>(grid_nodes(extent.width(), h), 2);
  const std::size_t ny = std::max<std::size_t>(grid_nodes(extent.height(), h), 2);

  std::vector<double> values;
  if (params.sigma_db == 0.0) {
    values.assign(nx * ny, 0.0);
  } else {
    Rng rng(seed);
    constexpr std::size_t kDenseLimit = 2500;
    values = nx * ny <= kDenseLimit
                 ? sample_dense(nx, ny, h, params.sigma_db, params.decorrelation_m, rng)
                 : sample_circulant(nx, ny, h, params.sigma_db, params.decorrelation_m, rng);
  }
  return {extent.min(), h, nx, ny, std::move(values), params.sigma_db, params.decorrelation_m, seed};
}

std::vector<ShadowingField> generate_shadowing_fields(const Scenario& scenario,
                                                      const ChannelParams& params,
                                                      std::uint64_t seed) {
  std::vector<ShadowingField> fields;
  const std::size_t n = scenario.base_stations().size();
  fields.reserve(n);
  for (std::size_t bs = 0; bs < n; ++bs)
    fields.push_back(generate_shadowing_field(scenario.bounds(), params, derive_seed(seed, bs)));
  return fields;
}

double shadowing_at(const ShadowingField& field, Position pos) {
  const double fx = (pos.x - field.origin().x) / field.spacing();
  const double fy = (pos.y - field.origin().y) / field.spacing();
  const double max_x = static_cast<double>(field.nx() - 1);
  const double max_y = static_cast<double>(field.ny() - 1);
  constexpr double kSlack = 1e-9;
  if (!(fx >= -kSlack && fx <= max_x + kSlack && fy >= -kSlack && fy <= max_y + kSlack))
    throw std::out_of_range("position outside shadowing grid");
  const double cx = std::clamp(fx, 0.0, max_x);
  const double cy = std::clamp(fy, 0.0, max_y);
  const auto ix = std::min(static_cast<std::size_t>(cx), field.nx() - 2);
  const auto iy = std::min(static_cast<std::size_t>(cy), field.ny() - 2);
  const double tx = cx - static_cast<double>(ix);
  const double ty = cy - static_cast<double>(iy);
  const double v00 = field.node(ix, iy);
  const double v10 = field.node(ix + 1, iy);
  const double v01 = field.node(ix, iy + 1);
  const double v11 = field.node(ix + 1, iy + 1);
  return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
}

void attenuation_into(const Scenario& scenario, std::span<const ShadowingField> fields,
                      const ChannelParams& params, Position ue, std::span<double> out) {
  const auto stations = scenario.base_stations();
  if (fields.size() != stations.size())
    throw std::invalid_argument("one shadowing field per base station required");
  if (out.size() != stations.size()) throw std::invalid_argument("output size mismatch");
  for (std::size_t n = 0; n < stations.size(); ++n) {
    const double d = std::max(distance(ue, stations[n]), kMinLinkDistance);
    const double pl = scenario.los(ue, n) ? path_loss_los_db(d, params) : path_loss_nlos_db(d, params);
    out[n] = pl + (fields[n].sigma_db() == 0.0 ? 0.0 : shadowing_at(fields[n], ue));
  }
}

std::vector<double> attenuation_vector(const Scenario& scenario,
                                       std::span<const ShadowingField> fields,
                                       const ChannelParams& params, Position ue) {
  std::vector<double> out(scenario.base_stations().size());
  attenuation_into(scenario, fields, params, ue, out);
  return out;
}

void accumulate_lag_products(const ShadowingField& field, std::size_t max_lag_nodes,
                             std::vector<double>& sums, std::vector<std::uint64_t>& counts) {
  sums.resize(std::max(sums.size(), max_lag_nodes + 1), 0.0);
  counts.resize(std::max(counts.size(), max_lag_nodes + 1), 0);
  const std::size_t nx = field.nx();
  const std::size_t ny = field.ny();
  for (std::size_t m = 0; m <= max_lag_nodes; ++m) {
    double s = 0.0;
    std::uint64_t c = 0;
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix + m < nx; ++ix, ++c) s += field.node(ix, iy) * field.node(ix + m, iy);
    for (std::size_t iy = 0; iy + m < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix, ++c) s += field.node(ix, iy) * field.node(ix, iy + m);
    sums[m] += s;
    counts[m] += c;
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr char kBinaryMagic[8] = {'I', 'R', 'L', 'V', 'F', 'L', 'D', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated field file");
  return v;
}

}  // namespace

void write_field_csv(std::ostream& out, const ShadowingField& field) {
  out << "origin_x,origin_y,spacing,nx,ny,sigma_db,decorrelation_m,seed\n";
  out << format_double(field.origin().x) << ',' << format_double(field.origin().y) << ','
      << format_double(field.spacing()) << ',' << field.nx() << ',' << field.ny() << ','
      << format_double(field.sigma_db()) << ',' << format_double(field.decorrelation_m()) << ','
      << field.seed() << '\n';
  for (std::size_t j = 0; j < field.ny(); ++j) {
    for (std::size_t i = 0; i < field.nx(); ++i) {
      if (i) out << ',';
      out << format_double(field.node(i, j));
    }
    out << '\n';
  }
}

ShadowingField read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("origin_x,", 0) != 0)
    throw std::runtime_error("missing field CSV header");
  if (!std::getline(in, line)) throw std::runtime_error("missing field CSV metadata");
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream meta(line);
  double ox, oy, spacing, sigma, dc;
  std::size_t nx, ny;
  std::uint64_t seed;
  if (!(meta >> ox >> oy >> spacing >> nx >> ny >> sigma >> dc >> seed))
    throw std::runtime_error("malformed field CSV metadata");
  std::vector<double> values;
  values.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated field CSV");
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
  }
  return {{ox, oy}, spacing, nx, ny, std::move(values), sigma, dc, seed};
}

void write_field_binary(std::ostream& out, const ShadowingField& field) {
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  put(out, field.origin().x);
  put(out, field.origin().y);
  put(out, field.spacing());
  put<std::uint64_t>(out, field.nx());
  put<std::uint64_t>(out, field.ny());
  put(out, field.sigma_db());
  put(out, field.decorrelation_m());
  put<std::uint64_t>(out, field.seed());
  out.write(reinterpret_cast<const char*>(field.values().data()),
            static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

ShadowingField read_field_binary(std::istream& in) {
  char magic[sizeof kBinaryMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kBinaryMagic, sizeof magic) != 0)
    throw std::runtime_error("not a binary field file");
  const double ox = get<double>(in);
  const double oy = get<double>(in);
  const double spacing = get<double>(in);
  const auto nx = static_cast<std::size_t>(get<std::uint64_t>(in));
  const auto ny = static_cast<std::size_t>(get<std::uint64_t>(in));
  const double sigma = get<double>(in);
  const double dc = get<double>(in);
  const auto seed = get<std::uint64_t>(in);
  std::vector<double> values(nx * ny);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double))))
    throw std::runtime_error("truncated field file");
  return {{ox, oy}, spacing, nx, ny, std::move(values), sigma, dc, seed};
}

}  // namespace irlv
