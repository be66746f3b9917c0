#include "irlv/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irlv {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

double clamp_score(double p) { return std::clamp(p, kScoreEpsilon, 1.0 - kScoreEpsilon); }

void validate_sizes(std::span<const int> sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs at least input and output layers");
  if (sizes.back() != 1) throw std::invalid_argument("network must end in a single output neuron");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
}

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

ConstMatrixMap feature_matrix(const Dataset& data) {
  return {data.features().data(), static_cast<Eigen::Index>(data.dim()),
          static_cast<Eigen::Index>(data.size())};
}

// Activations and deltas for one batch, reused across steps.
struct Workspace {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] is the input batch
  std::vector<Eigen::MatrixXd> deltas;
  Eigen::RowVectorXd targets;

  void resize(const Mlp& mlp, Eigen::Index batch) {
    const std::size_t layers = mlp.weights.size();
    activations.resize(layers + 1);
    deltas.resize(layers);
    for (std::size_t l = 0; l <= layers; ++l)
      activations[l].resize(mlp.layer_sizes[l], batch);
    for (std::size_t l = 0; l < layers; ++l) deltas[l].resize(mlp.layer_sizes[l + 1], batch);
    targets.resize(batch);
  }
};

void forward_batch(const Mlp& mlp, Workspace& ws) {
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    ws.activations[l + 1].noalias() = mlp.weights[l] * ws.activations[l];
    ws.activations[l + 1].colwise() += mlp.biases[l];
    ws.activations[l + 1] = ws.activations[l + 1].unaryExpr([](double z) { return sigmoid(z); });
  }
}

// Fills grad (already shaped) and returns the batch loss in bits.
double backward_batch(const Mlp& mlp, Workspace& ws, Gradient& grad) {
  forward_batch(mlp, ws);
  const std::size_t layers = mlp.weights.size();
  const Eigen::Index batch = ws.targets.size();
  const auto& out = ws.activations[layers];

  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double p = clamp_score(out(0, i));
    const double t = ws.targets[i];
    loss -= t * std::log2(p) + (1.0 - t) * std::log2(1.0 - p);
  }
  loss /= static_cast<double>(batch);

  // d(loss_bits)/dz at the output neuron is (p - t) / (B ln 2).
  const double scale = 1.0 / (static_cast<double>(batch) * std::numbers::ln2);
  ws.deltas[layers - 1] = (out - ws.targets) * scale;
  for (std::size_t l = layers; l-- > 0;) {
    grad.weights[l].noalias() = ws.deltas[l] * ws.activations[l].transpose();
    grad.biases[l] = ws.deltas[l].rowwise().sum();
    if (l > 0) {
      const auto& a = ws.activations[l];
      ws.deltas[l - 1].noalias() = mlp.weights[l].transpose() * ws.deltas[l];
      ws.deltas[l - 1].array() *= a.array() * (1.0 - a.array());
    }
  }
  return loss;
}

Gradient zero_gradient(const Mlp& mlp) {
  Gradient g;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(mlp.biases[l].size()));
  }
  return g;
}

void load_batch(const Dataset& data, std::span<const std::size_t> batch, Workspace& ws) {
  const auto x = feature_matrix(data);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    ws.activations[0].col(col) = x.col(static_cast<Eigen::Index>(batch[j]));
    ws.targets[col] = data.labels()[batch[j]];
  }
}

void check_input(const Mlp& mlp, std::size_t dim) {
  if (dim != mlp.input_size()) throw std::invalid_argument("feature dimension mismatch");
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layer_sizes != b.layer_sizes) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l)
    if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
  return true;
}

std::vector<int> make_layer_sizes(int inputs, int hidden_neurons, int hidden_layers) {
  std::vector<int> sizes{inputs};
  for (int l = 0; l < hidden_layers; ++l) sizes.push_back(hidden_neurons);
  sizes.push_back(1);
  return sizes;
}

Mlp init_mlp(std::span<const int> layer_sizes, std::uint64_t seed) {
  validate_sizes(layer_sizes);
  Mlp mlp;
  mlp.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return mlp;
}

double forward(const Mlp& mlp, std::span<const double> features) {
  check_input(mlp, features.size());
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(features.data(),
                                                        static_cast<Eigen::Index>(features.size()));
  for (std::size_t l = 0; l < mlp.weights.size(); ++l)
    y = (mlp.weights[l] * y + mlp.biases[l]).unaryExpr([](double z) { return sigmoid(z); });
  return clamp_score(y[0]);
}

std::vector<double> forward_all(const Mlp& mlp, const Dataset& dataset) {
  check_input(mlp, dataset.dim());
  Workspace ws;
  ws.resize(mlp, static_cast<Eigen::Index>(dataset.size()));
  ws.activations[0] = feature_matrix(dataset);
  forward_batch(mlp, ws);
  std::vector<double> scores(dataset.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = clamp_score(ws.activations.back()(0, static_cast<Eigen::Index>(i)));
  return scores;
}

double ce_loss(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("cross entropy of an empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = clamp_score(scores[i]);
    sum += labels[i] ? std::log2(p) : std::log2(1.0 - p);
  }
  return -sum / static_cast<double>(scores.size());
}

LossAndGradient backward(const Mlp& mlp, const Dataset& data, std::span<const std::size_t> batch) {
  check_input(mlp, data.dim());
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Workspace ws;
  ws.resize(mlp, static_cast<Eigen::Index>(batch.size()));
  load_batch(data, batch, ws);
  LossAndGradient result{0.0, zero_gradient(mlp)};
  result.loss_bits = backward_batch(mlp, ws, result.gradient);
  return result;
}

LossAndGradient backward(const Mlp& mlp, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return backward(mlp, data, all);
}

TrainResult train(Mlp mlp, const Dataset& train_set, const TrainConfig& config) {
  check_input(mlp, train_set.dim());
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (config.epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  const std::size_t n = train_set.size();
  const std::size_t batch = std::min(config.batch_size, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);
  Workspace ws;
  Workspace tail;
  ws.resize(mlp, static_cast<Eigen::Index>(batch));
  if (n % batch) tail.resize(mlp, static_cast<Eigen::Index>(n % batch));
  Gradient grad = zero_gradient(mlp);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      Workspace& w = count == batch ? ws : tail;
      load_batch(train_set, std::span(order).subspan(start, count), w);
      const double loss = backward_batch(mlp, w, grad);
      if (!std::isfinite(loss)) throw NumericError("training diverged");
      for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        mlp.weights[l] -= config.learning_rate * grad.weights[l];
        mlp.biases[l] -= config.learning_rate * grad.biases[l];
      }
    }
  }

  const double final_ce = ce_loss(forward_all(mlp, train_set), train_set.labels());
  if (!std::isfinite(final_ce)) throw NumericError("training diverged");
  return {std::move(mlp), final_ce};
}

int decide(double score, double lambda) { return score > lambda ? 1 : 0; }

double lambda_to_theta(double lambda, double prior0, double prior1) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  if (!(prior0 > 0.0 && prior1 > 0.0)) throw std::invalid_argument("priors must be positive");
  return (1.0 - lambda) / lambda * prior0 / prior1;
}

double posterior_from_llr(double llr_bits, double prior0, double prior1) {
  if (!(prior0 > 0.0 && prior1 > 0.0)) throw std::invalid_argument("priors must be positive");
  return 1.0 / (1.0 + prior1 / prior0 * std::exp2(-llr_bits));
}

// ---------------------------------------------------------------------------

namespace {
constexpr const char* kMlpMagic = "irlv-mlp";
constexpr int kMlpVersion = 1;

void put_number(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_mlp(std::ostream& out, const Mlp& mlp) {
  out << kMlpMagic << ' ' << kMlpVersion << '\n' << mlp.layer_sizes.size();
  for (int s : mlp.layer_sizes) out << ' ' << s;
  out << '\n';
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    const auto& w = mlp.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (c) out << ' ';
        put_number(out, w(r, c));
      }
      out << '\n';
    }
    for (Eigen::Index r = 0; r < mlp.biases[l].size(); ++r) {
      if (r) out << ' ';
      put_number(out, mlp.biases[l][r]);
    }
    out << '\n';
  }
}

Mlp read_mlp(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMlpMagic)
    throw std::runtime_error("not an irlv-mlp model file");
  if (version != kMlpVersion)
    throw std::runtime_error("unsupported model version " + std::to_string(version));
  std::size_t count = 0;
  if (!(in >> count) || count < 2 || count > 64) throw std::runtime_error("bad layer count");
  std::vector<int> sizes(count);
  for (int& s : sizes)
    if (!(in >> s)) throw std::runtime_error("bad layer sizes");
  validate_sizes(sizes);

  // Values are parsed with strtod so 17-digit output round-trips exactly.
  auto next = [&in] {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("truncated model file");
    return std::stod(tok);
  };
  Mlp mlp;
  mlp.layer_sizes = sizes;
  for (std::size_t l = 0; l + 1 < count; ++l) {
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = next();
    Eigen::VectorXd b(sizes[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = next();
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(std::move(b));
  }
  return mlp;
}

}  // namespace irlv
