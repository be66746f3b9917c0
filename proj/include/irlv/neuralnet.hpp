#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "irlv/dataset.hpp"

namespace irlv {

/// Scores are clamped to [kScoreEpsilon, 1 - kScoreEpsilon] before any log.
inline constexpr double kScoreEpsilon = 1e-12;

double sigmoid(double z);

/// Fully connected sigmoid network. layer_sizes = {inputs, hidden..., 1}; the
/// output neuron's pre-activation goes through exactly one sigmoid.
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is layer_sizes[l+1] x layer_sizes[l]
  std::vector<Eigen::VectorXd> biases;   // biases[l] has layer_sizes[l+1] entries

  std::size_t input_size() const { return static_cast<std::size_t>(layer_sizes.front()); }
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp& a, const Mlp& b);
};

/// Gradient with the same shapes as the network parameters.
struct Gradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// {inputs, hidden x hidden_layers, 1}.
std::vector<int> make_layer_sizes(int inputs, int hidden_neurons, int hidden_layers);

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Mlp init_mlp(std::span<const int> layer_sizes, std::uint64_t seed);

/// Score t~ in (0, 1) for one feature vector. Throws on dimension mismatch.
double forward(const Mlp& mlp, std::span<const double> features);

/// Scores for every sample of the dataset.
std::vector<double> forward_all(const Mlp& mlp, const Dataset& dataset);

/// Empirical cross entropy in bits.
double ce_loss(std::span<const double> scores, std::span<const int> labels);

struct LossAndGradient {
  double loss_bits = 0.0;
  Gradient gradient;
};

/// Exact gradient of the batch cross entropy (bits) over the given sample indices.
LossAndGradient backward(const Mlp& mlp, const Dataset& data, std::span<const std::size_t> batch);
/// Gradient over the whole dataset.
LossAndGradient backward(const Mlp& mlp, const Dataset& data);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 200;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;  // mini-batch shuffling
};

struct TrainResult {
  Mlp model;
  double final_ce_bits = 0.0;
};

/// Mini-batch gradient descent on the cross entropy. Throws
/// NumericError("training diverged") when the loss becomes NaN.
TrainResult train(Mlp mlp, const Dataset& train_set, const TrainConfig& config);

/// 1 if score > lambda, else 0.
int decide(double score, double lambda);

/// Likelihood-ratio threshold equivalent to the score threshold lambda:
/// (1 - lambda) / lambda * prior0 / prior1.
double lambda_to_theta(double lambda, double prior0, double prior1);

/// p(H0 | a) from the LLR log2 p(a|H0)/p(a|H1) in bits.
double posterior_from_llr(double llr_bits, double prior0, double prior1);

/// Versioned text format: layer sizes, then per layer row-major weights and
/// biases, 17 significant digits.
void write_mlp(std::ostream& out, const Mlp& mlp);
Mlp read_mlp(std::istream& in);

}  // namespace irlv
