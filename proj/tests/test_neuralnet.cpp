#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "irlv/neuralnet.hpp"
#include "oracles.hpp"

using namespace irlv;

namespace {

Dataset random_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x;
  std::vector<int> t;
  std::vector<Position> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) x.push_back(uniform(rng, -2, 2));
    t.push_back(uniform(rng, 0, 1) < 0.5 ? 0 : 1);
  }
  return Dataset(dim, std::move(x), std::move(t), std::move(pos));
}

/// Two features, label 1 when x0 + x1 > 0, with a margin around the boundary.
Dataset separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x;
  std::vector<int> t;
  while (t.size() < n) {
    const double a = uniform(rng, -2, 2);
    const double b = uniform(rng, -2, 2);
    if (std::abs(a + b) < 0.2) continue;
    x.push_back(a);
    x.push_back(b);
    t.push_back(a + b > 0 ? 1 : 0);
  }
  return Dataset(2, std::move(x), std::move(t), std::vector<Position>(n));
}

}  // namespace

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0) == 0.5);
  CHECK(sigmoid(2) == doctest::Approx(1 / (1 + std::exp(-2.0))).epsilon(1e-15));
  CHECK(sigmoid(-800) >= 0.0);
  CHECK(sigmoid(800) <= 1.0);
}

TEST_CASE("layer sizes and initialization") {
  const auto sizes = make_layer_sizes(5, 8, 2);
  CHECK(sizes == std::vector<int>{5, 8, 8, 1});
  const Mlp a = init_mlp(sizes, 9);
  const Mlp b = init_mlp(sizes, 9);
  const Mlp c = init_mlp(sizes, 10);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.parameter_count() == 5 * 8 + 8 + 8 * 8 + 8 + 8 + 1);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    const double s = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    CHECK(a.weights[l].rows() == sizes[l + 1]);
    CHECK(a.weights[l].cols() == sizes[l]);
    CHECK(a.weights[l].cwiseAbs().maxCoeff() <= s);
    CHECK(a.biases[l].isZero(0.0));
  }
  CHECK_THROWS_AS(init_mlp(std::vector<int>{3, 2}, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_mlp(std::vector<int>{3, 0, 1}, 1), std::invalid_argument);
}

TEST_CASE("forward") {
  Mlp zero = init_mlp(make_layer_sizes(3, 4, 2), 1);
  for (auto& w : zero.weights) w.setZero();
  CHECK(forward(zero, std::vector<double>{1, -2, 3}) == 0.5);

  // No hidden layers: a single sigmoid of w * a.
  Mlp linear = init_mlp(std::vector<int>{1, 1}, 1);
  linear.weights[0](0, 0) = 0.7;
  CHECK(forward(linear, std::vector<double>{-1.3}) ==
        doctest::Approx(1 / (1 + std::exp(0.7 * 1.3))).epsilon(1e-15));

  // One hidden neuron, hand composed.
  Mlp chain = init_mlp(std::vector<int>{1, 1, 1}, 1);
  chain.weights[0](0, 0) = 2.0;
  chain.biases[0][0] = -1.0;
  chain.weights[1](0, 0) = -3.0;
  chain.biases[1][0] = 0.5;
  const double h = 1 / (1 + std::exp(-(2.0 * 0.25 - 1.0)));
  CHECK(forward(chain, std::vector<double>{0.25}) ==
        doctest::Approx(1 / (1 + std::exp(-(-3.0 * h + 0.5)))).epsilon(1e-15));

  CHECK_THROWS_AS(forward(chain, std::vector<double>{1, 2}), std::invalid_argument);

  const Mlp m = init_mlp(make_layer_sizes(4, 8, 2), 3);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a(4);
    for (double& v : a) v = uniform(rng, -1e6, 1e6);
    const double t = forward(m, a);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }
  const Dataset d = random_dataset(50, 4, 2);
  const auto all = forward_all(m, d);
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(all[i] == doctest::Approx(forward(m, d.sample(i))).epsilon(1e-14));
}

TEST_CASE("cross entropy") {
  CHECK(ce_loss(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}) == 1.0);
  CHECK(ce_loss(std::vector<double>{0.25}, std::vector<int>{1}) == doctest::Approx(2.0));
  CHECK(ce_loss(std::vector<double>{0.0, 1.0}, std::vector<int>{0, 1}) < 1e-10);
  // Clamped scores keep the loss finite.
  CHECK(std::isfinite(ce_loss(std::vector<double>{1.0, 0.0}, std::vector<int>{0, 1})));
  // Constant score at the label mean gives the label entropy.
  const std::vector<int> labels{1, 0, 0, 0};
  const double h = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  CHECK(ce_loss(std::vector<double>(4, 0.25), labels) == doctest::Approx(h).epsilon(1e-14));
  CHECK_THROWS_AS(ce_loss(std::vector<double>{}, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("backward matches finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int inputs = 1 + static_cast<int>(rng() % 5);
    const int hidden = 1 + static_cast<int>(rng() % 8);
    const int layers = static_cast<int>(rng() % 3);
    const Mlp m = init_mlp(make_layer_sizes(inputs, hidden, layers), rng());
    const Dataset d = random_dataset(16, static_cast<std::size_t>(inputs), rng());
    const auto bp = oracle::flatten(backward(m, d).gradient);
    const auto fd = oracle::numeric_gradient(m, d);
    REQUIRE(bp.size() == fd.size());
    for (std::size_t j = 0; j < bp.size(); ++j) {
      const double scale = std::max({std::abs(bp[j]), std::abs(fd[j]), 1e-4});
      CHECK(std::abs(bp[j] - fd[j]) / scale < 1e-5);
    }
    CHECK(backward(m, d).loss_bits == doctest::Approx(oracle::cross_entropy(m, d)).epsilon(1e-12));
  }
}

TEST_CASE("gradient averages over batches") {
  const Mlp m = init_mlp(make_layer_sizes(3, 5, 2), 4);
  const Dataset d = random_dataset(30, 3, 8);
  std::vector<std::size_t> a(10);
  std::vector<std::size_t> b(20);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 10);
  const auto ga = oracle::flatten(backward(m, d, a).gradient);
  const auto gb = oracle::flatten(backward(m, d, b).gradient);
  const auto gall = oracle::flatten(backward(m, d).gradient);
  for (std::size_t j = 0; j < gall.size(); ++j)
    CHECK(gall[j] == doctest::Approx((10 * ga[j] + 20 * gb[j]) / 30).epsilon(1e-12));
}

TEST_CASE("gradient vanishes on a perfectly fit batch") {
  // Saturated output that matches every label.
  Mlp m = init_mlp(std::vector<int>{1, 1}, 1);
  m.weights[0](0, 0) = 60.0;
  const Dataset d(1, {1.0, -1.0}, {1, 0}, std::vector<Position>(2));
  const auto g = oracle::flatten(backward(m, d).gradient);
  for (double v : g) CHECK(std::abs(v) < 1e-20);
}

TEST_CASE("training") {
  const Dataset d = separable(2000, 3);
  const Mlp init = init_mlp(make_layer_sizes(2, 4, 1), 5);
  const double before = ce_loss(forward_all(init, d), d.labels());
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.5;
  const TrainResult r = train(init, d, cfg);
  CHECK(r.final_ce_bits <= before);
  CHECK(r.final_ce_bits == doctest::Approx(ce_loss(forward_all(r.model, d), d.labels())));
  const auto scores = forward_all(r.model, d);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) correct += decide(scores[i], 0.5) == d.labels()[i];
  CHECK(static_cast<double>(correct) / static_cast<double>(d.size()) >= 0.99);

  // Deterministic for fixed seeds.
  CHECK(train(init, d, cfg).model == r.model);

  cfg.epochs = 0;
  CHECK(train(init, d, cfg).model == init);
  cfg.epochs = 2;
  cfg.batch_size = 1'000'000;  // clamped to the set size
  CHECK_NOTHROW(train(init, d, cfg));
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(train(init, d, cfg), std::invalid_argument);
}

TEST_CASE("decisions and thresholds") {
  CHECK(decide(0.7, 0.5) == 1);
  CHECK(decide(0.5, 0.5) == 0);
  CHECK(decide(1 - 1e-12, 1.0) == 0);
  // Raising lambda never turns a 0 into a 1.
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double s = uniform(rng, 0, 1);
    const double l1 = uniform(rng, 0, 1);
    const double l2 = uniform(rng, l1, 1);
    CHECK(decide(s, l2) <= decide(s, l1));
  }
  CHECK(lambda_to_theta(0.5, 0.5, 0.5) == 1.0);
  CHECK(lambda_to_theta(0.25, 0.5, 0.5) == doctest::Approx(3.0));
  CHECK(lambda_to_theta(1 - 1e-9, 0.5, 0.5) < 1e-8);
  CHECK_THROWS_AS(lambda_to_theta(0.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(lambda_to_theta(1.0, 0.5, 0.5), std::invalid_argument);

  CHECK(posterior_from_llr(0, 0.5, 0.5) == 0.5);
  CHECK(posterior_from_llr(1, 0.5, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(posterior_from_llr(1024, 0.5, 0.5) == 1.0);
  CHECK(posterior_from_llr(-1024, 0.5, 0.5) < 1e-300);
  CHECK(posterior_from_llr(0, 0.8, 0.2) == doctest::Approx(0.8));
}

TEST_CASE("model files round-trip") {
  const Mlp m = init_mlp(make_layer_sizes(5, 8, 2), 12);
  std::stringstream s;
  write_mlp(s, m);
  CHECK(read_mlp(s) == m);
  std::stringstream bad("irlv-mlp 9\n");
  CHECK_THROWS(read_mlp(bad));
}
