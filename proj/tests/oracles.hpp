// Reference computations used as test oracles. They are deliberately written
// without the library's own routines.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "irlv/geometry.hpp"
#include "irlv/neuralnet.hpp"

namespace oracle {

/// Cross entropy in bits computed with plain loops over the parameters.
inline double cross_entropy(const irlv::Mlp& mlp, const irlv::Dataset& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> y(data.sample(i).begin(), data.sample(i).end());
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
      const auto& w = mlp.weights[l];
      std::vector<double> next(static_cast<std::size_t>(w.rows()));
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        double z = mlp.biases[l][r];
        for (Eigen::Index c = 0; c < w.cols(); ++c) z += w(r, c) * y[static_cast<std::size_t>(c)];
        next[static_cast<std::size_t>(r)] = 1.0 / (1.0 + std::exp(-z));
      }
      y = std::move(next);
    }
    const double p = y[0];
    total += data.labels()[i] ? -std::log2(p) : -std::log2(1.0 - p);
  }
  return total / static_cast<double>(data.size());
}

/// Central differences of cross_entropy over every parameter, ordered layer by
/// layer: weights column-major, then biases.
inline std::vector<double> numeric_gradient(irlv::Mlp mlp, const irlv::Dataset& data, double h = 1e-5) {
  std::vector<double> g;
  auto probe = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = cross_entropy(mlp, data);
    param = saved - h;
    const double down = cross_entropy(mlp, data);
    param = saved;
    g.push_back((up - down) / (2 * h));
  };
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    auto& w = mlp.weights[l];
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) probe(w(r, c));
    for (Eigen::Index r = 0; r < mlp.biases[l].size(); ++r) probe(mlp.biases[l][r]);
  }
  return g;
}

inline std::vector<double> flatten(const irlv::Gradient& grad) {
  std::vector<double> g;
  for (std::size_t l = 0; l < grad.weights.size(); ++l) {
    const auto& w = grad.weights[l];
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) g.push_back(w(r, c));
    for (Eigen::Index r = 0; r < grad.biases[l].size(); ++r) g.push_back(grad.biases[l][r]);
  }
  return g;
}

/// Angle of the circle of radius r about the origin that falls inside the
/// rectangle, from the exact crossings of the circle with the four edges.
inline double circle_rect_angle(double r, const irlv::Rectangle& rect) {
  constexpr double two_pi = 2 * std::numbers::pi;
  std::vector<double> cuts{0.0, two_pi};
  auto add = [&](double x, double y) {
    double a = std::atan2(y, x);
    if (a < 0) a += two_pi;
    cuts.push_back(a);
  };
  for (double x : {rect.min().x, rect.max().x})
    if (std::abs(x) <= r) {
      const double y = std::sqrt(r * r - x * x);
      for (double yy : {y, -y})
        if (yy >= rect.min().y && yy <= rect.max().y) add(x, yy);
    }
  for (double y : {rect.min().y, rect.max().y})
    if (std::abs(y) <= r) {
      const double x = std::sqrt(r * r - y * y);
      for (double xx : {x, -x})
        if (xx >= rect.min().x && xx <= rect.max().x) add(xx, y);
    }
  std::sort(cuts.begin(), cuts.end());
  double inside = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = (cuts[i] + cuts[i + 1]) / 2;
    if (rect.contains({r * std::cos(mid), r * std::sin(mid)})) inside += cuts[i + 1] - cuts[i];
  }
  return inside;
}

/// Trapezoid AUC of P_MD over P_FA from a plain threshold sweep: a sample is
/// declared outside when its score exceeds the threshold.
inline double sweep_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double n0 = 0;
  double n1 = 0;
  for (int t : labels) (t ? n1 : n0) += 1;
  std::vector<std::pair<double, double>> pts{{1.0, 0.0}};
  // Threshold below every score: everything declared outside.
  for (double lambda : thresholds) {
    double fa = 0;
    double md = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (labels[i] == 0 && scores[i] > lambda) fa += 1;
      if (labels[i] == 1 && scores[i] <= lambda) md += 1;
    }
    pts.emplace_back(fa / n0, md / n1);
  }
  pts.emplace_back(0.0, 1.0);
  std::sort(pts.begin(), pts.end(), [](auto a, auto b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  });
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    area += (pts[i + 1].first - pts[i].first) * (pts[i + 1].second + pts[i].second) / 2;
  return area;
}

}  // namespace oracle
