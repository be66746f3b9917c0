#include "irlv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irlv {

RocCurve::RocCurve(std::vector<RocPoint> points) : points_(std::move(points)) {
  for (const RocPoint& p : points_)
    if (!(p.p_fa >= 0.0 && p.p_fa <= 1.0 && p.p_md >= 0.0 && p.p_md <= 1.0))
      throw std::invalid_argument("ROC coordinates must lie in [0, 1]");
  points_.push_back({0.0, 1.0});
  points_.push_back({1.0, 0.0});
  std::sort(points_.begin(), points_.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.p_fa != b.p_fa ? a.p_fa < b.p_fa : a.p_md > b.p_md;
  });
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  // Lower envelope: p_md never rises with p_fa.
  for (std::size_t i = 1; i < points_.size(); ++i)
    points_[i].p_md = std::min(points_[i].p_md, points_[i - 1].p_md);
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

double RocCurve::p_md_at(double p_fa) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), p_fa,
                                   [](double f, const RocPoint& p) { return f < p.p_fa; });
  if (it == points_.begin()) return points_.front().p_md;
  const RocPoint& lo = *(it - 1);
  if (it == points_.end()) return lo.p_md;
  const RocPoint& hi = *it;
  const double t = (p_fa - lo.p_fa) / (hi.p_fa - lo.p_fa);
  return lo.p_md + t * (hi.p_md - lo.p_md);
}

RocCurve empirical_roc(std::span<const double> scores, std::span<const int> labels, OpCount* ops) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  std::size_t n1 = 0;
  for (int t : labels) n1 += t == 1;
  const std::size_t n0 = labels.size() - n1;
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("ROC needs samples of both classes");

  OpCount count;
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    ++count.comparisons;
    return scores[a] > scores[b];
  });

  // Lowering lambda past each group of tied scores flips that group to 1.
  std::vector<RocPoint> points;
  points.push_back({0.0, 1.0});
  std::size_t fa = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      ++count.comparisons;
      (labels[order[i]] ? hits : fa) += 1;
      ++count.arithmetic;
    }
    points.push_back({static_cast<double>(fa) / static_cast<double>(n0),
                      static_cast<double>(n1 - hits) / static_cast<double>(n1)});
    count.arithmetic += 3;
  }
  if (ops) *ops = count;
  return RocCurve(std::move(points));
}

double auc(const RocCurve& roc, OpCount* ops) {
  const auto pts = roc.points();
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].p_fa - pts[i - 1].p_fa) * (pts[i].p_md + pts[i - 1].p_md) / 2.0;
  if (ops) {
    ops->comparisons = 0;
    ops->arithmetic = 5 * (pts.size() - 1);
  }
  return std::clamp(area, 0.0, 1.0);
}

std::vector<double> uniform_grid(std::size_t n) {
  if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

RocCurve average_roc(std::span<const RocCurve> curves, std::span<const double> p_fa_grid) {
  if (curves.empty()) throw std::invalid_argument("average of zero ROC curves");
  std::vector<RocPoint> points;
  points.reserve(p_fa_grid.size());
  for (double f : p_fa_grid) {
    double sum = 0.0;
    for (const RocCurve& c : curves) sum += c.p_md_at(f);
    points.push_back({f, sum / static_cast<double>(curves.size())});
  }
  return RocCurve(std::move(points));
}

double max_vertical_gap(const RocCurve& a, const RocCurve& b, double lo, double hi,
                        std::size_t grid_points) {
  if (!(lo <= hi) || grid_points < 2) throw std::invalid_argument("bad gap range");
  double gap = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double f = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    gap = std::max(gap, std::abs(a.p_md_at(f) - b.p_md_at(f)));
  }
  return gap;
}

std::uint64_t output_complexity(std::uint64_t n_ap, std::uint64_t n_h, std::uint64_t n_l,
                                std::uint64_t tau) {
  return (2 * n_ap * n_h + 2 * n_h * n_h * n_l + 2 * n_h) * tau;
}

ComplexityReport complexity_report(std::uint64_t n_ap, std::uint64_t n_h, std::uint64_t n_l,
                                   std::uint64_t tau, std::uint64_t particles,
                                   const OpCount& roc_ops, const OpCount& auc_ops) {
  ComplexityReport r;
  r.c_out = output_complexity(n_ap, n_h, n_l, tau);
  r.c_roc = roc_ops.total();
  r.c_auc = auc_ops.total();
  r.c_test = particles * (r.c_out + r.c_roc + r.c_auc);
  return r;
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "p_fa,p_md\n";
  char buf[64];
  for (const RocPoint& p : roc.points()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.p_fa, p.p_md);
    out << buf;
  }
}

RocCurve read_roc_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "p_fa,p_md") throw std::runtime_error("bad ROC CSV header");
  std::vector<RocPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed ROC CSV row");
    points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return RocCurve(std::move(points));
}

}  // namespace irlv
