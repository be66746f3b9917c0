#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace irlv {

struct RocPoint {
  double p_fa = 0.0;
  double p_md = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Missed-detection vs false-alarm curve. Points are sorted by p_fa ascending
/// (p_md descending within equal p_fa), exact duplicates removed, and the
/// endpoints (0, 1) and (1, 0) are always present. A vertical run at a given
/// p_fa keeps both its ends so trapezoidal integration stays exact.
class RocCurve {
 public:
  RocCurve() : RocCurve(std::vector<RocPoint>{}) {}
  explicit RocCurve(std::vector<RocPoint> points);

  std::span<const RocPoint> points() const { return points_; }

  /// Lowest p_md reachable at p_fa, interpolating linearly between points.
  double p_md_at(double p_fa) const;

 private:
  std::vector<RocPoint> points_;
};

/// Operation tally for the complexity accounting.
struct OpCount {
  std::uint64_t comparisons = 0;
  std::uint64_t arithmetic = 0;
  std::uint64_t total() const { return comparisons + arithmetic; }
};

/// Sweeps lambda over every distinct score: a sample is declared outside (1)
/// when its score is strictly greater than lambda. Throws when either class is
/// missing. When `ops` is given, it receives the operation count.
RocCurve empirical_roc(std::span<const double> scores, std::span<const int> labels,
                       OpCount* ops = nullptr);

/// Trapezoidal integral of p_md over p_fa; lower is better.
double auc(const RocCurve& roc, OpCount* ops = nullptr);

/// n uniformly spaced points on [0, 1], endpoints included.
std::vector<double> uniform_grid(std::size_t n = 200);

/// Pointwise mean of p_md after interpolating every curve onto the grid.
RocCurve average_roc(std::span<const RocCurve> curves, std::span<const double> p_fa_grid);

/// Largest |p_md_a - p_md_b| over grid points within [lo, hi].
double max_vertical_gap(const RocCurve& a, const RocCurve& b, double lo, double hi,
                        std::size_t grid_points = 1001);

/// Multiplications and additions to run the network over tau test vectors.
std::uint64_t output_complexity(std::uint64_t n_ap, std::uint64_t n_h, std::uint64_t n_l,
                                std::uint64_t tau);

struct ComplexityReport {
  std::uint64_t c_out = 0;
  std::uint64_t c_roc = 0;
  std::uint64_t c_auc = 0;
  std::uint64_t c_test = 0;  // particles * (c_out + c_roc + c_auc)
};

ComplexityReport complexity_report(std::uint64_t n_ap, std::uint64_t n_h, std::uint64_t n_l,
                                   std::uint64_t tau, std::uint64_t particles,
                                   const OpCount& roc_ops, const OpCount& auc_ops);

/// CSV with header `p_fa,p_md`.
void write_roc_csv(std::ostream& out, const RocCurve& roc);
RocCurve read_roc_csv(std::istream& in);

}  // namespace irlv
