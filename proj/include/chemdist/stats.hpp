#pragma once

#include <cstdint>
#include <vector>

namespace chemdist {

// One-pass mean and sample variance.
class Welford {
 public:
  void add(double x);
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  // Sample variance (n - 1 denominator); 0 below two values.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Type-7 quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Least squares y = intercept + slope x. Fewer than two distinct x give r2 = 0.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct SurvivalCount {
  double t = 0.0;
  std::int64_t survivors = 0;
  std::int64_t total = 0;
};

// Fit of log(survivors / total) against t over the points with at least
// min_survivors survivors.
LinearFit log_survival_fit(const std::vector<SurvivalCount>& rows, std::int64_t min_survivors = 30);

}  // namespace chemdist
