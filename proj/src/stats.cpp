#include "chemdist/stats.hpp"

#include <algorithm>
#include <cmath>

#include "chemdist/errors.hpp"

namespace chemdist {

void Welford::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::InsufficientReps, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.points = x.size();
  if (x.size() != y.size() || x.size() < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

LinearFit log_survival_fit(const std::vector<SurvivalCount>& rows, std::int64_t min_survivors) {
  std::vector<double> x, y;
  for (const SurvivalCount& r : rows) {
    if (r.survivors < min_survivors || r.total <= 0) continue;
    x.push_back(r.t);
    y.push_back(std::log(static_cast<double>(r.survivors) / static_cast<double>(r.total)));
  }
  return linear_fit(x, y);
}

}  // namespace chemdist
