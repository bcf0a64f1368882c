#pragma once

// Production-rate accounting, class weights and exact binomial intervals.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "gantrylab/errors.hpp"

namespace gantrylab {

struct RunAccounting {
  double t_p = 0.0;  // imaging, including robot motion (s)
  double t_d = 0.0;  // bulk download (s)
  double t_c = 0.0;  // cropping (s)
  std::size_t n_masters = 0;
  std::size_t n_subimages = 0;

  void validate() const {
    if (t_p < 0 || t_d < 0 || t_c < 0) throw DomainError("RunAccounting: negative duration");
  }
};

/// Average seconds per master image: (t_p + t_d) / N_m.
inline double master_rate(const RunAccounting& acc) {
  acc.validate();
  if (acc.n_masters == 0) throw DomainError("master_rate: no master images");
  return (acc.t_p + acc.t_d) / static_cast<double>(acc.n_masters);
}

/// Average seconds per subimage: (t_p + t_d + t_c) / N_s.
inline double subimage_rate(const RunAccounting& acc) {
  acc.validate();
  if (acc.n_subimages == 0) throw DomainError("subimage_rate: no subimages");
  return (acc.t_p + acc.t_d + acc.t_c) / static_cast<double>(acc.n_subimages);
}

using ClassCounts = std::map<std::string, std::int64_t>;

/// Unnormalized inverse-frequency weights, total / count per class.
inline std::map<std::string, double> class_weights(const ClassCounts& counts) {
  if (counts.empty()) throw DomainError("class_weights: no classes");
  double total = 0.0;
  for (const auto& [name, n] : counts) {
    if (n < 1) throw DomainError("class_weights: class '" + name + "' has no images");
    total += static_cast<double>(n);
  }
  std::map<std::string, double> w;
  for (const auto& [name, n] : counts) w[name] = total / static_cast<double>(n);
  return w;
}

namespace stats {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

/// Inverse of I_x(a, b) in x by bisection; |error| <= tol.
inline double beta_quantile(double p, double a, double b, double tol = 1e-12) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("beta_quantile: p outside [0, 1]");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (incomplete_beta(a, b, mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace stats

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
inline Interval clopper_pearson(std::int64_t k, std::int64_t n, double alpha = 0.05) {
  if (n < 1 || k < 0 || k > n) throw DomainError("clopper_pearson: need 0 <= k <= n, n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("clopper_pearson: alpha outside (0, 1)");
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  Interval ci;
  ci.lower = k == 0 ? 0.0 : stats::beta_quantile(alpha / 2.0, kd, nd - kd + 1.0);
  ci.upper = k == n ? 1.0 : stats::beta_quantile(1.0 - alpha / 2.0, kd + 1.0, nd - kd);
  return ci;
}

}  // namespace gantrylab
