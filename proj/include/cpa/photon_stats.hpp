#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cpa/error.hpp"

// Photocounting statistics for an array of N on-off detectors under uniform
// illumination: P(k|m) = C(N,k)/N^m sum_l (-1)^l C(k,l) [N - (N-k+l) eta]^m.
//
// The alternating sum cancels catastrophically when k and m are both large
// (the positive terms can exceed the result by ~20 orders of magnitude at
// N = 100, m = k = 50), so evaluation switches to an exactly equivalent
// absorb-one-photon-at-a-time recurrence whenever the direct sum's largest
// term would cost more than ~1e-13 of absolute accuracy.

namespace cpa::stats {

namespace detail {

constexpr double kDirectTermLimit = 1e3;

// stable full row P(0..N | m photons): photons land uniformly; a photon on an
// unfired detector fires it with probability eta
inline std::vector<double> click_row(int m, int n_det, double eta) {
  std::vector<double> p(static_cast<std::size_t>(n_det) + 1, 0.0);
  p[0] = 1.0;
  double n = n_det;
  int top = 0;  // highest reachable click count so far
  for (int photon = 0; photon < m; ++photon) {
    int new_top = std::min(top + 1, n_det);
    for (int k = new_top; k >= 0; --k) {
      double stay = (k + (n - k) * (1.0 - eta)) / n;
      double from_below = (k > 0) ? p[static_cast<std::size_t>(k) - 1] * (n - k + 1) * eta / n : 0.0;
      p[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)] * stay + from_below;
    }
    top = new_top;
  }
  return p;
}

inline void check_click_args(int k, int m, int n_det, double eta) {
  require(n_det >= 1, "invalid-argument", "detector count must be >= 1");
  require(k >= 0 && k <= n_det, "invalid-argument", "click count must lie in [0, N]");
  require(m >= 0, "invalid-argument", "photon number must be >= 0");
  require(eta >= 0.0 && eta <= 1.0, "invalid-argument", "efficiency must lie in [0, 1]");
}

}  // namespace detail

/// P(k clicks | m photons) for N on-off detectors of efficiency eta.
inline double click_probability(int k, int m, int n_det, double eta) {
  detail::check_click_args(k, m, n_det, eta);
  if (k > m) return 0.0;  // no dark counts: never more clicks than photons

  // direct alternating sum, with binomials by multiplicative recurrence
  double n = n_det;
  double binom_nk = 1.0;
  for (int i = 0; i < k; ++i) binom_nk *= (n - i) / (i + 1);
  double sum = 0.0, comp = 0.0, max_term = 0.0;  // Neumaier-compensated
  double binom_kl = 1.0;
  for (int l = 0; l <= k; ++l) {
    double base = (n - (n - k + l) * eta) / n;
    double term = binom_nk * binom_kl * std::pow(base, m);
    if (l & 1) term = -term;
    max_term = std::max(max_term, std::abs(term));
    double s = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - s) + term : (term - s) + sum;
    sum = s;
    binom_kl *= static_cast<double>(k - l) / (l + 1);
  }
  double value = sum + comp;
  if (max_term > detail::kDirectTermLimit)
    value = detail::click_row(m, n_det, eta)[static_cast<std::size_t>(k)];
  if (value < 0.0 && value > -1e-12) value = 0.0;
  if (value > 1.0 && value < 1.0 + 1e-12) value = 1.0;
  return value;
}

/// Full click distribution P(0..N | m photons).
inline std::vector<double> click_distribution(int m, int n_det, double eta) {
  detail::check_click_args(0, m, n_det, eta);
  return detail::click_row(m, n_det, eta);
}

/// Series form of P(k | n) restricted to unit efficiency,
/// [N!/(N-k)!] / N^n sum_j (-1)^j (k-j)^n / (j! (k-j)!); an independent
/// algebraic route used to cross-check click_probability at eta = 1.
inline double click_probability_series(int k, int n, int n_det) {
  detail::check_click_args(k, n, n_det, 1.0);
  if (k > n) return 0.0;
  double prefactor = 1.0;  // N!/(N-k)! / N^n in gradual steps to avoid overflow
  for (int i = 0; i < k; ++i) prefactor *= static_cast<double>(n_det - i) / n_det;
  for (int i = k; i < n; ++i) prefactor /= n_det;
  double sum = 0.0, comp = 0.0;
  double inv_fact = 1.0;  // 1/(j! (k-j)!) built from 1/k! by multiplying up
  for (int i = 2; i <= k; ++i) inv_fact /= i;
  for (int j = 0; j <= k; ++j) {
    double term = inv_fact * std::pow(static_cast<double>(k - j), n);
    if (j & 1) term = -term;
    double s = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - s) + term : (term - s) + sum;
    sum = s;
    inv_fact *= static_cast<double>(k - j) / (j + 1);
  }
  double value = prefactor * (sum + comp);
  if (value < 0.0 && value > -1e-12) value = 0.0;
  return value;
}

/// Photon-number distribution of a source, truncated at n_max.
struct PhotonSource {
  std::vector<double> pn;  // P(0), P(1), ..., P(n_max)
  std::string label;

  static PhotonSource fock(int m) {
    require(m >= 0, "invalid-argument", "photon number must be >= 0");
    PhotonSource s;
    s.pn.assign(static_cast<std::size_t>(m) + 1, 0.0);
    s.pn.back() = 1.0;
    s.label = "fock:" + std::to_string(m);
    return s;
  }
};

/// Squeezed vacuum: P(n) = (tanh xi / 2)^n n! / [(n/2)!]^2 / cosh xi for even
/// n, zero for odd n. Errors if the truncated tail at n_max is >= 1e-9.
inline PhotonSource squeezed_vacuum_pn(double xi, int n_max = 100) {
  require(xi >= 0.0, "invalid-argument", "squeezing parameter must be >= 0");
  require(n_max >= 0 && n_max % 2 == 0, "invalid-argument", "n_max must be even");
  PhotonSource s;
  s.pn.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  double p = 1.0 / std::cosh(xi);  // n = 0 term
  double ratio_base = std::tanh(xi) * std::tanh(xi);
  double total = 0.0;
  for (int n = 0; n <= n_max; n += 2) {
    s.pn[static_cast<std::size_t>(n)] = p;
    total += p;
    p *= ratio_base * (n + 1) / (n + 2);  // P(n+2)/P(n)
  }
  double tail = 1.0 - total;
  if (tail >= 1e-9)
    fail("truncation",
         "squeezed-vacuum truncation at n_max = " + std::to_string(n_max) +
             " leaves a tail of " + std::to_string(tail) + " (>= 1e-9)");
  s.label = "sq:" + std::to_string(xi);
  return s;
}

/// Array of on-off detectors. In the coherent-distributed mode the whole
/// array absorbs deterministically, so statistics are evaluated at eta = 1
/// regardless of the constituent efficiency.
struct DetectorArraySpec {
  int detectors = 1;
  double efficiency = 1.0;
  enum class Mode { incoherent_multiplexed, coherent_distributed };
  Mode mode = Mode::incoherent_multiplexed;

  double effective_eta() const {
    return mode == Mode::coherent_distributed ? 1.0 : efficiency;
  }

  void validate() const {
    require(detectors >= 1, "invalid-argument", "detector count must be >= 1");
    require(efficiency >= 0.0 && efficiency <= 1.0, "invalid-argument",
            "efficiency must lie in [0, 1]");
  }
};

struct ClickDistribution {
  std::vector<double> p;  // P(0), ..., P(N)
  DetectorArraySpec array;
  std::string source_label;
};

/// Measured click statistics: P(k) = sum_n P(k|n) P_source(n).
inline ClickDistribution source_click_distribution(const PhotonSource& source,
                                                   const DetectorArraySpec& array) {
  array.validate();
  double eta = array.effective_eta();
  ClickDistribution out;
  out.array = array;
  out.source_label = source.label;
  out.p.assign(static_cast<std::size_t>(array.detectors) + 1, 0.0);
  for (std::size_t n = 0; n < source.pn.size(); ++n) {
    if (source.pn[n] == 0.0) continue;
    auto row = detail::click_row(static_cast<int>(n), array.detectors, eta);
    for (std::size_t k = 0; k < out.p.size(); ++k) out.p[k] += source.pn[n] * row[k];
  }
  return out;
}

/// Probability of resolving an m-photon state: P(m clicks | m photons).
inline double resolution_probability(int m, int n_det, double eta) {
  require(m >= 1, "invalid-argument", "photon number must be >= 1");
  return click_probability(m, m, n_det, eta);
}

}  // namespace cpa::stats
