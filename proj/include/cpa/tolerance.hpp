#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cpa/design.hpp"
#include "cpa/tmm.hpp"

// Seeded Monte Carlo over fabrication imperfections: each sample perturbs the
// layer thicknesses of a nominal stack and re-evaluates the best-phase
// coherent response. Randomness is counter-based and keyed by
// (seed, sample, layer), so reports are bit-identical no matter how samples
// are scheduled across threads.

namespace cpa::mc {

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// independent stream per (seed, sample, layer)
struct CounterRng {
  std::uint64_t key;
  std::uint64_t counter = 0;

  CounterRng(std::uint64_t seed, std::uint64_t sample, std::uint64_t layer)
      : key(mix64(mix64(mix64(seed) ^ sample) ^ layer)) {}

  double next_unit() {  // [0, 1)
    return static_cast<double>(mix64(key ^ counter++) >> 11) * 0x1.0p-53;
  }
};

}  // namespace detail

/// Thickness perturbation: each eligible layer is scaled by (1 + u) with u
/// drawn from a symmetric distribution bounded by the fractional bound.
struct PerturbationSpec {
  double fractional_bound = 0.0;
  enum class Layers { detectors_and_spacers, detectors_only };
  Layers which = Layers::detectors_and_spacers;
  enum class Distribution { uniform, truncated_gaussian };  // gaussian: sigma = bound/2
  Distribution distribution = Distribution::uniform;

  void validate() const {
    require(fractional_bound >= 0.0 && fractional_bound < 1.0, "invalid-argument",
            "fractional bound must lie in [0, 1)");
  }
};

namespace detail {

inline double draw_fraction(const PerturbationSpec& spec, CounterRng& rng) {
  if (spec.fractional_bound == 0.0) return 0.0;
  if (spec.distribution == PerturbationSpec::Distribution::uniform)
    return spec.fractional_bound * (2.0 * rng.next_unit() - 1.0);
  // truncated gaussian: Box-Muller, rejected outside +-bound (+-2 sigma)
  double sigma = spec.fractional_bound / 2.0;
  for (;;) {
    double u1 = rng.next_unit(), u2 = rng.next_unit();
    if (u1 <= 0.0) continue;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    double v = sigma * z;
    if (std::abs(v) <= spec.fractional_bound) return v;
  }
}

}  // namespace detail

/// Deterministic perturbed copy of the nominal stack; identical
/// (seed, sample_index) always produce identical stacks.
inline Stack perturb_stack(const Stack& nominal, const PerturbationSpec& spec,
                           std::uint64_t sample_index, std::uint64_t seed) {
  spec.validate();
  Stack out = nominal;
  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    Layer& layer = out.layers[i];
    if (spec.which == PerturbationSpec::Layers::detectors_only && !layer.is_detector()) continue;
    detail::CounterRng rng(seed, sample_index, static_cast<std::uint64_t>(i));
    layer.set_thickness(layer.thickness_nm * (1.0 + detail::draw_fraction(spec, rng)));
  }
  return out;
}

struct SampleRecord {
  std::uint64_t index = 0;
  double absorption = 0.0;      // best-phase (or fixed-phase) coherent A
  double theta = 0.0;
  double delta_norm = 0.0;
  complexd t, r, r_right;       // traveling-wave coefficients of the sample
  std::vector<double> detector_absorption;
  std::string error;            // nonempty when the sample failed

  bool ok() const { return error.empty(); }
};

struct EnsembleReport {
  std::uint64_t seed = 0;
  double wavelength_nm = 0.0;
  PerturbationSpec spec;
  std::vector<SampleRecord> samples;

  // summary statistics, always recomputed from the records
  double fraction_absorption_at_least(double threshold) const {
    std::size_t hits = 0, ok = 0;
    for (const auto& s : samples)
      if (s.ok()) {
        ++ok;
        if (s.absorption >= threshold) ++hits;
      }
    return ok ? static_cast<double>(hits) / static_cast<double>(ok) : 0.0;
  }

  double min_absorption() const {
    double m = 1.0;
    for (const auto& s : samples)
      if (s.ok()) m = std::min(m, s.absorption);
    return m;
  }

  /// Linear-interpolation quantile of the per-sample delta_norm values.
  double delta_norm_quantile(double q) const {
    std::vector<double> v;
    for (const auto& s : samples)
      if (s.ok()) v.push_back(s.delta_norm);
    require(!v.empty(), "invalid-argument", "no successful samples");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  }

  double fraction_delta_norm_below(double threshold) const {
    std::size_t hits = 0, ok = 0;
    for (const auto& s : samples)
      if (s.ok()) {
        ++ok;
        if (s.delta_norm < threshold) ++hits;
      }
    return ok ? static_cast<double>(hits) / static_cast<double>(ok) : 0.0;
  }

  std::size_t failed_samples() const {
    std::size_t n = 0;
    for (const auto& s : samples)
      if (!s.ok()) ++n;
    return n;
  }
};

/// Evaluate the ensemble. The coherent phase is re-optimized per sample
/// unless fixed_theta is given. Failed samples are recorded, not dropped.
/// The report is bit-identical for any n_threads.
inline EnsembleReport run_ensemble(const Stack& nominal, const PerturbationSpec& spec,
                                   std::uint64_t n_samples, std::uint64_t seed, double wl_nm,
                                   unsigned n_threads = 1,
                                   std::optional<double> fixed_theta = std::nullopt) {
  spec.validate();
  require(n_samples >= 1, "invalid-argument", "sample count must be >= 1");
  EnsembleReport report;
  report.seed = seed;
  report.wavelength_nm = wl_nm;
  report.spec = spec;
  report.samples.resize(n_samples);

  auto evaluate = [&](std::uint64_t index) {
    SampleRecord rec;
    rec.index = index;
    try {
      Stack sample = perturb_stack(nominal, spec, index, seed);
      TwoPortResponse two = traveling_response(sample, wl_nm);
      rec.t = two.t;
      rec.r = two.r;
      rec.r_right = two.r_right;
      CoherentResponse coh = fixed_theta ? coherent_response(sample, wl_nm, *fixed_theta)
                                         : coherent_best_phase(sample, wl_nm);
      rec.theta = coh.theta;
      rec.absorption = coh.absorption;
      for (std::size_t i : sample.detector_indices())
        rec.detector_absorption.push_back(coh.per_layer[i]);
      if (rec.detector_absorption.size() >= 2)
        rec.delta_norm = design::uniformity(rec.detector_absorption).delta_norm;
    } catch (const Error& e) {
      rec.error = std::string(e.code()) + ": " + e.what();
    }
    return rec;
  };

  n_threads = std::max(1u, n_threads);
  if (n_threads == 1) {
    for (std::uint64_t i = 0; i < n_samples; ++i) report.samples[i] = evaluate(i);
  } else {
    std::vector<std::thread> pool;
    std::uint64_t chunk = (n_samples + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      std::uint64_t begin = t * chunk, end = std::min(n_samples, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        for (std::uint64_t i = begin; i < end; ++i) report.samples[i] = evaluate(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return report;
}

}  // namespace cpa::mc
