#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "cpa/tmm.hpp"

// Builders, optimizers, target coefficients and sweep/spectrum generators for
// Salisbury-screen and distributed counter-propagating detector stacks.

namespace cpa::design {

struct CounterPropagating {};

struct Salisbury {
  double spacer_n = 1.5;
  double mirror_reflectivity = 0.999;
};

using Geometry = std::variant<CounterPropagating, Salisbury>;

/// Per-sublayer scattering targets for total absorption by M sublayers in the
/// counter-propagating geometry (t = M/(M+1), r = -1/(M+1)) or K sublayers in
/// the Salisbury geometry (t = 2K/(2K+1), r = -1/(2K+1)); A = 1 - t^2 - r^2.
struct DesignTargets {
  double t = 0.0;
  double r = 0.0;
  double A = 0.0;
  int sublayers = 0;
};

inline DesignTargets target_coefficients(const Geometry& geometry, int sublayers) {
  require(sublayers >= 1, "invalid-argument", "sublayer count must be >= 1");
  double m = std::holds_alternative<CounterPropagating>(geometry)
                 ? static_cast<double>(sublayers)
                 : 2.0 * static_cast<double>(sublayers);
  DesignTargets d;
  d.t = m / (m + 1.0);
  d.r = -1.0 / (m + 1.0);
  d.A = 2.0 * m / ((m + 1.0) * (m + 1.0));
  d.sublayers = sublayers;
  return d;
}

/// ambient | meander(D) | quarter-wave spacer | mirror.
inline Stack build_salisbury(const MeanderSpec& meander, double spacer_n, double mirror_reflectivity,
                             double design_wl_nm) {
  require(spacer_n >= 1.0, "invalid-argument", "spacer index must be >= 1");
  meander.validate();
  Stack s;
  s.layers.push_back(Layer::detector(meander));
  s.layers.push_back(Layer::uniform(Material::dielectric(spacer_n), design_wl_nm / (4.0 * spacer_n)));
  double n_m = mirror_index(spacer_n, mirror_reflectivity);
  Material m{MaterialKind::mirror_medium, complexd(n_m * n_m, 0.0), nullptr};
  s.termination = MirrorTermination{m, mirror_reflectivity};
  return s;
}

/// N_det meander sublayers alternating with half-wave (absentee) spacers,
/// vacuum ambient on both sides.
inline Stack build_distributed(const MeanderSpec& sublayer, int n_det, double spacer_n,
                               double design_wl_nm) {
  require(n_det >= 1, "invalid-argument", "detector count must be >= 1");
  require(spacer_n >= 1.0, "invalid-argument", "spacer index must be >= 1");
  sublayer.validate();
  Stack s;
  double d_sp = design_wl_nm / (2.0 * spacer_n);
  for (int i = 0; i < n_det; ++i) {
    s.layers.push_back(Layer::detector(sublayer));
    if (i + 1 < n_det)
      s.layers.push_back(Layer::uniform(Material::dielectric(spacer_n), d_sp));
  }
  return s;
}

namespace detail {

inline double objective(const Material& film, const Material& slit, double f, double thickness_nm,
                        double wl_nm, const Geometry& geometry) {
  MeanderSpec m{film, slit, f, thickness_nm};
  if (auto* sal = std::get_if<Salisbury>(&geometry)) {
    Stack s = build_salisbury(m, sal->spacer_n, sal->mirror_reflectivity, wl_nm);
    return traveling_response(s, wl_nm).A;
  }
  Stack s;
  s.layers.push_back(Layer::detector(m));
  return coherent_best_phase(s, wl_nm).absorption;
}

struct ScanResult {
  double d_nm = 0.0;
  int boundary = 0;  // -1 max at lower edge, +1 at upper edge, 0 interior
};

inline ScanResult scan_optimum(const Material& film, const Material& slit, double f, double wl_nm,
                               const Geometry& geometry) {
  constexpr double kStep = 0.1;
  constexpr int kPoints = 1000;  // 0.1 .. 100.0
  auto eval = [&](double d) { return objective(film, slit, f, d, wl_nm, geometry); };
  int best_i = 0;
  double best_v = -1.0;
  for (int i = 1; i <= kPoints; ++i) {
    double v = eval(i * kStep);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  if (best_i <= 1) return {best_i * kStep, -1};
  if (best_i >= kPoints) return {best_i * kStep, +1};
  double d0 = best_i * kStep;
  double fm = eval(d0 - kStep), f0 = best_v, fp = eval(d0 + kStep);
  double denom = fm - 2.0 * f0 + fp;
  if (denom < 0.0) d0 += 0.5 * kStep * (fm - fp) / denom;
  return {d0, 0};
}

}  // namespace detail

/// Thickness maximizing absorption (best-phase coherent for the bare layer,
/// traveling for the Salisbury screen) over D in (0, 100] nm: 0.1 nm grid
/// scan followed by one parabolic refinement.
inline double optimal_thickness(const Material& film, const Material& slit, double filling_factor,
                                double wl_nm, const Geometry& geometry) {
  require(filling_factor > 0.0 && filling_factor <= 1.0, "invalid-argument",
          "filling factor must lie in (0, 1]");
  auto scan = detail::scan_optimum(film, slit, filling_factor, wl_nm, geometry);
  if (scan.boundary != 0)
    fail("search-failure", "no interior absorption maximum for D in (0, 100] nm");
  return scan.d_nm;
}

/// Filling factor such that optimal_thickness(f) equals d_sub * n_det, found
/// by bisection (the optimal thickness decreases monotonically in f).
inline double solve_filling_factor(const Material& film, const Material& slit, double d_sub_nm,
                                   int n_det, double wl_nm, const Geometry& geometry) {
  require(d_sub_nm > 0.0, "invalid-argument", "sublayer thickness must be positive");
  require(n_det >= 1, "invalid-argument", "detector count must be >= 1");
  double target = d_sub_nm * n_det;
  if (target > 100.0)
    fail("infeasible-design", "target thickness exceeds the 100 nm search range");
  auto excess = [&](double f) {
    auto scan = detail::scan_optimum(film, slit, f, wl_nm, geometry);
    if (scan.boundary != 0)  // optimum off-range: sign follows the boundary side
      return scan.boundary > 0 ? 1.0 : -1.0;
    return scan.d_nm - target;
  };
  double lo = 0.02, hi = 1.0;
  if (excess(hi) > 0.0)
    fail("infeasible-design", "target thickness needs a filling factor above 1");
  if (excess(lo) < 0.0)
    fail("infeasible-design", "target thickness needs a filling factor below 0.02");
  while (hi - lo > 5e-5) {
    double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Absorption non-uniformity across detector layers: Delta is the standard
/// deviation of per-layer absorption from the uniform share, Delta_max the
/// all-in-one-layer extreme, Delta_norm their ratio in [0, 1].
struct UniformityReport {
  double delta = 0.0;
  double delta_max = 0.0;
  double delta_norm = 0.0;
  std::vector<double> per_layer;
};

inline UniformityReport uniformity(std::vector<double> per_layer) {
  std::size_t n = per_layer.size();
  require(n >= 2, "invalid-argument", "uniformity needs at least 2 detector layers");
  double total = 0.0;
  for (double a : per_layer) total += a;
  require(total > 0.0, "invalid-argument", "uniformity needs nonzero total absorption");
  double mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double a : per_layer) ss += (a - mean) * (a - mean);
  UniformityReport u;
  u.delta = std::sqrt(ss / static_cast<double>(n));
  u.delta_max = mean * std::sqrt(static_cast<double>(n) - 1.0);
  u.delta_norm = u.delta / u.delta_max;
  u.per_layer = std::move(per_layer);
  return u;
}

/// Coherent best-phase absorption of each detector layer of a two-port stack.
inline std::vector<double> detector_absorptions(const Stack& stack, double wl_nm) {
  CoherentResponse resp = coherent_best_phase(stack, wl_nm);
  std::vector<double> det;
  for (std::size_t i : stack.detector_indices()) det.push_back(resp.per_layer[i]);
  return det;
}

struct SweepSample {
  double cumulative_nm = 0.0;
  std::string label;
  TwoPortResponse response;
};

struct SweepTrajectory {
  double wavelength_nm = 0.0;
  std::vector<SweepSample> samples;
};

/// Traveling-wave response of partial stacks as the final stack is deposited
/// layer by layer. Transmissive stacks grow from the left ambient side; for
/// mirror-terminated stacks the mirror and any trailing spacers pre-exist and
/// deposition runs bottom-up (from the mirror towards the ambient). Detector
/// layers are sampled every `step_nm`, spacers at >= 1 nm.
inline SweepTrajectory deposition_sweep(const Stack& final_stack, double wl_nm, double step_nm) {
  require(step_nm > 0.0, "invalid-argument", "sweep step must be positive");
  SweepTrajectory traj;
  traj.wavelength_nm = wl_nm;

  // label layers by role and order
  std::vector<std::string> labels(final_stack.layers.size());
  {
    int det = 0, sp = 0;
    for (std::size_t i = 0; i < final_stack.layers.size(); ++i)
      labels[i] = final_stack.layers[i].is_detector() ? "Det" + std::to_string(++det)
                                                      : "Sp" + std::to_string(++sp);
  }

  bool mirrored = final_stack.has_mirror();
  // deposition order: list order for two-ports, reverse (substrate up) for mirrors
  std::vector<std::size_t> order(final_stack.layers.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = mirrored ? final_stack.layers.size() - 1 - i : i;
  // trailing spacers/mirror pre-exist in the mirrored geometry
  std::size_t first = 0;
  if (mirrored)
    while (first < order.size() && !final_stack.layers[order[first]].is_detector()) ++first;

  auto partial = [&](std::size_t upto, double partial_d) {
    // stack containing fully deposited layers plus the current one at partial_d
    Stack s;
    s.ambient_left = final_stack.ambient_left;
    s.termination = final_stack.termination;
    std::vector<std::size_t> present;  // indices into final layers
    for (std::size_t j = first; j < upto; ++j) present.push_back(order[j]);
    present.push_back(order[upto]);
    if (mirrored) {
      for (std::size_t j = 0; j < first; ++j) present.push_back(order[j]);
      std::sort(present.begin(), present.end());
    }
    for (std::size_t idx : present) {
      Layer l = final_stack.layers[idx];
      if (idx == order[upto]) l.set_thickness(partial_d);
      s.layers.push_back(std::move(l));
    }
    return s;
  };

  double deposited = 0.0;
  bool emitted_origin = false;
  for (std::size_t j = first; j < order.size(); ++j) {
    const Layer& layer = final_stack.layers[order[j]];
    if (layer.thickness_nm <= 0.0) continue;
    double step = layer.is_detector() ? step_nm : std::max(step_nm, 1.0);
    if (!emitted_origin) {
      traj.samples.push_back(
          {0.0, labels[order[j]], traveling_response(partial(j, 0.0), wl_nm)});
      emitted_origin = true;
    }
    for (double d = step;; d += step) {
      bool last = d >= layer.thickness_nm - 1e-12;
      double here = last ? layer.thickness_nm : d;
      traj.samples.push_back(
          {deposited + here, labels[order[j]], traveling_response(partial(j, here), wl_nm)});
      if (last) break;
    }
    deposited += layer.thickness_nm;
  }
  return traj;
}

template <typename Response>
struct SpectrumSample {
  double wavelength_nm = 0.0;
  Response response;
};

namespace detail {

inline std::vector<double> wavelength_grid(double wl_min, double wl_max, int n_points) {
  require(n_points >= 1, "invalid-argument", "spectrum needs at least one point");
  require(wl_min > 0.0 && wl_max >= wl_min, "invalid-argument", "invalid wavelength range");
  if (wl_min == wl_max) return {wl_min};
  require(n_points >= 2, "invalid-argument", "a wavelength range needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i)
    grid[static_cast<std::size_t>(i)] = wl_min + (wl_max - wl_min) * i / (n_points - 1);
  return grid;
}

}  // namespace detail

inline std::vector<SpectrumSample<TwoPortResponse>> spectrum_traveling(const Stack& stack,
                                                                       double wl_min, double wl_max,
                                                                       int n_points) {
  std::vector<SpectrumSample<TwoPortResponse>> out;
  for (double wl : detail::wavelength_grid(wl_min, wl_max, n_points))
    out.push_back({wl, traveling_response(stack, wl)});
  return out;
}

/// Best-phase coherent response per wavelength.
inline std::vector<SpectrumSample<CoherentResponse>> spectrum_coherent(const Stack& stack,
                                                                       double wl_min, double wl_max,
                                                                       int n_points) {
  std::vector<SpectrumSample<CoherentResponse>> out;
  for (double wl : detail::wavelength_grid(wl_min, wl_max, n_points))
    out.push_back({wl, coherent_best_phase(stack, wl)});
  return out;
}

}  // namespace cpa::design
