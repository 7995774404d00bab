#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <variant>
#include <vector>

#include "cpa/stack.hpp"

// Transfer-matrix engine for stratified media at normal incidence.
//
// Conventions (fixed throughout the library):
//   * time dependence e^{-iwt}; absorbers have Im(n) >= 0;
//   * in each region the field is A e^{+i phi} + B e^{-i phi} with
//     phi = 2 pi n z / lambda, A travelling right (towards the exit side);
//   * (A_0, B_0) = M (A_sub, B_sub) with M the ordered product of interface
//     matrices  1/t_ab [[1, r_ab], [r_ab, 1]],  r_ab = (n_a - n_b)/(n_a + n_b),
//     t_ab = 2 n_a/(n_a + n_b), and propagation matrices
//     diag(e^{-i phi}, e^{+i phi}), phi = 2 pi n d / lambda.
//
// Reported amplitude transmission is flux-normalized,
// t = t_raw sqrt(Re n_exit / Re n_in), so T = |t|^2 is the transmitted power
// fraction and left/right transmission coincide. For vacuum (or any equal)
// ambients this is the raw field ratio.

namespace cpa {

struct Mat2 {
  complexd m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};

  static Mat2 identity() { return {}; }

  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }

  complexd det() const { return m11 * m22 - m12 * m21; }
};

/// Transfer matrix of a stack at one wavelength: (A_0, B_0) = M (A_sub, B_sub).
struct TransferMatrix {
  Mat2 m;
  double wavelength_nm = 0.0;
};

struct TwoPortResponse {
  complexd t;        // flux-normalized amplitude transmission (left == right)
  complexd r;        // amplitude reflection, left incidence
  complexd r_right;  // amplitude reflection, right incidence
  double T = 0.0;    // |t|^2; leakage into the mirror medium when mirrored
  double R = 0.0;    // |r|^2
  double A = 0.0;    // 1 - T - R
};

/// Response to two-sided coherent illumination with power-normalized inputs
/// a_L = 1/sqrt(2), a_R = e^{i theta}/sqrt(2) referenced at the outer faces.
struct CoherentResponse {
  double theta = 0.0;
  complexd a_left, a_right;
  complexd b_left, b_right;            // outgoing amplitudes (flux-normalized)
  double absorption = 0.0;             // 1 - |b_L|^2 - |b_R|^2
  std::vector<double> per_layer;       // absorbed fraction per layer (all layers)
};

struct TravelingLeft {};
struct TravelingRight {};
struct Coherent {
  double theta = 0.0;
};
using Illumination = std::variant<TravelingLeft, TravelingRight, Coherent>;

namespace detail {

// Alternating interface/propagation factors of the transfer matrix, kept so
// internal fields can be reconstructed at every boundary.
struct StackElements {
  std::vector<Mat2> factors;       // I_0, P_1, I_1, P_2, ..., P_N, I_N
  std::vector<complexd> layer_n;   // index of each layer
  complexd n_in, n_out;
};

inline Mat2 interface_matrix(complexd n_a, complexd n_b) {
  complexd r = (n_a - n_b) / (n_a + n_b);
  complexd inv_t = (n_a + n_b) / (2.0 * n_a);
  return {inv_t, r * inv_t, r * inv_t, inv_t};
}

inline Mat2 propagation_matrix(complexd n, double d_nm, double wl_nm) {
  complexd phi = 2.0 * std::numbers::pi * n * d_nm / wl_nm;
  complexd e = std::exp(complexd(0.0, 1.0) * phi);
  return {1.0 / e, 0.0, 0.0, e};
}

inline StackElements build_elements(const Stack& stack, double wl_nm) {
  require(wl_nm > 0.0, "invalid-argument", "wavelength must be positive");
  StackElements e;
  e.n_in = stack.ambient_left.index_at(wl_nm);
  e.n_out = stack.exit_medium().index_at(wl_nm);
  require(std::abs(e.n_in.imag()) < 1e-12 && e.n_in.real() > 0.0, "invalid-argument",
          "left ambient must be transparent");
  require(std::abs(e.n_out.imag()) < 1e-12 && e.n_out.real() > 0.0, "invalid-argument",
          "exit medium must be transparent");
  complexd prev = e.n_in;
  for (const auto& layer : stack.layers) {
    complexd n = layer.index_at(wl_nm);
    e.factors.push_back(interface_matrix(prev, n));
    e.factors.push_back(propagation_matrix(n, layer.thickness_nm, wl_nm));
    e.layer_n.push_back(n);
    prev = n;
  }
  e.factors.push_back(interface_matrix(prev, e.n_out));
  return e;
}

inline Mat2 product(const StackElements& e) {
  Mat2 m = Mat2::identity();
  for (const auto& f : e.factors) m = m * f;
  return m;
}

// Poynting flux (vacuum-impedance units, the global 1/2 dropped) of the field
// A e^{+i phi} + B e^{-i phi} at the reference plane of (A, B).
inline double flux(complexd n, complexd a, complexd b) {
  return n.real() * (std::norm(a) - std::norm(b)) -
         2.0 * n.imag() * std::imag(a * std::conj(b));
}

// Absorbed power fraction per layer, unwound from the substrate-side
// amplitudes. flux_in is the total incident flux in the same units.
inline std::vector<double> unwind_per_layer(const StackElements& e, complexd a_sub, complexd b_sub,
                                            double flux_in) {
  std::size_t n_layers = e.layer_n.size();
  std::vector<double> absorbed(n_layers, 0.0);
  complexd a = a_sub, b = b_sub;
  for (std::size_t j = n_layers; j-- > 0;) {
    // interface right of layer j: amplitudes just inside the layer's right edge
    const Mat2& iface = e.factors[2 * j + 2];
    complexd a2 = iface.m11 * a + iface.m12 * b;
    complexd b2 = iface.m21 * a + iface.m22 * b;
    double f_right = flux(e.layer_n[j], a2, b2);
    const Mat2& prop = e.factors[2 * j + 1];
    a = prop.m11 * a2;
    b = prop.m22 * b2;
    double f_left = flux(e.layer_n[j], a, b);
    absorbed[j] = (f_left - f_right) / flux_in;
  }
  return absorbed;
}

}  // namespace detail

inline TransferMatrix stack_transfer_matrix(const Stack& stack, double wl_nm) {
  return {detail::product(detail::build_elements(stack, wl_nm)), wl_nm};
}

inline TwoPortResponse traveling_response(const Stack& stack, double wl_nm) {
  auto e = detail::build_elements(stack, wl_nm);
  Mat2 m = detail::product(e);
  if (std::abs(m.m11) == 0.0)
    fail("singular-stack", "transfer matrix has M11 = 0 (non-physical for passive media)");
  complexd t_raw = 1.0 / m.m11;
  double rho = e.n_out.real() / e.n_in.real();
  TwoPortResponse resp;
  resp.t = t_raw * std::sqrt(rho);
  resp.r = m.m21 / m.m11;
  resp.r_right = -m.m12 / m.m11;
  resp.T = rho * std::norm(t_raw);
  resp.R = std::norm(resp.r);
  resp.A = 1.0 - resp.T - resp.R;
  return resp;
}

/// Two-sided coherent illumination; mirror-terminated stacks are one-ports
/// and reject this operation.
inline CoherentResponse coherent_response(const Stack& stack, double wl_nm, double theta) {
  if (stack.has_mirror())
    fail("unsupported-geometry", "coherent illumination requires a transmissive two-port stack");
  auto e = detail::build_elements(stack, wl_nm);
  Mat2 m = detail::product(e);
  if (std::abs(m.m11) == 0.0) fail("singular-stack", "transfer matrix has M11 = 0");

  CoherentResponse resp;
  resp.theta = theta;
  resp.a_left = complexd(1.0 / std::sqrt(2.0), 0.0);
  resp.a_right = std::exp(complexd(0.0, theta)) / std::sqrt(2.0);

  // raw field amplitudes from the flux-normalized inputs
  complexd aL = resp.a_left / std::sqrt(e.n_in.real());
  complexd aR = resp.a_right / std::sqrt(e.n_out.real());
  complexd a_sub = (aL - m.m12 * aR) / m.m11;
  complexd bL = m.m21 * a_sub + m.m22 * aR;

  resp.b_left = bL * std::sqrt(e.n_in.real());
  resp.b_right = a_sub * std::sqrt(e.n_out.real());
  resp.absorption = 1.0 - std::norm(resp.b_left) - std::norm(resp.b_right);
  resp.per_layer = detail::unwind_per_layer(e, a_sub, aR, 1.0);
  return resp;
}

/// Coherent response at the input phase maximizing total absorption. The
/// theta-dependence of the outgoing power is exactly sinusoidal, so the
/// optimum is analytic: theta* = pi - arg(conj(r) t + conj(t) r').
inline CoherentResponse coherent_best_phase(const Stack& stack, double wl_nm) {
  TwoPortResponse two = traveling_response(stack, wl_nm);
  complexd z = std::conj(two.r) * two.t + std::conj(two.t) * two.r_right;
  double theta = (std::abs(z) == 0.0) ? 0.0 : std::numbers::pi - std::arg(z);
  return coherent_response(stack, wl_nm, theta);
}

/// Absorbed power fraction in every layer (lossless layers report ~0) under
/// the given illumination. Fractions are relative to the total incident
/// power, so sum + outgoing + mirror leakage = 1.
inline std::vector<double> per_layer_absorption(const Stack& stack, double wl_nm,
                                                const Illumination& illumination) {
  if (auto* c = std::get_if<Coherent>(&illumination))
    return coherent_response(stack, wl_nm, c->theta).per_layer;

  auto e = detail::build_elements(stack, wl_nm);
  Mat2 m = detail::product(e);
  if (std::abs(m.m11) == 0.0) fail("singular-stack", "transfer matrix has M11 = 0");
  if (std::holds_alternative<TravelingLeft>(illumination)) {
    complexd a_sub = 1.0 / m.m11;  // A_0 = 1, B_sub = 0
    return detail::unwind_per_layer(e, a_sub, 0.0, e.n_in.real());
  }
  require(!stack.has_mirror(), "unsupported-geometry",
          "right-side illumination through a mirror termination is not supported");
  complexd b_sub = 1.0;  // incident from the right
  complexd a_sub = -m.m12 / m.m11 * b_sub;
  return detail::unwind_per_layer(e, a_sub, b_sub, e.n_out.real());
}

}  // namespace cpa
