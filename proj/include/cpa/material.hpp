#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "cpa/error.hpp"

namespace cpa {

using complexd = std::complex<double>;

/// Tabulated complex refractive index (n, k) versus wavelength.
/// Rows are strictly increasing in wavelength; evaluation between samples is
/// linear interpolation of n and k separately; outside the range is an error.
struct DispersionTable {
  std::vector<double> wavelength_nm;
  std::vector<double> n;
  std::vector<double> k;

  void validate() const {
    require(wavelength_nm.size() >= 2, "invalid-argument",
            "dispersion table needs at least 2 rows");
    require(wavelength_nm.size() == n.size() && n.size() == k.size(),
            "invalid-argument", "dispersion table columns differ in length");
    for (std::size_t i = 0; i < wavelength_nm.size(); ++i) {
      require(std::isfinite(wavelength_nm[i]) && std::isfinite(n[i]) && std::isfinite(k[i]),
              "invalid-argument", "dispersion table contains a non-finite value");
      require(n[i] >= 0.0 && k[i] >= 0.0, "invalid-argument",
              "dispersion table requires n >= 0 and k >= 0");
      if (i > 0)
        require(wavelength_nm[i] > wavelength_nm[i - 1], "invalid-argument",
                "dispersion table wavelengths must be strictly increasing");
    }
  }

  complexd index_at(double wl_nm) const {
    if (wl_nm < wavelength_nm.front() || wl_nm > wavelength_nm.back())
      fail("dispersion-range",
           "wavelength " + std::to_string(wl_nm) + " nm outside dispersion table [" +
               std::to_string(wavelength_nm.front()) + ", " +
               std::to_string(wavelength_nm.back()) + "] nm");
    auto it = std::lower_bound(wavelength_nm.begin(), wavelength_nm.end(), wl_nm);
    if (it == wavelength_nm.begin()) return {n.front(), k.front()};
    std::size_t hi = static_cast<std::size_t>(it - wavelength_nm.begin());
    std::size_t lo = hi - 1;
    double w = (wl_nm - wavelength_nm[lo]) / (wavelength_nm[hi] - wavelength_nm[lo]);
    return {n[lo] + w * (n[hi] - n[lo]), k[lo] + w * (k[hi] - k[lo])};
  }
};

enum class MaterialKind { film, dielectric, mirror_medium };

/// Optical medium: constant complex relative permittivity, or a dispersion
/// table. Convention is e^{-iwt}: absorbing media have Im(eps) >= 0 and the
/// index branch is taken with Im(n) >= 0.
struct Material {
  MaterialKind kind = MaterialKind::dielectric;
  complexd epsilon{1.0, 0.0};
  std::shared_ptr<const DispersionTable> table;  // overrides epsilon when set

  static Material vacuum() { return Material{MaterialKind::dielectric, {1.0, 0.0}, nullptr}; }

  static Material dielectric(double refractive_index) {
    require(refractive_index > 0.0, "invalid-argument", "refractive index must be positive");
    return Material{MaterialKind::dielectric, {refractive_index * refractive_index, 0.0}, nullptr};
  }

  static Material film(complexd eps) {
    require(eps.imag() >= 0.0, "invalid-argument",
            "Im(eps) must be >= 0 under the e^{-iwt} convention");
    return Material{MaterialKind::film, eps, nullptr};
  }

  static Material tabulated(MaterialKind kind, DispersionTable t) {
    t.validate();
    return Material{kind, {0.0, 0.0}, std::make_shared<const DispersionTable>(std::move(t))};
  }

  bool is_tabulated() const { return table != nullptr; }

  complexd index_at(double wl_nm) const {
    if (table) return table->index_at(wl_nm);
    complexd n = std::sqrt(epsilon);
    if (n.imag() < 0.0) n = -n;  // principal branch keeps Im(n) >= 0 for Im(eps) >= 0
    return n;
  }

  complexd epsilon_at(double wl_nm) const {
    if (table) {
      complexd n = table->index_at(wl_nm);
      return n * n;
    }
    return epsilon;
  }

  friend bool operator==(const Material& a, const Material& b) {
    if (a.kind != b.kind || a.epsilon != b.epsilon) return false;
    if (!a.table && !b.table) return true;
    if (!a.table || !b.table) return false;
    return a.table->wavelength_nm == b.table->wavelength_nm && a.table->n == b.table->n &&
           a.table->k == b.table->k;
  }
};

/// eps_eff = eps_film * f + eps_slit * (1 - f); the effective-medium rule for
/// a subwavelength meander with light polarized along the slits.
inline complexd effective_permittivity(complexd eps_film, complexd eps_slit, double filling_factor) {
  require(filling_factor >= 0.0 && filling_factor <= 1.0, "invalid-argument",
          "filling factor must lie in [0, 1]");
  return eps_film * filling_factor + eps_slit * (1.0 - filling_factor);
}

/// Meander detector layer: superconducting film of the given filling factor
/// in a slit (matrix) medium, treated as a uniform effective-medium film.
struct MeanderSpec {
  Material film;
  Material slit = Material::vacuum();
  double filling_factor = 1.0;
  double thickness_nm = 0.0;

  void validate() const {
    require(filling_factor > 0.0 && filling_factor <= 1.0, "invalid-argument",
            "filling factor must lie in (0, 1]");
    require(thickness_nm >= 0.0, "invalid-argument", "thickness must be >= 0");
  }

  complexd epsilon_at(double wl_nm) const {
    return effective_permittivity(film.epsilon_at(wl_nm), slit.epsilon_at(wl_nm), filling_factor);
  }

  complexd index_at(double wl_nm) const {
    complexd n = std::sqrt(epsilon_at(wl_nm));
    if (n.imag() < 0.0) n = -n;
    return n;
  }

  friend bool operator==(const MeanderSpec& a, const MeanderSpec& b) {
    return a.film == b.film && a.slit == b.slit && a.filling_factor == b.filling_factor &&
           a.thickness_nm == b.thickness_nm;
  }
};

/// NbTiN film permittivity (4.21 + 3.87i)^2 at 1550 nm; the toolkit's only
/// built-in material constant.
inline Material nbtin_film() {
  return Material::film(complexd(4.21, 3.87) * complexd(4.21, 3.87));
}

}  // namespace cpa
