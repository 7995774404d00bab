#pragma once

#include <cmath>
#include <cstddef>
#include <variant>
#include <vector>

#include "cpa/material.hpp"

namespace cpa {

/// One layer of a stratified stack: either a uniform material or an
/// effective-medium meander. Zero thickness is allowed and optically inert.
struct Layer {
  std::variant<Material, MeanderSpec> medium;
  double thickness_nm = 0.0;

  static Layer uniform(Material m, double thickness_nm) {
    require(thickness_nm >= 0.0, "invalid-argument", "layer thickness must be >= 0");
    return Layer{std::move(m), thickness_nm};
  }

  static Layer detector(MeanderSpec m) {
    m.validate();
    double d = m.thickness_nm;
    return Layer{std::move(m), d};
  }

  bool is_detector() const { return std::holds_alternative<MeanderSpec>(medium); }

  void set_thickness(double d) {
    require(d >= 0.0, "invalid-argument", "layer thickness must be >= 0");
    thickness_nm = d;
    if (auto* m = std::get_if<MeanderSpec>(&medium)) m->thickness_nm = d;
  }

  complexd epsilon_at(double wl_nm) const {
    if (auto* m = std::get_if<MeanderSpec>(&medium)) return m->epsilon_at(wl_nm);
    return std::get<Material>(medium).epsilon_at(wl_nm);
  }

  complexd index_at(double wl_nm) const {
    if (auto* m = std::get_if<MeanderSpec>(&medium)) return m->index_at(wl_nm);
    return std::get<Material>(medium).index_at(wl_nm);
  }

  friend bool operator==(const Layer& a, const Layer& b) {
    return a.medium == b.medium && a.thickness_nm == b.thickness_nm;
  }
};

/// Two-port termination: the stack radiates into a semi-infinite transparent
/// ambient on the right.
struct Transmissive {
  Material ambient_right = Material::vacuum();
  friend bool operator==(const Transmissive&, const Transmissive&) = default;
};

/// One-port termination: a semi-infinite real-index medium chosen so the
/// interface with the preceding layer reflects with intensity `reflectivity`
/// and phase pi. Transmission into it is residual leakage, not usable output.
struct MirrorTermination {
  Material medium;
  double reflectivity = 0.0;
  friend bool operator==(const MirrorTermination&, const MirrorTermination&) = default;
};

using Termination = std::variant<Transmissive, MirrorTermination>;

/// n_m such that the interface from a medium of index n_before has amplitude
/// reflection -sqrt(R): n_m = n_before (1 + sqrt(R)) / (1 - sqrt(R)).
inline double mirror_index(double n_before, double reflectivity) {
  require(reflectivity > 0.0 && reflectivity < 1.0, "invalid-argument",
          "mirror reflectivity must lie in (0, 1)");
  require(n_before > 0.0, "invalid-argument", "index before mirror must be positive");
  double s = std::sqrt(reflectivity);
  return n_before * (1.0 + s) / (1.0 - s);
}

/// Stratified stack at normal incidence: transparent left ambient, ordered
/// layers, transmissive or mirror termination. All values are immutable in
/// use; operations over stacks are pure functions.
struct Stack {
  Material ambient_left = Material::vacuum();
  std::vector<Layer> layers;
  Termination termination = Transmissive{};

  bool has_mirror() const { return std::holds_alternative<MirrorTermination>(termination); }

  const Material& exit_medium() const {
    if (auto* m = std::get_if<MirrorTermination>(&termination)) return m->medium;
    return std::get<Transmissive>(termination).ambient_right;
  }

  std::vector<std::size_t> detector_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < layers.size(); ++i)
      if (layers[i].is_detector()) idx.push_back(i);
    return idx;
  }

  double total_thickness() const {
    double d = 0.0;
    for (const auto& l : layers) d += l.thickness_nm;
    return d;
  }

  friend bool operator==(const Stack& a, const Stack& b) {
    return a.ambient_left == b.ambient_left && a.layers == b.layers &&
           a.termination == b.termination;
  }
};

}  // namespace cpa
