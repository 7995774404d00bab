#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpa/stack.hpp"

// Stack specification files (JSON) and dispersion tables (CSV).
//
// Stack document schema:
//   {
//     "design_wavelength_nm": 1550,
//     "ambient": "<material name>",
//     "materials": { name: {"epsilon_re": x, "epsilon_im": y}
//                        | {"dispersion_csv": "relative/path.csv"} },
//     "layers": [ {"kind": "detector", "material": name, "thickness_nm": d,
//                  "filling_factor": f, "slit": name (optional)}
//               | {"kind": "spacer", "material": name, "thickness_nm": d} ],
//     "termination": {"kind": "open"} | {"kind": "mirror", "reflectivity": R}
//   }
//
// Unknown keys are rejected. Dispersion CSV paths resolve relative to the
// document. Errors are classed: IoError (file access), SchemaError
// (structure), InvariantError (value ranges), each naming the field path.

namespace cpa::io {

using json = nlohmann::json;

/// CSV with header `wavelength_nm,n,k`; strictly increasing wavelengths.
inline DispersionTable load_dispersion_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dispersion table: " + path.string());
  DispersionTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "wavelength_nm,n,k")
        throw SchemaError(path.string() + ":1: expected header 'wavelength_nm,n,k'");
      continue;
    }
    double v[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int col = 0; col < 3; ++col) {
      auto [next, ec] = std::from_chars(p, end, v[col]);
      if (ec != std::errc())
        throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                          ": cannot parse number in column " + std::to_string(col + 1));
      p = next;
      if (col < 2) {
        if (p >= end || *p != ',')
          throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 3 comma-separated columns");
        ++p;
      }
    }
    if (p != end)
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": trailing characters");
    t.wavelength_nm.push_back(v[0]);
    t.n.push_back(v[1]);
    t.k.push_back(v[2]);
  }
  try {
    t.validate();
  } catch (const Error& e) {
    throw InvariantError(path.string() + ": " + e.what());
  }
  return t;
}

/// Parsed stack document: the raw named structure (kept for serialization)
/// plus the compiled optical Stack and its design wavelength.
struct StackDocument {
  double design_wavelength_nm = 0.0;
  std::string ambient;

  struct MaterialDef {
    std::optional<complexd> epsilon;
    std::optional<std::string> dispersion_csv;
  };
  std::map<std::string, MaterialDef> materials;

  struct LayerRef {
    std::string kind;  // "detector" | "spacer"
    std::string material;
    double thickness_nm = 0.0;
    std::optional<double> filling_factor;
    std::optional<std::string> slit;
  };
  std::vector<LayerRef> layers;

  struct TerminationRef {
    std::string kind;  // "open" | "mirror"
    std::optional<double> reflectivity;
  };
  TerminationRef termination;

  Stack stack;  // compiled
};

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) schema_fail(where, "unknown key '" + it.key() + "'");
  }
}

inline double get_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) schema_fail(where, std::string("missing key '") + key + "'");
  if (!obj[key].is_number()) schema_fail(where + "." + key, "expected a number");
  double v = obj[key].get<double>();
  if (!std::isfinite(v)) throw InvariantError(where + "." + key + ": value must be finite");
  return v;
}

inline std::string get_string(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) schema_fail(where, std::string("missing key '") + key + "'");
  if (!obj[key].is_string()) schema_fail(where + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

inline Material compile_material(const StackDocument::MaterialDef& def, MaterialKind kind,
                                 const std::filesystem::path& base_dir, const std::string& where) {
  if (def.dispersion_csv) {
    DispersionTable t = load_dispersion_csv(base_dir / *def.dispersion_csv);
    return Material::tabulated(kind, std::move(t));
  }
  if (def.epsilon->imag() < 0.0)
    throw InvariantError(where + ": epsilon_im must be >= 0");
  Material m;
  m.kind = kind;
  m.epsilon = *def.epsilon;
  return m;
}

}  // namespace detail

inline StackDocument parse_stack_document(const json& root, const std::filesystem::path& base_dir,
                                          const std::string& doc_name) {
  if (!root.is_object()) detail::schema_fail(doc_name, "top level must be an object");
  detail::reject_unknown_keys(
      root, doc_name, {"design_wavelength_nm", "ambient", "materials", "layers", "termination"});

  StackDocument doc;
  doc.design_wavelength_nm = detail::get_number(root, doc_name, "design_wavelength_nm");
  if (doc.design_wavelength_nm <= 0.0)
    throw InvariantError(doc_name + ".design_wavelength_nm: must be positive");
  doc.ambient = detail::get_string(root, doc_name, "ambient");

  if (!root.contains("materials") || !root["materials"].is_object())
    detail::schema_fail(doc_name, "missing 'materials' object");
  for (auto it = root["materials"].begin(); it != root["materials"].end(); ++it) {
    std::string where = doc_name + ".materials." + it.key();
    const json& m = it.value();
    if (!m.is_object()) detail::schema_fail(where, "expected an object");
    StackDocument::MaterialDef def;
    if (m.contains("dispersion_csv")) {
      detail::reject_unknown_keys(m, where, {"dispersion_csv"});
      def.dispersion_csv = detail::get_string(m, where, "dispersion_csv");
    } else {
      detail::reject_unknown_keys(m, where, {"epsilon_re", "epsilon_im"});
      def.epsilon = complexd(detail::get_number(m, where, "epsilon_re"),
                             detail::get_number(m, where, "epsilon_im"));
    }
    doc.materials.emplace(it.key(), std::move(def));
  }

  auto material_def = [&](const std::string& name, const std::string& where) {
    auto it = doc.materials.find(name);
    if (it == doc.materials.end())
      throw InvariantError(where + ": unknown material '" + name + "'");
    return it->second;
  };

  // compile materials on demand; ambient and spacers are dielectric-kind
  auto compile = [&](const std::string& name, MaterialKind kind, const std::string& where) {
    return detail::compile_material(material_def(name, where), kind, base_dir, where);
  };

  doc.stack.ambient_left = compile(doc.ambient, MaterialKind::dielectric, doc_name + ".ambient");

  if (!root.contains("layers") || !root["layers"].is_array())
    detail::schema_fail(doc_name, "missing 'layers' array");
  std::size_t index = 0;
  for (const json& l : root["layers"]) {
    std::string where = doc_name + ".layers[" + std::to_string(index) + "]";
    if (!l.is_object()) detail::schema_fail(where, "expected an object");
    StackDocument::LayerRef ref;
    ref.kind = detail::get_string(l, where, "kind");
    if (ref.kind == "detector") {
      detail::reject_unknown_keys(l, where,
                                  {"kind", "material", "thickness_nm", "filling_factor", "slit"});
      ref.filling_factor = detail::get_number(l, where, "filling_factor");
      if (*ref.filling_factor <= 0.0 || *ref.filling_factor > 1.0)
        throw InvariantError(where + ".filling_factor: must lie in (0, 1]");
      if (l.contains("slit")) ref.slit = detail::get_string(l, where, "slit");
    } else if (ref.kind == "spacer") {
      detail::reject_unknown_keys(l, where, {"kind", "material", "thickness_nm"});
    } else {
      detail::schema_fail(where + ".kind", "expected 'detector' or 'spacer'");
    }
    ref.material = detail::get_string(l, where, "material");
    ref.thickness_nm = detail::get_number(l, where, "thickness_nm");
    if (ref.thickness_nm < 0.0)
      throw InvariantError(where + ".thickness_nm: must be >= 0");

    if (ref.kind == "detector") {
      MeanderSpec spec;
      spec.film = compile(ref.material, MaterialKind::film, where + ".material");
      spec.slit = ref.slit ? compile(*ref.slit, MaterialKind::dielectric, where + ".slit")
                           : Material::vacuum();
      spec.filling_factor = *ref.filling_factor;
      spec.thickness_nm = ref.thickness_nm;
      doc.stack.layers.push_back(Layer::detector(std::move(spec)));
    } else {
      doc.stack.layers.push_back(
          Layer::uniform(compile(ref.material, MaterialKind::dielectric, where + ".material"),
                         ref.thickness_nm));
    }
    doc.layers.push_back(std::move(ref));
    ++index;
  }

  if (!root.contains("termination") || !root["termination"].is_object())
    detail::schema_fail(doc_name, "missing 'termination' object");
  {
    const json& t = root["termination"];
    std::string where = doc_name + ".termination";
    doc.termination.kind = detail::get_string(t, where, "kind");
    if (doc.termination.kind == "open") {
      detail::reject_unknown_keys(t, where, {"kind"});
      doc.stack.termination = Transmissive{doc.stack.ambient_left};
    } else if (doc.termination.kind == "mirror") {
      detail::reject_unknown_keys(t, where, {"kind", "reflectivity"});
      double refl = detail::get_number(t, where, "reflectivity");
      if (refl <= 0.0 || refl >= 1.0)
        throw InvariantError(where + ".reflectivity: must lie in (0, 1)");
      doc.termination.reflectivity = refl;
      // mirror index set against the medium in front of it, at the design wavelength
      double n_before =
          doc.stack.layers.empty()
              ? doc.stack.ambient_left.index_at(doc.design_wavelength_nm).real()
              : doc.stack.layers.back().index_at(doc.design_wavelength_nm).real();
      double n_m = mirror_index(n_before, refl);
      Material medium{MaterialKind::mirror_medium, complexd(n_m * n_m, 0.0), nullptr};
      doc.stack.termination = MirrorTermination{medium, refl};
    } else {
      detail::schema_fail(where + ".kind", "expected 'open' or 'mirror'");
    }
  }
  return doc;
}

inline StackDocument parse_stack_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stack spec: " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_stack_document(root, path.parent_path(), path.filename().string());
}

/// Serialize back to the document format; parsing the result reproduces an
/// identical Stack.
inline json serialize_stack_document(const StackDocument& doc) {
  json root;
  root["design_wavelength_nm"] = doc.design_wavelength_nm;
  root["ambient"] = doc.ambient;
  json mats = json::object();
  for (const auto& [name, def] : doc.materials) {
    json m = json::object();
    if (def.dispersion_csv) {
      m["dispersion_csv"] = *def.dispersion_csv;
    } else {
      m["epsilon_re"] = def.epsilon->real();
      m["epsilon_im"] = def.epsilon->imag();
    }
    mats[name] = std::move(m);
  }
  root["materials"] = std::move(mats);
  json layers = json::array();
  for (const auto& ref : doc.layers) {
    json l = json::object();
    l["kind"] = ref.kind;
    l["material"] = ref.material;
    l["thickness_nm"] = ref.thickness_nm;
    if (ref.filling_factor) l["filling_factor"] = *ref.filling_factor;
    if (ref.slit) l["slit"] = *ref.slit;
    layers.push_back(std::move(l));
  }
  root["layers"] = std::move(layers);
  json term = json::object();
  term["kind"] = doc.termination.kind;
  if (doc.termination.reflectivity) term["reflectivity"] = *doc.termination.reflectivity;
  root["termination"] = std::move(term);
  return root;
}

}  // namespace cpa::io
