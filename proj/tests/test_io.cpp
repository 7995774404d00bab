#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cpa/stack_io.hpp"
#include "cpa/tmm.hpp"

using namespace cpa;
using namespace cpa::io;
using Catch::Matchers::WithinAbs;

namespace {

const std::filesystem::path kDataDir = CPA_DATA_DIR;

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("bundled five-layer spec parses to the expected stack", "[io]") {
  auto doc = parse_stack_spec(kDataDir / "fig5b_5layer.json");
  CHECK(doc.design_wavelength_nm == 1550.0);
  REQUIRE(doc.stack.layers.size() == 9);
  auto det = doc.stack.detector_indices();
  REQUIRE(det.size() == 5);
  for (std::size_t i : det) {
    const auto& m = std::get<MeanderSpec>(doc.stack.layers[i].medium);
    CHECK(m.filling_factor == 0.61);
    CHECK(m.thickness_nm == 5.0);
    CHECK(m.slit.epsilon == complexd(2.25, 0.0));
  }
  CHECK_FALSE(doc.stack.has_mirror());
  CHECK_THAT(doc.stack.layers[1].thickness_nm, WithinAbs(1550.0 / 3.0, 1e-9));

  // the parsed stack is directly usable by the optics engine
  auto coh = coherent_best_phase(doc.stack, 1550.0);
  CHECK_THAT(coh.absorption, WithinAbs(0.9968, 1e-3));
}

TEST_CASE("bundled mirror spec compiles the mirror medium", "[io]") {
  auto doc = parse_stack_spec(kDataDir / "fig2_salisbury.json");
  REQUIRE(doc.stack.has_mirror());
  double n_m = doc.stack.exit_medium().index_at(1550.0).real();
  double n_sp = 1.5;
  double r = (n_sp - n_m) / (n_sp + n_m);
  CHECK_THAT(r * r, WithinAbs(0.999, 1e-12));
  auto resp = traveling_response(doc.stack, 1550.0);
  CHECK_THAT(resp.A, WithinAbs(0.9974, 1e-3));
}

TEST_CASE("documents round-trip to identical stacks", "[io]") {
  for (const char* name :
       {"fig2_salisbury.json", "fig3_film30.json", "fig4_3layer.json", "fig5b_5layer.json",
        "example_tabulated_film.json"}) {
    auto doc = parse_stack_spec(kDataDir / name);
    json serialized = serialize_stack_document(doc);
    auto reparsed = parse_stack_document(serialized, kDataDir, name);
    CHECK(reparsed.stack == doc.stack);
    CHECK(reparsed.design_wavelength_nm == doc.design_wavelength_nm);
  }
}

TEST_CASE("schema and invariant violations are distinct and name the field", "[io]") {
  // out-of-range filling factor
  auto bad_f = write_temp("bad_f.json", R"({
    "design_wavelength_nm": 1550, "ambient": "vacuum",
    "materials": {"vacuum": {"epsilon_re": 1, "epsilon_im": 0},
                  "nbtin": {"epsilon_re": 2.75, "epsilon_im": 32.6}},
    "layers": [{"kind": "detector", "material": "nbtin", "thickness_nm": 5,
                "filling_factor": 1.3}],
    "termination": {"kind": "open"}})");
  try {
    parse_stack_spec(bad_f);
    FAIL("expected invariant error");
  } catch (const InvariantError& e) {
    CHECK(std::string(e.what()).find("filling_factor") != std::string::npos);
  }

  // unknown key (typo)
  auto typo = write_temp("typo.json", R"({
    "design_wavelength_nm": 1550, "ambient": "vacuum",
    "materials": {"vacuum": {"epsilon_re": 1, "epsilon_im": 0}},
    "layers": [{"kind": "spacer", "material": "vacuum", "thicknes_nm": 5}],
    "termination": {"kind": "open"}})");
  try {
    parse_stack_spec(typo);
    FAIL("expected schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("thicknes_nm") != std::string::npos);
  }

  // unresolved material reference
  auto missing_mat = write_temp("missing_mat.json", R"({
    "design_wavelength_nm": 1550, "ambient": "vacuum",
    "materials": {"vacuum": {"epsilon_re": 1, "epsilon_im": 0}},
    "layers": [{"kind": "spacer", "material": "benzene", "thickness_nm": 5}],
    "termination": {"kind": "open"}})");
  try {
    parse_stack_spec(missing_mat);
    FAIL("expected invariant error");
  } catch (const InvariantError& e) {
    CHECK(std::string(e.what()).find("benzene") != std::string::npos);
  }

  // malformed JSON
  auto mangled = write_temp("mangled.json", "{ not json");
  CHECK_THROWS_AS(parse_stack_spec(mangled), SchemaError);

  // missing file
  CHECK_THROWS_AS(parse_stack_spec(kDataDir / "does_not_exist.json"), IoError);

  // invalid mirror reflectivity
  auto bad_mirror = write_temp("bad_mirror.json", R"({
    "design_wavelength_nm": 1550, "ambient": "vacuum",
    "materials": {"vacuum": {"epsilon_re": 1, "epsilon_im": 0}},
    "layers": [],
    "termination": {"kind": "mirror", "reflectivity": 1.2}})");
  CHECK_THROWS_AS(parse_stack_spec(bad_mirror), InvariantError);

  // negative loss is unphysical under the sign convention
  auto gain = write_temp("gain.json", R"({
    "design_wavelength_nm": 1550, "ambient": "vacuum",
    "materials": {"vacuum": {"epsilon_re": 1, "epsilon_im": 0},
                  "gain": {"epsilon_re": 2, "epsilon_im": -1}},
    "layers": [{"kind": "spacer", "material": "gain", "thickness_nm": 5}],
    "termination": {"kind": "open"}})");
  CHECK_THROWS_AS(parse_stack_spec(gain), InvariantError);
}

TEST_CASE("dispersion csv parsing reports line numbers", "[io]") {
  auto table = load_dispersion_csv(kDataDir / "example_dispersion.csv");
  CHECK(table.wavelength_nm.size() == 21);
  CHECK(table.wavelength_nm.front() == 400.0);

  auto bad_header = write_temp("disp_header.csv", "lambda,n,k\n400,1,0\n500,1,0\n");
  try {
    load_dispersion_csv(bad_header);
    FAIL("expected schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }

  auto bad_number = write_temp("disp_num.csv", "wavelength_nm,n,k\n400,1,0\n500,x,0\n");
  try {
    load_dispersion_csv(bad_number);
    FAIL("expected schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  auto decreasing = write_temp("disp_dec.csv", "wavelength_nm,n,k\n500,1,0\n400,1,0\n");
  CHECK_THROWS_AS(load_dispersion_csv(decreasing), InvariantError);

  auto one_row = write_temp("disp_one.csv", "wavelength_nm,n,k\n500,1,0\n");
  CHECK_THROWS_AS(load_dispersion_csv(one_row), InvariantError);
}

TEST_CASE("tabulated materials resolve relative to the document", "[io]") {
  auto doc = parse_stack_spec(kDataDir / "example_tabulated_film.json");
  const auto& m = std::get<MeanderSpec>(doc.stack.layers[0].medium);
  REQUIRE(m.film.is_tabulated());
  CHECK_NOTHROW(traveling_response(doc.stack, 1550.0));
  try {
    traveling_response(doc.stack, 3000.0);
    FAIL("expected dispersion-range error");
  } catch (const Error& e) {
    CHECK(e.code() == "dispersion-range");
  }
}
