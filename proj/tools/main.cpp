// cpa: command-line front end for the coherent-absorber design toolkit.
//
// Subcommands: sweep, spectrum, design, uniformity, pnr, pnr-curve,
// montecarlo. Data is emitted as CSV (stdout or --out), summaries as JSON
// (--summary). Exit codes: 0 success, 1 computation error (single
// `error: <code>: <message>` line on stderr), 2 usage error.

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpa/design.hpp"
#include "cpa/photon_stats.hpp"
#include "cpa/stack_io.hpp"
#include "cpa/tolerance.hpp"

namespace {

using cpa::complexd;
using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

struct CsvOut {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit CsvOut(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw cpa::IoError("cannot open output file: " + path);
      os = &file;
    }
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) *os << ',';
      *os << cells[i];
    }
    *os << '\n';
  }
};

void write_summary(const std::string& path, const json& summary) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw cpa::IoError("cannot open summary file: " + path);
  out << summary.dump(2) << '\n';
}

cpa::io::StackDocument load_stack(const std::string& path) {
  if (path.empty()) throw cpa::Error("invalid-argument", "--stack is required");
  return cpa::io::parse_stack_spec(path);
}

double pick_lambda(double flag_value, const cpa::io::StackDocument& doc) {
  return flag_value > 0.0 ? flag_value : doc.design_wavelength_nm;
}

// ---- sweep -----------------------------------------------------------------

int run_sweep(const std::string& stack_path, double lambda_flag, double step,
              const std::string& out_path) {
  auto doc = load_stack(stack_path);
  double wl = pick_lambda(lambda_flag, doc);
  auto traj = cpa::design::deposition_sweep(doc.stack, wl, step);
  CsvOut out(out_path);
  out.row({"cumulative_nm", "layer", "re_t", "im_t", "re_r", "im_r", "T", "R", "A"});
  for (const auto& s : traj.samples)
    out.row({fmt(s.cumulative_nm), s.label, fmt(s.response.t.real()), fmt(s.response.t.imag()),
             fmt(s.response.r.real()), fmt(s.response.r.imag()), fmt(s.response.T),
             fmt(s.response.R), fmt(s.response.A)});
  return 0;
}

// ---- spectrum --------------------------------------------------------------

int run_spectrum(const std::string& stack_path, double from, double to, int points,
                 const std::string& mode, const std::string& out_path) {
  auto doc = load_stack(stack_path);
  CsvOut out(out_path);
  if (mode == "traveling") {
    auto spec = cpa::design::spectrum_traveling(doc.stack, from, to, points);
    out.row({"lambda_nm", "re_t", "im_t", "re_r", "im_r", "re_rp", "im_rp", "T", "R", "A"});
    for (const auto& p : spec)
      out.row({fmt(p.wavelength_nm), fmt(p.response.t.real()), fmt(p.response.t.imag()),
               fmt(p.response.r.real()), fmt(p.response.r.imag()), fmt(p.response.r_right.real()),
               fmt(p.response.r_right.imag()), fmt(p.response.T), fmt(p.response.R),
               fmt(p.response.A)});
    return 0;
  }
  if (mode != "coherent")
    throw CLI::ValidationError("--mode", "expected 'traveling' or 'coherent'");
  auto spec = cpa::design::spectrum_coherent(doc.stack, from, to, points);
  std::vector<std::string> header = {"lambda_nm", "theta", "A_coh", "P_out"};
  for (std::size_t i = 0; i < doc.stack.layers.size(); ++i)
    header.push_back("A_layer_" + std::to_string(i + 1));
  out.row(header);
  for (const auto& p : spec) {
    double p_out = std::norm(p.response.b_left) + std::norm(p.response.b_right);
    std::vector<std::string> cells = {fmt(p.wavelength_nm), fmt(p.response.theta),
                                      fmt(p.response.absorption), fmt(p_out)};
    for (double a : p.response.per_layer) cells.push_back(fmt(a));
    out.row(cells);
  }
  return 0;
}

// ---- design ----------------------------------------------------------------

int run_design(const std::string& geometry, double fill, double sublayer_nm, int layers,
               double lambda, double spacer_n, double mirror_r, double slit_eps,
               const std::string& out_path, const std::string& summary_path) {
  cpa::Material film = cpa::nbtin_film();
  cpa::Material slit =
      slit_eps == 1.0 ? cpa::Material::vacuum()
                      : cpa::Material{cpa::MaterialKind::dielectric, {slit_eps, 0.0}, nullptr};
  cpa::design::Geometry geom;
  if (geometry == "cp")
    geom = cpa::design::CounterPropagating{};
  else if (geometry == "salisbury")
    geom = cpa::design::Salisbury{spacer_n, mirror_r};
  else
    throw CLI::ValidationError("--geometry", "expected 'cp' or 'salisbury'");

  CsvOut out(out_path);
  json summary;
  if (sublayer_nm > 0.0) {
    if (layers < 1) throw CLI::ValidationError("--layers", "required with --sublayer-nm");
    double f = cpa::design::solve_filling_factor(film, slit, sublayer_nm, layers, lambda, geom);
    cpa::Stack sub;
    sub.layers.push_back(
        cpa::Layer::detector(cpa::MeanderSpec{film, slit, f, sublayer_nm}));
    double a_sub = cpa::traveling_response(sub, lambda).A;
    out.row({"f", fmt(f)});
    out.row({"D_total_nm", fmt(sublayer_nm * layers)});
    out.row({"A_sublayer_tr", fmt(a_sub)});
    summary = {{"f", f}, {"D_total_nm", sublayer_nm * layers}, {"A_sublayer_tr", a_sub}};
  } else {
    if (fill <= 0.0) throw CLI::ValidationError("--fill", "required unless --sublayer-nm given");
    double d_opt = cpa::design::optimal_thickness(film, slit, fill, lambda, geom);
    out.row({"D_opt_nm", fmt(d_opt)});
    summary["D_opt_nm"] = d_opt;
    cpa::MeanderSpec spec{film, slit, fill, d_opt};
    if (geometry == "salisbury") {
      cpa::Stack s = cpa::design::build_salisbury(spec, spacer_n, mirror_r, lambda);
      double a = cpa::traveling_response(s, lambda).A;
      out.row({"A_at_opt", fmt(a)});
      summary["A_at_opt"] = a;
    } else {
      cpa::Stack s;
      s.layers.push_back(cpa::Layer::detector(spec));
      double a_coh = cpa::coherent_best_phase(s, lambda).absorption;
      double a_tr = cpa::traveling_response(s, lambda).A;
      out.row({"A_coh_at_opt", fmt(a_coh)});
      out.row({"A_tr_at_opt", fmt(a_tr)});
      summary["A_coh_at_opt"] = a_coh;
      summary["A_tr_at_opt"] = a_tr;
    }
  }
  write_summary(summary_path, summary);
  return 0;
}

// ---- uniformity ------------------------------------------------------------

int run_uniformity(const std::string& stack_path, double lambda_flag, const std::string& out_path,
                   const std::string& summary_path) {
  auto doc = load_stack(stack_path);
  double wl = pick_lambda(lambda_flag, doc);
  auto coh = cpa::coherent_best_phase(doc.stack, wl);
  std::vector<double> det;
  for (std::size_t i : doc.stack.detector_indices()) det.push_back(coh.per_layer[i]);
  auto u = cpa::design::uniformity(det);
  CsvOut out(out_path);
  for (std::size_t i = 0; i < det.size(); ++i)
    out.row({"det_" + std::to_string(i + 1), fmt(det[i])});
  double a_coh = coh.absorption;
  out.row({"A_coh", fmt(a_coh)});
  out.row({"theta", fmt(coh.theta)});
  out.row({"delta", fmt(u.delta)});
  out.row({"delta_max", fmt(u.delta_max)});
  out.row({"delta_norm", fmt(u.delta_norm)});
  write_summary(summary_path, json{{"A_coh", a_coh},
                                   {"theta", coh.theta},
                                   {"delta", u.delta},
                                   {"delta_max", u.delta_max},
                                   {"delta_norm", u.delta_norm},
                                   {"per_layer", det}});
  return 0;
}

// ---- pnr -------------------------------------------------------------------

cpa::stats::PhotonSource parse_source(const std::string& spec, int n_max) {
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--source", "expected fock:<m> or sq:<xi>");
  std::string kind = spec.substr(0, colon);
  std::string arg = spec.substr(colon + 1);
  if (kind == "fock") {
    int m = 0;
    auto r = std::from_chars(arg.data(), arg.data() + arg.size(), m);
    if (r.ec != std::errc() || r.ptr != arg.data() + arg.size())
      throw CLI::ValidationError("--source", "fock photon number must be an integer");
    return cpa::stats::PhotonSource::fock(m);
  }
  if (kind == "sq") {
    double xi = 0.0;
    auto r = std::from_chars(arg.data(), arg.data() + arg.size(), xi);
    if (r.ec != std::errc() || r.ptr != arg.data() + arg.size())
      throw CLI::ValidationError("--source", "squeezing parameter must be a number");
    return cpa::stats::squeezed_vacuum_pn(xi, n_max);
  }
  throw CLI::ValidationError("--source", "expected fock:<m> or sq:<xi>");
}

int run_pnr(const std::string& source_spec, int n_det, double eta, const std::string& mode,
            int n_max, const std::string& out_path, const std::string& summary_path) {
  cpa::stats::DetectorArraySpec array;
  array.detectors = n_det;
  array.efficiency = eta;
  if (mode == "distributed")
    array.mode = cpa::stats::DetectorArraySpec::Mode::coherent_distributed;
  else if (mode != "multiplexed")
    throw CLI::ValidationError("--mode", "expected 'multiplexed' or 'distributed'");
  auto source = parse_source(source_spec, n_max);
  auto dist = cpa::stats::source_click_distribution(source, array);
  CsvOut out(out_path);
  out.row({"k", "p"});
  for (std::size_t k = 0; k < dist.p.size(); ++k)
    out.row({std::to_string(k), fmt(dist.p[k])});
  write_summary(summary_path, json{{"source", dist.source_label},
                                   {"detectors", n_det},
                                   {"eta", array.effective_eta()},
                                   {"p", dist.p}});
  return 0;
}

int run_pnr_curve(int m, double eta, int n_to, const std::string& out_path) {
  if (n_to < m) throw CLI::ValidationError("--n-max", "must be >= --m");
  CsvOut out(out_path);
  out.row({"n", "p"});
  for (int n = m; n <= n_to; ++n)
    out.row({std::to_string(n), fmt(cpa::stats::resolution_probability(m, n, eta))});
  return 0;
}

// ---- montecarlo ------------------------------------------------------------

int run_montecarlo(const std::string& stack_path, std::uint64_t samples, double bound,
                   std::uint64_t seed, double lambda_flag, const std::string& which,
                   const std::string& dist, unsigned threads, const std::string& theta,
                   const std::string& out_path, const std::string& summary_path) {
  auto doc = load_stack(stack_path);
  double wl = pick_lambda(lambda_flag, doc);
  cpa::mc::PerturbationSpec spec;
  spec.fractional_bound = bound;
  if (which == "detectors")
    spec.which = cpa::mc::PerturbationSpec::Layers::detectors_only;
  else if (which != "both")
    throw CLI::ValidationError("--which", "expected 'both' or 'detectors'");
  if (dist == "gaussian")
    spec.distribution = cpa::mc::PerturbationSpec::Distribution::truncated_gaussian;
  else if (dist != "uniform")
    throw CLI::ValidationError("--dist", "expected 'uniform' or 'gaussian'");
  std::optional<double> fixed_theta;
  if (theta != "best") {
    double v = 0.0;
    auto r = std::from_chars(theta.data(), theta.data() + theta.size(), v);
    if (r.ec != std::errc() || r.ptr != theta.data() + theta.size())
      throw CLI::ValidationError("--theta", "expected 'best' or a number (radians)");
    fixed_theta = v;
  }

  auto report = cpa::mc::run_ensemble(doc.stack, spec, samples, seed, wl, threads, fixed_theta);

  std::size_t n_det = doc.stack.detector_indices().size();
  CsvOut out(out_path);
  std::vector<std::string> header = {"index", "A_coh", "theta",  "delta_norm", "re_t",
                                     "im_t",  "re_r",  "im_r",   "re_rp",      "im_rp"};
  for (std::size_t i = 0; i < n_det; ++i) header.push_back("A_det_" + std::to_string(i + 1));
  header.push_back("error");
  out.row(header);
  for (const auto& s : report.samples) {
    std::vector<std::string> cells = {std::to_string(s.index), fmt(s.absorption), fmt(s.theta),
                                      fmt(s.delta_norm),       fmt(s.t.real()),   fmt(s.t.imag()),
                                      fmt(s.r.real()),         fmt(s.r.imag()),
                                      fmt(s.r_right.real()),   fmt(s.r_right.imag())};
    for (std::size_t i = 0; i < n_det; ++i)
      cells.push_back(i < s.detector_absorption.size() ? fmt(s.detector_absorption[i]) : "");
    cells.push_back(s.error);
    out.row(cells);
  }

  json quantiles;
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.95})
    quantiles[fmt(q)] = report.delta_norm_quantile(q);
  write_summary(summary_path,
                json{{"samples", samples},
                     {"seed", seed},
                     {"bound", bound},
                     {"distribution", dist},
                     {"which_layers", which},
                     {"lambda_nm", wl},
                     {"fraction_A_coh_ge_0.99", report.fraction_absorption_at_least(0.99)},
                     {"min_A_coh", report.min_absorption()},
                     {"fraction_delta_norm_lt_0.03", report.fraction_delta_norm_below(0.03)},
                     {"delta_norm_quantiles", quantiles},
                     {"failed_samples", report.failed_samples()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherent-absorption detector stack toolkit"};
  app.require_subcommand(1);

  std::string stack_path, out_path, summary_path;
  double lambda = 0.0;

  // sweep
  auto* sweep = app.add_subcommand("sweep", "deposition trajectory of a stack (CSV columns: "
                                            "cumulative_nm,layer,re_t,im_t,re_r,im_r,T,R,A)");
  double step = 0.1;
  sweep->add_option("--stack", stack_path, "stack spec JSON")->required();
  sweep->add_option("--lambda", lambda, "wavelength nm (default: design wavelength)");
  sweep->add_option("--step", step, "detector sweep step nm (spacers >= 1 nm)");
  sweep->add_option("--out", out_path, "CSV output path (default stdout)");

  // spectrum
  auto* spectrum = app.add_subcommand(
      "spectrum", "response vs wavelength (traveling columns: lambda_nm,re_t,im_t,re_r,im_r,"
                  "re_rp,im_rp,T,R,A; coherent: lambda_nm,theta,A_coh,P_out,A_layer_i...)");
  double from = 0.0, to = 0.0;
  int points = 0;
  std::string mode = "traveling";
  spectrum->add_option("--stack", stack_path, "stack spec JSON")->required();
  spectrum->add_option("--from", from, "first wavelength nm")->required();
  spectrum->add_option("--to", to, "last wavelength nm")->required();
  spectrum->add_option("--points", points, "sample count")->required();
  spectrum->add_option("--mode", mode, "traveling | coherent");
  spectrum->add_option("--out", out_path, "CSV output path (default stdout)");

  // design
  auto* design = app.add_subcommand(
      "design", "optimal thickness for a filling factor (rows: D_opt_nm,A_...), or the filling "
                "factor for --sublayer-nm/--layers (rows: f,D_total_nm,A_sublayer_tr)");
  std::string geometry = "cp";
  double fill = 0.0, sublayer_nm = 0.0, spacer_n = 1.5, mirror_r = 0.999, slit_eps = 1.0;
  int layers = 0;
  design->add_option("--geometry", geometry, "cp | salisbury");
  design->add_option("--fill", fill, "meander filling factor");
  design->add_option("--sublayer-nm", sublayer_nm, "sublayer thickness nm (filling-factor mode)");
  design->add_option("--layers", layers, "sublayer count (filling-factor mode)");
  design->add_option("--lambda", lambda, "wavelength nm (default 1550)");
  design->add_option("--spacer-n", spacer_n, "spacer refractive index");
  design->add_option("--mirror-r", mirror_r, "mirror reflectivity (salisbury)");
  design->add_option("--slit-eps", slit_eps, "slit (matrix) permittivity, default 1 (vacuum)");
  design->add_option("--out", out_path, "CSV output path (default stdout)");
  design->add_option("--summary", summary_path, "JSON summary path");

  // uniformity
  auto* uniformity = app.add_subcommand(
      "uniformity", "per-detector coherent absorption at the best phase (rows: det_i,...; then "
                    "A_coh, theta, delta, delta_max, delta_norm)");
  uniformity->add_option("--stack", stack_path, "stack spec JSON")->required();
  uniformity->add_option("--lambda", lambda, "wavelength nm (default: design wavelength)");
  uniformity->add_option("--out", out_path, "CSV output path (default stdout)");
  uniformity->add_option("--summary", summary_path, "JSON summary path");

  // pnr
  auto* pnr = app.add_subcommand(
      "pnr", "click distribution for a photon source (CSV columns: k,p)");
  std::string source_spec;
  int n_det = 0, n_max_photons = 100;
  double eta = 1.0;
  std::string array_mode = "multiplexed";
  pnr->add_option("--source", source_spec, "fock:<m> | sq:<xi>")->required();
  pnr->add_option("--n", n_det, "number of detectors")->required();
  pnr->add_option("--eta", eta, "per-detector efficiency");
  pnr->add_option("--mode", array_mode, "multiplexed | distributed (distributed forces eta = 1)");
  pnr->add_option("--nmax-photons", n_max_photons, "squeezed-vacuum truncation (even)");
  pnr->add_option("--out", out_path, "CSV output path (default stdout)");
  pnr->add_option("--summary", summary_path, "JSON summary path");

  // pnr-curve
  auto* curve = app.add_subcommand(
      "pnr-curve", "P(m clicks | m photons) vs detector count (CSV columns: n,p)");
  int curve_m = 0, curve_n_max = 100;
  double curve_eta = 1.0;
  curve->add_option("--m", curve_m, "photon number")->required();
  curve->add_option("--eta", curve_eta, "per-detector efficiency");
  curve->add_option("--n-max", curve_n_max, "largest detector count");
  curve->add_option("--out", out_path, "CSV output path (default stdout)");

  // montecarlo
  auto* montecarlo = app.add_subcommand(
      "montecarlo", "thickness-tolerance ensemble (CSV columns: index,A_coh,theta,delta_norm,"
                    "re_t,im_t,re_r,im_r,re_rp,im_rp,A_det_i...,error)");
  std::uint64_t samples = 1000, seed = 42;
  double bound = 0.05;
  std::string which = "both", dist = "uniform", theta = "best";
  unsigned threads = 1;
  montecarlo->add_option("--stack", stack_path, "stack spec JSON")->required();
  montecarlo->add_option("--samples", samples, "ensemble size");
  montecarlo->add_option("--bound", bound, "fractional thickness bound (e.g. 0.05)");
  montecarlo->add_option("--seed", seed, "master seed");
  montecarlo->add_option("--lambda", lambda, "wavelength nm (default: design wavelength)");
  montecarlo->add_option("--which", which, "both | detectors");
  montecarlo->add_option("--dist", dist, "uniform | gaussian (sigma = bound/2, truncated)");
  montecarlo->add_option("--threads", threads, "worker threads (result is thread-invariant)");
  montecarlo->add_option("--theta", theta, "'best' (re-optimized per sample) or radians");
  montecarlo->add_option("--out", out_path, "CSV output path (default stdout)");
  montecarlo->add_option("--summary", summary_path, "JSON summary path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (sweep->parsed()) return run_sweep(stack_path, lambda, step, out_path);
    if (spectrum->parsed()) return run_spectrum(stack_path, from, to, points, mode, out_path);
    if (design->parsed())
      return run_design(geometry, fill, sublayer_nm, layers, lambda > 0.0 ? lambda : 1550.0,
                        spacer_n, mirror_r, slit_eps, out_path, summary_path);
    if (uniformity->parsed()) return run_uniformity(stack_path, lambda, out_path, summary_path);
    if (pnr->parsed())
      return run_pnr(source_spec, n_det, eta, array_mode, n_max_photons, out_path, summary_path);
    if (curve->parsed()) return run_pnr_curve(curve_m, curve_eta, curve_n_max, out_path);
    if (montecarlo->parsed())
      return run_montecarlo(stack_path, samples, bound, seed, lambda, which, dist, threads, theta,
                            out_path, summary_path);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const cpa::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
