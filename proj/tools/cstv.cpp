// Command-line front end: degrade, restore, evaluate, sweep.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 1 anything else (I/O included).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cstv/config.hpp"
#include "cstv/cstv.hpp"

namespace fs = std::filesystem;
using namespace cstv;

namespace {

struct GlobalOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  int threads = 1;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

// Effective configuration of one run. Every field is filled with defaults so
// the emitted reports are complete.
struct RunConfig {
  std::optional<CrossChannelBlur> blur;
  std::string preset;
  NoiseSpec noise;
  SolverParams solver;
  SsimMode ssim = SsimMode::global;
  bool clamp = false;
  int bit_depth = 16;

  Json to_json() const {
    Json j;
    if (!preset.empty()) j["preset"] = preset;
    j["blur"] = blur ? cstv::to_json(*blur) : Json(nullptr);
    j["noise"] = cstv::to_json(noise);
    j["solver"] = cstv::to_json(solver);
    j["metrics"] = Json{{"ssim", ssim == SsimMode::global ? "global" : "windowed"}};
    j["clamp"] = clamp;
    j["bit_depth"] = bit_depth;
    return j;
  }
  std::string hash() const { return hex64(fnv1a64(to_json().dump())); }
};

void apply_preset(RunConfig& rc, const std::string& name) {
  const Preset p = preset(name);
  rc.preset = name;
  rc.blur = p.blur;
  rc.noise.sigma = p.noise.sigma;
}

RunConfig load_run_config(const GlobalOptions& g) {
  RunConfig rc;
  if (!g.config.empty()) {
    const Json j = read_json_file(g.config);
    detail::reject_unknown_keys(j, {"preset", "blur", "noise", "solver", "metrics", "clamp", "bit_depth"}, "config");
    if (j.contains("preset")) apply_preset(rc, detail::get_or<std::string>(j, "preset", ""));
    if (j.contains("blur")) rc.blur = blur_from_json(j.at("blur"));
    if (j.contains("noise")) rc.noise = noise_from_json(j.at("noise"));
    if (j.contains("solver")) rc.solver = params_from_json(j.at("solver"));
    if (j.contains("metrics")) {
      const Json& m = j.at("metrics");
      detail::reject_unknown_keys(m, {"ssim"}, "metrics");
      const std::string mode = detail::get_or<std::string>(m, "ssim", "global");
      if (mode == "global") rc.ssim = SsimMode::global;
      else if (mode == "windowed") rc.ssim = SsimMode::windowed;
      else throw ConfigError("metrics.ssim must be 'global' or 'windowed'");
    }
    rc.clamp = detail::get_or(j, "clamp", false);
    rc.bit_depth = detail::get_or(j, "bit_depth", 16);
  }
  if (!g.preset.empty()) apply_preset(rc, g.preset);
  if (g.seed) rc.noise.seed = *g.seed;
  if (rc.bit_depth != 8 && rc.bit_depth != 16) throw ConfigError("bit_depth must be 8 or 16");
  return rc;
}

std::string sidecar_path(const std::string& image) { return image + ".json"; }

// The blur travels with the degraded image; an explicit --config/--preset blur wins.
CrossChannelBlur resolve_blur(const RunConfig& rc, const std::string& image, const std::string& sidecar) {
  if (rc.blur) return *rc.blur;
  const std::string path = sidecar.empty() ? sidecar_path(image) : sidecar;
  if (!fs::exists(path))
    throw ConfigError("no blur operator: pass --config or --preset, or provide the sidecar '" + path + "'");
  const Json j = read_json_file(path);
  if (!j.contains("blur")) throw ConfigError("sidecar '" + path + "' has no 'blur' entry");
  return blur_from_json(j.at("blur"));
}

// ---------------------------------------------------------------------------

int cmd_degrade(const GlobalOptions& g, const std::string& input, std::optional<double> sigma, bool clamp) {
  RunConfig rc = load_run_config(g);
  if (sigma) rc.noise.sigma = *sigma;
  rc.clamp = rc.clamp || clamp;
  if (!rc.blur) throw ConfigError("degrade needs a blur: pass --preset or --config");
  if (g.out.empty()) throw ConfigError("degrade needs --out");

  const ColorImage clean = load_image(input);
  const ColorImage z = degrade(clean, *rc.blur, rc.noise, rc.clamp);
  save_image(g.out, z, rc.bit_depth);

  Json side;
  side["version"] = kVersion;
  side["config_hash"] = rc.hash();
  if (!rc.preset.empty()) side["preset"] = rc.preset;
  side["blur"] = to_json(*rc.blur);
  side["noise"] = to_json(rc.noise);
  side["seed"] = rc.noise.seed;
  side["rng"] = kNoiseGenerator;
  side["clamp"] = rc.clamp;
  side["width"] = z.width();
  side["height"] = z.height();
  side["checksum"] = hex64(image_checksum(load_image(g.out)));
  write_text(sidecar_path(g.out), side.dump(2) + "\n");
  std::cout << "wrote " << g.out << " and " << sidecar_path(g.out) << "\n";
  return 0;
}

int cmd_restore(const GlobalOptions& g, const std::string& input, const std::string& sidecar,
                const std::string& reference, std::string report_path, std::string energy_path) {
  const RunConfig rc = load_run_config(g);
  if (g.out.empty()) throw ConfigError("restore needs --out");
  const CrossChannelBlur blur = resolve_blur(rc, input, sidecar);
  const ColorImage z = load_image(input);

  const RestorationReport rep = restore(z, blur, rc.solver);
  save_image(g.out, rep.image, rc.bit_depth);
  if (report_path.empty()) report_path = g.out + ".json";
  if (energy_path.empty()) energy_path = g.out + ".energy.csv";

  Json j;
  j["version"] = kVersion;
  j["config_hash"] = rc.hash();
  j["config"] = rc.to_json();
  j["blur"] = to_json(blur);
  j["input_checksum"] = hex64(image_checksum(z));
  j["output_checksum"] = hex64(image_checksum(load_image(g.out)));
  j["restoration"] = to_json(rep);
  if (rep.diagnostics.least_squares) j["model"] = "least_squares";
  if (!reference.empty()) {
    const ColorImage ref = load_image(reference);
    j["metrics"] = Json{{"observed", to_json(evaluate(z, ref, rc.ssim))},
                        {"restored", to_json(evaluate(rep.image, ref, rc.ssim))}};
  }
  write_text(report_path, j.dump(2) + "\n");
  std::ostringstream csv;
  write_energy_csv(csv, rep.trace);
  write_text(energy_path, csv.str());
  std::cout << "wrote " << g.out << ", " << report_path << ", " << energy_path << " (" << rep.iterations
            << " iterations" << (rep.converged ? "" : ", not converged") << ")\n";
  return 0;
}

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) std::cout << text;
  else write_text(g.out, text);
}

int cmd_evaluate(const GlobalOptions& g, const std::string& restored, const std::string& reference,
                 const std::string& method) {
  const RunConfig rc = load_run_config(g);
  if (g.format != "json" && g.format != "csv") throw ConfigError("--format must be json or csv");

  std::vector<std::pair<std::string, std::string>> pairs;  // (restored, reference)
  if (fs::is_directory(restored)) {
    if (!fs::is_directory(reference)) throw ConfigError("batch mode needs --reference to be a directory too");
    for (const auto& e : fs::directory_iterator(restored)) {
      if (!e.is_regular_file()) continue;
      const std::string ext = e.path().extension().string();
      if (ext != ".png" && ext != ".ppm" && ext != ".pnm") continue;
      const fs::path ref = fs::path(reference) / e.path().filename();
      if (!fs::exists(ref)) throw ConfigError("no reference for '" + e.path().filename().string() + "'");
      pairs.emplace_back(e.path().string(), ref.string());
    }
    std::sort(pairs.begin(), pairs.end());
    if (pairs.empty()) throw ConfigError("no images found in '" + restored + "'");
  } else {
    pairs.emplace_back(restored, reference);
  }

  std::ostringstream os;
  Json rows = Json::array();
  if (g.format == "csv") write_metrics_csv_header(os);
  for (const auto& [a, b] : pairs) {
    const MetricReport m = evaluate(load_image(a), load_image(b), rc.ssim);
    const std::string id = fs::path(a).filename().string();
    if (g.format == "csv") {
      write_metrics_csv_row(os, id, method, m);
    } else {
      Json r = to_json(m);
      r["image"] = id;
      r["method"] = method;
      rows.push_back(r);
    }
  }
  if (g.format == "json") os << (rows.size() == 1 ? rows[0] : rows).dump(2) << "\n";
  emit(g, os.str());
  return 0;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "' in value list");
    }
  }
  return v;
}

MetricWeights parse_weights(const std::string& s) {
  MetricWeights w{0, 0, 0, 0};
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("weights must look like psnr=0.5,ssim=0.5");
    const std::string k = tok.substr(0, eq);
    const double v = parse_values(tok.substr(eq + 1)).at(0);
    if (k == "psnr") w.psnr = v;
    else if (k == "ssim") w.ssim = v;
    else if (k == "mse") w.mse = v;
    else if (k == "ciede2000") w.ciede2000 = v;
    else throw ConfigError("unknown metric weight '" + k + "'");
  }
  return w;
}

struct SweepOptions {
  std::string input, reference, sidecar;
  std::string axis1 = "lambda1", axis2 = "lambda2";
  std::string values1, values2;
  int count = 10;
  double bound = 0.0;
  std::string weights = "psnr=0.5,ssim=0.5";
  std::string terms = "both";
  std::string choice;
};

std::vector<double> sweep_values(const std::string& list, const std::string& axis, const SweepOptions& o,
                                 const ColorImage& z, const RunConfig& rc) {
  if (!list.empty()) return parse_values(list);
  double b = o.bound;
  if (b <= 0.0) {
    if (axis != "lambda1" && axis != "lambda2")
      throw ConfigError("axis '" + axis + "' needs explicit values or --bound");
    b = lambda_bound(static_cast<double>(z.pixels()), rc.noise.sigma);
    if (b <= 0.0) throw ConfigError("lambda bound is zero (noise sigma 0); pass --bound or explicit values");
  }
  return uniform_axis(b, o.count);
}

int cmd_sweep(const GlobalOptions& g, const SweepOptions& o) {
  const RunConfig rc = load_run_config(g);
  if (g.out.empty()) throw ConfigError("sweep needs --out for the surface CSV");
  if (g.format != "json" && g.format != "csv") throw ConfigError("--format must be json or csv");
  ModelTerms terms;
  if (o.terms == "svtv") terms.ctv = false;
  else if (o.terms == "ctv") terms.svtv = false;
  else if (o.terms != "both") throw ConfigError("--terms must be both, svtv or ctv");

  const CrossChannelBlur blur = resolve_blur(rc, o.input, o.sidecar);
  const ColorImage z = load_image(o.input);
  const ColorImage ref = load_image(o.reference);
  const SweepAxis a1{o.axis1, sweep_values(o.values1, o.axis1, o, z, rc)};
  const SweepAxis a2{o.axis2, sweep_values(o.values2, o.axis2, o, z, rc)};
  const SweepGrid grid = sweep(z, ref, QuaternionBlurOperator::from_blur(blur), rc.solver, a1, a2, terms, g.threads);
  std::ostringstream csv;
  write_sweep_csv(csv, grid);
  write_text(g.out, csv.str());

  const SweetSpot best = sweet_spot(grid, parse_weights(o.weights));
  const SweepCell& c = grid.cells[best.index];
  std::ostringstream os;
  if (g.format == "json") {
    Json j;
    j["version"] = kVersion;
    j["config_hash"] = rc.hash();
    j[o.axis1] = best.x1;
    j[o.axis2] = best.x2;
    j["score"] = best.score;
    j["metrics"] = to_json(c.metrics);
    os << j.dump(2) << "\n";
  } else {
    os << o.axis1 << ',' << o.axis2 << ",score,psnr,ssim,mse,ciede2000\n"
       << detail::format_number(best.x1) << ',' << detail::format_number(best.x2) << ','
       << detail::format_number(best.score) << ',' << detail::format_number(c.metrics.psnr) << ','
       << detail::format_number(c.metrics.ssim) << ',' << detail::format_number(c.metrics.mse) << ','
       << detail::format_number(c.metrics.ciede2000) << '\n';
  }
  if (o.choice.empty()) std::cout << os.str();
  else write_text(o.choice, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Colour image restoration with cross-space total variation and quaternion blur splitting"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--preset", g.preset, "Blur/noise preset: symmetric_va or asymmetric_vb");
  app.add_option("--seed", g.seed, "Noise seed");
  app.add_option("--out", g.out, "Output path");
  app.add_option("--format", g.format, "Report format: json or csv");
  app.add_option("--threads", g.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag_function("--version", [](std::int64_t) {
    std::cout << kVersion << "\n";
    throw CLI::Success();
  }, "Print the version");

  std::string in, sidecar, reference, report, energy, method = "cstv";
  std::optional<double> sigma;
  bool clamp = false;

  auto* deg = app.add_subcommand("degrade", "Blur and add noise to a clean image");
  deg->add_option("input", in, "Clean image")->required();
  deg->add_option("--sigma", sigma, "Noise standard deviation (overrides the preset)");
  deg->add_flag("--clamp", clamp, "Clip the degraded samples to [0,1]");

  auto* res = app.add_subcommand("restore", "Restore a degraded image");
  res->add_option("input", in, "Degraded image")->required();
  res->add_option("--sidecar", sidecar, "Blur description (default: <input>.json)");
  res->add_option("--reference", reference, "Clean image; adds metrics to the report");
  res->add_option("--report", report, "Report path (default: <out>.json)");
  res->add_option("--energy", energy, "Energy trace CSV (default: <out>.energy.csv)");

  std::string restored;
  auto* ev = app.add_subcommand("evaluate", "Compare a restored image (or directory) against a reference");
  ev->add_option("restored", restored, "Restored image or directory")->required();
  ev->add_option("reference", reference, "Reference image or directory")->required();
  ev->add_option("--method", method, "Method label for the report");

  SweepOptions so;
  auto* sw = app.add_subcommand("sweep", "Grid search over two solver parameters");
  sw->add_option("input", so.input, "Degraded image")->required();
  sw->add_option("--reference", so.reference, "Clean image")->required();
  sw->add_option("--sidecar", so.sidecar, "Blur description (default: <input>.json)");
  sw->add_option("--axis1", so.axis1, "First parameter name");
  sw->add_option("--axis2", so.axis2, "Second parameter name");
  sw->add_option("--values1", so.values1, "Comma-separated values for axis 1");
  sw->add_option("--values2", so.values2, "Comma-separated values for axis 2");
  sw->add_option("--count", so.count, "Grid points per axis when values are not given")->check(CLI::PositiveNumber);
  sw->add_option("--bound", so.bound, "Upper end of generated axes (default: lambda bound)");
  sw->add_option("--weights", so.weights, "Metric weights, e.g. psnr=0.5,ssim=0.5");
  sw->add_option("--terms", so.terms, "Regularizers: both, svtv or ctv");
  sw->add_option("--choice", so.choice, "Where to write the chosen parameters (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*deg) return cmd_degrade(g, in, sigma, clamp);
    if (*res) return cmd_restore(g, in, sidecar, reference, report, energy);
    if (*ev) return cmd_evaluate(g, restored, reference, method);
    if (*sw) return cmd_sweep(g, so);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
