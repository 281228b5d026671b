#include "freemix/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "freemix/classical.hpp"
#include "freemix/free_convolution.hpp"
#include "freemix/io.hpp"
#include "freemix/mixture.hpp"
#include "freemix/models.hpp"

namespace freemix::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct ModelFlags {
  std::string model;
  std::optional<Index> m, ell;
  std::optional<int> beta, n, d;
  std::optional<double> rho, var;
  std::optional<std::string> ensemble, coupling;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--m", m, "Matrix dimension");
    cmd->add_option("--ell", ell, "Block size (block-goe)");
    cmd->add_option("--beta", beta, "1 real, 2 complex")->check(CLI::IsMember({1, 2}));
    cmd->add_option("--rho", rho, "KMS parameter, 0 < rho < 1");
    cmd->add_option("--var", var, "Variance of the diagonal Gaussian summand");
    cmd->add_option("--n", n, "Spin chain sites");
    cmd->add_option("--d", d, "Spin chain local dimension");
    cmd->add_option("--ensemble", ensemble, "Spin chain local ensemble")
        ->check(CLI::IsMember({"gue", "goe", "projector", "bernoulli"}));
    cmd->add_option("--coupling", coupling, "diag-gauss coupling")
        ->check(CLI::IsMember({"identity", "permutation", "haar"}));
  }

  ModelSpec spec(ModelSpec base, std::uint64_t seed) const {
    if (!model.empty()) base.name = model;
    if (m) base.m = *m;
    if (ell) base.ell = *ell;
    if (beta) base.beta = *beta;
    if (rho) base.rho = *rho;
    if (var) base.variance = *var;
    if (n) base.n = *n;
    if (d) base.d = *d;
    if (ensemble) base.ensemble = parse_local_ensemble(*ensemble);
    if (coupling) base.coupling = *coupling;
    base.seed = seed;
    return base;
  }
};

json model_json(const ModelSpec& s) {
  json j;
  j["name"] = s.name;
  if (s.name == "spin-chain") {
    j["n"] = s.n;
    j["d"] = s.d;
    j["ensemble"] = to_string(s.ensemble);
    j["seed"] = s.seed;
    return j;
  }
  j["m"] = s.m;
  j["beta"] = s.beta;
  j["var"] = s.variance;
  if (s.name == "block-goe") j["ell"] = s.ell;
  if (s.name == "kms") j["rho"] = s.rho;
  if (s.name == "diag-gauss") j["coupling"] = s.coupling;
  return j;
}

json smoothing_json(const SmoothingSpec& s) {
  json j;
  j["kind"] = s.kind == SmoothingKind::histogram ? "histogram" : "gaussian";
  if (s.kind == SmoothingKind::gaussian) {
    if (s.bandwidth)
      j["bandwidth"] = *s.bandwidth;
    else
      j["bandwidth"] = "silverman";
  }
  return j;
}

json config_json(const EstimateConfig& c) {
  json j;
  j["samples"] = c.samples;
  j["free_samples"] = c.free_samples;
  j["seed"] = c.seed.seed;
  j["asymptotic_ipr"] = c.asymptotic_ipr;
  if (c.method) j["method"] = to_string(*c.method);
  j["smoothing"] = smoothing_json(c.smoothing);
  return j;
}

EstimateResult run_estimate(const ModelSpec& spec, const EstimateConfig& cfg) {
  const AnyPair pair = make_model(spec);
  return std::visit([&](const auto& p) { return estimate(p, cfg); }, pair);
}

MomentReport run_moments(const ModelSpec& spec, const EstimateConfig& cfg) {
  const AnyPair pair = make_model(spec);
  return std::visit([&](const auto& p) { return estimate_moments(p, cfg); }, pair);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct PEstimateCmd {
  ModelFlags model;
  int samples = 200;
  std::uint64_t seed = 0;
  std::optional<std::string> method;
  bool asymptotic = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--model", model.model, "Model name")->required()->check(CLI::IsMember(model_names()));
    model.add_to(cmd);
    cmd->add_option("--samples", samples, "Monte Carlo draws")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    cmd->add_option("--method", method, "p estimator")->check(CLI::IsMember({"moments", "ipr", "closed"}));
    cmd->add_flag("--asymptotic-ipr", asymptotic, "Use the m -> infinity IPR ratio");
  }

  int run(std::ostream& out) const {
    const ModelSpec spec = model.spec({}, seed);
    EstimateConfig cfg;
    cfg.samples = samples;
    cfg.seed = {seed, 0};
    if (method) cfg.method = parse_p_method(*method);
    cfg.asymptotic_ipr = asymptotic;
    const MomentReport r = run_moments(spec, cfg);
    json j = to_json(r);
    j["model"] = model_json(spec);
    j["config"] = {{"samples", samples}, {"seed", seed}, {"asymptotic_ipr", asymptotic}};
    out << j.dump(2) << '\n';
    return ok;
  }
};

struct DensityCmd {
  ModelFlags model;
  std::string method;
  std::string out_path;
  std::optional<double> xmin, xmax;
  std::size_t points = 512;
  int samples = 200;
  int free_samples = 200;
  std::uint64_t seed = 0;
  std::optional<std::string> spectrum, spectrum2;
  std::optional<int> folds;
  double eta = 0.0;
  std::optional<double> bandwidth;
  bool histogram = false;
  bool pointwise = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--method", method, "exact, classical, free-mc, free-analytic or convex")
        ->required()
        ->check(CLI::IsMember({"exact", "classical", "free-mc", "free-analytic", "convex"}));
    cmd->add_option("--out", out_path, "Output CSV path")->required();
    cmd->add_option("--model", model.model, "Model name")->check(CLI::IsMember(model_names()));
    model.add_to(cmd);
    cmd->add_option("--xmin", xmin, "Grid start");
    cmd->add_option("--xmax", xmax, "Grid end");
    cmd->add_option("--points", points, "Grid points")->capture_default_str();
    cmd->add_option("--samples", samples, "Monte Carlo draws")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--free-samples", free_samples, "Haar draws for the free density")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    cmd->add_option("--spectrum", spectrum, "Spectrum file (one value or value,weight per line)");
    cmd->add_option("--spectrum2", spectrum2, "Second spectrum file (defaults to --spectrum)");
    cmd->add_option("--folds", folds, "Fold count N for free-analytic")->check(CLI::PositiveNumber);
    cmd->add_option("--eta", eta, "Imaginary offset for free-analytic smoothing")->capture_default_str();
    cmd->add_option("--bandwidth", bandwidth, "Gaussian kernel bandwidth (default Silverman)");
    cmd->add_flag("--histogram", histogram, "Histogram instead of Gaussian smoothing");
    cmd->add_flag("--pointwise", pointwise, "free-analytic: write exact point values, not renormalized");
  }

  std::optional<GridSpec> explicit_grid() const {
    if (xmin.has_value() != xmax.has_value()) throw std::invalid_argument("--xmin and --xmax go together");
    if (!xmin) return std::nullopt;
    GridSpec g{*xmin, *xmax, points};
    g.validate();
    return g;
  }

  SmoothingSpec smoothing() const {
    SmoothingSpec s;
    if (histogram) s.kind = SmoothingKind::histogram;
    s.bandwidth = bandwidth;
    return s;
  }

  int run(std::ostream& out) const {
    const auto t0 = std::chrono::steady_clock::now();
    json j;
    j["command"] = "density";
    j["method"] = method;
    j["out"] = out_path;
    DensityCurve curve;
    if (pointwise && method != "free-analytic") throw std::invalid_argument("--pointwise applies to free-analytic only");

    if (method == "free-analytic") {
      if (!spectrum || !folds) throw std::invalid_argument("free-analytic requires --spectrum and --folds");
      if (!model.model.empty()) throw std::invalid_argument("free-analytic takes --spectrum, not --model");
      FreeSumQuery q;
      q.base = read_spectrum(fs::path(*spectrum));
      q.folds = *folds;
      q.eta = eta;
      q.smoothing = smoothing();
      if (auto g = explicit_grid()) {
        q.grid = *g;
      } else {
        const double n = *folds;
        const double pad = 3.0 * std::sqrt(n * population_variance(q.base));
        q.grid = GridSpec{n * q.base.min() - pad, n * q.base.max() + pad, points};
        if (!(pad > 0.0)) q.grid = default_grid(q.base.scaled(n), points);
      }
      const FreeDensityResult r = nfold_free_density(q);
      curve = pointwise ? DensityCurve(q.grid, r.pointwise) : r.curve;
      j["pointwise"] = pointwise;
      fs::path roots = fs::path(out_path);
      roots.replace_extension(".roots.json");
      std::ofstream rf(roots, std::ios::binary);
      if (!rf) throw std::invalid_argument("cannot write " + roots.string());
      rf << to_json(r.diagnostics).dump(1) << '\n';
      std::size_t skipped = 0;
      for (const auto& d : r.diagnostics) skipped += d.skipped ? 1 : 0;
      j["folds"] = q.folds;
      j["eta"] = q.eta;
      j["raw_integral"] = r.raw_integral;
      j["skipped_points"] = skipped;
      j["roots"] = roots.string();
      j["spectrum"] = *spectrum;
    } else if (!model.model.empty()) {
      const ModelSpec spec = model.spec({}, seed);
      EstimateConfig cfg;
      cfg.samples = samples;
      cfg.free_samples = free_samples;
      cfg.seed = {seed, 0};
      cfg.grid = explicit_grid();
      cfg.grid_points = points;
      cfg.smoothing = smoothing();
      const EstimateResult r = run_estimate(spec, cfg);
      if (method == "exact") curve = r.exact;
      if (method == "classical") curve = r.classical;
      if (method == "free-mc") curve = r.free;
      if (method == "convex") {
        curve = r.mixed;
        j["p_raw"] = r.report.p_raw;
        j["p_clamped"] = r.report.p_clamped;
        j["p_method"] = to_string(r.report.p_method);
        j["report"] = to_json(r.report);
      }
      j["model"] = model_json(spec);
      j["config"] = config_json(cfg);
    } else {
      if (!spectrum) throw std::invalid_argument("density needs --model or --spectrum");
      if (method == "exact" || method == "convex")
        throw std::invalid_argument(method + " requires a model producing concrete matrices (--model)");
      const Spectrum s1 = read_spectrum(fs::path(*spectrum));
      const Spectrum s2 = spectrum2 ? read_spectrum(fs::path(*spectrum2)) : s1;
      const int beta = model.beta.value_or(1);
      Spectrum atoms = method == "classical" ? classical_sum(s1, s2)
                                             : free_sum_mc(s1, s2, beta, samples, RngSeed{seed, 0});
      const GridSpec g = explicit_grid().value_or(default_grid(atoms, points));
      curve = density_from_spectrum(atoms, g, smoothing());
      j["spectrum"] = *spectrum;
      j["spectrum2"] = spectrum2 ? *spectrum2 : *spectrum;
      if (method == "free-mc") {
        j["samples"] = samples;
        j["seed"] = seed;
        j["beta"] = beta;
      }
      j["smoothing"] = smoothing_json(smoothing());
    }

    write_density_csv(fs::path(out_path), curve);
    j["grid"] = to_json(curve.grid());
    j["integral"] = integral(curve);
    j["runtime_seconds"] = seconds_since(t0);
    out << j.dump(2) << '\n';
    return ok;
  }
};

struct DemoCmd {
  std::string name;
  ModelFlags model;
  std::optional<std::string> outdir;
  std::optional<int> samples;
  int free_samples = 200;
  std::size_t points = 512;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("name", name, "blockdiag, kms, anderson or spinchain")
        ->required()
        ->check(CLI::IsMember({"blockdiag", "kms", "anderson", "spinchain"}));
    model.add_to(cmd);
    cmd->add_option("--outdir", outdir, "Output directory (default $FREEMIX_OUTPUT_DIR or .)");
    cmd->add_option("--samples", samples, "Monte Carlo draws")->check(CLI::PositiveNumber);
    cmd->add_option("--free-samples", free_samples, "Haar draws for the free density")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--points", points, "Grid points")->capture_default_str();
    cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
  }

  ModelSpec defaults() const {
    ModelSpec s;
    if (name == "blockdiag") {
      s.name = "block-goe";
      s.m = 64;
      s.ell = 8;
    } else if (name == "kms") {
      s.name = "kms";
      s.m = 64;
      s.rho = 0.5;
    } else if (name == "anderson") {
      s.name = "anderson";
      s.m = 128;
    } else {
      s.name = "spin-chain";
      s.n = 3;
      s.d = 5;
      s.ensemble = LocalEnsemble::bernoulli;
    }
    return s;
  }

  fs::path directory() const {
    if (outdir) return *outdir;
    if (const char* env = std::getenv("FREEMIX_OUTPUT_DIR"); env && *env) return env;
    return ".";
  }

  int run(std::ostream& out) const {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec spec = model.spec(defaults(), seed);
    EstimateConfig cfg;
    cfg.samples = samples.value_or(name == "blockdiag" ? 200 : 100);
    cfg.free_samples = free_samples;
    cfg.seed = {seed, 0};
    cfg.grid_points = points;
    const EstimateResult r = run_estimate(spec, cfg);

    const fs::path dir = directory();
    fs::create_directories(dir);
    json files = json::object();
    json distances = json::object();
    const std::pair<const char*, const DensityCurve*> curves[] = {
        {"exact", &r.exact}, {"classical", &r.classical}, {"free", &r.free}, {"convex", &r.mixed}};
    for (const auto& [label, c] : curves) {
      const fs::path p = dir / (name + "_" + label + ".csv");
      write_density_csv(p, *c);
      files[label] = p.string();
      if (c != &r.exact)
        distances[label] = {{"l1", l1_distance(*c, r.exact)}, {"ks", ks_distance(*c, r.exact)}};
    }

    json report;
    report["demo"] = name;
    report["model"] = model_json(spec);
    report["config"] = config_json(cfg);
    report["grid"] = to_json(r.exact.grid());
    report["report"] = to_json(r.report);
    report["distances"] = distances;
    const fs::path report_path = dir / (name + "_report.json");
    {
      std::ofstream rf(report_path, std::ios::binary);
      if (!rf) throw std::invalid_argument("cannot write " + report_path.string());
      rf << report.dump(2) << '\n';
    }
    files["report"] = report_path.string();

    json summary = report;
    summary["files"] = files;
    summary["runtime_seconds"] = seconds_since(t0);
    out << summary.dump(2) << '\n';
    return ok;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate the eigenvalue density of a sum of Hermitian matrices", "freemix"};
  app.require_subcommand(1);

  PEstimateCmd p_estimate;
  DensityCmd density;
  DemoCmd demo;
  auto* p_cmd = app.add_subcommand("p-estimate", "Estimate the mixing parameter p for a model; JSON report on stdout");
  auto* d_cmd = app.add_subcommand("density", "Write one density curve as CSV; JSON summary on stdout");
  auto* demo_cmd = app.add_subcommand("demo", "Write exact/classical/free/convex densities and a report");
  p_estimate.add_to(p_cmd);
  density.add_to(d_cmd);
  demo.add_to(demo_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : {p_cmd, d_cmd, demo_cmd})
      if (s->parsed()) sub = s;
    err << (sub ? sub->help() : app.help());
    return usage;
  }

  try {
    if (p_cmd->parsed()) return p_estimate.run(out);
    if (d_cmd->parsed()) return density.run(out);
    return demo.run(out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const NumericalDegeneracy& e) {
    err << "numerical degeneracy: " << e.what() << '\n';
    return degenerate;
  } catch (const PoleCollision& e) {
    err << "numerical degeneracy: " << e.what() << '\n';
    return degenerate;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return solver;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return solver;
  }
}

}  // namespace freemix::cli
