// SPDX-License-Identifier: Apache-2.0
#include "experiments.hpp"

#include "pld/dynamics.hpp"
#include "pld/escape.hpp"
#include "pld/landscape.hpp"
#include "pld/noise_model.hpp"
#include "pld/pacbayes.hpp"
#include "pld/parallel.hpp"
#include "pld/rng.hpp"
#include "pld/stationary.hpp"
#include "pld/tailfit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#ifndef PLD_VERSION
#define PLD_VERSION "0.0.0"
#endif

namespace pld::cli {

namespace {

// Stream families under the master seed, one per experiment component.
constexpr std::uint64_t kSampleStream = 0x73616d706c650001ull;
constexpr std::uint64_t kFitStream = 0x6669740000000001ull;

std::string indexed(const std::string& stem, std::size_t index, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", index);
  return stem + "_" + buf + ext;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::size_t positive_count(ObjectReader& r, const std::string& key, std::uint64_t fallback) {
  const auto v = r.unsigned_integer(key, fallback);
  if (v == 0) r.fail(key, "must be at least 1");
  return static_cast<std::size_t>(v);
}

double positive(ObjectReader& r, const std::string& key, double fallback) {
  const double v = r.number(key, fallback);
  if (!(v > 0.0)) r.fail(key, "must be positive");
  return v;
}

double positive(ObjectReader& r, const std::string& key) {
  const double v = r.number(key);
  if (!(v > 0.0)) r.fail(key, "must be positive");
  return v;
}

/// Shared state of one run: seed resolution and output collection.
struct Context {
  ObjectReader& top;
  const RunOptions& options;
  ExperimentOutput& out;
  ObjectReader& params;
  std::optional<std::uint64_t> config_seed;
  std::optional<std::uint64_t> seed;
  std::optional<Json> resolved_params;

  /// Rejects unknown keys; called once every parameter has been read and
  /// before any computation starts.
  void ready() {
    if (resolved_params) return;
    resolved_params = params.finish();
    top.finish();
  }

  std::uint64_t master_seed() {
    if (!seed) {
      if (options.seed) {
        seed = options.seed;
      } else if (config_seed) {
        seed = config_seed;
      } else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      }
    }
    return *seed;
  }
};

// ---------------------------------------------------------------------------
// Landscapes

struct ToySpec {
  std::size_t n = 1000;
  std::uint64_t data_seed = 1;
};

ToySpec read_toy(ObjectReader& r) {
  ToySpec spec;
  spec.n = positive_count(r, "n", 1000);
  spec.data_seed = r.unsigned_integer("data_seed", 1);
  return spec;
}

std::string toy_data_csv(const EmpiricalToyLoss& toy) {
  CsvTable t({"x0", "x1"});
  for (const auto& p : toy.data()) t.row().add(p[0]).add(p[1]);
  return t.str();
}

DoubleWell1D::Params read_double_well(ObjectReader& r) {
  DoubleWell1D::Params p;
  p.min_a = r.number("min_a", 0.0);
  p.curvature_a = positive(r, "curvature_a", 1.0);
  p.curvature_b_abs = positive(r, "curvature_b_abs", 1.0);
  p.barrier = positive(r, "barrier", 1.0);
  if (r.has("curvature_c")) p.curvature_c = positive(r, "curvature_c");
  if (r.has("barrier_c")) p.barrier_c = positive(r, "barrier_c");
  return p;
}

/// Reads {"kind": "quadratic" | "double_well" | "toy", ...}.
Landscape read_landscape(ObjectReader& parent, Context& ctx, Json& resolved) {
  auto r = parent.object("landscape");
  const auto kind = r.string("kind");
  std::optional<Landscape> landscape;
  if (kind == "quadratic") {
    const auto center = r.number_list("center");
    const auto hessian = r.matrix("hessian");
    if (hessian.size() != center.size()) r.fail("hessian", "size must match center");
    const double base = r.number("base_loss", 0.0);
    landscape.emplace(QuadraticBasin(to_vector(center), to_matrix(hessian), base));
  } else if (kind == "double_well") {
    landscape.emplace(DoubleWell1D(read_double_well(r)));
  } else if (kind == "toy") {
    const auto spec = read_toy(r);
    const double scale = positive(r, "scale", 1.0);
    auto toy = EmpiricalToyLoss::generate(spec.n, spec.data_seed, scale);
    ctx.out.files["data.csv"] = toy_data_csv(toy);
    landscape.emplace(std::move(toy));
  } else {
    r.fail("kind", "expected quadratic, double_well or toy");
  }
  resolved = r.finish();
  return *landscape;
}

NoiseSpec read_noise(ObjectReader& parent, Json& resolved) {
  if (!parent.has("noise")) {
    resolved = Json{{"kind", "none"}};
    return std::monostate{};
  }
  auto r = parent.object("noise");
  const auto kind = r.string("kind");
  NoiseSpec noise;
  if (kind == "none") {
    noise = std::monostate{};
  } else if (kind == "constant") {
    noise = to_matrix(r.matrix("covariance"));
  } else if (kind == "scalar") {
    ScalarNoiseParams p;
    p.sigma_g = r.number("sigma_g");
    p.sigma_h = r.number("sigma_h", 0.0);
    p.rho_gh = r.number("rho_gh", 0.0);
    p.center = r.number("center", 0.0);
    p.curvature = positive(r, "curvature");
    p.eta = positive(r, "eta");
    noise = p;
  } else if (kind == "multivariate") {
    const auto sigma_g = r.matrix("sigma_g");
    const auto hessian = r.matrix("hessian");
    const double kappa = positive(r, "kappa");
    const double eta = positive(r, "eta");
    const auto center = r.number_list("center");
    noise = MultivariateNoiseParams(to_matrix(sigma_g), to_matrix(hessian), kappa, eta,
                                    to_vector(center));
  } else {
    r.fail("kind", "expected none, constant, scalar or multivariate");
  }
  resolved = r.finish();
  return noise;
}

// ---------------------------------------------------------------------------
// simulate

void run_simulate(ObjectReader& p, Context& ctx) {
  Json landscape_json, noise_json;
  const Landscape landscape = read_landscape(p, ctx, landscape_json);
  p.set_resolved("landscape", landscape_json);
  const NoiseSpec noise = read_noise(p, noise_json);
  p.set_resolved("noise", noise_json);

  IntegratorConfig base;
  const auto mode_text = p.string("mode", "power_law");
  try {
    base.mode = parse_dynamics_mode(mode_text);
  } catch (const std::invalid_argument& e) {
    p.fail("mode", e.what());
  }
  base.eta = positive(p, "eta", 0.01);
  base.steps = static_cast<std::size_t>(p.unsigned_integer("steps", 1000));
  base.record_every = positive_count(p, "record_every", 1);
  if (base.mode == DynamicsMode::kToyPowerLaw) {
    base.lambda1 = p.number("lambda1");
    base.lambda2 = p.number("lambda2");
  }
  if (base.mode == DynamicsMode::kSgd) base.batch_size = positive_count(p, "batch_size", 1);
  if (base.mode == DynamicsMode::kPowerLaw) {
    try {
      base.calculus = parse_stochastic_calculus(p.string("calculus", "hanggi_klimontovich"));
    } catch (const std::invalid_argument& e) {
      p.fail("calculus", e.what());
    }
  }
  const std::size_t trajectories = positive_count(p, "trajectories", 1);

  Vector w0;
  if (p.has("w0")) {
    w0 = to_vector(p.number_list("w0"));
  } else if (const auto* q = std::get_if<QuadraticBasin>(&landscape)) {
    w0 = q->center();
  } else if (const auto* dw = std::get_if<DoubleWell1D>(&landscape)) {
    w0 = Vector::Constant(1, dw->min_a());
  } else {
    w0 = toy_start_point(std::get<EmpiricalToyLoss>(landscape));
  }
  p.set_resolved("w0", to_json(w0));
  if (static_cast<std::size_t>(w0.size()) != dimension(landscape)) {
    p.fail("w0", "dimension does not match the landscape");
  }
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p.path() + ": " + e.what());
  }
  base.master_seed = ctx.master_seed();
  ctx.ready();

  std::vector<Trajectory> results(trajectories);
  parallel_for(trajectories, ctx.options.threads, [&](std::size_t i) {
    IntegratorConfig cfg = base;
    cfg.stream_id = i;
    results[i] = run(cfg, landscape, noise, w0);
  });

  Json summary = Json::object();
  summary["trajectories"] = Json::array();
  std::vector<std::string> header{"step"};
  for (Eigen::Index k = 0; k < w0.size(); ++k) header.push_back("w" + std::to_string(k));
  header.push_back("loss");
  for (std::size_t i = 0; i < trajectories; ++i) {
    CsvTable t(header);
    const auto& tr = results[i];
    for (std::size_t r = 0; r < tr.states.size(); ++r) {
      t.row().add(r * base.record_every);
      for (Eigen::Index k = 0; k < tr.states[r].size(); ++k) t.add(tr.states[r](k));
      t.add(tr.losses[r]);
    }
    const auto name = indexed("trajectory", i, ".csv");
    ctx.out.files[name] = t.str();
    summary["trajectories"].push_back({{"file", name},
                                       {"stream_id", i},
                                       {"config_hash", tr.config_hash},
                                       {"final_state", to_json(tr.states.back())},
                                       {"final_loss", tr.losses.back()}});
  }
  ctx.out.files["result.json"] = dump(summary);
}

// ---------------------------------------------------------------------------
// density

void run_density(ObjectReader& p, Context& ctx) {
  const auto family = p.string("family", "power_law_1d");
  Json result = Json::object();
  result["family"] = family;
  double center = 0.0, width = 1.0;
  std::optional<PowerLawKappa1D> pl;
  std::optional<FullStationary1D> full;

  if (family == "power_law_1d") {
    const double kappa = p.number("kappa");
    const double sg = positive(p, "sigma_g");
    const double sh = positive(p, "sigma_h");
    center = p.number("center", 0.0);
    try {
      pl.emplace(kappa, sg, sh, center);
    } catch (const std::exception& e) {
      throw ConfigError(p.field("kappa") + ": " + e.what());
    }
    width = pl->width();
    result["normalizer"] = pl->normalizer();
    result["normalizer_quadrature"] = pl->quadrature_normalizer();
    result["student_t_scale"] = pl->scale();
    result["student_t_dof"] = 2.0 * kappa - 1.0;
  } else if (family == "full_1d") {
    ScalarNoiseParams n;
    n.sigma_g = positive(p, "sigma_g");
    n.sigma_h = positive(p, "sigma_h");
    n.rho_gh = p.number("rho_gh", 0.0);
    n.center = p.number("center", 0.0);
    n.curvature = positive(p, "curvature");
    n.eta = positive(p, "eta");
    center = n.center;
    width = std::sqrt(n.sigma_g / n.sigma_h);
    full.emplace(n);
    result["log_normalizer"] = full->log_normalizer();
    result["kappa"] = n.kappa();
  } else {
    p.fail("family", "expected power_law_1d or full_1d");
  }

  const std::size_t points = positive_count(p, "points", 1001);
  const double half = positive(p, "half_width", 10.0 * width);
  if (points < 2) p.fail("points", "must be at least 2");
  const std::size_t samples = static_cast<std::size_t>(p.unsigned_integer("samples", 0));
  if (samples > 0 && !pl) p.fail("samples", "sampling is available for power_law_1d only");
  if (samples > 0) ctx.master_seed();
  ctx.ready();

  CsvTable t({"w", "density", "log_density"});
  for (std::size_t i = 0; i < points; ++i) {
    const double w = center - half + 2.0 * half * static_cast<double>(i) / static_cast<double>(points - 1);
    const double lp = pl ? pl->log_density(w) : full->log_density(w);
    t.row().add(w).add(std::exp(lp)).add(lp);
  }
  ctx.out.files["density.csv"] = t.str();

  if (samples > 0) {
    RngStream rng(ctx.master_seed(), kSampleStream);
    const auto xs = sample_1d(*pl, samples, rng);
    CsvTable s({"w"});
    for (double x : xs) s.row().add(x);
    ctx.out.files["samples.csv"] = s.str();
    if (samples >= 10) result["ks_distance"] = ks_distance(xs, *pl);
  }
  ctx.out.files["result.json"] = dump(result);
}

// ---------------------------------------------------------------------------
// escape-analytic

void run_escape_analytic(ObjectReader& p, Context& ctx) {
  const auto h_a = p.number_list("h_a", {1.0});
  const auto h_b = p.number_list("h_b_abs", {1.0});
  const auto dl = p.number_list("delta_l", {1.0, 2.0, 4.0});
  const auto eta = p.number_list("eta", {0.01});
  const auto sigma = p.number_list("sigma_g", {10.0});
  const auto kappa = p.number_list("kappa", {1.5, 3.0, 10.0});
  const auto alpha = p.number_list("alpha", {1.5});
  const double width = positive(p, "width", 2.0);
  ctx.ready();

  CsvTable t({"h_a", "h_b_abs", "delta_l", "eta", "sigma_g", "kappa", "alpha",
              "temperature_ratio", "tau_power_law", "tau_langevin", "tau_alpha_stable",
              "langevin_over_power_law"});
  Json warnings = Json::array();
  std::size_t row = 0;
  for (double a : h_a)
    for (double b : h_b)
      for (double d : dl)
        for (double e : eta)
          for (double s : sigma)
            for (double k : kappa)
              for (double al : alpha) {
                const EscapeProblem1D prob{a, b, d, e, s, k};
                double tp = 0.0, tl = 0.0, ta = 0.0;
                try {
                  tp = tau_power_law_1d(prob);
                  tl = tau_langevin_1d(a, b, d, e, s);
                  ta = tau_alpha_stable_1d(al, e, s, width);
                } catch (const std::invalid_argument& ex) {
                  throw ConfigError(p.path() + ": grid row " + std::to_string(row) + ": " + ex.what());
                }
                for (const auto& w : prob.warnings()) {
                  warnings.push_back("row " + std::to_string(row) + ": " + w);
                }
                t.row().add(a).add(b).add(d).add(e).add(s).add(k).add(al);
                t.add(prob.temperature_ratio()).add(tp).add(tl).add(ta).add(tl / tp);
                ++row;
              }
  ctx.out.files["escape_times.csv"] = t.str();
  for (const auto& w : warnings) ctx.out.warnings.push_back(w.get<std::string>());
  ctx.out.files["result.json"] = dump(Json{{"rows", row}, {"warnings", warnings}});
}

// ---------------------------------------------------------------------------
// escape-mc

void run_escape_mc(ObjectReader& p, Context& ctx) {
  auto lr = p.object("landscape");
  if (lr.string("kind", "double_well") != "double_well") {
    lr.fail("kind", "escape-mc supports only \"double_well\"");
  }
  const DoubleWell1D well(read_double_well(lr));
  p.set_resolved("landscape", lr.finish());

  FirstPassageConfig base;
  base.eta = positive(p, "eta", 0.01);
  const double sigma_g = p.number("sigma_g");
  if (!(sigma_g >= 0.0)) p.fail("sigma_g", "must be non-negative");
  try {
    base.mode = parse_escape_mode(p.string("mode", "power_law"));
  } catch (const std::invalid_argument& e) {
    p.fail("mode", e.what());
  }
  try {
    base.criterion = parse_escape_criterion(p.string("criterion", "saddle"));
  } catch (const std::invalid_argument& e) {
    p.fail("criterion", e.what());
  }
  try {
    base.calculus = parse_stochastic_calculus(p.string("calculus", "hanggi_klimontovich"));
  } catch (const std::invalid_argument& e) {
    p.fail("calculus", e.what());
  }
  base.trials = positive_count(p, "trials", 2000);
  base.max_steps = positive_count(p, "max_steps", 10'000'000);
  const bool power_law = base.mode == EscapeMode::kPowerLaw;
  const auto kappas = p.number_list("kappas", power_law ? std::vector<double>{2.0}
                                                        : std::vector<double>{});
  if (power_law && kappas.empty()) p.fail("kappas", "power_law needs at least one kappa");
  for (double k : kappas) {
    if (!(k > 0.5)) p.fail("kappas", "every kappa must exceed 1/2");
  }
  base.threads = ctx.options.threads;
  base.master_seed = ctx.master_seed();
  ctx.ready();

  const double h_a = well.curvature_a();
  const double dl = well.barrier();
  CsvTable summary({"kappa", "trials", "escaped", "censored", "mean_time", "ci95",
                    "tau_power_law", "tau_langevin", "relative_error"});
  Json points = Json::array();
  const std::size_t count = power_law ? kappas.size() : 1;
  for (std::size_t k = 0; k < count; ++k) {
    ScalarNoiseParams noise;
    noise.sigma_g = sigma_g;
    noise.curvature = h_a;
    noise.eta = base.eta;
    noise.center = well.min_a();
    const double kappa = power_law ? kappas[k] : std::numeric_limits<double>::infinity();
    noise.sigma_h = power_law ? h_a / (base.eta * kappa) : 0.0;
    // Paired across sweep points: every point reuses the master seed.
    const auto stats = mc_first_passage(well, noise, base);

    std::optional<double> reference;
    double tau_pl = std::nan(""), tau_lv = std::nan("");
    if (sigma_g > 0.0) {
      tau_lv = tau_langevin_1d(h_a, well.curvature_b_abs(), dl, base.eta, sigma_g);
      if (power_law) {
        tau_pl = tau_power_law_1d({h_a, well.curvature_b_abs(), dl, base.eta, sigma_g, kappa});
        reference = tau_pl;
      } else {
        reference = tau_lv;
      }
    }
    summary.row();
    power_law ? summary.add(kappa) : summary.add(std::string_view("inf"));
    summary.add(stats.trials).add(stats.escaped).add(stats.censored);
    stats.mean_time ? summary.add(*stats.mean_time) : summary.add_empty();
    summary.add(stats.ci95).add(tau_pl).add(tau_lv);
    if (stats.mean_time && reference) {
      summary.add(*stats.mean_time / *reference - 1.0);
    } else {
      summary.add_empty();
    }

    CsvTable times({"trial", "passage_time"});
    for (std::size_t i = 0; i < stats.passage_times.size(); ++i) {
      times.row().add(i);
      stats.passage_times[i] ? times.add(*stats.passage_times[i]) : times.add_empty();
    }
    const auto name = indexed("passage_times", k, ".csv");
    ctx.out.files[name] = times.str();
    Json point{{"kappa", power_law ? Json(kappa) : Json("inf")},
               {"trials", stats.trials},
               {"escaped", stats.escaped},
               {"censored", stats.censored},
               {"mean_time", stats.mean_time ? Json(*stats.mean_time) : Json(nullptr)},
               {"mean_defined", stats.mean_time.has_value()},
               {"ci95", stats.ci95},
               {"passage_times_file", name}};
    points.push_back(point);
  }
  ctx.out.files["summary.csv"] = summary.str();
  ctx.out.files["result.json"] =
      dump(Json{{"saddle_b", well.saddle_b()}, {"min_c", well.min_c()}, {"points", points}});
}

// ---------------------------------------------------------------------------
// success-rate

void run_success_rate(ObjectReader& p, Context& ctx) {
  auto lr = p.object("landscape");
  const auto spec = read_toy(lr);
  const auto scales = lr.number_list("scales", {1.0, 0.9});
  if (scales.empty()) lr.fail("scales", "needs at least one scale");
  for (double s : scales) {
    if (!(s > 0.0)) lr.fail("scales", "every scale must be positive");
  }
  p.set_resolved("landscape", lr.finish());

  const auto lambda1 = p.number_list("lambda1", {0.0, 8.0, 16.0, 32.0, 64.0});
  for (double l : lambda1) {
    if (!(l >= 0.0)) p.fail("lambda1", "values must be non-negative");
  }
  const auto lambda2_fixed = p.optional_number("lambda2");
  if (lambda2_fixed && !(*lambda2_fixed >= 0.0)) p.fail("lambda2", "must be non-negative");
  SuccessRateConfig base;
  base.batch_size = positive_count(p, "batch_size", 1);
  if (base.batch_size > spec.n) p.fail("batch_size", "exceeds the data size n");
  base.eta = positive(p, "eta", 0.025);
  base.steps = static_cast<std::size_t>(p.unsigned_integer("steps", 500));
  base.runs = positive_count(p, "runs", 100);
  const bool include_sgd = p.boolean("include_sgd", true);
  if (p.has("region")) {
    auto rr = p.object("region");
    base.region.lower = rr.number("lower", 0.0);
    base.region.upper = rr.number("upper", 2.0);
    if (!(base.region.lower < base.region.upper)) rr.fail("upper", "must exceed lower");
    p.set_resolved("region", rr.finish());
  } else {
    p.set_resolved("region", Json{{"lower", base.region.lower}, {"upper", base.region.upper}});
  }
  base.threads = ctx.options.threads;
  base.master_seed = ctx.master_seed();
  ctx.ready();

  const auto data = EmpiricalToyLoss::generate(spec.n, spec.data_seed, 1.0);
  ctx.out.files["data.csv"] = toy_data_csv(data);

  CsvTable table({"scale", "dynamics", "lambda1", "lambda2", "batch_size", "runs", "escaped",
                  "rate"});
  Json rows = Json::array();
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const auto toy = data.with_scale(scales[si]);
    const Vector start = toy_start_point(toy);
    if (!base.region.contains(start)) {
      throw std::runtime_error("success-rate: start point lies outside the escape region");
    }
    const double lambda2 =
        lambda2_fixed ? *lambda2_fixed : match_lambda2(toy, start, base.batch_size);
    auto record = [&](std::string_view dyn, const SuccessRateConfig& cfg,
                      const SuccessRateResult& res) {
      table.row().add(scales[si]).add(dyn);
      if (cfg.mode == ToyDynamics::kSgd) {
        table.add_empty().add_empty().add(cfg.batch_size);
      } else {
        table.add(cfg.lambda1).add(cfg.lambda2).add_empty();
      }
      table.add(res.runs).add(res.escaped).add(res.rate);
      Json r{{"scale", scales[si]}, {"dynamics", dyn}, {"rate", res.rate},
             {"escaped", res.escaped}, {"runs", res.runs}, {"start", to_json(start)}};
      if (cfg.mode == ToyDynamics::kSgd) {
        r["batch_size"] = cfg.batch_size;
      } else {
        r["lambda1"] = cfg.lambda1;
        r["lambda2"] = cfg.lambda2;
      }
      rows.push_back(r);
    };
    if (include_sgd) {
      SuccessRateConfig cfg = base;
      cfg.mode = ToyDynamics::kSgd;
      record("sgd", cfg, success_rate(toy, cfg, start));
    }
    for (double l1 : lambda1) {
      SuccessRateConfig cfg = base;
      cfg.mode = ToyDynamics::kToyPowerLaw;
      cfg.lambda1 = l1;
      cfg.lambda2 = lambda2;
      record("toy_power_law", cfg, success_rate(toy, cfg, start));
    }
  }
  ctx.out.files["success_rate.csv"] = table.str();
  ctx.out.files["result.json"] = dump(Json{{"rows", rows}});
}

// ---------------------------------------------------------------------------
// noise-scan

void run_noise_scan(ObjectReader& p, Context& ctx) {
  auto lr = p.object("landscape");
  const auto spec = read_toy(lr);
  const double scale = positive(lr, "scale", 1.0);
  p.set_resolved("landscape", lr.finish());
  const auto toy = EmpiricalToyLoss::generate(spec.n, spec.data_seed, scale);
  ctx.out.files["data.csv"] = toy_data_csv(toy);

  const auto direction = p.number_list("direction", {1.0, 1.0});
  if (direction.size() != 2) p.fail("direction", "expected two components");
  if (std::hypot(direction[0], direction[1]) == 0.0) p.fail("direction", "must be non-zero");
  NoiseScanConfig cfg;
  const double spacing = positive(p, "spacing", 0.01);
  const std::size_t per_side = positive_count(p, "per_side", 10);
  cfg.offsets = symmetric_offsets(per_side, spacing);
  cfg.batch_size = positive_count(p, "batch_size", 1);
  if (cfg.batch_size > spec.n) p.fail("batch_size", "exceeds the data size n");
  cfg.draws = positive_count(p, "draws", 2000);
  if (cfg.draws < 2) p.fail("draws", "must be at least 2");
  const std::size_t curve_points = positive_count(p, "curve_points", 201);
  if (curve_points < 2) p.fail("curve_points", "must be at least 2");
  cfg.threads = ctx.options.threads;
  cfg.master_seed = ctx.master_seed();
  ctx.ready();

  const Vector center = toy_start_point(toy);
  const auto r = scan_noise_trace(toy, center, to_vector(direction), cfg);

  CsvTable raw({"offset", "trace"});
  for (std::size_t i = 0; i < r.offsets.size(); ++i) raw.row().add(r.offsets[i]).add(r.traces[i]);
  ctx.out.files["points.csv"] = raw.str();
  CsvTable curve({"offset", "fitted_trace"});
  const double lo = r.offsets.front(), hi = r.offsets.back();
  for (std::size_t i = 0; i < curve_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(curve_points - 1);
    curve.row().add(x).add(r.c0 + r.c1 * x + r.c2 * x * x);
  }
  ctx.out.files["fit_curve.csv"] = curve.str();
  ctx.out.files["result.json"] =
      dump(Json{{"center", to_json(center)},
                {"c0", r.c0},
                {"c1", r.c1},
                {"c2", r.c2},
                {"r_squared", r.r_squared},
                {"argmin_offset", r.argmin_offset},
                {"argmin_in_grid_steps", r.argmin_offset / spacing},
                {"degenerate", r.degenerate}});
}

// ---------------------------------------------------------------------------
// fit

void run_fit(ObjectReader& p, Context& ctx) {
  if (p.has("samples_csv") == p.has("synthetic")) {
    p.fail("samples_csv", "give exactly one of samples_csv or synthetic");
  }
  std::optional<std::string> csv_path;
  std::optional<PowerLawKappa1D> synthetic;
  std::size_t n = 0, reps = 1;
  if (p.has("samples_csv")) {
    csv_path = p.string("samples_csv");
  } else {
    auto sr = p.object("synthetic");
    const double kappa = sr.number("kappa");
    if (!(kappa > 0.5)) sr.fail("kappa", "must exceed 1/2");
    const double scale = positive(sr, "scale", 1.0);
    const double center = sr.number("center", 0.0);
    n = positive_count(sr, "n", 100000);
    if (n < 100) sr.fail("n", "need at least 100 samples");
    reps = positive_count(sr, "repetitions", 1);
    p.set_resolved("synthetic", sr.finish());
    synthetic = PowerLawKappa1D::from_scale(kappa, scale, center);
  }
  const std::size_t bins = positive_count(p, "bins", 100);
  const std::size_t overlay_points = positive_count(p, "overlay_points", 512);
  if (overlay_points < 2) p.fail("overlay_points", "must be at least 2");

  std::vector<std::vector<double>> sample_sets;
  if (csv_path) {
    try {
      sample_sets.push_back(read_single_column_csv(*csv_path));
    } catch (const std::runtime_error& e) {
      throw ConfigError(p.field("samples_csv") + ": " + e.what());
    }
    if (sample_sets.front().size() < 100) p.fail("samples_csv", "need at least 100 samples");
    ctx.ready();
  } else {
    const std::uint64_t seed = ctx.master_seed();
    ctx.ready();
    sample_sets.resize(reps);
    parallel_for(reps, ctx.options.threads, [&](std::size_t r) {
      RngStream rng(seed, derive_stream(kFitStream, r));
      sample_sets[r] = sample_1d(*synthetic, n, rng);
    });
  }
  const std::string source = csv_path ? *csv_path : "synthetic";

  std::vector<TailFitResult> fits(sample_sets.size());
  parallel_for(sample_sets.size(), ctx.options.threads,
               [&](std::size_t r) { fits[r] = fit_power_law_kappa(sample_sets[r]); });

  CsvTable table({"repetition", "n", "kappa_hat", "scale_hat", "center_hat", "log_likelihood",
                  "ks_statistic", "converged", "iterations"});
  Json rows = Json::array();
  for (std::size_t r = 0; r < fits.size(); ++r) {
    const auto& f = fits[r];
    table.row().add(r).add(sample_sets[r].size()).add(f.kappa_hat).add(f.scale_hat);
    table.add(f.center_hat).add(f.log_likelihood).add(f.ks_statistic);
    table.add(std::string_view(f.converged ? "true" : "false")).add(f.iterations);
    rows.push_back({{"kappa_hat", f.kappa_hat},
                    {"scale_hat", f.scale_hat},
                    {"center_hat", f.center_hat},
                    {"log_likelihood", f.log_likelihood},
                    {"ks_statistic", f.ks_statistic},
                    {"converged", f.converged},
                    {"iterations", f.iterations}});
  }
  ctx.out.files["fits.csv"] = table.str();

  // Histogram and overlay for the first sample set, over its central 99%.
  std::vector<double> sorted = sample_sets.front();
  std::sort(sorted.begin(), sorted.end());
  const auto q = [&](double frac) {
    return sorted[static_cast<std::size_t>(frac * static_cast<double>(sorted.size() - 1))];
  };
  double lo = q(0.005), hi = q(0.995);
  if (!(hi > lo)) {
    lo = sorted.front();
    hi = sorted.back();
  }
  CsvTable hist({"bin_lower", "bin_upper", "count", "density"});
  std::vector<std::size_t> counts(bins, 0);
  const double bw = (hi - lo) / static_cast<double>(bins);
  for (double x : sorted) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / bw);
    counts[std::min(b, bins - 1)]++;
  }
  const double total = static_cast<double>(sorted.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + bw * static_cast<double>(b);
    hist.row().add(a).add(a + bw).add(counts[b]).add(static_cast<double>(counts[b]) / (total * bw));
  }
  ctx.out.files["histogram.csv"] = hist.str();
  CsvTable overlay({"w", "fitted_density"});
  const auto dist = fits.front().distribution();
  for (std::size_t i = 0; i < overlay_points; ++i) {
    const double w = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(overlay_points - 1);
    overlay.row().add(w).add(dist.density(w));
  }
  ctx.out.files["overlay.csv"] = overlay.str();
  ctx.out.files["result.json"] = dump(Json{{"source", source}, {"fits", rows}});
}

// ---------------------------------------------------------------------------
// bound

void run_bound(ObjectReader& p, Context& ctx) {
  BoundInputs in;
  in.hessian = to_matrix(p.matrix("hessian"));
  in.sigma_g = to_matrix(p.matrix("sigma_g"));
  in.eta = positive(p, "eta");
  in.kappa = positive(p, "kappa");
  in.n_samples = static_cast<std::size_t>(p.unsigned_integer("n_samples"));
  in.delta = p.number("delta", 0.05);
  in.empirical_risk = p.number("empirical_risk", 0.0);
  try {
    in.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p.path() + ": " + e.what());
  }
  ctx.ready();
  const double kl = kl_upper_bound(in);
  const double exact = kl_exact_form(in);
  const double bound = generalization_bound(in);
  CsvTable t({"dim", "kl_upper_bound", "kl_exact_form", "generalization_bound"});
  t.row().add(in.dim()).add(kl).add(exact).add(bound);
  ctx.out.files["bound.csv"] = t.str();
  ctx.out.files["result.json"] = dump(Json{{"dim", in.dim()},
                                           {"kl_upper_bound", kl},
                                           {"kl_exact_form", exact},
                                           {"generalization_bound", bound}});
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate",   "density",      "escape-analytic",
                                              "escape-mc",  "success-rate", "noise-scan",
                                              "fit",        "bound"};
  return kinds;
}

std::string ExperimentOutput::manifest() const {
  Json files_json = Json::array();
  for (const auto& [name, content] : files) {
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a(content)));
    files_json.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", digest}});
  }
  Json m{{"tool", "pld"},
         {"version", PLD_VERSION},
         {"experiment", kind},
         {"config", resolved_config},
         {"files", files_json},
         {"warnings", warnings}};
  return m.dump(2) + "\n";
}

ExperimentOutput run_experiment(std::string_view kind, const Json& config,
                                const RunOptions& options) {
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw ConfigError("unknown experiment '" + std::string(kind) + "'");
  }
  ObjectReader top(config, "");
  const auto version = top.unsigned_integer("schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    top.fail("schema_version", "unsupported version " + std::to_string(version) +
                                   " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  const auto experiment = top.string("experiment");
  if (experiment != kind) {
    top.fail("experiment", "'" + experiment + "' does not match subcommand '" +
                               std::string(kind) + "'");
  }
  const auto plot_format = top.string("plot_format", "csv");
  if (plot_format != "csv") top.fail("plot_format", "unsupported format (only csv)");
  std::optional<std::uint64_t> config_seed;
  if (top.has("master_seed")) config_seed = top.unsigned_integer("master_seed");
  if (top.has("output_dir")) top.string("output_dir");

  ExperimentOutput out;
  out.kind = std::string(kind);
  static const Json kEmpty = Json::object();
  const Json& params = config.contains("params") ? config.at("params") : kEmpty;
  if (config.contains("params")) top.object("params");  // marks the key and type-checks it
  ObjectReader pr(params, "params");
  Context ctx{top, options, out, pr, config_seed, std::nullopt, std::nullopt};

  try {
    if (kind == "simulate") run_simulate(pr, ctx);
    else if (kind == "density") run_density(pr, ctx);
    else if (kind == "escape-analytic") run_escape_analytic(pr, ctx);
    else if (kind == "escape-mc") run_escape_mc(pr, ctx);
    else if (kind == "success-rate") run_success_rate(pr, ctx);
    else if (kind == "noise-scan") run_noise_scan(pr, ctx);
    else if (kind == "fit") run_fit(pr, ctx);
    else run_bound(pr, ctx);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(kind) + ": " + e.what());
  }

  Json resolved = Json::object();
  resolved["schema_version"] = kSchemaVersion;
  resolved["experiment"] = std::string(kind);
  if (ctx.seed) resolved["master_seed"] = *ctx.seed;
  resolved["plot_format"] = plot_format;
  ctx.ready();
  resolved["params"] = *ctx.resolved_params;
  out.resolved_config = std::move(resolved);
  return out;
}

std::filesystem::path resolve_output_dir(const Json& config, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (config.is_object() && config.contains("output_dir") && config["output_dir"].is_string()) {
    return config["output_dir"].get<std::string>();
  }
  throw ConfigError("no output directory: pass --out or set output_dir");
}

void write_outputs(const std::filesystem::path& dir, const ExperimentOutput& output) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : output.files) write_atomic(dir / name, content);
  write_atomic(dir / "manifest.json", output.manifest());
}

}  // namespace pld::cli
