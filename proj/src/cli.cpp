#include "membrane/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "membrane/decay.hpp"
#include "membrane/green.hpp"
#include "membrane/io.hpp"
#include "membrane/percolation.hpp"
#include "membrane/pinning.hpp"
#include "membrane/sobolev.hpp"

namespace membrane {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  if (cfg.backend == "direct") o.backend = Backend::kDirect;
  else if (cfg.backend == "cg") o.backend = Backend::kConjugateGradient;
  else if (cfg.backend == "auto") o.backend = Backend::kAuto;
  else throw std::invalid_argument("unknown backend '" + cfg.backend + "' (auto|direct|cg)");
  o.tolerance = cfg.tol;
  o.max_iterations = cfg.max_iterations;
  o.cache_dir = ColumnCache::root_from_env_or(cfg.cache);
  o.box_N = cfg.N;
  return o;
}

GibbsOptions gibbs_options(const RunConfig& cfg) {
  GibbsOptions g;
  if (cfg.kernel == "collapsed") g.kernel = GibbsKernel::kCollapsed;
  else if (cfg.kernel == "joint") g.kernel = GibbsKernel::kJointField;
  else if (cfg.kernel == "auto") g.kernel = GibbsKernel::kAuto;
  else throw std::invalid_argument("unknown kernel '" + cfg.kernel + "' (auto|collapsed|joint)");
  if (cfg.scan == "random") g.scan = ScanOrder::kRandom;
  else if (cfg.scan == "systematic") g.scan = ScanOrder::kSystematic;
  else throw std::invalid_argument("unknown scan '" + cfg.scan + "' (systematic|random)");
  return g;
}

nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json j;
  j["subcommand"] = cfg.subcommand;
  j["d"] = cfg.d;
  j["N"] = cfg.N;
  j["eps"] = cfg.eps;
  j["xi"] = cfg.xi;
  j["lambda"] = cfg.lambda;
  j["delta"] = cfg.delta;
  j["seed"] = cfg.seed;
  j["backend"] = cfg.backend;
  j["tol"] = cfg.tol;
  j["max_iterations"] = cfg.max_iterations;
  j["n"] = cfg.n;
  j["burn_in"] = cfg.burn_in;
  j["thinning"] = cfg.thinning;
  j["kernel"] = cfg.kernel;
  j["scan"] = cfg.scan;
  j["rho"] = cfg.rho;
  j["k"] = cfg.k;
  j["t"] = cfg.t;
  j["trials"] = cfg.trials;
  j["distances"] = cfg.distances;
  j["tube_width"] = cfg.tube_width;
  j["out"] = cfg.out;
  return j;
}

struct CheckList {
  struct Row {
    std::string name;
    bool pass;
    double value;
    double threshold;
  };
  std::vector<Row> rows;

  bool check(const std::string& name, bool pass, double value, double threshold) {
    rows.push_back({name, pass, value, threshold});
    return pass;
  }
  bool all_passed() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  void write_csv(const std::string& path) const {
    CsvWriter csv(path);
    csv.row({"check", "status", "value", "threshold"});
    for (const auto& r : rows)
      csv.row({r.name, r.pass ? "pass" : "FAIL", format_double(r.value),
               format_double(r.threshold)});
  }
};

int cmd_green(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  SolverOptions opts = solver_options(cfg);
  GreenSolver solver(box_sites(cfg.d, cfg.N), opts);
  const LatticeField col = green_column(solver, Point::zero(cfg.d));
  const std::string col_path = cfg.out + "/column.csv";
  write_column_csv(col_path, col);
  manifest.add_output(col_path);
  manifest.add_constant("green_origin_variance", col(Point::zero(cfg.d)));
  if (!cfg.distances.empty()) {
    const RatioProfile prof = asymptotic_ratio_profile(cfg.d, cfg.N, cfg.distances, opts);
    const std::string prof_path = cfg.out + "/ratio_profile.csv";
    CsvWriter csv(prof_path);
    csv.row({"k", "green", "ratio", "log_term"});
    for (const auto& row : prof.rows)
      csv.row({std::to_string(row.k), format_double(row.green), format_double(row.ratio),
               format_double(row.log_term)});
    csv.close();
    manifest.add_output(prof_path);
    manifest.add_constant("ratio_profile_slope", prof.fitted_slope);
  }
  manifest.add_timing("green", seconds_since(t0));
  return 0;
}

int cmd_certificate(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  const Box box(cfg.d, cfg.N);
  const Region A = tube_complement(box, cfg.tube_width);
  const Region E = box_sites(box).set_difference(A);
  SolverOptions opts = solver_options(cfg);
  GreenSolver solver(E, opts);
  const LatticeField col = green_column(solver, Point::zero(cfg.d));

  const Region window = box_sites(cfg.d, cfg.N + 4);
  const Region pinned_in_window = window.set_difference(E);
  const DecayCertificate cert =
      shell_norm_sequence(col, Point::zero(cfg.d), cfg.N / 2 + 2, window, &pinned_in_window);

  const std::string cert_path = cfg.out + "/certificate.json";
  {
    std::ofstream out(cert_path, std::ios::trunc);
    out << certificate_to_json(cert).dump(2) << "\n";
  }
  manifest.add_output(cert_path);
  const std::string shells_path = cfg.out + "/shells.csv";
  {
    CsvWriter csv(shells_path);
    csv.row({"k", "h2_norm_sq"});
    for (size_t i = 0; i < cert.shells.size(); ++i)
      csv.row({std::to_string(cert.shells[i]), format_double(cert.shell_norms[i])});
  }
  manifest.add_output(shells_path);
  manifest.add_constant("s_fit", cert.s_fit);
  if (cert.M) manifest.add_constant("M", *cert.M);
  manifest.add_timing("certificate", seconds_since(t0));
  return 0;
}

int cmd_pin_sample(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  const PinnedEnsemble ens = sample_ensemble(Box(cfg.d, cfg.N), cfg.eps, cfg.n, cfg.burn_in,
                                             cfg.thinning, cfg.seed, gibbs_options(cfg));
  const std::string bin_path = cfg.out + "/ensemble.bin";
  ens.save(bin_path);
  manifest.add_output(bin_path);
  const std::string csv_path = cfg.out + "/ensemble.csv";
  write_ensemble_summary_csv(csv_path, ens);
  manifest.add_output(csv_path);
  double mean_density = 0.0;
  for (int i = 0; i < ens.n_samples(); ++i)
    mean_density += static_cast<double>(ens.pinned_count(i)) / ens.samples[i].size();
  manifest.add_constant("mean_pinned_density", mean_density / ens.n_samples());
  manifest.add_entry("kernel_used", ens.kernel);
  manifest.add_timing("pin_sample", seconds_since(t0));
  return 0;
}

int cmd_pin_enumerate(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  const ZetaTable zeta = enumerate_zeta(Box(cfg.d, cfg.N), cfg.eps);
  const std::string path = cfg.out + "/zeta.csv";
  CsvWriter csv(path);
  csv.row({"mask", "pinned", "prob"});
  for (uint32_t mask = 0; mask < zeta.prob.size(); ++mask)
    csv.row({std::to_string(mask), std::to_string(__builtin_popcount(mask)),
             format_double(zeta.prob[mask])});
  csv.close();
  manifest.add_output(path);
  manifest.add_constant("mean_pinned_count", zeta.mean_pinned_count());
  manifest.add_timing("pin_enumerate", seconds_since(t0));
  return 0;
}

int cmd_percolation(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json j;

  const InteriorCheck ic = interior_site_probability_check(cfg.d, cfg.rho, cfg.trials, cfg.seed);
  j["interior"] = {{"empirical", ic.empirical},
                   {"exact", ic.exact},
                   {"sigma", ic.sigma},
                   {"trials", ic.trials}};

  const DistanceTail dt =
      distance_tail_experiment(cfg.d, cfg.t + 2, cfg.rho, cfg.t, cfg.trials, cfg.seed);
  j["distance_tail"] = {{"t", dt.t},
                        {"empirical", dt.empirical},
                        {"mc_sigma", dt.mc_sigma},
                        {"per_point_bound", dt.per_point_bound},
                        {"region_max_bound", dt.region_max_bound},
                        {"paper_prefactor_bound", dt.paper_prefactor_bound},
                        {"vacuous", dt.vacuous}};
  {
    const std::string path = cfg.out + "/distance_trials.csv";
    CsvWriter csv(path);
    csv.row({"trial", "distance"});
    for (size_t i = 0; i < dt.trial_values.size(); ++i)
      csv.row({std::to_string(i), std::to_string(dt.trial_values[i])});
    csv.close();
    manifest.add_output(path);
  }

  const int ak_trials = std::max(100, cfg.trials / 10);
  const AkTail ak = ak_tail_experiment(cfg.d, cfg.rho, cfg.k, cfg.xi, ak_trials, cfg.seed);
  j["ak_tail"] = {{"k", ak.k},
                  {"xi", ak.xi},
                  {"m_k", ak.m_k},
                  {"threshold", ak.threshold},
                  {"empirical", ak.empirical},
                  {"mc_sigma", ak.mc_sigma},
                  {"union_bound", ak.union_bound},
                  {"paper_bound", ak.paper_bound},
                  {"vacuous", ak.vacuous},
                  {"precondition_ok", ak.precondition_ok},
                  {"mean_ak", ak.mean_ak}};
  {
    const std::string path = cfg.out + "/ak_trials.csv";
    CsvWriter csv(path);
    csv.row({"trial", "a_k"});
    for (size_t i = 0; i < ak.trial_values.size(); ++i)
      csv.row({std::to_string(i), std::to_string(ak.trial_values[i])});
    csv.close();
    manifest.add_output(path);
  }

  const std::string jpath = cfg.out + "/percolation.json";
  {
    std::ofstream out(jpath, std::ios::trunc);
    out << j.dump(2) << "\n";
  }
  manifest.add_output(jpath);
  manifest.add_timing("percolation", seconds_since(t0));
  return 0;
}

int cmd_decay(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  const Box box(cfg.d, cfg.N);
  PinnedEnsemble ens;
  if (!cfg.ensemble_in.empty()) {
    ens = PinnedEnsemble::load(cfg.ensemble_in);
    if (ens.d != cfg.d || ens.N != cfg.N)
      throw std::invalid_argument("decay: ensemble file does not match d/N");
  } else {
    ens = sample_ensemble(box, cfg.eps, cfg.n, cfg.burn_in, cfg.thinning, cfg.seed,
                          gibbs_options(cfg));
    const std::string bin_path = cfg.out + "/ensemble.bin";
    ens.save(bin_path);
    manifest.add_output(bin_path);
  }
  std::vector<int> ks = cfg.distances;
  if (ks.empty()) {
    const int k_hi = std::max(3, 3 * cfg.N / 8);
    for (int k = 2; k <= k_hi; ++k) ks.push_back(k);
  }
  const DecayProfile prof = decay_profile(box, ens, Point::zero(cfg.d), ks, solver_options(cfg),
                                          cfg.lambda, cfg.delta);
  const std::string prof_path = cfg.out + "/profile.csv";
  write_profile_csv(prof_path, prof);
  manifest.add_output(prof_path);
  try {
    const StretchedFit fit = fit_stretched_exponential(prof);
    const std::string fit_path = cfg.out + "/fit.json";
    std::ofstream out(fit_path, std::ios::trunc);
    out << stretched_fit_to_json(fit).dump(2) << "\n";
    out.close();
    manifest.add_output(fit_path);
    manifest.add_constant("alpha_hat", fit.alpha);
  } catch (const std::invalid_argument& e) {
    manifest.add_entry("fit_skipped", std::string(e.what()));
  }
  manifest.add_timing("decay", seconds_since(t0));
  return 0;
}

int cmd_validate(const RunConfig& cfg, RunManifest& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckList checks;
  auto rng = RngStream::substream(cfg.seed, "validate");

  // --- operator identities ---
  {
    double worst_parts = 0.0, worst_energy = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Region support = box_sites(2, 4);
      std::vector<double> v(support.size());
      for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
      const LatticeField f(support, v);
      std::vector<double> w(support.size());
      for (auto& x : w) x = 2.0 * rng.uniform() - 1.0;
      const LatticeField g(support, w);
      for (int i = 1; i <= 2; ++i)
        worst_parts = std::max(worst_parts, std::abs(sum_by_parts_defect(f, g, i)));
      worst_energy = std::max(worst_energy, std::abs(gradient_energy_identity_defect(f)) /
                                                (f.l2_norm_sq() + 1.0));
    }
    checks.check("operator/sum_by_parts_defect", worst_parts < 1e-12, worst_parts, 1e-12);
    checks.check("operator/energy_identity_defect", worst_energy < 1e-10, worst_energy, 1e-10);
    const LatticeField delta = LatticeField::delta(Point{0});
    const double lhs = second_diff(delta, 1, 1).l2_norm_sq();
    checks.check("operator/delta_energy_six", lhs == 6.0, lhs, 6.0);
  }

  // --- green oracle chain ---
  {
    double worst = 0.0;
    for (int d = 1; d <= 5; ++d) {
      GreenSolver s(Region(d, {Point::zero(d)}));
      worst = std::max(worst,
                       std::abs(variance(s, Point::zero(d)) - 2.0 * d / (2.0 * d + 1.0)));
    }
    checks.check("green/single_site", worst < 1e-12, worst, 1e-12);

    GreenSolver two(Region(1, {Point{0}, Point{1}}));
    const LatticeField g0 = green_column(two, Point{0});
    const double err = std::max(std::abs(g0(Point{0}) - 1.2), std::abs(g0(Point{1}) - 0.8));
    checks.check("green/two_site", err < 1e-12, err, 1e-12);

    // Schur vs direct on a random d=2 set.
    const Region base_sites = box_sites(2, 6);
    std::vector<Point> keep;
    for (const auto& p : base_sites)
      if (rng.uniform() < 0.8) keep.push_back(p);
    Region e(2, keep);
    if (!e.contains(Point::zero(2))) e = e.set_union(Region(2, {Point::zero(2)}));
    std::vector<Point> s_pts;
    for (const auto& p : e)
      if (rng.uniform() < 0.1 && !(p == Point::zero(2))) s_pts.push_back(p);
    const Region s(2, s_pts);
    GreenSolver base(e);
    SchurConditioner cond(base, s);
    GreenSolver fresh(e.set_difference(s));
    double schur_err = 0.0;
    const LatticeField via = cond.column(Point::zero(2));
    const LatticeField ref = green_column(fresh, Point::zero(2));
    for (const auto& p : fresh.free_set())
      schur_err = std::max(schur_err,
                           std::abs(via(p) - ref(p)) / (std::abs(ref(p)) + 1e-12));
    checks.check("green/schur_vs_direct", schur_err < 1e-8, schur_err, 1e-8);

    const double rw2 = rw_green_infinite(5, Point::zero(5), 2);
    checks.check("green/rw_m2_exact", std::abs(rw2 - 1.3) < 1e-12, rw2, 1.3);

    const double rw = rw_green_infinite(5, Point::zero(5), 400);
    const double g2 = variance(GreenSolver(box_sites(5, 2)), Point::zero(5));
    const double g4 = variance(GreenSolver(box_sites(5, 4)), Point::zero(5));
    const double drop = std::abs(rw - g2) - std::abs(rw - g4);
    checks.check("green/rw_box_consistency", drop > 0.0, drop, 0.0);
  }

  // --- sobolev ---
  {
    // Pinned d=2 configuration with a small free set.
    const Region box = box_sites(2, 8);
    std::vector<Point> pinned;
    for (const auto& p : box)
      if (rng.uniform() < 0.4) pinned.push_back(p);
    Region a(2, pinned);
    Region e = box.set_difference(a);
    if (e.empty()) {
      e = Region(2, {Point::zero(2)});
      a = box.set_difference(e);
    }
    GreenSolver solver(e);
    const Point y = e.site(static_cast<int>(rng.below(e.size())));
    const LatticeField col = green_column(solver, y);
    const auto [lhs, rhs] = h2_total_identity(col, y);
    const double rel = std::abs(lhs - rhs) / (std::abs(rhs) + 1e-300);
    checks.check("sobolev/h2_total_identity", rel < 1e-8, rel, 1e-8);

    const NormReport nr = norms(col, box);
    checks.check("sobolev/norm_ordering",
                 nr.grad <= nr.h1 + 1e-15 && nr.grad2 <= nr.h2 + 1e-15 && nr.l2 <= nr.h2 + 1e-15,
                 nr.h2, nr.h2);

    // d=1 equivalence example.
    std::vector<Point> eseg;
    for (int i = 0; i <= 6; ++i) eseg.push_back(Point{i});
    const Region e1(1, eseg);
    const Region a1(1, {Point{0}, Point{1}, Point{2}, Point{6}, Point{7}, Point{8}});
    const LatticeField bump = LatticeField::delta(Point{4});
    const EquivalenceReport eq = equivalence_check(bump, e1, a1);
    checks.check("sobolev/equivalence_holds", eq.lhs <= eq.rhs, eq.lhs, eq.rhs);
  }

  // --- pinning ---
  {
    // One-site closed form against enumeration.
    const ZetaTable zeta1 = enumerate_zeta(Box(1, 0), 1.0);
    const double sigma = 2.0 / 3.0;
    const double q = 1.0 * partition_ratio_from_variance(sigma);
    const double closed = q / (1.0 + q);
    const double enumerated = zeta1.prob[1];
    checks.check("pinning/one_site_closed_form", std::abs(closed - enumerated) < 1e-10,
                 std::abs(closed - enumerated), 1e-10);

    // Exact kernel stationarity on the 5-site d=1 box.
    const ZetaTable zeta = enumerate_zeta(Box(1, 4), 1.0);
    const auto swept = apply_heat_bath_sweep(Box(1, 4), 1.0, zeta.prob);
    const double tv = total_variation(zeta.prob, swept);
    checks.check("pinning/stationarity", tv < 1e-10, tv, 1e-10);

    // Sampled chain against enumeration (small surrogate of the 7-site test).
    GibbsChain chain(Box(1, 4), 1.0, cfg.seed, GibbsOptions{});
    std::vector<double> hist(zeta.prob.size(), 0.0);
    const int sweeps = 20000;
    for (int i = 0; i < 200; ++i) chain.sweep();
    for (int i = 0; i < sweeps; ++i) {
      chain.sweep();
      uint32_t mask = 0;
      for (int j = 0; j < chain.sites().size(); ++j)
        if (chain.pinned_mask()[j]) mask |= 1u << j;
      hist[mask] += 1.0 / sweeps;
    }
    const double tv_mc = total_variation(zeta.prob, hist);
    checks.check("pinning/tv_sampled", tv_mc < 0.05, tv_mc, 0.05);

    // Envelope on random configurations, d=4 small box.
    const double gamma4 = measure_gamma4({4});
    manifest.add_constant("gamma4_hat", gamma4);
    const Box b4(4, 4);
    const Region sites4 = box_sites(b4);
    GreenSolver base4(sites4);
    DominationReport rep;
    rep.envelope = domination_envelope(4, cfg.eps, gamma4 * std::log(4.0));
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Point> a_pts;
      const int x_idx = static_cast<int>(rng.below(sites4.size()));
      for (int i = 0; i < 15; ++i) {
        const int j = static_cast<int>(rng.below(sites4.size()));
        if (j != x_idx) a_pts.push_back(sites4.site(j));
      }
      SchurConditioner cond(base4, Region(4, a_pts));
      const double var = cond.conditioned_variance(sites4.site(x_idx));
      const double qq = cfg.eps * partition_ratio_from_variance(var);
      rep.record(qq / (1.0 + qq));
    }
    checks.check("pinning/envelope_violations", rep.violations == 0, rep.violations, 0.0);
  }

  // --- percolation ---
  {
    const InteriorCheck ic = interior_site_probability_check(2, 0.7, 2000, cfg.seed);
    const double dev = std::abs(ic.empirical - ic.exact);
    checks.check("percolation/interior_4sigma", dev <= 4.0 * ic.sigma, dev, 4.0 * ic.sigma);

    const DistanceTail dt = distance_tail_experiment(2, 10, 0.7, 8, 2000, cfg.seed);
    checks.check("percolation/distance_tail",
                 dt.empirical <= dt.per_point_bound + 4.0 * dt.mc_sigma, dt.empirical,
                 dt.per_point_bound + 4.0 * dt.mc_sigma);

    // Coupled monotonicity of a_k in rho.
    const AkTail lo = ak_tail_experiment(2, 0.6, 15, 0.2, 60, cfg.seed);
    const AkTail hi = ak_tail_experiment(2, 0.9, 15, 0.2, 60, cfg.seed);
    checks.check("percolation/ak_monotone_in_rho", hi.mean_ak >= lo.mean_ak, hi.mean_ak,
                 lo.mean_ak);
  }

  // --- decay ---
  {
    std::vector<std::pair<double, double>> synth;
    for (int k = 1; k <= 12; ++k)
      synth.emplace_back(k, std::exp(-std::sqrt(static_cast<double>(k))));
    const StretchedFit fit = fit_stretched_exponential(synth);
    checks.check("decay/synthetic_alpha_half", std::abs(fit.alpha - 0.5) < 0.01, fit.alpha, 0.5);

    const ZetaTable zeta = enumerate_zeta(Box(1, 4), 1.0);
    const PinnedEnsemble ens =
        sample_ensemble(Box(1, 4), 1.0, 400, 100, 1, cfg.seed, GibbsOptions{});
    const double exact = exact_mixture_covariance(zeta, Point{0}, Point{1});
    const CovarianceEstimate mc = pinned_covariance(Box(1, 4), ens, Point{0}, Point{1});
    const double dev = std::abs(mc.mean - exact);
    const double band = 4.0 * std::max(mc.se, 1e-3);
    checks.check("decay/mixture_consistency", dev <= band, dev, band);

    // Field sampling validation.
    GreenSolver solver(box_sites(2, 4));
    const auto fc = field_sampling_check(
        solver, {{Point::zero(2), Point::zero(2)}, {Point::zero(2), Point{1, 0}}}, 4000,
        cfg.seed);
    bool ok = true;
    double worst = 0.0;
    for (const auto& c : fc) {
      const double z = std::abs(c.empirical - c.exact) / std::max(c.sigma, 1e-9);
      worst = std::max(worst, z);
      if (z > 4.0) ok = false;
    }
    checks.check("decay/field_sampling_4sigma", ok, worst, 4.0);
  }

  const std::string checks_path = cfg.out + "/validate_checks.csv";
  checks.write_csv(checks_path);
  manifest.add_output(checks_path);
  manifest.add_timing("validate", seconds_since(t0));
  manifest.add_entry("all_checks_passed", checks.all_passed());
  for (const auto& r : checks.rows)
    if (!r.pass) std::cerr << "validate: FAIL " << r.name << "\n";
  return checks.all_passed() ? 0 : 2;
}

}  // namespace

Region tube_complement(const Box& box, int width) {
  if (width < 1 || width % 2 == 0)
    throw std::invalid_argument("tube_complement: width must be odd and >= 1");
  const int half = (width - 1) / 2;
  std::vector<Point> pts;
  for (const auto& p : box_sites(box)) {
    bool outside = false;
    for (int i = 1; i < box.d; ++i)
      if (std::abs(p.c[i]) > half) outside = true;
    if (outside) pts.push_back(p);
  }
  return Region(box.d, std::move(pts));
}

int run(const RunConfig& cfg) {
  static const std::vector<std::string> known = {
      "green", "certificate", "pin-sample", "pin-enumerate", "percolation", "decay", "validate"};
  if (std::find(known.begin(), known.end(), cfg.subcommand) == known.end()) {
    std::cerr << "error: unknown subcommand '" << cfg.subcommand << "'\n";
    return 1;
  }
  if (cfg.N < 0 || cfg.N % 2 != 0) {
    std::cerr << "error: N must be a non-negative even integer, got N=" << cfg.N << "\n";
    return 1;
  }
  if (cfg.d < 1 || cfg.d > kMaxDim) {
    std::cerr << "error: d must be in 1.." << kMaxDim << ", got d=" << cfg.d << "\n";
    return 1;
  }
  if (cfg.eps < 0.0) {
    std::cerr << "error: eps must be >= 0, got eps=" << cfg.eps << "\n";
    return 1;
  }
  try {
    std::filesystem::create_directories(cfg.out);
    RunManifest manifest(cfg.out, config_echo(cfg));
    int rc = 0;
    if (cfg.subcommand == "green") rc = cmd_green(cfg, manifest);
    else if (cfg.subcommand == "certificate") rc = cmd_certificate(cfg, manifest);
    else if (cfg.subcommand == "pin-sample") rc = cmd_pin_sample(cfg, manifest);
    else if (cfg.subcommand == "pin-enumerate") rc = cmd_pin_enumerate(cfg, manifest);
    else if (cfg.subcommand == "percolation") rc = cmd_percolation(cfg, manifest);
    else if (cfg.subcommand == "decay") rc = cmd_decay(cfg, manifest);
    else if (cfg.subcommand == "validate") rc = cmd_validate(cfg, manifest);
    manifest.write();
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"membrane-lab: numerical laboratory for the membrane model with delta-pinning"};
  app.set_config("--config", "", "flat key=value config file; flags override file values");
  app.add_option("subcommand", cfg.subcommand,
                 "one of: green certificate pin-sample pin-enumerate percolation decay validate")
      ->required();
  app.add_option("--d", cfg.d, "lattice dimension");
  app.add_option("--N", cfg.N, "box side parameter (even)");
  app.add_option("--eps", cfg.eps, "pinning strength");
  app.add_option("--xi", cfg.xi, "adaptive-bound exponent (m_k = k^xi)");
  app.add_option("--lambda", cfg.lambda, "d=4 window exponent");
  app.add_option("--delta", cfg.delta, "d=4 window prefactor");
  app.add_option("--seed", cfg.seed, "master RNG seed");
  app.add_option("--backend", cfg.backend, "solver backend: auto|direct|cg");
  app.add_option("--tol", cfg.tol, "solver relative residual tolerance");
  app.add_option("--max-iterations", cfg.max_iterations, "CG iteration cap");
  app.add_option("--n", cfg.n, "ensemble size");
  app.add_option("--burn-in", cfg.burn_in, "sweeps before the first sample");
  app.add_option("--thinning", cfg.thinning, "sweeps between samples");
  app.add_option("--kernel", cfg.kernel, "gibbs kernel: auto|collapsed|joint");
  app.add_option("--scan", cfg.scan, "scan order: systematic|random");
  app.add_option("--rho", cfg.rho, "percolation intensity");
  app.add_option("--k", cfg.k, "a_k distance parameter");
  app.add_option("--t", cfg.t, "distance-tail threshold");
  app.add_option("--trials", cfg.trials, "Monte Carlo trials");
  app.add_option("--distances", cfg.distances, "profile distances along e1");
  app.add_option("--tube-width", cfg.tube_width, "certificate tube width (odd)");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--cache", cfg.cache,
                 "green-column cache directory (MEMBRANE_LAB_CACHE env overrides)");
  app.add_option("--ensemble-in", cfg.ensemble_in, "reuse a stored ensemble (decay)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return run(cfg);
}

}  // namespace membrane
