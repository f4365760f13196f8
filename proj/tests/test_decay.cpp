#include "membrane/decay.hpp"

#include <cmath>

#include "doctest.h"
#include "membrane/cli.hpp"
#include "membrane/green.hpp"

using namespace membrane;

TEST_CASE("stretched-exponential fit on synthetic inputs") {
  auto synth = [](double alpha, int k_lo, int k_hi) {
    std::vector<std::pair<double, double>> kc;
    for (int k = k_lo; k <= k_hi; ++k)
      kc.emplace_back(k, std::exp(-std::pow(static_cast<double>(k), alpha)));
    return kc;
  };

  const StretchedFit half = fit_stretched_exponential(synth(0.5, 1, 14));
  CHECK(std::abs(half.alpha - 0.5) < 0.01);
  CHECK(half.residual < 1e-10);
  CHECK(!half.not_stretched);

  const StretchedFit one = fit_stretched_exponential(synth(1.0, 1, 14));
  CHECK(std::abs(one.alpha - 1.0) < 0.01);
  CHECK(!one.not_stretched);

  // Pure power law: the power model fits exactly, the stretched model does not.
  std::vector<std::pair<double, double>> poly;
  for (int k = 2; k <= 40; ++k) poly.emplace_back(k, 1.0 / k);
  const StretchedFit p = fit_stretched_exponential(poly);
  CHECK(p.not_stretched);
  CHECK(p.power_residual < 1e-12);
  CHECK(p.power_residual < 0.5 * p.residual);
  CHECK(p.power_exponent == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(p.alpha < 0.7);

  // Non-positive covariances are excluded and counted; < 3 usable throws.
  std::vector<std::pair<double, double>> mixed = {{2, 0.5}, {3, -0.1}, {4, 0.2}, {5, 0.1}};
  const StretchedFit m = fit_stretched_exponential(mixed);
  CHECK(m.excluded == 1);
  CHECK(m.used == 3);
  CHECK_THROWS_AS(fit_stretched_exponential(std::vector<std::pair<double, double>>{{2, 0.5}, {3, 0.4}}),
                  std::invalid_argument);
}

TEST_CASE("pinned covariance: degenerate ensembles") {
  const Box box(1, 8);
  const Region sites = box_sites(box);

  // Ensemble of empty pinned sets reproduces the unpinned Green function.
  PinnedEnsemble empty_ens;
  empty_ens.d = 1;
  empty_ens.N = 8;
  empty_ens.eps = 0.0;
  empty_ens.samples.assign(3, std::vector<uint8_t>(sites.size(), 0));
  const CovarianceEstimate c = pinned_covariance(box, empty_ens, Point{0}, Point{1});
  GreenSolver base(sites);
  const LatticeField g = green_column(base, Point{0});
  CHECK(c.mean == doctest::Approx(g(Point{1})).epsilon(1e-12));
  CHECK(c.se == 0.0);

  // x pinned in every sample: covariance is exactly 0.
  PinnedEnsemble pinned_ens = empty_ens;
  const int xi = *sites.index_of(Point{0});
  for (auto& s : pinned_ens.samples) s[xi] = 1;
  const CovarianceEstimate z = pinned_covariance(box, pinned_ens, Point{0}, Point{1});
  CHECK(z.mean == 0.0);
}

TEST_CASE("mixture consistency on an enumerable box") {
  const Box box(1, 4);
  const double eps = 1.0;
  const ZetaTable zeta = enumerate_zeta(box, eps);

  // One-site arithmetic oracle on V_0: E[phi^2] = P(unpinned) * (2/3).
  const ZetaTable z1 = enumerate_zeta(Box(1, 0), eps);
  const double direct = z1.prob[0] * (2.0 / 3.0);
  CHECK(exact_mixture_covariance(z1, Point{0}, Point{0}) ==
        doctest::Approx(direct).epsilon(1e-12));

  // Exact mixture against the sampled ensemble.
  const double exact = exact_mixture_covariance(zeta, Point{0}, Point{1});
  const PinnedEnsemble ens = sample_ensemble(box, eps, 600, 200, 1, 12345);
  const CovarianceEstimate mc = pinned_covariance(box, ens, Point{0}, Point{1});
  CHECK(std::abs(mc.mean - exact) <= 3.0 * std::max(mc.se, 2e-3));

  // Variance shrinks under pinning (through the mixture).
  GreenSolver base(box_sites(box));
  const double base_var = variance(base, Point{0});
  const CovarianceEstimate vv = pinned_covariance(box, ens, Point{0}, Point{0});
  CHECK(vv.mean <= base_var + 2.0 * vv.se);

  // Monotone suppression in eps (exact route, three eps values).
  const double c_half = exact_mixture_covariance(enumerate_zeta(box, 0.5), Point{0}, Point{1});
  const double c_one = exact_mixture_covariance(enumerate_zeta(box, 1.0), Point{0}, Point{1});
  const double c_two = exact_mixture_covariance(enumerate_zeta(box, 2.0), Point{0}, Point{1});
  CHECK(c_one <= c_half + 1e-12);
  CHECK(c_two <= c_one + 1e-12);
}

TEST_CASE("decay profile contracts") {
  const Box box(2, 16);
  const PinnedEnsemble ens = sample_ensemble(box, 1.0, 12, 60, 2, 5);

  CHECK_THROWS_AS(decay_profile(box, ens, Point::zero(2), {3}, SolverOptions{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(decay_profile(box, ens, Point::zero(2), {3, 3, 3}, SolverOptions{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(decay_profile(box, ens, Point::zero(2), {2, 7}, SolverOptions{}),
                  std::invalid_argument);  // margin violation at 7 > N/2 - N/8

  const DecayProfile prof = decay_profile(box, ens, Point::zero(2), {2, 3, 4, 5}, SolverOptions{});
  REQUIRE(prof.rows.size() == 4);
  for (size_t i = 0; i < prof.rows.size(); ++i) {
    CHECK(prof.rows[i].baseline > 0.0);
    if (i > 0) CHECK(prof.rows[i].baseline < prof.rows[i - 1].baseline);
    CHECK(prof.rows[i].cov <= prof.rows[i].baseline + 3.0 * std::max(prof.rows[i].se, 1e-6));
  }

  // d=4 window filter mirrors |x-y| >= delta N^lambda.
  const DecayProfile filtered =
      decay_profile(box, ens, Point::zero(2), {2, 3, 4, 5}, SolverOptions{}, 0.5, 1.0);
  CHECK(filtered.rows.front().k >= static_cast<int>(std::pow(16.0, 0.5)));
}

TEST_CASE("deterministic tube vs mixture") {
  // Long tube so the fit window sits in the clean exponential regime, away
  // from the onset (amplitude) and the absorbing tube ends.
  const Box box(2, 32);
  const Region tube_pins = tube_complement(box, 3);
  const PinnedEnsemble ens = sample_ensemble(box, 0.25, 16, 60, 2, 6);
  const std::vector<int> ks = {4, 5, 6, 7, 8, 9, 10};
  const DeterministicVsRandom rep =
      deterministic_vs_random_comparison(box, tube_pins, ens, Point::zero(2), ks, SolverOptions{});
  REQUIRE(rep.deterministic_abs.size() == ks.size());
  // Tube decay is near-exponential.
  CHECK(rep.deterministic_fit.alpha > 0.7);
  CHECK(rep.deterministic_fit.alpha < 1.4);
  // The frozen very-good set decays at least as fast as the weak mixture.
  CHECK(rep.deterministic_fit.alpha >= rep.mixture_fit.alpha);
}

TEST_CASE("field sampling validates Green entries") {
  GreenSolver solver(box_sites(2, 4));
  const std::vector<std::pair<Point, Point>> pairs = {
      {Point::zero(2), Point::zero(2)}, {Point::zero(2), Point{1, 0}}, {Point{1, 1}, Point{-1, 0}}};
  const auto checks = field_sampling_check(solver, pairs, 10000, 99);
  for (const auto& c : checks) {
    CHECK(std::abs(c.empirical - c.exact) <= 4.0 * std::max(c.sigma, 1e-6));
  }

  SolverOptions cg;
  cg.backend = Backend::kConjugateGradient;
  GreenSolver cg_solver(box_sites(2, 4), cg);
  CHECK_THROWS_AS(field_sampling_check(cg_solver, pairs, 10, 1), std::logic_error);
}
