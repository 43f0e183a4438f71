// Copyright 2026 The ampgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ampgate/analysis.hpp"

#include <cstring>
#include <random>

#include "ampgate/design.hpp"
#include "gtest/gtest.h"

namespace ampgate {
namespace {

// Known surface: vertex at (88 µs, δ′ = 2π·10.7 kHz), widths 10 µs and 2π·1 kHz.
struct Truth {
  double f0 = 0.86, x0 = 88e-6, y0 = khz_to_rad(10.7);
  double wx = 10e-6, wy = khz_to_rad(1.0);
  double A = -0.08, B = -0.06, C = 0.02;
  double operator()(double x, double y) const {
    const double u = (x - x0) / wx, w = (y - y0) / wy;
    return f0 + A * u * u + B * w * w + C * u * w;
  }
};

std::vector<FidelitySample> grid_samples(const Truth& truth, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<FidelitySample> out;
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) {
      FidelitySample s;
      s.t_i = truth.x0 + 2e-6 + 5e-6 * i;
      s.delta_prime = truth.y0 - khz_to_rad(0.3) + khz_to_rad(0.5) * j;
      s.delta = s.delta_prime;
      s.fidelity = truth(s.t_i, s.delta_prime) + sigma * normal(rng);
      s.sigma_f = sigma;
      out.push_back(s);
    }
  }
  return out;
}

TEST(FitQuadSurface, RecoversExactQuadratic) {
  const Truth truth;
  const auto fit = fit_quad_surface(grid_samples(truth, 0.0, 1));
  EXPECT_NEAR(fit.a[4], truth.x0, 1e-9 * truth.x0);
  EXPECT_NEAR(fit.a[5], truth.y0, 1e-9 * truth.y0);
  EXPECT_NEAR(fit.a[0], truth.f0, 1e-9);
  EXPECT_NEAR(fit.a[1], truth.A / (truth.wx * truth.wx), 1e-9 * std::abs(fit.a[1]));
  EXPECT_NEAR(fit.a[2], truth.B / (truth.wy * truth.wy), 1e-9 * std::abs(fit.a[2]));
  EXPECT_NEAR(fit.a[3], truth.C / (truth.wx * truth.wy), 1e-9 * std::abs(fit.a[3]));
  EXPECT_TRUE(fit.has_maximum);
  EXPECT_LT(fit.residual_norm, 1e-12);
  EXPECT_EQ(fit.n_points, 25);
}

TEST(FitQuadSurface, NoisyGridLocatesMaximum) {
  const Truth truth;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto fit = fit_quad_surface(grid_samples(truth, 0.01, seed));
    EXPECT_NEAR(fit.a[4], truth.x0, 3e-6) << seed;
  }
}

TEST(FitQuadSurface, CovarianceMatchesScatter) {
  // Oracle: the spread of a4 over independent noisy data sets.
  const Truth truth;
  double s = 0, s2 = 0, predicted = 0;
  const int trials = 400;
  for (int k = 0; k < trials; ++k) {
    const auto fit = fit_quad_surface(grid_samples(truth, 0.01, 1000 + k));
    s += fit.a[4];
    s2 += fit.a[4] * fit.a[4];
    predicted += std::sqrt(fit.covariance(4, 4));
  }
  const double mean = s / trials;
  const double sd = std::sqrt(s2 / trials - mean * mean);
  EXPECT_NEAR(predicted / trials / sd, 1.0, 0.15);
}

TEST(FitQuadSurface, ArgmaxIsStationaryPoint) {
  const Truth truth;
  const auto fit = fit_quad_surface(grid_samples(truth, 0.01, 5));
  const double hx = 1e-7, hy = 1.0;
  const double f = fit(fit.a[4], fit.a[5]);
  EXPECT_DOUBLE_EQ(f, fit.a[0]);
  EXPECT_LT(fit(fit.a[4] + hx, fit.a[5]), f);
  EXPECT_LT(fit(fit.a[4] - hx, fit.a[5]), f);
  EXPECT_LT(fit(fit.a[4], fit.a[5] + hy), f);
  EXPECT_LT(fit(fit.a[4], fit.a[5] - hy), f);
  // Closed-form argmax of the expanded polynomial.
  const double det = 4 * fit.a[1] * fit.a[2] - fit.a[3] * fit.a[3];
  EXPECT_GT(det, 0.0);
}

TEST(FitQuadSurface, AffineEquivariance) {
  const Truth truth;
  const auto base = grid_samples(truth, 0.01, 9);
  const auto fit = fit_quad_surface(base);
  auto shifted = base;
  for (auto& s : shifted) s.t_i += 7e-6;
  const auto fs = fit_quad_surface(shifted);
  EXPECT_NEAR(fs.a[4], fit.a[4] + 7e-6, 1e-12 * fit.a[4]);
  EXPECT_NEAR(fs.a[5], fit.a[5], 1e-9 * fit.a[5]);
  auto scaled = base;
  for (auto& s : scaled) s.fidelity *= 3.0;
  const auto fk = fit_quad_surface(scaled);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(fk.a[i], 3 * fit.a[i], 1e-9 * std::abs(fk.a[i]));
  EXPECT_NEAR(fk.a[4], fit.a[4], 1e-12 * fit.a[4]);
  EXPECT_NEAR(fk.a[5], fit.a[5], 1e-9 * fit.a[5]);
}

TEST(FitQuadSurface, WeightingWithEqualSigmaChangesNothing) {
  const auto base = grid_samples(Truth{}, 0.01, 3);
  const auto a = fit_quad_surface(base);
  const auto b = fit_quad_surface(base, {true});
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(a.a[i], b.a[i], 1e-10 * std::abs(a.a[i]));
}

TEST(FitQuadSurface, FlagsSaddle) {
  Truth truth;
  truth.B = 0.06;
  const auto fit = fit_quad_surface(grid_samples(truth, 0.0, 1));
  EXPECT_FALSE(fit.has_maximum);
  EXPECT_NE(describe_fit(fit).find("none"), std::string::npos);
}

TEST(FitQuadSurface, RejectsDegenerateDesigns) {
  auto s = grid_samples(Truth{}, 0.0, 1);
  EXPECT_THROW(fit_quad_surface({s.begin(), s.begin() + 5}), std::invalid_argument);
  auto same_x = s;
  for (auto& p : same_x) p.t_i = 1e-4;
  EXPECT_THROW(fit_quad_surface(same_x), std::invalid_argument);
  // Points on a line: u and w collinear.
  std::vector<FidelitySample> line;
  for (int i = 0; i < 10; ++i) {
    FidelitySample p;
    p.t_i = 1e-4 + 1e-6 * i;
    p.delta_prime = 1e4 + 10.0 * i;
    p.fidelity = 0.5;
    line.push_back(p);
  }
  EXPECT_THROW(fit_quad_surface(line), std::invalid_argument);
}

TEST(DeltasToDeltaPrime, Transforms) {
  FidelitySample s;
  s.delta = 5.0;
  auto out = deltas_to_delta_prime({s}, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(out[0].delta_prime, 5.0);
  out = deltas_to_delta_prime({s}, 3.0, 1.0);
  EXPECT_DOUBLE_EQ(out[0].delta_prime, 3.0);
  out = deltas_to_delta_prime({s}, 4.0, 0.0);
  EXPECT_DOUBLE_EQ(out[0].delta_prime, 3.0);
  FidelitySample bad = s;
  bad.delta = 3.5;
  FidelitySample invalid = s;
  invalid.valid = false;
  std::size_t dropped = 0;
  out = deltas_to_delta_prime({s, bad, invalid}, 4.0, 0.0, &dropped);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(dropped, 2u);
}

// Samples carrying raw δ for a given g.
std::vector<FidelitySample> with_raw_delta(std::vector<FidelitySample> s, double g) {
  for (auto& p : s) p.delta = std::sqrt(p.delta_prime * p.delta_prime + g * g);
  return s;
}

TEST(Bootstrap, ZeroNoiseGivesZeroWidth) {
  auto s = grid_samples(Truth{}, 0.0, 1);
  for (auto& p : s) p.sigma_f = 0.0;
  const double g = khz_to_rad(49.7);
  BootstrapOptions opts;
  opts.n_resamples = 50;
  const auto r = bootstrap_t_est(with_raw_delta(s, g), g, opts);
  EXPECT_NEAR(r.upper - r.lower, 0.0, 1e-15);
  EXPECT_NEAR(r.estimate, Truth{}.x0, 1e-12);
  EXPECT_EQ(r.failures, 0);
}

TEST(Bootstrap, DeterministicAndIndependentOfJobs) {
  const double g = khz_to_rad(49.7);
  const auto s = with_raw_delta(grid_samples(Truth{}, 0.01, 2), g);
  BootstrapOptions opts;
  opts.n_resamples = 300;
  opts.seed = 4;
  opts.sigma_g = hz_to_rad(600);
  const auto a = bootstrap_t_est(s, g, opts);
  opts.jobs = 3;
  const auto b = bootstrap_t_est(s, g, opts);
  ASSERT_EQ(a.values.size(), b.values.size());
  EXPECT_EQ(0, std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)));
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_LT(a.failures, 30);
  opts.seed = 5;
  EXPECT_NE(bootstrap_t_est(s, g, opts).lower, a.lower);
  EXPECT_LE(a.lower, a.estimate);
  EXPECT_GE(a.upper, a.estimate);
}

TEST(Bootstrap, GUncertaintyWidensInterval) {
  const double g = khz_to_rad(49.7);
  const auto s = with_raw_delta(grid_samples(Truth{}, 0.005, 2), g);
  BootstrapOptions opts;
  opts.n_resamples = 500;
  const auto narrow = bootstrap_t_est(s, g, opts);
  opts.sigma_g = hz_to_rad(600);
  const auto wide = bootstrap_t_est(s, g, opts);
  EXPECT_GT(wide.upper - wide.lower, narrow.upper - narrow.lower);
  // Independent Δg per point scrambles δ′, so many fits fail by design.
  opts.per_point_g = true;
  opts.max_failure_fraction = 1.0;
  const auto per_point = bootstrap_t_est(s, g, opts);
  EXPECT_NE(per_point.lower, wide.lower);
}

TEST(Bootstrap, AbortsWhenMostFitsFail) {
  // A flat surface buried in noise has no reliable maximum.
  Truth flat;
  flat.A = flat.B = -1e-4;
  flat.C = 0;
  const auto s = grid_samples(flat, 0.0, 1);
  auto noisy = s;
  for (auto& p : noisy) p.sigma_f = 0.05;
  BootstrapOptions opts;
  opts.n_resamples = 200;
  EXPECT_THROW(bootstrap_t_est(noisy, 0.0, opts), ConvergenceError);
}

TEST(Bootstrap, CoverageOnSyntheticSurfaces) {
  const Truth truth;
  int covered = 0;
  const int trials = 100;
  for (int k = 0; k < trials; ++k) {
    BootstrapOptions opts;
    opts.n_resamples = 400;
    opts.seed = 77 + k;
    const auto r = bootstrap_t_est(grid_samples(truth, 0.01, 5000 + k), 0.0, opts);
    covered += r.lower <= truth.x0 && truth.x0 <= r.upper;
  }
  EXPECT_NEAR(covered / double(trials), 0.68, 0.12);
}

TEST(Speedup, Arithmetic) {
  EXPECT_NEAR(speedup(331e-6, 88e-6), 3.76, 5e-3);
  EXPECT_DOUBLE_EQ(speedup(1.0, 1.0), 1.0);
  const auto s = solve_gate(khz_to_rad(1.46), khz_to_rad(49.7), 0.0);
  const auto s0 = solve_gate(khz_to_rad(1.46), 0.0, 0.0);
  EXPECT_NEAR(speedup(s0.tau, s.tau), s.gain, 1e-9);
  EXPECT_THROW(speedup(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(speedup(1.0, -1.0), std::invalid_argument);
}

TEST(Speedup, BootstrapRatio) {
  BootstrapResult t0, t;
  t0.estimate = 330;
  t0.values = {330, 332, std::nan(""), 328};
  t.estimate = 88;
  t.values = {88, 89, 87, 86};
  const auto r = bootstrap_speedup(t0, t);
  EXPECT_DOUBLE_EQ(r.estimate, 330.0 / 88);
  EXPECT_EQ(r.failures, 1);
  EXPECT_DOUBLE_EQ(r.values[1], 332.0 / 89);
  t.values.pop_back();
  EXPECT_THROW(bootstrap_speedup(t0, t), std::invalid_argument);
}

TEST(Percentile, Interpolates) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 0.5), 3);
  EXPECT_DOUBLE_EQ(percentile({1, 2}, 0.25), 1.25);
  EXPECT_DOUBLE_EQ(percentile({std::nan(""), 2.0}, 0.9), 2.0);
  EXPECT_TRUE(std::isnan(percentile({}, 0.5)));
}

}  // namespace
}  // namespace ampgate
