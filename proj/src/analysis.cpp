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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ampgate/design.hpp"
#include "ampgate/parallel.hpp"
#include "ampgate/rng.hpp"

namespace ampgate {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct Scaling {
  double x0, xs, y0, ys;
};

// Vertex form in physical units from expanded coefficients c in scaled
// coordinates u = (x−x0)/xs, w = (y−y0)/ys.
Vec6 vertex_form(const Vec6& c, const Scaling& s) {
  const double det = 4 * c(3) * c(4) - c(5) * c(5);
  const double mag = std::abs(c(3)) + std::abs(c(4)) + std::abs(c(5));
  Vec6 a;
  a(1) = c(3) / (s.xs * s.xs);
  a(2) = c(4) / (s.ys * s.ys);
  a(3) = c(5) / (s.xs * s.ys);
  if (!(std::abs(det) > 1e-14 * mag * mag)) {
    a(0) = a(4) = a(5) = std::nan("");
    return a;
  }
  // ∇ = 0: [2c3 c5; c5 2c4] (u, w) = −(c1, c2).
  const double u = (-2 * c(4) * c(1) + c(5) * c(2)) / det;
  const double w = (c(5) * c(1) - 2 * c(3) * c(2)) / det;
  a(0) = c(0) + c(1) * u + c(2) * w + c(3) * u * u + c(4) * w * w + c(5) * u * w;
  a(4) = s.x0 + s.xs * u;
  a(5) = s.y0 + s.ys * w;
  return a;
}

struct LinearFit {
  Vec6 c;
  Mat6 cov;
  Scaling scaling;
  double residual_norm;
};

LinearFit fit_expanded(const std::vector<FidelitySample>& samples, bool weighted) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  std::set<std::pair<double, double>> distinct;
  for (const auto& s : samples) distinct.emplace(s.t_i, s.delta_prime);
  if (distinct.size() < 6) {
    throw std::invalid_argument("quadratic surface fit needs at least 6 distinct (t_I, delta') points");
  }

  Scaling sc{0, 0, 0, 0};
  for (const auto& s : samples) {
    sc.x0 += s.t_i;
    sc.y0 += s.delta_prime;
  }
  sc.x0 /= static_cast<double>(n);
  sc.y0 /= static_cast<double>(n);
  for (const auto& s : samples) {
    sc.xs = std::max(sc.xs, std::abs(s.t_i - sc.x0));
    sc.ys = std::max(sc.ys, std::abs(s.delta_prime - sc.y0));
  }
  if (!(sc.xs > 0) || !(sc.ys > 0)) {
    throw std::invalid_argument("rank-deficient design: t_I or delta' does not vary");
  }

  Eigen::MatrixXd a(n, 6);
  Eigen::VectorXd f(n), sw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    const double u = (s.t_i - sc.x0) / sc.xs;
    const double w = (s.delta_prime - sc.y0) / sc.ys;
    a.row(i) << 1, u, w, u * u, w * w, u * w;
    f(i) = s.fidelity;
    sw(i) = weighted && s.sigma_f > 0 ? 1 / s.sigma_f : 1.0;
  }
  const Eigen::MatrixXd aw = sw.asDiagonal() * a;
  const Eigen::VectorXd fw = sw.asDiagonal() * f;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aw);
  qr.setThreshold(1e-12);
  if (qr.rank() < 6) {
    throw std::invalid_argument("rank-deficient design matrix in quadratic surface fit");
  }
  LinearFit out;
  out.scaling = sc;
  out.c = qr.solve(fw);
  const Eigen::VectorXd r = f - a * out.c;
  out.residual_norm = r.norm();
  const Mat6 normal = (aw.transpose() * aw).inverse();
  if (weighted) {
    out.cov = normal;
  } else {
    const double dof = static_cast<double>(n - 6);
    out.cov = dof > 0 ? Mat6(normal * (r.squaredNorm() / dof)) : Mat6(Mat6::Zero());
  }
  return out;
}

}  // namespace

double QuadSurfaceFit::operator()(double x, double y) const {
  const double dx = x - a[4], dy = y - a[5];
  return a[0] + a[1] * dx * dx + a[2] * dy * dy + a[3] * dx * dy;
}

QuadSurfaceFit fit_quad_surface(const std::vector<FidelitySample>& samples,
                                const SurfaceFitOptions& options) {
  const LinearFit lin = fit_expanded(samples, options.weighted);
  const Vec6 a = vertex_form(lin.c, lin.scaling);

  QuadSurfaceFit fit;
  for (int i = 0; i < 6; ++i) fit.a[static_cast<std::size_t>(i)] = a(i);
  fit.residual_norm = lin.residual_norm;
  fit.n_points = static_cast<int>(samples.size());
  fit.has_maximum = std::isfinite(a(4)) && a(1) < 0 && a(2) < 0 &&
                    4 * a(1) * a(2) - a(3) * a(3) > 0;
  if (std::isfinite(a(4))) {
    Mat6 jac;
    for (int j = 0; j < 6; ++j) {
      const double h = 1e-6 * std::max(std::abs(lin.c(j)), 1e-3);
      Vec6 cp = lin.c, cm = lin.c;
      cp(j) += h;
      cm(j) -= h;
      jac.col(j) = (vertex_form(cp, lin.scaling) - vertex_form(cm, lin.scaling)) / (2 * h);
    }
    fit.covariance = jac * lin.cov * jac.transpose();
  } else {
    fit.covariance.setConstant(std::nan(""));
  }
  return fit;
}

std::vector<FidelitySample> deltas_to_delta_prime(const std::vector<FidelitySample>& samples,
                                                  double g, double delta_g,
                                                  std::size_t* dropped) {
  const double ge = g + delta_g;
  std::vector<FidelitySample> out;
  out.reserve(samples.size());
  std::size_t skipped = 0;
  for (const auto& s : samples) {
    if (!s.valid || !(std::abs(s.delta) > std::abs(ge))) {
      ++skipped;
      continue;
    }
    FidelitySample t = s;
    t.delta_prime = ge == 0.0 ? std::abs(s.delta) : effective_detuning(s.delta, std::abs(ge));
    out.push_back(t);
  }
  if (dropped) *dropped = skipped;
  return out;
}

double percentile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

void summarize(BootstrapResult& r, double max_failure_fraction) {
  r.failures = static_cast<int>(std::count_if(r.values.begin(), r.values.end(),
                                              [](double v) { return !std::isfinite(v); }));
  if (r.failures > max_failure_fraction * r.n_resamples) {
    throw ConvergenceError("bootstrap: " + std::to_string(r.failures) + " of " +
                           std::to_string(r.n_resamples) + " resamples failed");
  }
  r.lower = percentile(r.values, 0.16);
  r.upper = percentile(r.values, 0.84);
  r.skewed = r.estimate < r.lower || r.estimate > r.upper;
}

}  // namespace

BootstrapResult bootstrap_t_est(const std::vector<FidelitySample>& samples, double g,
                                const BootstrapOptions& options) {
  if (options.n_resamples < 1) throw std::invalid_argument("n_resamples must be >= 1");
  if (options.sigma_g < 0) throw std::invalid_argument("sigma_g must be >= 0");
  const SurfaceFitOptions fit_opts{options.weighted};
  const auto base = deltas_to_delta_prime(samples, g, 0.0);
  const QuadSurfaceFit fit = fit_quad_surface(base, fit_opts);
  if (!fit.has_maximum) {
    throw ConvergenceError("bootstrap: the fit to the original data has no interior maximum");
  }

  BootstrapResult r;
  r.estimate = fit.t_est();
  r.n_resamples = options.n_resamples;
  r.seed = options.seed;
  r.values.assign(static_cast<std::size_t>(options.n_resamples), std::nan(""));
  parallel_for(r.values.size(), options.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(options.seed, i));
    std::normal_distribution<double> normal;
    const double dg_common = options.sigma_g * normal(rng);
    std::vector<FidelitySample> synthetic;
    synthetic.reserve(base.size());
    for (const auto& s : samples) {
      if (!s.valid) continue;
      const double dg = options.per_point_g ? options.sigma_g * normal(rng) : dg_common;
      const double df = normal(rng);
      FidelitySample t = s;
      t.fidelity += std::max(s.sigma_f, 0.0) * df;
      const double ge = g + dg;
      if (!(std::abs(s.delta) > std::abs(ge))) continue;
      t.delta_prime = ge == 0.0 ? std::abs(s.delta) : effective_detuning(s.delta, std::abs(ge));
      synthetic.push_back(t);
    }
    try {
      const auto f = fit_quad_surface(synthetic, fit_opts);
      if (f.has_maximum) r.values[i] = f.t_est();
    } catch (const std::invalid_argument&) {
      // counted as a failure
    }
  });
  summarize(r, options.max_failure_fraction);
  return r;
}

BootstrapResult bootstrap_speedup(const BootstrapResult& t0, const BootstrapResult& t) {
  if (t0.values.size() != t.values.size()) {
    throw std::invalid_argument("bootstrap_speedup: resample counts differ");
  }
  BootstrapResult r;
  r.estimate = speedup(t0.estimate, t.estimate);
  r.n_resamples = static_cast<int>(t.values.size());
  r.seed = t.seed;
  r.values.resize(t.values.size());
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    const double a = t0.values[i], b = t.values[i];
    r.values[i] = std::isfinite(a) && std::isfinite(b) && a > 0 && b > 0 ? a / b : std::nan("");
  }
  summarize(r, 1.0);
  return r;
}

double speedup(double t0, double t_est) {
  if (!(t0 > 0) || !(t_est > 0)) throw std::invalid_argument("speedup needs positive times");
  return t0 / t_est;
}

std::string describe_fit(const QuadSurfaceFit& fit) {
  std::ostringstream s;
  s << std::setprecision(6);
  s << "points        " << fit.n_points << '\n';
  s << "t_est         " << fit.a[4] * 1e6 << " us";
  if (std::isfinite(fit.covariance(4, 4))) {
    s << " +- " << std::sqrt(fit.covariance(4, 4)) * 1e6;
  }
  s << '\n';
  s << "delta'_est    " << rad_to_khz(fit.a[5]) << " kHz (x 2pi)\n";
  s << "F_max         " << fit.a[0] << '\n';
  s << "a1 a2 a3      " << fit.a[1] << ' ' << fit.a[2] << ' ' << fit.a[3] << '\n';
  s << "residual norm " << fit.residual_norm << '\n';
  s << "maximum       " << (fit.has_maximum ? "interior" : "none (saddle or degenerate)") << '\n';
  return s.str();
}

}  // namespace ampgate
