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

#include "ampgate/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "ampgate/rng.hpp"

namespace ampgate {

namespace {

void finish(Populations& pop) {
  double s = 0.0;
  for (double p : pop.p) s += p;
  pop.tail = std::max(0.0, 1.0 - s);
}

}  // namespace

Populations squeezed_vacuum_populations(double r, int n_max) {
  if (r < 0) throw std::invalid_argument("squeeze magnitude must be >= 0");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  Populations pop;
  pop.p.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double t2 = std::tanh(r) * std::tanh(r);
  // P(2m) = P(2m−2) · (2m−1)/(2m) · tanh²r
  double p = 1.0 / std::cosh(r);
  for (int n = 0; n <= n_max; n += 2) {
    if (n > 0) p *= (n - 1.0) / n * t2;
    pop.p[static_cast<std::size_t>(n)] = p;
  }
  finish(pop);
  return pop;
}

Populations thermal_populations(double nbar, int n_max) {
  if (nbar < 0) throw std::invalid_argument("nbar must be >= 0");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  Populations pop;
  pop.p.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double q = nbar / (nbar + 1);
  double p = 1.0 / (nbar + 1);
  for (auto& x : pop.p) {
    x = p;
    p *= q;
  }
  finish(pop);
  return pop;
}

namespace {

// Coefficients of Σ P(n) zⁿ = (α + βz + γz²)^{−1/2} for S(r) ρ_th(n̄) S(r)†.
struct GenFn {
  double alpha, beta, gamma;
};

GenFn squeezed_thermal_genfn(double r, double nbar) {
  const double m = nbar + 0.5, c = std::cosh(2 * r);
  return {m * m + m * c + 0.25, 0.5 - 2 * m * m, m * m - m * c + 0.25};
}

// 2Q G′ = −Q′ G gives a three-term recursion in n.
double next_population(const GenFn& q, int n, double p_n, double p_nm1) {
  return -(q.beta * (2 * n + 1) * p_n + 2 * q.gamma * n * p_nm1) / (2 * q.alpha * (n + 1));
}

}  // namespace

Populations squeezed_thermal_populations(double r, double nbar, int n_max) {
  if (r < 0) throw std::invalid_argument("squeeze magnitude must be >= 0");
  if (nbar < 0) throw std::invalid_argument("nbar must be >= 0");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  if (nbar == 0.0) return squeezed_vacuum_populations(r, n_max);
  const GenFn q = squeezed_thermal_genfn(r, nbar);
  Populations pop;
  pop.p.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  double prev = 0.0, cur = 1.0 / std::sqrt(q.alpha);
  for (int n = 0; n <= n_max; ++n) {
    pop.p[static_cast<std::size_t>(n)] = std::max(cur, 0.0);
    const double next = next_population(q, n, cur, prev);
    prev = cur;
    cur = next;
  }
  finish(pop);
  return pop;
}

int population_cutoff(double r, double nbar, double tail) {
  if (r < 0) throw std::invalid_argument("squeeze magnitude must be >= 0");
  if (nbar < 0) throw std::invalid_argument("nbar must be >= 0");
  const GenFn q = squeezed_thermal_genfn(r, nbar);
  double prev = 0.0, cur = 1.0 / std::sqrt(q.alpha);
  double left = 1.0 - cur;
  int n = 0;
  while (left >= tail && n < 10000000) {
    const double next = next_population(q, n, cur, prev);
    prev = cur;
    cur = next;
    ++n;
    left -= cur;
  }
  return n;
}

std::vector<double> sideband_signal(const std::vector<double>& populations, double omega_sb,
                                    const std::vector<double>& t) {
  double total = 0.0;
  for (double p : populations) total += p;
  if (total > 1 + 1e-9) throw std::invalid_argument("populations sum above 1");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double acc = 0.0;
    for (std::size_t n = 0; n < populations.size(); ++n) {
      if (populations[n] == 0.0) continue;
      const double s = std::sin(std::sqrt(n + 1.0) * omega_sb * t[i] / 2);
      acc += populations[n] * s * s;
    }
    out[i] = acc;
  }
  return out;
}

int squeeze_cutoff(double r) { return population_cutoff(r, 0.0, 1e-6); }

SqueezeFit fit_squeeze_param(const std::vector<double>& t, const std::vector<double>& signal,
                             double omega_sb, double nbar, double duration,
                             const SqueezeFitOptions& options) {
  if (t.size() != signal.size() || t.empty()) {
    throw std::invalid_argument("fit_squeeze_param: t and signal must be non-empty and equal length");
  }
  if (!(omega_sb > 0) || !(duration > 0)) {
    throw std::invalid_argument("fit_squeeze_param: omega_sb and duration must be > 0");
  }
  const double t_max = *std::max_element(t.begin(), t.end());
  if (omega_sb * t_max < kTwoPi) {
    throw std::invalid_argument("fit_squeeze_param: samples must cover one flopping period");
  }
  if (options.scan_points < 3) throw std::invalid_argument("scan_points must be >= 3");

  auto residual = [&](double xi) {
    const auto pop = squeezed_thermal_populations(xi, nbar, population_cutoff(xi, nbar, 1e-9));
    const auto model = sideband_signal(pop.p, omega_sb, t);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += (signal[i] - model[i]) * (signal[i] - model[i]);
    return s;
  };

  const double step = options.xi_max / (options.scan_points - 1);
  int best = 0;
  double best_res = residual(0.0);
  double worst_res = best_res;
  for (int i = 1; i < options.scan_points; ++i) {
    const double res = residual(step * i);
    worst_res = std::max(worst_res, res);
    if (res < best_res) {
      best_res = res;
      best = i;
    }
  }
  const double lo = std::max(0.0, step * (best - 1));
  const double hi = std::min(options.xi_max, step * (best + 1));
  const auto [xi, res] = boost::math::tools::brent_find_minima(residual, lo, hi, 50);

  SqueezeFit fit;
  fit.xi = xi;
  fit.g = xi / duration;
  fit.residual = res;
  fit.unidentifiable = worst_res - best_res <= 1e-9 * (1 + best_res);
  if (!std::isfinite(xi)) throw ConvergenceError("fit_squeeze_param: fit did not converge");
  return fit;
}

RamseyCurves ramsey_populations(const RamseyModel& model, const std::vector<double>& t,
                                int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
  if (model.sigma < 0) throw std::invalid_argument("sigma must be >= 0");
  Rng rng(seed);
  std::normal_distribution<double> normal(model.mean, model.sigma);
  std::vector<double> shifts(static_cast<std::size_t>(n_draws));
  for (auto& d : shifts) d = model.sigma > 0 ? normal(rng) : model.mean;

  RamseyCurves c;
  c.t = t;
  c.p_down_down.assign(t.size(), 0.0);
  c.p_up_up.assign(t.size(), 0.0);
  c.p_mixed.assign(t.size(), 0.0);
  c.parity.assign(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double dd = 0, uu = 0;
    for (double d : shifts) {
      const double s = std::sin(d * t[i] / 2), co = std::cos(d * t[i] / 2);
      dd += s * s * s * s;
      uu += co * co * co * co;
    }
    c.p_down_down[i] = dd / n_draws;
    c.p_up_up[i] = uu / n_draws;
    c.p_mixed[i] = 1 - c.p_down_down[i] - c.p_up_up[i];
    c.parity[i] = c.p_down_down[i] + c.p_up_up[i] - c.p_mixed[i];
  }
  return c;
}

RamseyCurves ramsey_expected(const RamseyModel& model, const std::vector<double>& t) {
  RamseyCurves c;
  c.t = t;
  for (double ti : t) {
    // ⟨cos φ⟩ and ⟨cos 2φ⟩ for Gaussian φ = δ_ac t.
    const double s2 = model.sigma * model.sigma * ti * ti;
    const double c1 = std::cos(model.mean * ti) * std::exp(-s2 / 2);
    const double c2 = std::cos(2 * model.mean * ti) * std::exp(-2 * s2);
    c.p_down_down.push_back((1.5 - 2 * c1 + 0.5 * c2) / 4);
    c.p_up_up.push_back((1.5 + 2 * c1 + 0.5 * c2) / 4);
    c.p_mixed.push_back((1 - c2) / 4);
    c.parity.push_back((1 + c2) / 2);
  }
  return c;
}

namespace {

struct RamseyFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  using QRSolver = Eigen::ColPivHouseholderQR<JacobianType>;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& t;
  const std::vector<double>& y;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(t.size()); }

  // x = (mean, sigma); sigma enters squared so its sign is irrelevant.
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double s2 = x(1) * x(1) * t[i] * t[i];
      const double c1 = std::cos(x(0) * t[i]) * std::exp(-s2 / 2);
      const double c2 = std::cos(2 * x(0) * t[i]) * std::exp(-2 * s2);
      f(static_cast<Eigen::Index>(i)) = (1.5 - 2 * c1 + 0.5 * c2) / 4 - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double ti = t[i];
      const double e1 = std::exp(-x(1) * x(1) * ti * ti / 2);
      const double e2 = std::exp(-2 * x(1) * x(1) * ti * ti);
      const auto k = static_cast<Eigen::Index>(i);
      jac(k, 0) = (2 * ti * std::sin(x(0) * ti) * e1 - ti * std::sin(2 * x(0) * ti) * e2) / 4;
      jac(k, 1) = 2 * x(1) * ti * ti * (std::cos(x(0) * ti) * e1 - std::cos(2 * x(0) * ti) * e2) / 4;
    }
    return 0;
  }
};

}  // namespace

RamseyFit fit_ramsey(const std::vector<double>& t, const std::vector<double>& p_down_down,
                     const RamseyModel& guess) {
  if (t.size() != p_down_down.size() || t.size() < 3) {
    throw std::invalid_argument("fit_ramsey: need at least 3 points of equal-length data");
  }
  const double t_max = *std::max_element(t.begin(), t.end());
  if (!(t_max > 0)) throw std::invalid_argument("fit_ramsey: t_R must span a positive range");
  RamseyFunctor fn{t, p_down_down};

  auto sum_sq = [&](double mean, double sigma) {
    Eigen::VectorXd x(2), f(static_cast<Eigen::Index>(t.size()));
    x << mean, sigma;
    fn(x, f);
    return f.squaredNorm();
  };

  // Coarse frequency scan at the guessed width.
  double min_dt = t_max;
  std::vector<double> sorted = t;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] > sorted[i - 1]) min_dt = std::min(min_dt, sorted[i] - sorted[i - 1]);
  }
  const double mean_max = guess.mean > 0 ? 2 * guess.mean : kPi / min_dt;
  const double sigma0 = guess.sigma > 0 ? guess.sigma : 1.0 / t_max;
  const double step = kPi / (8 * t_max);
  double best_mean = 0.0, best = sum_sq(0.0, sigma0);
  for (double m = step; m <= mean_max; m += step) {
    const double s = sum_sq(m, sigma0);
    if (s < best) {
      best = s;
      best_mean = m;
    }
  }

  Eigen::VectorXd x(2);
  x << best_mean, sigma0;
  Eigen::LevenbergMarquardt<RamseyFunctor> lm(fn);
  lm.setMaxfev(2000);
  const auto status = lm.minimize(x);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
    throw ConvergenceError("fit_ramsey: improper input");
  }
  if (!x.allFinite()) throw ConvergenceError("fit_ramsey: fit diverged");

  RamseyFit fit;
  fit.model.mean = std::abs(x(0));
  fit.model.sigma = std::abs(x(1));
  fit.iterations = static_cast<int>(lm.iterations());
  Eigen::VectorXd f(static_cast<Eigen::Index>(t.size()));
  fn(x, f);
  fit.residual = f.norm();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(t.size()), 2);
  fn.df(x, jac);
  const double dof = static_cast<double>(t.size()) - 2;
  if (dof > 0) {
    const Eigen::Matrix2d cov = (jac.transpose() * jac).inverse() * (f.squaredNorm() / dof);
    fit.mean_error = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.sigma_error = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

void write_calibration_csv(const CalibrationData& data, const std::string& path) {
  if (data.t.size() != data.p_bright.size() || data.t.size() != data.sigma.size()) {
    throw std::invalid_argument("calibration columns differ in length");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(12);
  out << "t_us,p_bright,sigma\n";
  for (std::size_t i = 0; i < data.t.size(); ++i) {
    out << data.t[i] * 1e6 << ',' << data.p_bright[i] << ',' << data.sigma[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CalibrationData read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("t_us,p_bright,sigma", 0) != 0) {
    throw std::runtime_error(path + ": unexpected header");
  }
  CalibrationData data;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw std::runtime_error(path + ":" + std::to_string(row) + ": expected 3 columns");
    }
    data.t.push_back(std::stod(a) * 1e-6);
    data.p_bright.push_back(std::stod(b));
    data.sigma.push_back(std::stod(c));
  }
  return data;
}

}  // namespace ampgate
