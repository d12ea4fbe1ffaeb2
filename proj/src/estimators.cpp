#include "memsim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "memsim/constants.hpp"
#include "memsim/csv.hpp"

namespace memsim::est {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// y(p, x) with gradient in *grad when requested.
using ModelFn = std::function<double(const VectorXd&, double, VectorXd*)>;

// Damped Gauss-Newton with analytic Jacobians. Converges when the relative
// parameter step drops below 1e-10; gives up after max_iter iterations.
FitResult levenberg_marquardt(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> sigmas, VectorXd p,
                              const ModelFn& model, const std::vector<std::string>& names,
                              int max_iter = 200) {
  const int n = static_cast<int>(xs.size());
  const int np = static_cast<int>(p.size());
  const bool weighted = !sigmas.empty();

  auto chi2_of = [&](const VectorXd& params) {
    double chi2 = 0;
    for (int i = 0; i < n; ++i) {
      double r = ys[i] - model(params, xs[i], nullptr);
      if (weighted) r /= sigmas[i];
      chi2 += r * r;
    }
    return chi2;
  };

  double lambda = 1e-3;
  double chi2 = chi2_of(p);
  FitResult out;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    MatrixXd jtj = MatrixXd::Zero(np, np);
    VectorXd jtr = VectorXd::Zero(np);
    VectorXd grad(np);
    for (int i = 0; i < n; ++i) {
      const double y = model(p, xs[i], &grad);
      double r = ys[i] - y;
      double w = 1.0;
      if (weighted) {
        w = 1.0 / (sigmas[i] * sigmas[i]);
        r = ys[i] - y;
      }
      jtj.noalias() += w * grad * grad.transpose();
      jtr.noalias() += w * grad * r;
    }
    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      MatrixXd damped = jtj;
      for (int d = 0; d < np; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-300);
      const VectorXd step = damped.ldlt().solve(jtr);
      if (!step.allFinite()) {
        lambda *= 10;
        continue;
      }
      const VectorXd trial = p + step;
      const double trial_chi2 = chi2_of(trial);
      if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
        double rel = 0;
        for (int d = 0; d < np; ++d) {
          rel = std::max(rel, std::abs(step[d]) / std::max(std::abs(trial[d]), 1e-300));
        }
        p = trial;
        chi2 = trial_chi2;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel < 1e-10) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10;
    }
    if (out.converged || !stepped) break;
  }
  out.iterations = iter + 1;

  // Covariance from the final Jacobian.
  MatrixXd jtj = MatrixXd::Zero(np, np);
  VectorXd grad(np);
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double y = model(p, xs[i], &grad);
    const double w = weighted ? 1.0 / (sigmas[i] * sigmas[i]) : 1.0;
    jtj.noalias() += w * grad * grad.transpose();
    const double r = ys[i] - y;
    ss += r * r;
  }
  MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  if (!weighted && n > np) cov *= chi2 / (n - np);
  out.covariance = cov;
  out.residual_rms = n > 0 ? std::sqrt(ss / n) : 0.0;
  for (int d = 0; d < np; ++d) out.params[names[d]] = p[d];
  if (!out.converged && out.message.empty()) out.message = "did not converge";
  return out;
}

// Plain/weighted straight-line fit y = a + b x; returns (a, b, cov).
struct LineFit {
  double intercept = 0, slope = 0;
  double var_intercept = 0, var_slope = 0;
  double residual_rms = 0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  const int n = static_cast<int>(xs.size());
  require(n >= 2, "line fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  require(std::abs(denom) > 0, "line fit is degenerate");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy * sxx - sx * sxy) / denom;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - f.intercept - f.slope * xs[i];
    ss += r * r;
  }
  const double s2 = n > 2 ? ss / (n - 2) : 0.0;
  f.var_slope = s2 * n / denom;
  f.var_intercept = s2 * sxx / denom;
  f.residual_rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

std::string to_json(const FitResult& fit) {
  std::ostringstream os;
  os << "{\n  \"params\": {";
  bool first = true;
  for (const auto& [k, v] : fit.params) {
    os << (first ? "" : ", ") << '"' << k << "\": " << io::format_double(v);
    first = false;
  }
  os << "},\n  \"covariance\": [";
  for (int r = 0; r < fit.covariance.rows(); ++r) {
    os << (r ? ", " : "") << '[';
    for (int c = 0; c < fit.covariance.cols(); ++c) {
      os << (c ? ", " : "") << io::format_double(fit.covariance(r, c));
    }
    os << ']';
  }
  os << "],\n  \"residual_rms\": " << io::format_double(fit.residual_rms)
     << ",\n  \"converged\": " << (fit.converged ? "true" : "false") << "\n}\n";
  return os.str();
}

FitResult fit_lorentzian(const lindyn::Spectrum& spectrum, const LorentzianGuess* guess) {
  const auto& f = spectrum.freq_hz;
  const auto& y = spectrum.value;
  require(f.size() == y.size() && f.size() >= 5, "lorentzian fit needs >= 5 samples");

  LorentzianGuess g;
  if (guess) {
    g = *guess;
  } else {
    const std::size_t ipk =
        std::distance(y.begin(), std::max_element(y.begin(), y.end()));
    g.center_hz = f[ipk];
    g.offset = *std::min_element(y.begin(), y.end());
    const double height = y[ipk] - g.offset;
    const double half = g.offset + 0.5 * height;
    std::size_t ilo = ipk, ihi = ipk;
    while (ilo > 0 && y[ilo] > half) --ilo;
    while (ihi + 1 < y.size() && y[ihi] > half) ++ihi;
    g.fwhm_hz = std::max(f[ihi] - f[ilo], (f.back() - f.front()) / f.size());
    g.area = height * std::numbers::pi * g.fwhm_hz / 2.0;
  }

  VectorXd p(4);
  p << g.center_hz, g.fwhm_hz, g.area, g.offset;
  auto model = [](const VectorXd& q, double x, VectorXd* grad) {
    const double hw = 0.5 * std::abs(q[1]);
    const double u = x - q[0];
    const double d = hw * hw + u * u;
    const double shape = hw / (d * std::numbers::pi);
    if (grad) {
      (*grad)[0] = q[2] * 2.0 * hw * u / (d * d * std::numbers::pi);
      (*grad)[1] = q[2] * 0.5 * (u * u - hw * hw) / (d * d * std::numbers::pi);
      (*grad)[2] = shape;
      (*grad)[3] = 1.0;
    }
    return q[3] + q[2] * shape;
  };
  FitResult out = levenberg_marquardt(f, y, {}, p, model,
                                      {"center_hz", "fwhm_hz", "area", "offset"});
  out.params["fwhm_hz"] = std::abs(out.params["fwhm_hz"]);
  const double spacing = (f.back() - f.front()) / (f.size() - 1);
  if (out.params["fwhm_hz"] < 10.0 * spacing) {
    out.message = "fewer than 10 samples across the fitted FWHM";
  }
  return out;
}

Envelope ringdown_envelope(std::span<const double> t_s, std::span<const double> i,
                           std::span<const double> q) {
  require(t_s.size() == i.size(), "envelope: time/i size mismatch");
  Envelope env;
  if (!q.empty()) {
    require(q.size() == i.size(), "envelope: i/q size mismatch");
    for (std::size_t n = 0; n < i.size(); ++n) {
      env.t_s.push_back(t_s[n]);
      env.energy.push_back(i[n] * i[n] + q[n] * q[n]);
    }
    return env;
  }
  // Single-channel record: take local maxima of |i| as the amplitude envelope.
  for (std::size_t n = 1; n + 1 < i.size(); ++n) {
    const double a0 = std::abs(i[n - 1]), a1 = std::abs(i[n]), a2 = std::abs(i[n + 1]);
    if (a1 >= a0 && a1 >= a2 && a1 > 0) {
      env.t_s.push_back(t_s[n]);
      env.energy.push_back(a1 * a1);
    }
  }
  return env;
}

FitResult fit_ringdown(std::span<const double> t_s, std::span<const double> energy) {
  require(t_s.size() == energy.size(), "ringdown fit: size mismatch");
  std::vector<double> xs, logs, weights;
  int masked = 0;
  for (std::size_t n = 0; n < energy.size(); ++n) {
    if (energy[n] > 0) {
      xs.push_back(t_s[n]);
      logs.push_back(std::log(energy[n]));
      weights.push_back(energy[n] * energy[n]);  // var(log y) ~ sigma^2 / y^2
    } else {
      ++masked;
    }
  }
  require(xs.size() >= 2, "ringdown fit needs >= 2 positive samples");

  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double w = weights[n];
    sw += w;
    swx += w * xs[n];
    swy += w * logs[n];
    swxx += w * xs[n] * xs[n];
    swxy += w * xs[n] * logs[n];
  }
  const double denom = sw * swxx - swx * swx;
  require(std::abs(denom) > 0, "ringdown fit is degenerate");
  const double slope = (sw * swxy - swx * swy) / denom;   // d(log E)/dt = -2 pi rate
  const double intercept = (swy * swxx - swx * swxy) / denom;

  FitResult out;
  out.params["rate_hz"] = -slope / kTwoPi;
  out.params["amplitude"] = std::exp(intercept);
  double ss = 0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double r = logs[n] - intercept - slope * xs[n];
    ss += r * r;
  }
  out.residual_rms = std::sqrt(ss / xs.size());
  const double s2 = xs.size() > 2 ? ss / (xs.size() - 2) : 0.0;
  out.covariance = MatrixXd::Zero(2, 2);
  out.covariance(0, 0) = s2 * sw / denom / (kTwoPi * kTwoPi);
  out.covariance(1, 1) = s2 * swxx / denom;
  out.converged = std::isfinite(slope) && std::isfinite(intercept);
  if (masked > 0) {
    out.message = std::to_string(masked) + " nonpositive samples masked";
  }
  return out;
}

FitResult fit_exponential(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma) {
  require(x.size() == y.size() && x.size() >= 2, "exponential fit needs >= 2 points");
  // Starting point from the positive samples.
  double a0 = *std::max_element(y.begin(), y.end());
  double r0 = 0;
  {
    std::vector<double> xs, logs;
    for (std::size_t n = 0; n < y.size(); ++n) {
      if (y[n] > 0) {
        xs.push_back(x[n]);
        logs.push_back(std::log(y[n]));
      }
    }
    if (xs.size() >= 2) {
      const LineFit lf = fit_line(xs, logs);
      r0 = -lf.slope / kTwoPi;
      a0 = std::exp(lf.intercept);
    }
  }
  VectorXd p(2);
  p << a0, r0;
  auto model = [](const VectorXd& q, double xx, VectorXd* grad) {
    const double e = std::exp(-kTwoPi * q[1] * xx);
    if (grad) {
      (*grad)[0] = e;
      (*grad)[1] = -kTwoPi * xx * q[0] * e;
    }
    return q[0] * e;
  };
  return levenberg_marquardt(x, y, sigma, p, model, {"amplitude", "rate_hz"});
}

double extract_pure_dephasing_hz(double spectral_fwhm_hz, double ringdown_rate_hz,
                                 double tol_hz) {
  require(spectral_fwhm_hz >= 0 && ringdown_rate_hz >= 0,
          "linewidths must be nonnegative");
  if (tol_hz <= 0) tol_hz = 1e-6 * std::max(spectral_fwhm_hz, ringdown_rate_hz);
  if (spectral_fwhm_hz < ringdown_rate_hz - tol_hz) {
    throw std::runtime_error(
        "pure dephasing: spectral linewidth narrower than the ringdown rate");
  }
  return std::max(0.0, spectral_fwhm_hz - ringdown_rate_hz);
}

ThermalAreaCalibration thermal_area_calibration(
    std::span<const std::pair<double, double>> temp_area, double mode_freq_hz,
    double floor_k) {
  std::vector<double> occ, area;
  for (const auto& [t_k, a] : temp_area) {
    if (t_k >= floor_k * (1.0 - 1e-12)) {
      occ.push_back(lindyn::bose_einstein(mode_freq_hz, t_k));
      area.push_back(a);
    }
  }
  require(occ.size() >= 3, "thermal calibration needs >= 3 temperatures above the floor");
  const LineFit lf = fit_line(occ, area);
  if (lf.slope <= 0) {
    throw std::runtime_error("thermal calibration: nonpositive area-per-quantum slope");
  }
  ThermalAreaCalibration cal;
  cal.slope = lf.slope;
  cal.intercept = lf.intercept;
  cal.intercept_sigma = std::sqrt(lf.var_intercept);
  cal.constant.value = 1.0 / lf.slope;
  cal.constant.units = "quanta per unit peak area";
  cal.constant.anchor = "linear fit of sideband peak area vs Bose-Einstein occupation";
  return cal;
}

FitResult linewidth_vs_temperature(std::span<const std::pair<double, double>> temp_linewidth) {
  require(temp_linewidth.size() >= 3, "linewidth fit needs >= 3 points");
  std::vector<double> t, g;
  for (const auto& [tk, ghz] : temp_linewidth) {
    t.push_back(tk);
    g.push_back(ghz);
  }
  const LineFit lf = fit_line(t, g);
  FitResult out;
  out.params["slope"] = lf.slope;  // Hz per kelvin
  out.params["intercept"] = lf.intercept;
  out.covariance = MatrixXd::Zero(2, 2);
  out.covariance(0, 0) = lf.var_slope;
  out.covariance(1, 1) = lf.var_intercept;
  out.residual_rms = lf.residual_rms;
  out.converged = true;
  return out;
}

FitResult gamma_opt_vs_power(std::span<const std::pair<double, double>> power_linewidth,
                             double gamma_m_hz) {
  require(power_linewidth.size() >= 2, "power fit needs >= 2 points");
  double sxy = 0, sxx = 0;
  std::vector<double> p, y;
  for (const auto& [power, gtot] : power_linewidth) {
    const double excess = gtot - gamma_m_hz;
    sxy += power * excess;
    sxx += power * power;
    p.push_back(power);
    y.push_back(excess);
  }
  require(sxx > 0, "power fit is degenerate");
  FitResult out;
  out.params["slope"] = sxy / sxx;
  // Free-intercept fit as a deviation-from-origin diagnostic.
  const LineFit lf = fit_line(p, y);
  out.params["intercept"] = lf.intercept;
  out.params["intercept_sigma"] = std::sqrt(lf.var_intercept);
  out.covariance = MatrixXd::Zero(1, 1);
  double ss = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = y[i] - out.params["slope"] * p[i];
    ss += r * r;
  }
  if (p.size() > 1) out.covariance(0, 0) = ss / (p.size() - 1) / sxx;
  out.residual_rms = std::sqrt(ss / p.size());
  out.converged = true;
  return out;
}

namespace {

double quadrature_variance_sum(std::span<const Shot> shots) {
  const std::size_t n = shots.size();
  require(n >= 2, "calibration needs >= 2 shots");
  double m1 = 0, m2 = 0;
  for (const auto& s : shots) {
    m1 += s.x1;
    m2 += s.x2;
  }
  m1 /= n;
  m2 /= n;
  double v = 0;
  for (const auto& s : shots) {
    v += (s.x1 - m1) * (s.x1 - m1) + (s.x2 - m2) * (s.x2 - m2);
  }
  return v / (n - 1);
}

}  // namespace

GainCalibration gain_calibration(std::span<const Shot> equilibrium_shots, double n_th_known,
                                 double n_add_known) {
  if (n_th_known <= 0) {
    throw std::invalid_argument("gain calibration cannot anchor on a vacuum ensemble");
  }
  require(n_add_known >= 0, "added noise must be >= 0");
  const double v = quadrature_variance_sum(equilibrium_shots);
  if (v <= 0) throw std::runtime_error("gain calibration: zero-variance ensemble");
  GainCalibration cal;
  cal.c = std::sqrt((n_th_known + n_add_known) / v);
  cal.inferred_n_add = cal.c * cal.c * v - n_th_known;
  return cal;
}

GainCalibration gain_calibration_two_point(std::span<const Shot> shots_a, double n_a,
                                           std::span<const Shot> shots_b, double n_b) {
  const double va = quadrature_variance_sum(shots_a);
  const double vb = quadrature_variance_sum(shots_b);
  if (va == vb || n_a == n_b) {
    throw std::runtime_error("gain calibration: ensembles are not distinguishable");
  }
  const double c2 = (n_a - n_b) / (va - vb);
  if (c2 <= 0) throw std::runtime_error("gain calibration: inconsistent ensembles");
  GainCalibration cal;
  cal.c = std::sqrt(c2);
  cal.inferred_n_add = c2 * va - n_a;
  return cal;
}

}  // namespace memsim::est
