#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memsim/lindyn.hpp"
#include "memsim/shot.hpp"

namespace memsim::est {

struct FitResult {
  std::map<std::string, double> params;
  Eigen::MatrixXd covariance;
  double residual_rms = 0;
  bool converged = false;
  int iterations = 0;
  std::string message;
  double param(const std::string& name) const { return params.at(name); }
};

std::string to_json(const FitResult& fit);

struct LorentzianGuess {
  double center_hz = 0, fwhm_hz = 0, area = 0, offset = 0;
};

// Nonlinear least squares of offset + (area/pi)(G/2)/((G/2)^2 + (f-f0)^2).
// Params: center_hz, fwhm_hz, area, offset.
FitResult fit_lorentzian(const lindyn::Spectrum& spectrum,
                         const LorentzianGuess* guess = nullptr);

// Energy-envelope extraction for ringdown records. With a quadrature pair the
// envelope is i^2 + q^2; a lone oscillating channel falls back to picking
// local maxima of |i|.
struct Envelope {
  std::vector<double> t_s, energy;
  int masked = 0;  // nonpositive samples dropped before the log fit
};
Envelope ringdown_envelope(std::span<const double> t_s, std::span<const double> i,
                           std::span<const double> q);

// Log-domain weighted least squares of A exp(-2 pi rate_hz t) on an energy
// envelope. Params: rate_hz, amplitude.
FitResult fit_ringdown(std::span<const double> t_s, std::span<const double> energy);

// General A exp(-2 pi rate_hz x) fit with optional per-point sigmas.
FitResult fit_exponential(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma = {});

// gamma_phi = max(0, fwhm - rate) under the additive linewidth convention;
// a spectrum narrower than the ringdown by more than tol is inconsistent.
double extract_pure_dephasing_hz(double spectral_fwhm_hz, double ringdown_rate_hz,
                                 double tol_hz = 0.0);

struct CalibrationConstant {
  double value = 0;
  std::string units;
  std::string anchor;
};

struct ThermalAreaCalibration {
  CalibrationConstant constant;  // quanta per unit peak area
  double slope = 0;              // area per quantum
  double intercept = 0;
  double intercept_sigma = 0;
};
// Linear calibration of peak area against the Bose-Einstein occupation of the
// mode at each temperature. Points below floor_k are excluded.
ThermalAreaCalibration thermal_area_calibration(
    std::span<const std::pair<double, double>> temp_area, double mode_freq_hz,
    double floor_k = 0.02);

// Params: slope (Hz per kelvin), intercept (Hz).
FitResult linewidth_vs_temperature(std::span<const std::pair<double, double>> temp_linewidth);

// Through-origin fit of gamma_tot - gamma_m against power.
// Params: slope, intercept (free-fit diagnostic), intercept_sigma.
FitResult gamma_opt_vs_power(std::span<const std::pair<double, double>> power_linewidth,
                             double gamma_m_hz);

struct GainCalibration {
  double c = 0;               // multiplies raw quadratures into quanta^(1/2)
  double inferred_n_add = 0;  // added-noise quanta implied by the calibration
};
// Calibrate against an equilibrium ensemble with known occupation; the added
// noise must be supplied (single-ensemble form is otherwise underdetermined).
GainCalibration gain_calibration(std::span<const Shot> equilibrium_shots, double n_th_known,
                                 double n_add_known);
// Two-ensemble form solves for the gain and the added noise jointly.
GainCalibration gain_calibration_two_point(std::span<const Shot> shots_a, double n_a,
                                           std::span<const Shot> shots_b, double n_b);

}  // namespace memsim::est
