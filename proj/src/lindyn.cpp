#include "memsim/lindyn.hpp"

#include <cmath>
#include <stdexcept>

#include "memsim/constants.hpp"

namespace memsim::lindyn {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Transmission numerator/denominator in angular units, shared by the value
// and the analytic phase-slope evaluation.
struct TransmissionParts {
  cd num, den, dnum, dden;  // d* are derivatives w.r.t. angular delta
};

TransmissionParts transmission_parts(const CavitySpec& cavity, const MechModeParams& mode,
                                     double g_hz, double delta_hz) {
  const double kappa = angular(cavity.kappa_hz());
  const double gamma = angular(mode.gamma_m_hz);
  const double g = angular(g_hz);
  const double eta = cavity.eta();
  const cd a = kI * angular(delta_hz) - 0.5 * gamma;
  const cd b = kI * angular(delta_hz) - 0.5 * kappa;
  TransmissionParts p;
  p.den = a * b + g * g;
  p.num = p.den + eta * kappa * a;
  p.dden = kI * (a + b);
  p.dnum = p.dden + kI * eta * kappa;
  return p;
}

}  // namespace

void CavitySpec::validate() const {
  require(freq_hz > 0, "cavity frequency must be > 0");
  require(kappa_in_hz >= 0, "kappa_in must be >= 0");
  require(kappa_ex_hz > 0, "kappa_ex must be > 0");
}

void MechModeParams::validate() const {
  require(freq_hz > 0, "mechanical frequency must be > 0");
  require(gamma_m_hz > 0, "gamma_m must be > 0");
  require(gamma_phi_hz >= 0, "gamma_phi must be >= 0");
  require(n_th >= 0, "mechanical bath occupation must be >= 0");
}

void DriveConfig::validate() const {
  require(g_hz >= 0, "coupling G must be >= 0");
  require(n_th_cavity >= 0, "cavity bath occupation must be >= 0");
  require(n_add >= 0, "added noise must be >= 0");
  require(n_th_pump >= 0, "pump phase-noise occupation must be >= 0");
}

double optical_damping_hz(double g_hz, double kappa_hz) {
  require(kappa_hz > 0, "optical damping needs kappa > 0");
  return 4.0 * g_hz * g_hz / kappa_hz;  // ratio identical in Hz and angular units
}

bool weak_coupling_ok(double g_hz, double kappa_hz) {
  return optical_damping_hz(g_hz, kappa_hz) <= 0.01 * kappa_hz;
}

Spectrum output_psd(const CavitySpec& cavity, const MechModeParams& mode,
                    const DriveConfig& drive, std::span<const double> freq_hz,
                    PsdFlags* flags) {
  cavity.validate();
  mode.validate();
  drive.validate();
  if (freq_hz.empty()) throw std::invalid_argument("output_psd: empty frequency grid");

  const double kappa = angular(cavity.kappa_hz());
  const double kappa_ex = angular(cavity.kappa_ex_hz);
  const double eta = cavity.eta();
  const double gamma_m = angular(mode.gamma_m_hz);
  const double gamma_opt = angular(optical_damping_hz(drive.g_hz, cavity.kappa_hz()));
  const double gamma_tot = gamma_m + gamma_opt;
  const double n_c = drive.n_th_cavity;
  const double mech_weight = mode.n_th - 2.0 * n_c;

  if (flags) {
    flags->sideband_dip = mech_weight < 0;
    flags->unresolved_warning = mode.freq_hz <= cavity.kappa_hz();
    flags->detuning_warning =
        std::abs(drive.detuning_hz + mode.freq_hz) > 1e-6 * mode.freq_hz;
    flags->strong_damping_warning = !weak_coupling_ok(drive.g_hz, cavity.kappa_hz());
  }

  Spectrum s;
  s.freq_hz.assign(freq_hz.begin(), freq_hz.end());
  s.value.resize(s.freq_hz.size());
  for (std::size_t i = 0; i < s.freq_hz.size(); ++i) {
    const double d = angular(s.freq_hz[i] - mode.freq_hz);
    const double cavity_term = 4.0 * kappa_ex * kappa * n_c / (kappa * kappa + 4.0 * d * d);
    const double mech_term = 4.0 * eta * gamma_opt * gamma_tot * mech_weight /
                             (gamma_tot * gamma_tot + 4.0 * d * d);
    s.value[i] = drive.n_add + cavity_term + mech_term;
  }
  return s;
}

double lorentzian_gain(double eta, double gamma_opt_hz, double n_th_m) {
  return 2.0 * eta * angular(gamma_opt_hz) * n_th_m;
}

Spectrum lorentzian_psd(const MechModeParams& mode, double gain, double n_add,
                        std::span<const double> freq_hz) {
  mode.validate();
  if (freq_hz.empty()) throw std::invalid_argument("lorentzian_psd: empty frequency grid");
  const double half = 0.5 * angular(mode.gamma_m_hz);
  Spectrum s;
  s.freq_hz.assign(freq_hz.begin(), freq_hz.end());
  s.value.resize(s.freq_hz.size());
  for (std::size_t i = 0; i < s.freq_hz.size(); ++i) {
    const double d = angular(s.freq_hz[i] - mode.freq_hz);
    s.value[i] = n_add + gain * half / (half * half + d * d);
  }
  return s;
}

std::complex<double> transmission_at(const CavitySpec& cavity, const MechModeParams& mode,
                                     double g_hz, double delta_hz) {
  const auto p = transmission_parts(cavity, mode, g_hz, delta_hz);
  return p.num / p.den;
}

ComplexSpectrum transmission(const CavitySpec& cavity, const MechModeParams& mode,
                             double g_hz, std::span<const double> delta_hz) {
  cavity.validate();
  mode.validate();
  require(g_hz >= 0, "coupling G must be >= 0");
  ComplexSpectrum s;
  s.freq_hz.assign(delta_hz.begin(), delta_hz.end());
  s.value.resize(s.freq_hz.size());
  for (std::size_t i = 0; i < s.freq_hz.size(); ++i) {
    s.value[i] = transmission_at(cavity, mode, g_hz, s.freq_hz[i]);
  }
  return s;
}

double zero_detuning_transmission(const CavitySpec& cavity, const MechModeParams& mode,
                                  double g_hz) {
  cavity.validate();
  mode.validate();
  const double kg = angular(cavity.kappa_hz()) * angular(mode.gamma_m_hz);
  const double g2 = 4.0 * angular(g_hz) * angular(g_hz);
  const double t = (g2 - (2.0 * cavity.eta() - 1.0) * kg) / (g2 + kg);
  return t * t;
}

double critical_coupling_hz(const CavitySpec& cavity, const MechModeParams& mode) {
  cavity.validate();
  mode.validate();
  const double x = (2.0 * cavity.eta() - 1.0) * cavity.kappa_hz() * mode.gamma_m_hz / 4.0;
  return x > 0 ? std::sqrt(x) : 0.0;
}

double group_delay_at_s(const CavitySpec& cavity, const MechModeParams& mode,
                        double g_hz, double delta_hz) {
  const auto p = transmission_parts(cavity, mode, g_hz, delta_hz);
  return std::imag(p.dnum / p.num) - std::imag(p.dden / p.den);
}

DelayCurve group_delay(const CavitySpec& cavity, const MechModeParams& mode, double g_hz,
                       std::span<const double> delta_hz) {
  cavity.validate();
  mode.validate();
  DelayCurve curve;
  curve.delta_hz.assign(delta_hz.begin(), delta_hz.end());
  curve.tau_s.resize(curve.delta_hz.size());
  double prev_phase = 0.0;
  for (std::size_t i = 0; i < curve.delta_hz.size(); ++i) {
    curve.tau_s[i] = group_delay_at_s(cavity, mode, g_hz, curve.delta_hz[i]);
    const double phase = std::arg(transmission_at(cavity, mode, g_hz, curve.delta_hz[i]));
    if (i > 0) {
      double step = std::abs(phase - prev_phase);
      step = std::min(step, 2.0 * std::numbers::pi - step);  // unwrap across the branch cut
      if (step > 0.25 * std::numbers::pi) curve.grid_warning = true;
    }
    prev_phase = phase;
  }
  return curve;
}

double find_g_for_delay_hz(const CavitySpec& cavity, const MechModeParams& mode,
                           double tau_target_s) {
  require(tau_target_s > 0, "delay target must be > 0");
  const double gc = critical_coupling_hz(cavity, mode);
  require(gc > 0, "delay divergence requires overcoupling (eta > 1/2)");
  double lo = gc * (1.0 + 1e-14);
  double hi = gc * 2.0;
  while (group_delay_at_s(cavity, mode, hi, 0.0) > tau_target_s) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (group_delay_at_s(cavity, mode, mid, 0.0) > tau_target_s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;  // delay >= target holds just below; hi is within rounding of the root
}

double find_g_for_transmission_hz(const CavitySpec& cavity, const MechModeParams& mode,
                                  double t0_target) {
  require(t0_target > 0 && t0_target < 1, "transmission target must lie in (0,1)");
  const double gc = critical_coupling_hz(cavity, mode);
  double lo = gc;
  double hi = std::max(gc * 2.0, mode.gamma_m_hz);
  while (zero_detuning_transmission(cavity, mode, hi) < t0_target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (zero_detuning_transmission(cavity, mode, mid) < t0_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::EmiaDeepening: return "EMIA-deepening";
    case Regime::EmiaRising: return "EMIA-rising";
    case Regime::Emit: return "EMIT";
  }
  return "?";
}

Regime classify_regime(const CavitySpec& cavity, const MechModeParams& mode, double g_hz) {
  const double gc = critical_coupling_hz(cavity, mode);
  if (g_hz < gc) return Regime::EmiaDeepening;
  const double dip = (1.0 - 2.0 * cavity.eta()) * (1.0 - 2.0 * cavity.eta());
  const double tz = zero_detuning_transmission(cavity, mode, g_hz);
  return tz > dip ? Regime::Emit : Regime::EmiaRising;
}

double cooled_occupancy(double gamma_m_hz, double gamma_opt_hz, double n_th_m, double n_th_c) {
  require(gamma_m_hz > 0, "gamma_m must be > 0");
  require(gamma_opt_hz >= 0, "gamma_opt must be >= 0");
  return (gamma_m_hz * n_th_m + gamma_opt_hz * n_th_c) / (gamma_m_hz + gamma_opt_hz);
}

double bose_einstein(double freq_hz, double temperature_k) {
  require(freq_hz > 0, "frequency must be > 0");
  if (temperature_k <= 0) throw std::invalid_argument("temperature must be > 0");
  const double x = kPlanck * freq_hz / (kBoltzmann * temperature_k);
  if (x < 1e-6) {
    return 1.0 / x - 0.5 + x / 12.0;  // stable expansion of 1/(e^x - 1)
  }
  return 1.0 / std::expm1(x);
}

Decoherence thermal_decoherence(double gamma_m_hz, double n_th_m) {
  require(gamma_m_hz > 0, "gamma_m must be > 0");
  require(n_th_m >= 0, "bath occupation must be >= 0");
  Decoherence d;
  d.gamma_th_hz = gamma_m_hz * n_th_m;
  d.t1_s = 1.0 / angular(gamma_m_hz);
  if (d.gamma_th_hz > 0) d.tau_coh_s = 1.0 / angular(d.gamma_th_hz);
  return d;
}

double PowerMap::power_ratio(double power_dbm) const {
  return std::pow(10.0, (power_dbm - anchor_power_dbm) / 10.0);
}

double PowerMap::g_hz(double power_dbm) const {
  return anchor_g_hz * std::sqrt(power_ratio(power_dbm));
}

}  // namespace memsim::lindyn
