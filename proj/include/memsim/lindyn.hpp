#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memsim::lindyn {

struct CavitySpec {
  double freq_hz = 0;
  double kappa_in_hz = 0;
  double kappa_ex_hz = 0;
  double kappa_hz() const { return kappa_in_hz + kappa_ex_hz; }
  double eta() const { return kappa_ex_hz / kappa_hz(); }
  void validate() const;
};

struct MechModeParams {
  double freq_hz = 0;
  double gamma_m_hz = 0;    // energy decay linewidth
  double gamma_phi_hz = 0;  // pure dephasing
  double n_th = 0;          // mechanical bath occupation, quanta
  void validate() const;
};

struct DriveConfig {
  double detuning_hz = 0;  // drive minus cavity frequency
  double g_hz = 0;         // drive-enhanced coupling
  double n_th_cavity = 0;  // cavity bath occupation, quanta
  double n_add = 0;        // measurement added noise, quanta
  // Pump phase noise (an occupation on the external port) is tracked here
  // for bookkeeping only; the output-spectrum model omits it.
  double n_th_pump = 0;
  void validate() const;
};

struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<double> value;  // quanta-normalized PSD
};

struct ComplexSpectrum {
  std::vector<double> freq_hz;  // probe detuning for transmission curves
  std::vector<std::complex<double>> value;
};

struct DelayCurve {
  std::vector<double> delta_hz;
  std::vector<double> tau_s;
  bool grid_warning = false;  // phase step exceeded pi/4 somewhere on the grid
};

struct PsdFlags {
  bool sideband_dip = false;       // mechanical term negative (N_m < 2 N_c)
  bool unresolved_warning = false; // f_m <= kappa
  bool detuning_warning = false;   // drive not on the lower sideband
  bool strong_damping_warning = false;  // gamma_opt > 0.01 kappa
};

double optical_damping_hz(double g_hz, double kappa_hz);  // 4 G^2 / kappa
bool weak_coupling_ok(double g_hz, double kappa_hz);      // gamma_opt <= 0.01 kappa

// Output noise PSD for a lower-sideband drive: added noise plus a cavity
// Lorentzian of width kappa and a mechanical Lorentzian of width
// gamma_tot = gamma_m + gamma_opt centered on the mode frequency.
Spectrum output_psd(const CavitySpec& cavity, const MechModeParams& mode,
                    const DriveConfig& drive, std::span<const double> freq_hz,
                    PsdFlags* flags = nullptr);

// Weak-backaction limit: flat n_add plus gain * Lorentzian(gamma_m).
Spectrum lorentzian_psd(const MechModeParams& mode, double gain, double n_add,
                        std::span<const double> freq_hz);
double lorentzian_gain(double eta, double gamma_opt_hz, double n_th_m);  // 2 eta g_opt n

// Probe transmission around the dressed cavity, delta = probe - cavity offset.
std::complex<double> transmission_at(const CavitySpec& cavity, const MechModeParams& mode,
                                     double g_hz, double delta_hz);
ComplexSpectrum transmission(const CavitySpec& cavity, const MechModeParams& mode,
                             double g_hz, std::span<const double> delta_hz);

double zero_detuning_transmission(const CavitySpec& cavity, const MechModeParams& mode,
                                  double g_hz);
double critical_coupling_hz(const CavitySpec& cavity, const MechModeParams& mode);

// Analytic d(arg t)/d(delta); positive values are delay (slow light).
double group_delay_at_s(const CavitySpec& cavity, const MechModeParams& mode,
                        double g_hz, double delta_hz);
DelayCurve group_delay(const CavitySpec& cavity, const MechModeParams& mode, double g_hz,
                       std::span<const double> delta_hz);

// Smallest G above critical coupling whose zero-detuning delay still reaches
// tau_target; the delay diverges at the critical point and falls monotonically.
double find_g_for_delay_hz(const CavitySpec& cavity, const MechModeParams& mode,
                           double tau_target_s);
// G at which the zero-detuning transmission reaches t0_target (EMIT branch).
double find_g_for_transmission_hz(const CavitySpec& cavity, const MechModeParams& mode,
                                  double t0_target);

enum class Regime { EmiaDeepening, EmiaRising, Emit };
std::string to_string(Regime r);
Regime classify_regime(const CavitySpec& cavity, const MechModeParams& mode, double g_hz);

// Steady-state occupancy under lower-sideband damping.
double cooled_occupancy(double gamma_m_hz, double gamma_opt_hz, double n_th_m, double n_th_c);

double bose_einstein(double freq_hz, double temperature_k);

struct Decoherence {
  double gamma_th_hz = 0;              // gamma_m * n_th
  std::optional<double> tau_coh_s;     // 1/(2 pi gamma_th); absent when unbounded
  double t1_s = 0;                     // 1/(2 pi gamma_m)
};
Decoherence thermal_decoherence(double gamma_m_hz, double n_th_m);

// Drive power to coupling map calibrated by one anchor point; G scales as the
// square root of the delivered power.
struct PowerMap {
  double anchor_power_dbm = 0;
  double anchor_g_hz = 0;
  double g_hz(double power_dbm) const;
  double power_ratio(double power_dbm) const;  // linear power relative to anchor
};

}  // namespace memsim::lindyn
