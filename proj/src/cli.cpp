#include "memsim/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>

#include "memsim/constants.hpp"
#include "memsim/csv.hpp"
#include "memsim/errors.hpp"
#include "memsim/estimators.hpp"
#include "memsim/lindyn.hpp"
#include "memsim/membrane.hpp"
#include "memsim/scenario.hpp"
#include "memsim/sim.hpp"

namespace memsim::shell {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

// Data goes to -o (or stdout); progress goes to stderr so output is pipeable.
struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::invalid_argument("cannot open output file " + path);
      os = &file;
    }
  }
  std::ostream& get() { return *os; }
};

std::vector<double> linspace(double center, double span, int points) {
  if (points < 2) throw std::invalid_argument("need at least 2 grid points");
  std::vector<double> g(points);
  const double step = span / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = center - 0.5 * span + i * step;
  return g;
}

struct CommonOpts {
  std::string scenario_path;
  std::string out_path;
  long seed = -1;
};

Scenario load(const CommonOpts& c) {
  if (c.scenario_path.empty()) throw std::invalid_argument("a scenario file (-c) is required");
  return load_scenario(c.scenario_path);
}

double default_g(const Scenario& sc) {
  if (sc.power_anchor) return sc.power_anchor->anchor_g_hz;
  return sc.drives.front().g_hz;
}

void cmd_modes(const Scenario& sc, const CommonOpts& common, int k_max, int l_max,
               double theta) {
  membrane::CatalogOptions opt;
  opt.k_max = k_max;
  opt.l_max = l_max;
  opt.theta_detect = theta;
  const auto catalog = membrane::build_catalog(sc.membrane_spec, sc.electrode, sc.capacitor,
                                               sc.cavity.freq_hz, opt);
  OutStream out(common.out_path);
  membrane::write_catalog_csv(out.get(), catalog);
  std::cerr << "modes: " << catalog.size() << " modes, "
            << std::count_if(catalog.begin(), catalog.end(),
                             [](const auto& r) { return r.detectable; })
            << " detectable\n";
}

void cmd_psd(const Scenario& sc, const CommonOpts& common, std::size_t mode_idx,
             std::size_t drive_idx, double g_override, double span, int points,
             bool simulate, int trajectories, double duration_override) {
  if (mode_idx >= sc.modes.size()) throw std::invalid_argument("mode index out of range");
  if (drive_idx >= sc.drives.size()) throw std::invalid_argument("drive index out of range");
  const auto& mode = sc.modes[mode_idx];
  lindyn::DriveConfig drive = sc.drives[drive_idx];
  if (g_override >= 0) drive.g_hz = g_override;

  OutStream out(common.out_path);
  if (simulate) {
    sim::SystemModel sys = sc.system(drive_idx, {mode_idx});
    sim::SimConfig cfg = sc.simcfg;
    if (common.seed >= 0) cfg.seed = static_cast<std::uint64_t>(common.seed);
    if (trajectories > 0) cfg.ensemble = trajectories;
    if (duration_override > 0) cfg.duration_s = duration_override;
    const auto spec = sim::ensemble_output_psd(sys, drive.g_hz, cfg);
    io::write_real_spectrum(out.get(), spec.freq_hz, spec.value);
    std::cerr << "psd: ensemble periodogram over " << cfg.ensemble << " trajectories\n";
    return;
  }
  const auto grid = linspace(mode.freq_hz, span, points);
  lindyn::PsdFlags flags;
  const auto spec = lindyn::output_psd(sc.cavity, mode, drive, grid, &flags);
  io::write_real_spectrum(out.get(), spec.freq_hz, spec.value);
  if (flags.sideband_dip) std::cerr << "psd: N_m < 2 N_c (sideband dip regime)\n";
  if (flags.unresolved_warning) std::cerr << "psd: warning, sidebands not resolved\n";
  if (flags.detuning_warning) std::cerr << "psd: warning, drive off the lower sideband\n";
}

void cmd_transmission(const Scenario& sc, const CommonOpts& common, std::size_t mode_idx,
                      double g_hz, double span, int points) {
  if (mode_idx >= sc.modes.size()) throw std::invalid_argument("mode index out of range");
  const auto& mode = sc.modes[mode_idx];
  const double g = g_hz >= 0 ? g_hz : default_g(sc);
  const double width = span > 0 ? span : 6.0 * sc.cavity.kappa_hz();
  const auto grid = linspace(0.0, width, points);
  const auto t = lindyn::transmission(sc.cavity, mode, g, grid);
  OutStream out(common.out_path);
  io::write_complex_spectrum(out.get(), t.freq_hz, t.value);
  std::cerr << "transmission: G = " << g << " Hz, Tz = "
            << lindyn::zero_detuning_transmission(sc.cavity, mode, g) << ", regime "
            << lindyn::to_string(lindyn::classify_regime(sc.cavity, mode, g)) << "\n";
}

void cmd_delay(const Scenario& sc, const CommonOpts& common, std::size_t mode_idx, double g_hz,
               double span, int points, double target_tau) {
  if (mode_idx >= sc.modes.size()) throw std::invalid_argument("mode index out of range");
  const auto& mode = sc.modes[mode_idx];
  double g = g_hz >= 0 ? g_hz : default_g(sc);
  if (target_tau > 0) {
    g = lindyn::find_g_for_delay_hz(sc.cavity, mode, target_tau);
    std::cerr << "delay: G with tau(0) >= " << target_tau << " s: " << g << " Hz\n";
  }
  const auto grid = linspace(0.0, span, points);
  const auto curve = lindyn::group_delay(sc.cavity, mode, g, grid);
  OutStream out(common.out_path);
  io::write_delay_curve(out.get(), curve.delta_hz, curve.tau_s);
  std::cerr << "delay: Gc = " << lindyn::critical_coupling_hz(sc.cavity, mode)
            << " Hz, tau(0) = " << lindyn::group_delay_at_s(sc.cavity, mode, g, 0.0) << " s";
  if (curve.grid_warning) std::cerr << " (warning: grid too coarse for the phase slope)";
  std::cerr << "\n";
}

void cmd_cool(const Scenario& sc, const CommonOpts& common, std::size_t mode_idx,
              std::size_t drive_idx, double g_max, int points, bool simulate, double g_sim) {
  if (mode_idx >= sc.modes.size()) throw std::invalid_argument("mode index out of range");
  if (drive_idx >= sc.drives.size()) throw std::invalid_argument("drive index out of range");
  const auto& mode = sc.modes[mode_idx];
  const auto& drive = sc.drives[drive_idx];
  OutStream out(common.out_path);
  if (simulate) {
    sim::SystemModel sys = sc.system(drive_idx, {mode_idx});
    sim::SimConfig cfg = sc.simcfg;
    if (common.seed >= 0) cfg.seed = static_cast<std::uint64_t>(common.seed);
    const double g = g_sim > 0 ? g_sim : drive.g_hz;
    const double gopt = lindyn::optical_damping_hz(g, sc.cavity.kappa_hz());
    const double model =
        lindyn::cooled_occupancy(mode.gamma_m_hz, gopt, mode.n_th, drive.n_th_cavity);
    const double settle = 5.0 / angular(mode.gamma_m_hz + gopt);
    const auto est = sim::simulated_occupancy(sys, g, cfg, std::min(settle, 0.25 * cfg.duration_s));
    out.get() << "{\n  \"g_hz\": " << io::format_double(g) << ",\n  \"gamma_opt_hz\": "
              << io::format_double(gopt) << ",\n  \"n_m_model\": " << io::format_double(model)
              << ",\n  \"n_m_simulated\": " << io::format_double(est.occupancy)
              << ",\n  \"std_error\": " << io::format_double(est.std_error) << "\n}\n";
    return;
  }
  const double top = g_max > 0 ? g_max : 2.0 * default_g(sc);
  out.get() << "g_hz,gamma_opt_hz,n_m\n";
  for (int i = 0; i < points; ++i) {
    const double g = top * i / (points - 1);
    const double gopt = lindyn::optical_damping_hz(g, sc.cavity.kappa_hz());
    const double nm =
        lindyn::cooled_occupancy(mode.gamma_m_hz, gopt, mode.n_th, drive.n_th_cavity);
    out.get() << io::format_double(g) << ',' << io::format_double(gopt) << ','
              << io::format_double(nm) << '\n';
  }
}

void cmd_ringdown(const Scenario& sc, const CommonOpts& common, std::size_t mode_idx,
                  std::vector<double> powers, double excite, const std::string& trace_prefix) {
  if (mode_idx >= sc.modes.size()) throw std::invalid_argument("mode index out of range");
  if (!sc.power_anchor) throw std::invalid_argument("ringdown needs a power_anchor");
  if (powers.empty()) powers = {-9.0, -6.0, -3.0, 0.0};
  sim::SystemModel sys = sc.system(0, {mode_idx});
  sim::SimConfig cfg = sc.simcfg;
  if (common.seed >= 0) cfg.seed = static_cast<std::uint64_t>(common.seed);

  const auto runs = sim::ringdown_experiment(sys, excite, powers, *sc.power_anchor, cfg);
  OutStream out(common.out_path);
  out.get() << "power_dbm,g_hz,gamma_opt_model_hz,gamma_tot_fit_hz\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    const auto env = est::ringdown_envelope(run.mode_record.t_s, run.mode_record.i,
                                            run.mode_record.q);
    const auto fit = est::fit_ringdown(env.t_s, env.energy);
    out.get() << io::format_double(run.power_dbm) << ',' << io::format_double(run.g_hz) << ','
              << io::format_double(run.gamma_opt_hz) << ','
              << io::format_double(fit.param("rate_hz")) << '\n';
    if (!trace_prefix.empty()) {
      std::ofstream tf(trace_prefix + std::to_string(i) + ".csv");
      io::write_trace(tf, run.mode_record.t_s, run.mode_record.i, run.mode_record.q);
    }
  }
}

void cmd_protocol(const Scenario& sc, const CommonOpts& common, const std::string& sequence,
                  double tau_s, int shots, double input_quanta, double phase_rad,
                  double g_hz, double window_s) {
  sim::SystemModel sys = sc.system(0, {0});
  sim::SimConfig cfg = sc.simcfg;
  if (common.seed >= 0) cfg.seed = static_cast<std::uint64_t>(common.seed);

  sim::StorageProtocol proto;
  proto.write_g_hz = g_hz > 0 ? g_hz : default_g(sc);
  proto.window_s = window_s;
  if (!sequence.empty()) {
    const auto it = sc.sequences.find(sequence);
    if (it == sc.sequences.end()) {
      throw std::invalid_argument("unknown sequence '" + sequence + "'");
    }
    for (const auto& seg : it->second.segments) {
      if (seg.tone == sim::Tone::Write && seg.g_hz > 0) {
        proto.write_g_hz = seg.g_hz;
        proto.window_s = seg.t_stop_s - seg.t_start_s;
        break;
      }
    }
  }
  const std::complex<double> input =
      std::sqrt(std::max(input_quanta, 0.0)) * std::exp(std::complex<double>(0, phase_rad));
  const auto res = sim::capture_store_retrieve(sys, input, tau_s, proto, cfg, shots);
  OutStream out(common.out_path);
  std::vector<std::pair<double, double>> rows;
  rows.reserve(res.shots_raw.size());
  for (const auto& s : res.shots_raw) rows.emplace_back(s.x1, s.x2);
  io::write_shots(out.get(), rows);
  std::cerr << "protocol: input " << res.input_photons << " photons, captured/photon "
            << res.captured_quanta_per_photon << ", eta_transfer " << res.eta_transfer << "\n";
}

void cmd_tomography(const Scenario& sc, const CommonOpts& common, const std::string& input,
                    double n_th, double n_add_opt, const std::string& ref_path, double n_ref) {
  const auto table = io::read_csv_file(input);
  const int cx1 = table.column("x1"), cx2 = table.column("x2");
  if (cx1 < 0 || cx2 < 0) throw std::invalid_argument("shots CSV needs x1,x2 columns");
  std::vector<Shot> shots;
  shots.reserve(table.rows.size());
  for (const auto& r : table.rows) shots.push_back({r[cx1], r[cx2]});

  est::GainCalibration cal;
  if (!ref_path.empty()) {
    const auto ref = io::read_csv_file(ref_path);
    const int rx1 = ref.column("x1"), rx2 = ref.column("x2");
    if (rx1 < 0 || rx2 < 0) throw std::invalid_argument("reference CSV needs x1,x2 columns");
    std::vector<Shot> ref_shots;
    for (const auto& r : ref.rows) ref_shots.push_back({r[rx1], r[rx2]});
    cal = est::gain_calibration_two_point(shots, n_th, ref_shots, n_ref);
  } else {
    const double n_add = n_add_opt >= 0 ? n_add_opt : sc.drives.front().n_add;
    cal = est::gain_calibration(shots, n_th, n_add);
  }
  const auto tomo = sim::tomography(shots, cal.inferred_n_add, cal.c);
  OutStream out(common.out_path);
  out.get() << "{\n  \"calibration_c\": " << io::format_double(cal.c)
            << ",\n  \"x1_mean\": " << io::format_double(tomo.x1_mean)
            << ",\n  \"x2_mean\": " << io::format_double(tomo.x2_mean)
            << ",\n  \"n_coh\": " << io::format_double(tomo.n_coh)
            << ",\n  \"n_th\": " << io::format_double(tomo.n_th)
            << ",\n  \"n_add_used\": " << io::format_double(tomo.n_add_used)
            << ",\n  \"shots\": " << tomo.shots
            << ",\n  \"below_floor\": " << (tomo.below_floor ? "true" : "false") << "\n}\n";
}

void cmd_swap(const Scenario& sc, const CommonOpts& common, double g1, double g2,
              double coh_quanta, int shots, int points, double tmax) {
  if (sc.modes.size() < 2) throw std::invalid_argument("swap needs two modes in the scenario");
  sim::SystemModel sys = sc.system(0, {0, 1});
  sim::SwapConfig swap;
  swap.g1_hz = g1 > 0 ? g1 : default_g(sc);
  swap.g2_hz = g2 > 0 ? g2 : swap.g1_hz;
  swap.init_coherent_quanta = coh_quanta;
  swap.shots = shots;
  const double j = sim::swap_coupling_hz(swap.g1_hz, swap.g2_hz, sc.cavity.kappa_hz());
  const double top = tmax > 0 ? tmax : 1.2 * std::numbers::pi / angular(j);
  std::vector<double> durations(points);
  for (int i = 0; i < points; ++i) durations[i] = top * i / (points - 1);
  const std::uint64_t seed =
      common.seed >= 0 ? static_cast<std::uint64_t>(common.seed) : sc.simcfg.seed;
  const auto res = sim::swap_experiment(sys, swap, durations, seed);
  OutStream out(common.out_path);
  out.get() << "duration_s,ncoh1,nth1,ncoh2,nth2\n";
  for (const auto& p : res.points) {
    out.get() << io::format_double(p.duration_s) << ',' << io::format_double(p.mode1.n_coh)
              << ',' << io::format_double(p.mode1.n_th) << ','
              << io::format_double(p.mode2.n_coh) << ',' << io::format_double(p.mode2.n_th)
              << '\n';
  }
  std::cerr << "swap: J = " << res.j_hz << " Hz, full transfer near "
            << 0.25 / res.j_hz << " s";
  if (res.resolved_warning) std::cerr << " (warning: modes not well separated)";
  std::cerr << "\n";
}

void cmd_fit(const CommonOpts& common, const std::string& kind, const std::string& input) {
  const auto table = io::read_csv_file(input);
  OutStream out(common.out_path);
  if (kind == "lorentzian") {
    int cf = table.column("freq_hz");
    int cp = table.column("psd_quanta");
    if (cp < 0) cp = table.column("psd");
    if (cf < 0 || cp < 0) throw std::invalid_argument("expected freq_hz,psd columns");
    lindyn::Spectrum spec;
    for (const auto& r : table.rows) {
      spec.freq_hz.push_back(r[cf]);
      spec.value.push_back(r[cp]);
    }
    out.get() << est::to_json(est::fit_lorentzian(spec));
  } else if (kind == "ringdown") {
    const int ct = table.column("t_s"), ci = table.column("i"), cq = table.column("q");
    if (ct < 0 || ci < 0) throw std::invalid_argument("expected t_s,i[,q] columns");
    std::vector<double> t, i_arr, q_arr;
    for (const auto& r : table.rows) {
      t.push_back(r[ct]);
      i_arr.push_back(r[ci]);
      if (cq >= 0) q_arr.push_back(r[cq]);
    }
    const auto env = est::ringdown_envelope(t, i_arr, q_arr);
    out.get() << est::to_json(est::fit_ringdown(env.t_s, env.energy));
  } else if (kind == "exponential") {
    if (table.header.size() < 2) throw std::invalid_argument("expected two columns");
    std::vector<double> x, y;
    for (const auto& r : table.rows) {
      x.push_back(r[0]);
      y.push_back(r[1]);
    }
    out.get() << est::to_json(est::fit_exponential(x, y));
  } else {
    throw std::invalid_argument("unknown fit kind '" + kind + "'");
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"memsim: membrane cavity electromechanics simulation and estimation"};
  app.require_subcommand(1);

  CommonOpts common;
  struct {
    int k_max = 8, l_max = 8;
    double theta = 1e-3;
    std::size_t mode_idx = 0, drive_idx = 0;
    double g_hz = -1, g2_hz = -1, span_hz = 1.0, target_tau = 0;
    int points = 2001, trajectories = 0, shots = 100;
    bool simulate = false;
    double duration = 0, g_max = 0, excite = 1e4, tau_s = 0;
    double input_quanta = 4.2, phase_rad = 0, window_s = 0.06;
    double n_th = 0, n_add = -1, n_ref = 0, coh = 4.2, tmax = 0;
    std::string sequence, input, ref, trace_prefix, kind = "lorentzian";
  } o;

  auto add_common = [&](CLI::App* cmd, bool need_scenario = true) {
    auto* c = cmd->add_option("-c,--scenario", common.scenario_path, "scenario JSON file");
    if (need_scenario) c->required();
    cmd->add_option("-o,--out", common.out_path, "output file (default: stdout)");
    cmd->add_option("--seed", common.seed, "seed override");
  };

  auto* modes = app.add_subcommand("modes", "mechanical mode catalog CSV");
  add_common(modes);
  modes->add_option("--k-max", o.k_max);
  modes->add_option("--l-max", o.l_max);
  modes->add_option("--theta", o.theta, "detectability threshold");

  auto* psd = app.add_subcommand("psd", "output noise spectrum CSV");
  add_common(psd);
  psd->add_option("--mode-index", o.mode_idx);
  psd->add_option("--drive-index", o.drive_idx);
  psd->add_option("--g-hz", o.g_hz);
  psd->add_option("--span-hz", o.span_hz);
  psd->add_option("--points", o.points);
  psd->add_flag("--simulate", o.simulate, "ensemble periodogram instead of the model curve");
  psd->add_option("--trajectories", o.trajectories);
  psd->add_option("--duration-s", o.duration);

  auto* trans = app.add_subcommand("transmission", "probe transmission CSV");
  add_common(trans);
  trans->add_option("--mode-index", o.mode_idx);
  trans->add_option("--g-hz", o.g_hz);
  trans->add_option("--span-hz", o.span_hz)->default_val(0.0);
  trans->add_option("--points", o.points);

  auto* delay = app.add_subcommand("delay", "group delay curve CSV");
  add_common(delay);
  delay->add_option("--mode-index", o.mode_idx);
  delay->add_option("--g-hz", o.g_hz);
  delay->add_option("--span-hz", o.span_hz)->default_val(0.2);
  delay->add_option("--points", o.points)->default_val(4001);
  delay->add_option("--target-tau-s", o.target_tau, "pick G reaching this zero-detuning delay");

  auto* cool = app.add_subcommand("cool", "sideband cooling occupancy");
  add_common(cool);
  cool->add_option("--mode-index", o.mode_idx);
  cool->add_option("--drive-index", o.drive_idx);
  cool->add_option("--g-max-hz", o.g_max);
  cool->add_option("--points", o.points)->default_val(101);
  cool->add_flag("--simulate", o.simulate, "compare the model against an ensemble run");
  cool->add_option("--g-hz", o.g_hz);

  auto* ring = app.add_subcommand("ringdown", "ringdown vs drive power");
  add_common(ring);
  ring->add_option("--mode-index", o.mode_idx);
  std::vector<double> powers;
  ring->add_option("--power-dbm", powers, "drive powers (repeatable)");
  ring->add_option("--excite", o.excite, "initial coherent amplitude");
  ring->add_option("--traces-prefix", o.trace_prefix, "write per-power traces");

  auto* proto = app.add_subcommand("protocol", "pulsed capture-store-retrieve shots CSV");
  add_common(proto);
  proto->add_option("--sequence", o.sequence, "named sequence from the scenario");
  proto->add_option("--tau-s", o.tau_s, "storage time")->required();
  proto->add_option("--shots", o.shots);
  proto->add_option("--input-quanta", o.input_quanta);
  proto->add_option("--phase-rad", o.phase_rad);
  proto->add_option("--g-hz", o.g_hz);
  proto->add_option("--window-s", o.window_s);

  auto* tomo = app.add_subcommand("tomography", "calibrate and decompose shots");
  add_common(tomo);
  tomo->add_option("-i,--input", o.input, "shots CSV")->required();
  tomo->add_option("--nth", o.n_th, "known equilibrium occupation")->required();
  tomo->add_option("--nadd", o.n_add, "added noise (default from the scenario drive)");
  tomo->add_option("--ref", o.ref, "reference ensemble CSV for two-point calibration");
  tomo->add_option("--nref", o.n_ref, "reference ensemble occupation");

  auto* swap = app.add_subcommand("swap", "two-mode state swap sweep CSV");
  add_common(swap);
  swap->add_option("--g1-hz", o.g_hz);
  swap->add_option("--g2-hz", o.g2_hz);
  swap->add_option("--coh-quanta", o.coh);
  swap->add_option("--shots", o.shots)->default_val(1000);
  swap->add_option("--points", o.points)->default_val(41);
  swap->add_option("--tmax-s", o.tmax);

  auto* fit = app.add_subcommand("fit", "fit a CSV data set, JSON result");
  add_common(fit, false);
  fit->add_option("--kind", o.kind, "lorentzian|ringdown|exponential");
  fit->add_option("-i,--input", o.input, "input CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return kExitUsage;
  }

  try {
    if (modes->parsed()) {
      cmd_modes(load(common), common, o.k_max, o.l_max, o.theta);
    } else if (psd->parsed()) {
      cmd_psd(load(common), common, o.mode_idx, o.drive_idx, o.g_hz, o.span_hz, o.points,
              o.simulate, o.trajectories, o.duration);
    } else if (trans->parsed()) {
      cmd_transmission(load(common), common, o.mode_idx, o.g_hz, o.span_hz, o.points);
    } else if (delay->parsed()) {
      cmd_delay(load(common), common, o.mode_idx, o.g_hz, o.span_hz, o.points, o.target_tau);
    } else if (cool->parsed()) {
      cmd_cool(load(common), common, o.mode_idx, o.drive_idx, o.g_max, o.points, o.simulate,
               o.g_hz);
    } else if (ring->parsed()) {
      cmd_ringdown(load(common), common, o.mode_idx, powers, o.excite, o.trace_prefix);
    } else if (proto->parsed()) {
      cmd_protocol(load(common), common, o.sequence, o.tau_s, o.shots, o.input_quanta,
                   o.phase_rad, o.g_hz, o.window_s);
    } else if (tomo->parsed()) {
      cmd_tomography(load(common), common, o.input, o.n_th, o.n_add, o.ref, o.n_ref);
    } else if (swap->parsed()) {
      cmd_swap(load(common), common, o.g_hz, o.g2_hz, o.coh, o.shots, o.points, o.tmax);
    } else if (fit->parsed()) {
      cmd_fit(common, o.kind, o.input);
    }
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace memsim::shell
