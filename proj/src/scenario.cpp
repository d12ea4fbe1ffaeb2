#include "memsim/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "memsim/constants.hpp"

namespace memsim::shell {

namespace {

using nlohmann::json;

// Cursor into the document carrying its JSON pointer for error messages.
struct Node {
  const json* j;
  std::string path;

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(path, what); }

  void expect_object() const {
    if (!j->is_object()) fail("expected an object");
  }
  void expect_array() const {
    if (!j->is_array()) fail("expected an array");
  }

  bool has(const std::string& key) const { return j->is_object() && j->contains(key); }

  Node at(const std::string& key) const {
    expect_object();
    if (!j->contains(key)) throw ScenarioError(path + "/" + key, "missing required field");
    return Node{&(*j)[key], path + "/" + key};
  }

  std::optional<Node> maybe(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Node{&(*j)[key], path + "/" + key};
  }

  double number() const {
    if (!j->is_number()) fail("expected a number");
    return j->get<double>();
  }
  double number_at(const std::string& key) const { return at(key).number(); }
  double number_or(const std::string& key, double fallback) const {
    const auto n = maybe(key);
    return n ? n->number() : fallback;
  }
  long integer() const {
    if (!j->is_number_integer()) fail("expected an integer");
    return j->get<long>();
  }
  std::string str() const {
    if (!j->is_string()) fail("expected a string");
    return j->get<std::string>();
  }

  void only_keys(const std::set<std::string>& allowed) const {
    expect_object();
    for (const auto& item : j->items()) {
      if (!allowed.count(item.key())) {
        throw ScenarioError(path + "/" + item.key(), "unknown key");
      }
    }
  }

  std::size_t size() const { return j->size(); }
  Node item(std::size_t i) const {
    return Node{&(*j)[i], path + "/" + std::to_string(i)};
  }
};

// Re-tag invariant violations from the domain validators with the section path.
template <typename Fn>
void validate_section(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path, e.what());
  }
}

membrane::MembraneSpec parse_membrane(Node n) {
  n.only_keys({"side_length_m", "thickness_m", "density_kg_m3", "stress_x_pa", "stress_y_pa"});
  membrane::MembraneSpec spec;
  spec.side_length_m = n.number_at("side_length_m");
  spec.thickness_m = n.number_at("thickness_m");
  spec.density_kg_m3 = n.number_at("density_kg_m3");
  spec.stress_x_pa = n.number_at("stress_x_pa");
  spec.stress_y_pa = n.number_at("stress_y_pa");
  validate_section(n.path, [&] { spec.validate(); });
  return spec;
}

membrane::ElectrodeGeometry parse_electrode(Node n, const membrane::MembraneSpec& spec) {
  n.only_keys({"disc_radius_m", "notch_width_m", "notch_length_m", "notch_sign"});
  membrane::ElectrodeGeometry geom;
  geom.disc_radius_m = n.number_at("disc_radius_m");
  geom.notch_width_m = n.number_or("notch_width_m", 40e-6);
  geom.notch_length_m = n.number_or("notch_length_m", 100e-6);
  geom.notch_sign = static_cast<int>(n.maybe("notch_sign") ? n.at("notch_sign").integer() : -1);
  validate_section(n.path, [&] { geom.validate(spec); });
  return geom;
}

membrane::CapacitorSpec parse_capacitor(std::optional<Node> n) {
  membrane::CapacitorSpec cap;
  if (n) {
    n->only_keys({"gap_m", "participation"});
    cap.gap_m = n->number_or("gap_m", cap.gap_m);
    cap.participation = n->number_or("participation", cap.participation);
    validate_section(n->path, [&] { cap.validate(); });
  }
  return cap;
}

lindyn::CavitySpec parse_cavity(Node n) {
  n.only_keys({"freq_hz", "kappa_in_hz", "kappa_ex_hz"});
  lindyn::CavitySpec cav;
  cav.freq_hz = n.number_at("freq_hz");
  cav.kappa_in_hz = n.number_at("kappa_in_hz");
  cav.kappa_ex_hz = n.number_at("kappa_ex_hz");
  validate_section(n.path, [&] { cav.validate(); });
  return cav;
}

lindyn::MechModeParams parse_mode(Node n) {
  n.only_keys({"k", "l", "freq_hz", "gamma_m_hz", "gamma_phi_hz", "n_th"});
  lindyn::MechModeParams m;
  m.freq_hz = n.number_at("freq_hz");
  m.gamma_m_hz = n.number_at("gamma_m_hz");
  m.gamma_phi_hz = n.number_or("gamma_phi_hz", 0.0);
  m.n_th = n.number_or("n_th", 0.0);
  validate_section(n.path, [&] { m.validate(); });
  return m;
}

std::vector<lindyn::MechModeParams> derive_modes(Node n, const Scenario& sc) {
  n.only_keys({"k_max", "l_max", "gamma_m_hz", "gamma_phi_hz", "temperature_k", "n_th",
               "theta_detect"});
  membrane::CatalogOptions opt;
  opt.k_max = static_cast<int>(n.maybe("k_max") ? n.at("k_max").integer() : 8);
  opt.l_max = static_cast<int>(n.maybe("l_max") ? n.at("l_max").integer() : 8);
  opt.theta_detect = n.number_or("theta_detect", opt.theta_detect);
  const double gamma_m = n.number_at("gamma_m_hz");
  const double gamma_phi = n.number_or("gamma_phi_hz", 0.0);
  const auto temp = n.maybe("temperature_k");
  const double n_th_fixed = n.number_or("n_th", 0.0);

  std::vector<lindyn::MechModeParams> modes;
  const auto catalog = membrane::build_catalog(sc.membrane_spec, sc.electrode, sc.capacitor,
                                               sc.cavity.freq_hz, opt);
  for (const auto& rec : catalog) {
    if (!rec.detectable) continue;
    lindyn::MechModeParams m;
    m.freq_hz = rec.freq_hz;
    m.gamma_m_hz = gamma_m;
    m.gamma_phi_hz = gamma_phi;
    m.n_th = temp ? lindyn::bose_einstein(rec.freq_hz, temp->number()) : n_th_fixed;
    modes.push_back(m);
  }
  if (modes.empty()) throw ScenarioError(n.path, "no detectable modes derived");
  return modes;
}

lindyn::DriveConfig parse_drive(Node n) {
  n.only_keys({"detuning_hz", "g_hz", "n_th_cavity", "n_add", "n_th_pump"});
  lindyn::DriveConfig d;
  d.detuning_hz = n.number_at("detuning_hz");
  d.g_hz = n.number_at("g_hz");
  d.n_th_cavity = n.number_or("n_th_cavity", 0.0);
  d.n_add = n.number_or("n_add", 0.0);
  d.n_th_pump = n.number_or("n_th_pump", 0.0);
  validate_section(n.path, [&] { d.validate(); });
  return d;
}

sim::SimConfig parse_sim(Node n) {
  n.only_keys({"dt_s", "duration_s", "seed", "ensemble", "if_hz"});
  sim::SimConfig cfg;
  cfg.dt_s = n.number_at("dt_s");
  cfg.duration_s = n.number_at("duration_s");
  cfg.seed = n.maybe("seed") ? static_cast<std::uint64_t>(n.at("seed").integer()) : 1;
  cfg.ensemble = n.maybe("ensemble") ? static_cast<int>(n.at("ensemble").integer()) : 1;
  cfg.if_hz = n.number_or("if_hz", 400.0);
  validate_section(n.path, [&] { cfg.validate(); });
  return cfg;
}

sim::Segment parse_segment(Node n) {
  n.only_keys({"tone", "mode", "t_start_s", "t_stop_s", "envelope", "rate_hz", "amplitude",
               "phase_rad", "g_hz", "detuning_offset_hz"});
  sim::Segment s;
  const std::string tone = n.at("tone").str();
  if (tone == "write") {
    s.tone = sim::Tone::Write;
  } else if (tone == "read") {
    s.tone = sim::Tone::Read;
  } else if (tone == "signal") {
    s.tone = sim::Tone::Signal;
  } else if (tone == "amplify") {
    s.tone = sim::Tone::Amplify;
  } else {
    throw ScenarioError(n.path + "/tone", "expected write|read|signal|amplify");
  }
  s.mode = static_cast<int>(n.maybe("mode") ? n.at("mode").integer() : 0);
  s.t_start_s = n.number_at("t_start_s");
  s.t_stop_s = n.number_at("t_stop_s");
  if (auto env = n.maybe("envelope")) {
    const std::string e = env->str();
    if (e == "constant") {
      s.envelope = sim::EnvelopeKind::Constant;
    } else if (e == "exp") {
      s.envelope = sim::EnvelopeKind::ExpGrowth;
    } else {
      throw ScenarioError(n.path + "/envelope", "expected constant|exp");
    }
  }
  s.rate_hz = n.number_or("rate_hz", 0.0);
  s.amplitude = n.number_or("amplitude", 0.0);
  s.phase_rad = n.number_or("phase_rad", 0.0);
  s.g_hz = n.number_or("g_hz", 0.0);
  s.detuning_offset_hz = n.number_or("detuning_offset_hz", 0.0);
  if (s.t_stop_s < s.t_start_s) throw ScenarioError(n.path, "t_stop_s before t_start_s");
  return s;
}

}  // namespace

sim::SystemModel Scenario::system(std::size_t drive, std::vector<std::size_t> mode_indices) const {
  if (drive >= drives.size()) throw std::invalid_argument("drive index out of range");
  sim::SystemModel sys;
  sys.cavity = cavity;
  for (std::size_t m : mode_indices) {
    if (m >= modes.size()) throw std::invalid_argument("mode index out of range");
    sys.modes.push_back(modes[m]);
  }
  sys.n_th_cavity = drives[drive].n_th_cavity;
  sys.n_add = drives[drive].n_add;
  return sys;
}

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("/", std::string("invalid JSON: ") + e.what());
  }
  Node root{&doc, ""};
  root.expect_object();
  root.only_keys({"membrane", "electrode", "capacitor", "cavity", "modes", "drives",
                  "power_anchor", "sim", "sequences"});

  Scenario sc;
  sc.membrane_spec = parse_membrane(root.at("membrane"));
  sc.electrode = parse_electrode(root.at("electrode"), sc.membrane_spec);
  sc.capacitor = parse_capacitor(root.maybe("capacitor"));
  sc.cavity = parse_cavity(root.at("cavity"));

  Node modes = root.at("modes");
  if (modes.j->is_object()) {
    modes.only_keys({"derive_from_membrane"});
    sc.modes = derive_modes(modes.at("derive_from_membrane"), sc);
    sc.modes_derived = true;
  } else if (modes.j->is_array()) {
    if (modes.size() == 0) throw ScenarioError(modes.path, "at least one mode required");
    for (std::size_t i = 0; i < modes.size(); ++i) sc.modes.push_back(parse_mode(modes.item(i)));
  } else {
    modes.fail("expected an array of modes or a derive_from_membrane object");
  }

  Node drives = root.at("drives");
  drives.expect_array();
  if (drives.size() == 0) throw ScenarioError(drives.path, "at least one drive required");
  for (std::size_t i = 0; i < drives.size(); ++i) sc.drives.push_back(parse_drive(drives.item(i)));

  if (auto anchor = root.maybe("power_anchor")) {
    anchor->only_keys({"power_dbm", "g_hz"});
    lindyn::PowerMap pm;
    pm.anchor_power_dbm = anchor->number_at("power_dbm");
    pm.anchor_g_hz = anchor->number_at("g_hz");
    if (pm.anchor_g_hz <= 0) throw ScenarioError(anchor->path + "/g_hz", "must be > 0");
    sc.power_anchor = pm;
  }

  sc.simcfg = parse_sim(root.at("sim"));

  if (auto seqs = root.maybe("sequences")) {
    seqs->expect_object();
    for (const auto& item : seqs->j->items()) {
      Node sn{&item.value(), seqs->path + "/" + item.key()};
      sn.expect_array();
      sim::PulseSequence seq;
      for (std::size_t i = 0; i < sn.size(); ++i) {
        seq.segments.push_back(parse_segment(sn.item(i)));
      }
      sc.sequences[item.key()] = std::move(seq);
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("/", "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (ss.str().empty()) throw ScenarioError("/", "empty scenario file");
  return parse_scenario(ss.str());
}

}  // namespace memsim::shell
