#include "memsim/sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <fftw3.h>
#include <set>
#include <sstream>
#include <stdexcept>

#include "memsim/constants.hpp"
#include "memsim/errors.hpp"
#include "memsim/parallel.hpp"
#include "memsim/rng.hpp"

namespace memsim::sim {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};
constexpr int kMaxDim = 3;
using SmallMat = std::array<cd, kMaxDim * kMaxDim>;
using SmallVec = std::array<cd, kMaxDim>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// (e^z - 1)/z with a series fallback near zero.
cd phi1(cd z) {
  if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
  return (std::exp(z) - 1.0) / z;
}

// Exact discretization of dx = M x dt + u(t) dt + B dW with D = B B^dagger.
// Everything is computed in the eigenbasis of M, so stiff steps (kappa dt
// huge) stay exact: the propagator underflows toward the slow subspace and
// the noise covariance saturates at its stationary value.
class PhaseSystem {
 public:
  PhaseSystem(const Eigen::MatrixXcd& m, const Eigen::VectorXd& d) : n_(int(m.rows())) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
    lam_ = es.eigenvalues();
    v_ = es.eigenvectors();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(v_);
    if (!lu.isInvertible()) throw NumericalError("drift matrix is defective");
    vinv_ = lu.inverse();
    const double err = (v_ * lam_.asDiagonal() * vinv_ - m).norm();
    if (!(err <= 1e-9 * std::max(1.0, m.norm()))) {
      throw NumericalError("ill-conditioned drift eigenbasis");
    }
    dt_ = vinv_ * d.asDiagonal().toDenseMatrix().cast<cd>() * vinv_.adjoint();
    has_noise_ = d.size() > 0 && d.cwiseAbs().maxCoeff() > 0;
  }

  int dim() const { return n_; }
  bool has_noise() const { return has_noise_; }

  SmallMat propagator(double h) const {
    Eigen::VectorXcd e(n_);
    for (int i = 0; i < n_; ++i) e[i] = std::exp(lam_[i] * h);
    return to_small(v_ * e.asDiagonal() * vinv_);
  }

  // S with S S^dagger = integral_0^h e^{M s} D e^{M^dagger s} ds.
  SmallMat noise_transform(double h) const {
    Eigen::MatrixXcd w(n_, n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        w(i, j) = dt_(i, j) * h * phi1((lam_[i] + std::conj(lam_[j])) * h);
      }
    }
    return factor(v_ * w * v_.adjoint());
  }

  // S for the stationary covariance; requires a strictly damped drift.
  SmallMat stationary_transform() const {
    Eigen::MatrixXcd w(n_, n_);
    for (int i = 0; i < n_; ++i) {
      if (lam_[i].real() >= 0) throw NumericalError("stationary state of an undamped system");
      for (int j = 0; j < n_; ++j) {
        w(i, j) = -dt_(i, j) / (lam_[i] + std::conj(lam_[j]));
      }
    }
    return factor(v_ * w * v_.adjoint());
  }

  // Per-step increment for a drive u0 e^{nu (t - t0)}: x += response * u(t_n).
  SmallVec drive_response(cd nu, const Eigen::VectorXcd& u0, double h) const {
    Eigen::VectorXcd psi(n_);
    for (int i = 0; i < n_; ++i) {
      const cd dz = (nu - lam_[i]) * h;
      if (std::abs(dz) < 1e-6) {
        psi[i] = std::exp(lam_[i] * h) * h * phi1(dz);
      } else {
        psi[i] = (std::exp(nu * h) - std::exp(lam_[i] * h)) / (nu - lam_[i]);
      }
    }
    const Eigen::VectorXcd r = v_ * psi.asDiagonal() * (vinv_ * u0);
    SmallVec out{};
    for (int i = 0; i < n_; ++i) out[i] = r[i];
    return out;
  }

 private:
  SmallMat to_small(const Eigen::MatrixXcd& m) const {
    SmallMat out{};
    for (int r = 0; r < n_; ++r) {
      for (int c = 0; c < n_; ++c) out[r * kMaxDim + c] = m(r, c);
    }
    return out;
  }

  SmallMat factor(Eigen::MatrixXcd q) const {
    q = 0.5 * (q + q.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q);
    if (es.info() != Eigen::Success) throw NumericalError("covariance factorization failed");
    Eigen::MatrixXcd s = es.eigenvectors();
    for (int i = 0; i < n_; ++i) {
      s.col(i) *= std::sqrt(std::max(es.eigenvalues()[i], 0.0));
    }
    return to_small(s);
  }

  int n_;
  Eigen::VectorXcd lam_;
  Eigen::MatrixXcd v_, vinv_, dt_;
  bool has_noise_ = false;
};

struct DriveOp {
  SmallVec response{};
  cd growth_per_step{1.0, 0.0};
  cd u_start{1.0, 0.0};  // envelope carrier at the interval entry
};

struct StepOps {
  int n = 1;
  double h = 0;
  SmallMat prop{};
  SmallMat noise{};
  bool has_noise = false;
  std::array<double, kMaxDim> deph_std{};
  bool has_dephasing = false;
  std::vector<DriveOp> drives;
};

struct ActiveDrive {
  cd u0;      // sqrt(kappa_ex_angular) * amplitude * e^{i phase} at the segment start
  cd nu;      // amplitude growth rate (half the energy rate)
  double t0;  // segment start time
};

struct IntervalSpec {
  std::array<double, 2> g_hz{0.0, 0.0};
  std::array<double, 2> detuning_offset_hz{0.0, 0.0};
  std::vector<ActiveDrive> drives;
  double t_start = 0;
  double h = 0;
  long n_steps = 1;
};

Eigen::MatrixXcd drift_matrix(const SystemModel& sys, const IntervalSpec& iv) {
  const int n = 1 + static_cast<int>(sys.modes.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  m(0, 0) = -0.5 * angular(sys.cavity.kappa_hz());
  for (std::size_t j = 0; j < sys.modes.size(); ++j) {
    const int r = 1 + static_cast<int>(j);
    m(r, r) = -0.5 * angular(sys.modes[j].gamma_m_hz) - kI * angular(iv.detuning_offset_hz[j]);
    const cd c = -kI * angular(iv.g_hz[j]);
    m(0, r) = c;
    m(r, 0) = c;
  }
  return m;
}

Eigen::VectorXd diffusion_diag(const SystemModel& sys) {
  const int n = 1 + static_cast<int>(sys.modes.size());
  Eigen::VectorXd d(n);
  d[0] = angular(sys.cavity.kappa_hz()) * sys.n_th_cavity;
  for (std::size_t j = 0; j < sys.modes.size(); ++j) {
    d[1 + j] = angular(sys.modes[j].gamma_m_hz) * sys.modes[j].n_th;
  }
  return d;
}

StepOps build_ops(const SystemModel& sys, const IntervalSpec& iv) {
  const PhaseSystem ps(drift_matrix(sys, iv), diffusion_diag(sys));
  StepOps ops;
  ops.n = ps.dim();
  ops.h = iv.h;
  ops.prop = ps.propagator(iv.h);
  ops.has_noise = ps.has_noise();
  if (ops.has_noise) ops.noise = ps.noise_transform(iv.h);
  for (std::size_t j = 0; j < sys.modes.size(); ++j) {
    const double gphi = angular(sys.modes[j].gamma_phi_hz);
    ops.deph_std[1 + j] = gphi > 0 ? std::sqrt(gphi * iv.h) : 0.0;
    ops.has_dephasing = ops.has_dephasing || gphi > 0;
  }
  for (const auto& d : iv.drives) {
    DriveOp op;
    Eigen::VectorXcd u0 = Eigen::VectorXcd::Zero(ops.n);
    u0[0] = d.u0;
    op.response = ps.drive_response(d.nu, u0, iv.h);
    op.growth_per_step = std::exp(d.nu * iv.h);
    op.u_start = std::exp(d.nu * (iv.t_start - d.t0));
    ops.drives.push_back(op);
  }
  return ops;
}

// One step; rng == nullptr runs the deterministic part only.
inline void apply_step(const StepOps& ops, SmallVec& x, std::vector<cd>& drive_u,
                       rng::Stream* rng) {
  SmallVec y;
  for (int r = 0; r < ops.n; ++r) {
    cd acc{0.0, 0.0};
    for (int c = 0; c < ops.n; ++c) acc += ops.prop[r * kMaxDim + c] * x[c];
    y[r] = acc;
  }
  for (std::size_t d = 0; d < ops.drives.size(); ++d) {
    const cd u = drive_u[d];
    for (int r = 0; r < ops.n; ++r) y[r] += ops.drives[d].response[r] * u;
    drive_u[d] = u * ops.drives[d].growth_per_step;
  }
  if (rng) {
    if (ops.has_noise) {
      SmallVec z{};
      for (int c = 0; c < ops.n; ++c) z[c] = rng->circular_normal(1.0);
      for (int r = 0; r < ops.n; ++r) {
        cd acc{0.0, 0.0};
        for (int c = 0; c < ops.n; ++c) acc += ops.noise[r * kMaxDim + c] * z[c];
        y[r] += acc;
      }
    }
    if (ops.has_dephasing) {
      for (int r = 1; r < ops.n; ++r) {
        if (ops.deph_std[r] > 0) y[r] *= std::exp(kI * (ops.deph_std[r] * rng->normal()));
      }
    }
  }
  x = y;
}

void validate_sequence(const SystemModel& sys, const PulseSequence& seq, double duration) {
  const int n_modes = static_cast<int>(sys.modes.size());
  for (const auto& s : seq.segments) {
    require(s.t_start_s >= 0 && s.t_stop_s <= duration + 1e-12 && s.t_stop_s >= s.t_start_s,
            "segment times must lie within [0, duration]");
    require(s.mode >= 0 && s.mode < n_modes, "segment addresses a missing mechanical mode");
    require(s.g_hz >= 0, "segment coupling must be >= 0");
    require(s.amplitude >= 0, "segment amplitude must be >= 0");
  }
  for (std::size_t a = 0; a < seq.segments.size(); ++a) {
    for (std::size_t b = a + 1; b < seq.segments.size(); ++b) {
      const auto& sa = seq.segments[a];
      const auto& sb = seq.segments[b];
      if (sa.tone != sb.tone) continue;
      const bool red = sa.tone == Tone::Write || sa.tone == Tone::Read;
      if (red && sa.mode != sb.mode) continue;
      const bool disjoint =
          sa.t_stop_s <= sb.t_start_s + 1e-12 || sb.t_stop_s <= sa.t_start_s + 1e-12;
      require(disjoint, "segments of one tone overlap");
    }
  }
}

// The propagator is exact for any dt, so the step only has to resolve what is
// sampled or time-varying: the recorded IF and drive envelopes/offsets.
void check_resolution(const PulseSequence& seq, const SimConfig& cfg) {
  double limit = 1e300;
  std::string why;
  auto tighten = [&](double bound, const char* reason) {
    limit = std::min(limit, bound);
    if (cfg.dt_s > bound) {
      if (!why.empty()) why += "; ";
      why += reason;
    }
  };
  if (cfg.if_hz > 0) tighten(0.5 / angular(cfg.if_hz), "recorded IF undersampled");
  for (const auto& s : seq.segments) {
    if (s.envelope == EnvelopeKind::ExpGrowth && s.rate_hz != 0) {
      tighten(0.4 / std::abs(angular(s.rate_hz)), "drive envelope unresolved");
    }
    if (s.detuning_offset_hz != 0) {
      tighten(0.5 / std::abs(angular(s.detuning_offset_hz)), "tone offset unresolved");
    }
  }
  if (!why.empty()) {
    std::ostringstream msg;
    msg << "time step " << cfg.dt_s << " s refused (" << why << "); suggested dt <= "
        << 0.8 * limit << " s";
    throw std::invalid_argument(msg.str());
  }
}

struct Timeline {
  std::vector<std::pair<StepOps, long>> phases;
  long total_steps = 0;
  double dt = 0;
};

Timeline build_timeline(const SystemModel& sys, const PulseSequence& seq, const SimConfig& cfg) {
  sys.validate();
  cfg.validate();
  validate_sequence(sys, seq, cfg.duration_s);
  check_resolution(seq, cfg);

  const double dt = cfg.dt_s;
  const long n_total = std::lround(cfg.duration_s / dt);
  require(n_total >= 1, "duration shorter than one step");
  require(n_total <= 200'000'000L, "record too long; increase dt");

  auto snap = [&](double t) { return std::clamp<long>(std::lround(t / dt), 0, n_total); };
  std::set<long> marks{0, n_total};
  for (const auto& s : seq.segments) {
    marks.insert(snap(s.t_start_s));
    marks.insert(snap(s.t_stop_s));
  }

  Timeline tl;
  tl.dt = dt;
  tl.total_steps = n_total;
  std::vector<long> edges(marks.begin(), marks.end());
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const long i0 = edges[e], i1 = edges[e + 1];
    if (i1 == i0) continue;
    IntervalSpec iv;
    iv.t_start = i0 * dt;
    iv.h = dt;
    iv.n_steps = i1 - i0;
    for (const auto& s : seq.segments) {
      const long s0 = snap(s.t_start_s), s1 = snap(s.t_stop_s);
      if (!(s0 <= i0 && i0 < s1)) continue;
      switch (s.tone) {
        case Tone::Write:
        case Tone::Read:
          iv.g_hz[s.mode] += s.g_hz;
          iv.detuning_offset_hz[s.mode] = s.detuning_offset_hz;
          break;
        case Tone::Signal: {
          ActiveDrive d;
          d.u0 = std::sqrt(angular(sys.cavity.kappa_ex_hz)) * s.amplitude *
                 std::exp(kI * s.phase_rad);
          d.nu = s.envelope == EnvelopeKind::ExpGrowth ? cd(0.5 * angular(s.rate_hz), 0.0)
                                                       : cd(0.0, 0.0);
          d.t0 = s0 * dt;
          iv.drives.push_back(d);
          break;
        }
        case Tone::Amplify:
          break;  // modeled as chain gain plus added noise, not as dynamics
      }
    }
    StepOps ops = build_ops(sys, iv);
    // Fold the drive carrier into u_start; response already includes u0.
    tl.phases.emplace_back(std::move(ops), iv.n_steps);
  }
  return tl;
}

SmallVec sample_initial_state(const SystemModel& sys, const InitialState& init,
                              const IntervalSpec& first_iv, rng::Stream* rng) {
  SmallVec x{};
  const int n = 1 + static_cast<int>(sys.modes.size());
  switch (init.kind) {
    case InitialState::Vacuum:
      break;
    case InitialState::Thermal:
      if (rng) {
        x[0] = rng->circular_normal(sys.n_th_cavity);
        for (std::size_t j = 0; j < sys.modes.size(); ++j) {
          x[1 + j] = rng->circular_normal(sys.modes[j].n_th);
        }
      }
      break;
    case InitialState::CooledSteady:
      if (rng) {
        const PhaseSystem ps(drift_matrix(sys, first_iv), diffusion_diag(sys));
        if (ps.has_noise()) {
          const SmallMat s = ps.stationary_transform();
          SmallVec z{};
          for (int c = 0; c < n; ++c) z[c] = rng->circular_normal(1.0);
          for (int r = 0; r < n; ++r) {
            cd acc{0.0, 0.0};
            for (int c = 0; c < n; ++c) acc += s[r * kMaxDim + c] * z[c];
            x[r] = acc;
          }
        }
      }
      break;
  }
  for (std::size_t j = 0; j < init.mode_amplitudes.size() && j < sys.modes.size(); ++j) {
    x[1 + j] += init.mode_amplitudes[j];
  }
  return x;
}

IntervalSpec interval_at_start(const PulseSequence& seq, double dt) {
  IntervalSpec iv;
  iv.h = dt;
  for (const auto& s : seq.segments) {
    if ((s.tone == Tone::Write || s.tone == Tone::Read) && s.t_start_s <= 1e-12 &&
        s.t_stop_s > 1e-12) {
      iv.g_hz[s.mode] += s.g_hz;
    }
  }
  return iv;
}

}  // namespace

void SystemModel::validate() const {
  cavity.validate();
  if (modes.empty() || modes.size() > 2) {
    throw std::invalid_argument("one or two mechanical modes supported");
  }
  for (const auto& m : modes) m.validate();
  require(n_th_cavity >= 0, "cavity bath occupation must be >= 0");
  require(n_add >= 0, "added noise must be >= 0");
  require(chain_gain > 0, "chain gain must be > 0");
}

void SimConfig::validate() const {
  require(dt_s > 0, "dt must be > 0");
  require(duration_s >= dt_s, "duration must cover at least one step");
  require(ensemble >= 1, "ensemble size must be >= 1");
  require(if_hz >= 0, "IF must be >= 0");
}

SimResult simulate(const SystemModel& sys, const PulseSequence& seq, const SimConfig& cfg,
                   const InitialState& init, std::uint64_t trajectory) {
  const Timeline tl = build_timeline(sys, seq, cfg);
  rng::Stream stream = rng::substream(cfg.seed, trajectory);
  SmallVec x = sample_initial_state(sys, init, interval_at_start(seq, cfg.dt_s), &stream);

  const long n_total = tl.total_steps;
  SimResult res;
  res.output.t_s.resize(n_total + 1);
  res.output.i.resize(n_total + 1);
  res.output.q.resize(n_total + 1);
  res.mode_records.resize(sys.modes.size());
  for (auto& t : res.mode_records) {
    t.t_s.resize(n_total + 1);
    t.i.resize(n_total + 1);
    t.q.resize(n_total + 1);
  }

  const double root_kex = std::sqrt(angular(sys.cavity.kappa_ex_hz));
  const double w_if = angular(cfg.if_hz);
  auto record = [&](long idx) {
    const double t = idx * tl.dt;
    const cd z = (-root_kex * x[0]) * std::exp(-kI * (w_if * t));
    res.output.t_s[idx] = t;
    res.output.i[idx] = z.real();
    res.output.q[idx] = z.imag();
    for (std::size_t j = 0; j < sys.modes.size(); ++j) {
      res.mode_records[j].t_s[idx] = t;
      res.mode_records[j].i[idx] = x[1 + j].real();
      res.mode_records[j].q[idx] = x[1 + j].imag();
    }
  };

  record(0);
  long idx = 0;
  for (const auto& [ops, steps] : tl.phases) {
    std::vector<cd> u(ops.drives.size());
    for (std::size_t d = 0; d < ops.drives.size(); ++d) u[d] = ops.drives[d].u_start;
    for (long s = 0; s < steps; ++s) {
      apply_step(ops, x, u, &stream);
      record(++idx);
    }
  }
  return res;
}

std::pair<double, double> demodulate(const Trace& trace, double f_out_hz, double calib_c) {
  if (f_out_hz <= 0) throw std::invalid_argument("demodulation frequency must be > 0");
  require(trace.t_s.size() == trace.i.size() && !trace.t_s.empty(), "malformed trace");
  const double span = trace.t_s.back() - trace.t_s.front();
  require(span * f_out_hz >= 1.0, "record shorter than one demodulation period");
  const double w = angular(f_out_hz);
  double c = 0, s = 0;
  for (std::size_t n = 0; n < trace.t_s.size(); ++n) {
    c += trace.i[n] * std::cos(w * trace.t_s[n]);
    s += trace.i[n] * std::sin(w * trace.t_s[n]);
  }
  return {calib_c * c, calib_c * s};
}

std::pair<double, double> demodulate(const Trace& trace, double f_out_hz) {
  require(!trace.t_s.empty(), "malformed trace");
  return demodulate(trace, f_out_hz, 2.0 / static_cast<double>(trace.t_s.size()));
}

TomographyResult tomography(std::span<const Shot> shots, double n_add, double calib_c) {
  if (shots.size() < 2) throw std::invalid_argument("tomography needs at least two shots");
  require(n_add >= 0, "added noise must be >= 0");
  require(calib_c > 0, "calibration constant must be > 0");
  const double n = static_cast<double>(shots.size());
  double m1 = 0, m2 = 0;
  for (const auto& s : shots) {
    m1 += s.x1;
    m2 += s.x2;
  }
  m1 = calib_c * m1 / n;
  m2 = calib_c * m2 / n;
  double v = 0;
  for (const auto& s : shots) {
    const double d1 = calib_c * s.x1 - m1;
    const double d2 = calib_c * s.x2 - m2;
    v += d1 * d1 + d2 * d2;
  }
  v /= (n - 1.0);

  TomographyResult r;
  r.x1_mean = m1;
  r.x2_mean = m2;
  r.n_coh = m1 * m1 + m2 * m2;
  r.n_th = v - n_add;
  r.below_floor = r.n_th < 0;
  r.n_add_used = n_add;
  r.shots = static_cast<int>(shots.size());
  r.n_coh_debiased = r.n_coh - v / n;
  return r;
}

std::vector<RingdownRun> ringdown_experiment(const SystemModel& sys, double excite_amplitude,
                                             std::span<const double> powers_dbm,
                                             const lindyn::PowerMap& pmap,
                                             const SimConfig& cfg) {
  sys.validate();
  std::vector<RingdownRun> runs(powers_dbm.size());
  for (std::size_t p = 0; p < powers_dbm.size(); ++p) {
    RingdownRun run;
    run.power_dbm = powers_dbm[p];
    run.g_hz = pmap.g_hz(powers_dbm[p]);
    run.gamma_opt_hz = lindyn::optical_damping_hz(run.g_hz, sys.cavity.kappa_hz());
    PulseSequence seq;
    if (run.g_hz > 0) {
      Segment tone;
      tone.tone = Tone::Write;
      tone.mode = 0;
      tone.t_start_s = 0.0;
      tone.t_stop_s = cfg.duration_s;
      tone.g_hz = run.g_hz;
      seq.segments.push_back(tone);
    }
    InitialState init;
    init.kind = InitialState::Thermal;
    init.mode_amplitudes = {cd(excite_amplitude, 0.0)};
    SimResult res = simulate(sys, seq, cfg, init, p);
    run.mode_record = std::move(res.mode_records[0]);
    runs[p] = std::move(run);
  }
  return runs;
}

namespace {

// Precomputed plan for capture-store-retrieve shots: optional cooling lead-in,
// the write window with the growing input pulse, one exact storage step, and
// the read window with IF demodulation (LO referenced to the window start).
struct StoragePlan {
  StepOps precool, write, store, read;
  long n_precool = 0, n_window = 0;
  bool has_store = false;
  std::vector<double> lo_cos, lo_sin;
  double root_kex = 0;
  IntervalSpec cooled_iv;  // configuration defining the pre-cooled steady state
};

StoragePlan make_storage_plan(const SystemModel& sys, cd input_amp, double tau_store_s,
                              const StorageProtocol& proto, const SimConfig& cfg) {
  sys.validate();
  cfg.validate();
  if (tau_store_s < 0) throw std::invalid_argument("storage time must be >= 0");
  require(proto.write_g_hz > 0, "storage protocol needs a write coupling");
  require(proto.window_s >= 2.0 * cfg.dt_s, "write/read window shorter than two steps");
  require(cfg.if_hz > 0, "storage readout needs a positive IF");
  require(angular(cfg.if_hz) * cfg.dt_s <= 0.5, "dt too coarse for the IF");

  StoragePlan plan;
  plan.root_kex = std::sqrt(angular(sys.cavity.kappa_ex_hz));
  plan.n_window = std::lround(proto.window_s / cfg.dt_s);
  plan.n_precool = std::lround(proto.precool_s / cfg.dt_s);

  const double g_read = proto.read_g_hz > 0 ? proto.read_g_hz : proto.write_g_hz;
  const double gamma_opt = lindyn::optical_damping_hz(proto.write_g_hz, sys.cavity.kappa_hz());
  const double rate_a = angular(proto.envelope_rate_hz > 0 ? proto.envelope_rate_hz : gamma_opt);
  require(0.5 * rate_a * cfg.dt_s <= 0.2, "dt too coarse for the input envelope");

  IntervalSpec iv;
  iv.h = cfg.dt_s;
  iv.g_hz[0] = proto.write_g_hz;
  plan.cooled_iv = iv;
  plan.precool = build_ops(sys, iv);

  // Input pulse: |input_amp|^2 photons over the window, energy envelope
  // growing at rate_a.
  const double n_in = std::norm(input_amp);
  if (n_in > 0) {
    const double eps0 = std::sqrt(n_in * rate_a / std::expm1(rate_a * proto.window_s));
    ActiveDrive d;
    d.u0 = plan.root_kex * eps0 * (input_amp / std::abs(input_amp));
    d.nu = cd(0.5 * rate_a, 0.0);
    d.t0 = 0.0;
    IntervalSpec ivw = iv;
    ivw.t_start = 0.0;
    ivw.drives.push_back(d);
    plan.write = build_ops(sys, ivw);
  } else {
    plan.write = plan.precool;
  }

  if (tau_store_s > 0) {
    IntervalSpec ivs;
    ivs.h = tau_store_s;
    plan.store = build_ops(sys, ivs);
    plan.has_store = true;
  }

  IntervalSpec ivr;
  ivr.h = cfg.dt_s;
  ivr.g_hz[0] = g_read;
  plan.read = build_ops(sys, ivr);

  plan.lo_cos.resize(plan.n_window);
  plan.lo_sin.resize(plan.n_window);
  const double w_if = angular(cfg.if_hz);
  for (long j = 0; j < plan.n_window; ++j) {
    const double t = (j + 1) * cfg.dt_s;
    plan.lo_cos[j] = std::cos(w_if * t);
    plan.lo_sin[j] = std::sin(w_if * t);
  }
  return plan;
}

// Read window only: demodulated quadratures and the integrated output flux.
cd run_read_window(const StoragePlan& plan, const SimConfig& cfg, SmallVec& x,
                   rng::Stream* rng, Trace* trace, double* photons) {
  std::vector<cd> u(plan.read.drives.size(), cd(1.0, 0.0));
  double acc_c = 0, acc_s = 0;
  if (trace) {
    trace->t_s.clear();
    trace->i.clear();
    trace->q.clear();
  }
  for (long s = 0; s < plan.n_window; ++s) {
    apply_step(plan.read, x, u, rng);
    const cd aout = -plan.root_kex * x[0];
    const double i_ch = aout.real() * plan.lo_cos[s] + aout.imag() * plan.lo_sin[s];
    acc_c += i_ch * plan.lo_cos[s];
    acc_s += i_ch * plan.lo_sin[s];
    if (photons) *photons += std::norm(aout) * cfg.dt_s;
    if (trace) {
      trace->t_s.push_back((s + 1) * cfg.dt_s);
      const cd z = aout * cd(plan.lo_cos[s], -plan.lo_sin[s]);
      trace->i.push_back(z.real());
      trace->q.push_back(z.imag());
    }
  }
  const double norm = 2.0 / static_cast<double>(plan.n_window);
  return {norm * acc_c, norm * acc_s};
}

struct StorageRunOutput {
  cd z;
  double captured = 0;
  double read_photons = 0;
};

StorageRunOutput run_storage_once(const StoragePlan& plan, const SimConfig& cfg,
                                  rng::Stream* rng, SmallVec x, Trace* trace) {
  StorageRunOutput out{};
  std::vector<cd> u;

  u.assign(plan.precool.drives.size(), cd(1.0, 0.0));
  for (long s = 0; s < plan.n_precool; ++s) apply_step(plan.precool, x, u, rng);

  u.assign(plan.write.drives.size(), cd(1.0, 0.0));
  for (std::size_t d = 0; d < plan.write.drives.size(); ++d) {
    u[d] = plan.write.drives[d].u_start;
  }
  for (long s = 0; s < plan.n_window; ++s) apply_step(plan.write, x, u, rng);
  out.captured = std::norm(x[1]);

  if (plan.has_store) {
    u.assign(plan.store.drives.size(), cd(1.0, 0.0));
    apply_step(plan.store, x, u, rng);
  }

  out.z = run_read_window(plan, cfg, x, rng, trace, &out.read_photons);
  return out;
}

}  // namespace

StorageResult capture_store_retrieve(const SystemModel& sys, cd input_amplitude,
                                     double tau_store_s, const StorageProtocol& proto,
                                     const SimConfig& cfg, int n_shots) {
  require(n_shots >= 1, "at least one shot required");
  const StoragePlan plan = make_storage_plan(sys, input_amplitude, tau_store_s, proto, cfg);

  StorageResult result;
  result.input_photons = std::norm(input_amplitude);

  {
    // Raw demodulated amplitude per unit mechanical amplitude at read start.
    SmallVec x{};
    x[1] = cd(1.0, 0.0);
    result.transfer_abs = std::abs(run_read_window(plan, cfg, x, nullptr, nullptr, nullptr));
  }

  if (result.input_photons > 0) {
    SmallVec x{};
    const StorageRunOutput det = run_storage_once(plan, cfg, nullptr, x, nullptr);
    result.captured_quanta_per_photon = det.captured / result.input_photons;
    result.eta_transfer = det.read_photons / result.input_photons;
  }

  result.shots_raw.resize(n_shots);
  std::vector<Trace> first_trace(1);
  parallel_for(n_shots, [&](std::size_t shot) {
    rng::Stream stream = rng::substream(cfg.seed, shot);
    InitialState init;
    init.kind = InitialState::CooledSteady;
    SmallVec x = sample_initial_state(sys, init, plan.cooled_iv, &stream);
    Trace* trace = shot == 0 ? &first_trace[0] : nullptr;
    StorageRunOutput out = run_storage_once(plan, cfg, &stream, x, trace);
    cd z = out.z;
    if (sys.n_add > 0) z += result.transfer_abs * stream.circular_normal(sys.n_add);
    result.shots_raw[shot] = Shot{sys.chain_gain * z.real(), sys.chain_gain * z.imag()};
  });
  result.example_read_window = std::move(first_trace[0]);
  return result;
}

double swap_coupling_hz(double g1_hz, double g2_hz, double kappa_hz) {
  require(kappa_hz > 0, "swap coupling needs kappa > 0");
  return 2.0 * g1_hz * g2_hz / kappa_hz;
}

SwapResult swap_experiment(const SystemModel& sys, const SwapConfig& swap,
                           std::span<const double> durations_s, std::uint64_t seed) {
  sys.validate();
  if (sys.modes.size() != 2) throw std::invalid_argument("swap needs two mechanical modes");
  require(swap.g1_hz >= 0 && swap.g2_hz >= 0, "couplings must be >= 0");
  require(swap.shots >= 2, "swap needs >= 2 shots per duration");

  SwapResult result;
  result.j_hz = swap_coupling_hz(swap.g1_hz, swap.g2_hz, sys.cavity.kappa_hz());
  const double split = std::abs(sys.modes[0].freq_hz - sys.modes[1].freq_hz);
  const double fast =
      std::max({result.j_hz, sys.modes[0].gamma_m_hz, sys.modes[1].gamma_m_hz});
  result.resolved_warning = split < 100.0 * fast;

  // Cavity-dark state transfer: the pump pair couples the co-rotating modes
  // at J with their intrinsic damping and baths retained.
  const double j_a = angular(result.j_hz);
  Eigen::MatrixXcd m(2, 2);
  m(0, 0) = cd(-0.5 * angular(sys.modes[0].gamma_m_hz), 0.0);
  m(1, 1) = cd(-0.5 * angular(sys.modes[1].gamma_m_hz), 0.0);
  m(0, 1) = -kI * j_a;
  m(1, 0) = -kI * j_a;
  Eigen::VectorXd d(2);
  d << angular(sys.modes[0].gamma_m_hz) * sys.modes[0].n_th,
      angular(sys.modes[1].gamma_m_hz) * sys.modes[1].n_th;
  const PhaseSystem ps(m, d);

  const cd beta = std::sqrt(std::max(swap.init_coherent_quanta, 0.0));
  result.points.resize(durations_s.size());
  for (std::size_t p = 0; p < durations_s.size(); ++p) {
    const double t = durations_s[p];
    require(t >= 0, "swap durations must be >= 0");
    StepOps ops;
    ops.n = 2;
    if (t > 0) {
      ops.h = t;
      ops.prop = ps.propagator(t);
      ops.has_noise = ps.has_noise();
      if (ops.has_noise) ops.noise = ps.noise_transform(t);
    }

    std::vector<Shot> shots1(swap.shots), shots2(swap.shots);
    parallel_for(swap.shots, [&](std::size_t s) {
      rng::Stream stream = rng::substream(seed, p * static_cast<std::size_t>(swap.shots) + s);
      SmallVec x{};
      x[0] = beta;  // ground states plus the coherent seed in mode 1
      std::vector<cd> u;
      if (t > 0) apply_step(ops, x, u, &stream);
      cd z1 = x[0], z2 = x[1];
      if (sys.n_add > 0) {
        z1 += stream.circular_normal(sys.n_add);
        z2 += stream.circular_normal(sys.n_add);
      }
      shots1[s] = Shot{z1.real(), z1.imag()};
      shots2[s] = Shot{z2.real(), z2.imag()};
    });
    result.points[p].duration_s = t;
    result.points[p].mode1 = tomography(shots1, sys.n_add, 1.0);
    result.points[p].mode2 = tomography(shots2, sys.n_add, 1.0);
  }
  return result;
}

lindyn::Spectrum ensemble_output_psd(const SystemModel& sys, double g_hz,
                                     const SimConfig& cfg) {
  sys.validate();
  cfg.validate();
  if (sys.modes.size() != 1) {
    throw std::invalid_argument("ensemble PSD runs on a single-mode system");
  }
  require(g_hz > 0, "ensemble PSD needs a sideband tone");

  const long n = std::lround(cfg.duration_s / cfg.dt_s);
  require(n >= 16, "record too short for a periodogram");

  IntervalSpec iv;
  iv.h = cfg.dt_s;
  iv.g_hz[0] = g_hz;
  const StepOps ops = build_ops(sys, iv);
  const double root_kex = std::sqrt(angular(sys.cavity.kappa_ex_hz));

  fftw_complex* io = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), io, io, FFTW_FORWARD, FFTW_ESTIMATE);
  std::vector<double> acc(n, 0.0);

  for (int traj = 0; traj < cfg.ensemble; ++traj) {
    rng::Stream stream = rng::substream(cfg.seed, traj);
    InitialState init;
    init.kind = InitialState::CooledSteady;
    SmallVec x = sample_initial_state(sys, init, iv, &stream);
    std::vector<cd> u;
    for (long s = 0; s < n; ++s) {
      apply_step(ops, x, u, &stream);
      const cd aout = -root_kex * x[0];
      io[s][0] = aout.real();
      io[s][1] = aout.imag();
    }
    fftw_execute(plan);
    const double norm = cfg.dt_s / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      acc[k] += norm * (io[k][0] * io[k][0] + io[k][1] * io[k][1]);
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(io);
  for (auto& v : acc) v /= cfg.ensemble;

  lindyn::Spectrum spec;
  spec.freq_hz.resize(n);
  spec.value.resize(n);
  const double df = 1.0 / (n * cfg.dt_s);
  const long half = n / 2;
  for (long j = 0; j < n; ++j) {
    const long k = (j + n - half) % n;  // input bin for an ascending axis
    spec.freq_hz[j] = sys.modes[0].freq_hz + (j - half) * df;
    spec.value[j] = acc[k];
  }
  return spec;
}

OccupancyEstimate simulated_occupancy(const SystemModel& sys, double g_hz,
                                      const SimConfig& cfg, double burn_in_s) {
  sys.validate();
  cfg.validate();
  require(burn_in_s >= 0 && burn_in_s < cfg.duration_s, "burn-in must fit inside the run");

  IntervalSpec iv;
  iv.h = cfg.dt_s;
  iv.g_hz[0] = g_hz;
  const StepOps ops = build_ops(sys, iv);
  const long n = std::lround(cfg.duration_s / cfg.dt_s);
  const long skip = std::lround(burn_in_s / cfg.dt_s);

  std::vector<double> means(cfg.ensemble, 0.0);
  parallel_for(cfg.ensemble, [&](std::size_t traj) {
    rng::Stream stream = rng::substream(cfg.seed, traj);
    InitialState init;
    init.kind = InitialState::Thermal;
    SmallVec x = sample_initial_state(sys, init, iv, &stream);
    std::vector<cd> u;
    double acc = 0;
    long count = 0;
    for (long s = 0; s < n; ++s) {
      apply_step(ops, x, u, &stream);
      if (s >= skip) {
        acc += std::norm(x[1]);
        ++count;
      }
    }
    means[traj] = count > 0 ? acc / count : 0.0;
  });

  OccupancyEstimate est;
  for (double m : means) est.occupancy += m;
  est.occupancy /= cfg.ensemble;
  if (cfg.ensemble > 1) {
    double ss = 0;
    for (double m : means) ss += (m - est.occupancy) * (m - est.occupancy);
    est.std_error = std::sqrt(ss / (cfg.ensemble - 1) / cfg.ensemble);
  }
  return est;
}

}  // namespace memsim::sim
