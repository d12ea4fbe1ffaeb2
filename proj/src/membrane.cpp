#include "memsim/membrane.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "memsim/constants.hpp"
#include "memsim/csv.hpp"

namespace memsim::membrane {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss_rule(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev estimate.
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.x[i] = -z;
    rule.x[order - 1 - i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[order - 1 - i] = rule.w[i];
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

// Integral of f over the centered disc of radius r, polar coordinates.
// Angular grid size is a multiple of 4 so the x<->y and parity symmetries of
// the region are exact on the grid.
double integrate_disc(const ShapeField& f, double cx, double cy, double r, int order) {
  const GaussRule& g = gauss_rule(order);
  const int m_theta = 4 * order;
  const double dtheta = 2.0 * kPi / m_theta;
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    const double rho = 0.5 * r * (g.x[i] + 1.0);
    const double wr = 0.5 * r * g.w[i] * rho;
    double ring = 0.0;
    for (int j = 0; j < m_theta; ++j) {
      const double theta = dtheta * (j + 0.5);
      ring += f(cx + rho * std::cos(theta), cy + rho * std::sin(theta));
    }
    total += wr * ring * dtheta;
  }
  return total;
}

double integrate_rect(const ShapeField& f, double x0, double x1, double y0, double y1,
                      int order) {
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const GaussRule& g = gauss_rule(order);
  const double hx = 0.5 * (x1 - x0), mx = 0.5 * (x1 + x0);
  const double hy = 0.5 * (y1 - y0), my = 0.5 * (y1 + y0);
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    const double x = mx + hx * g.x[i];
    double row = 0.0;
    for (int j = 0; j < order; ++j) {
      row += g.w[j] * f(x, my + hy * g.x[j]);
    }
    total += g.w[i] * row;
  }
  return total * hx * hy;
}

}  // namespace

void MembraneSpec::validate() const {
  require(side_length_m > 0, "membrane side_length must be > 0");
  require(thickness_m > 0, "membrane thickness must be > 0");
  require(density_kg_m3 > 0, "membrane density must be > 0");
  require(stress_x_pa > 0 && stress_y_pa > 0, "membrane stresses must be > 0");
}

void ElectrodeGeometry::validate(const MembraneSpec& spec) const {
  spec.validate();
  require(disc_radius_m > 0, "electrode disc_radius must be > 0");
  require(disc_radius_m <= 0.5 * spec.side_length_m, "electrode disc must fit inside the membrane");
  require(notch_width_m >= 0, "notch_width must be >= 0");
  require(notch_width_m <= spec.side_length_m, "notch_width must fit inside the membrane");
  require(notch_length_m >= 0 && notch_length_m <= 0.5 * spec.side_length_m,
          "notch_length must lie in [0, L/2]");
  require(notch_sign == 1 || notch_sign == -1, "notch_sign must be +1 or -1");
  require(sensing_area_m2() > 0, "sensing region area must be positive");
}

double ElectrodeGeometry::sensing_area_m2() const {
  return kPi * disc_radius_m * disc_radius_m +
         notch_sign * notch_width_m * notch_length_m;
}

void ModeIndex::validate() const {
  require(k >= 1 && l >= 1, "mode indices must be >= 1");
}

void CapacitorSpec::validate() const {
  require(gap_m > 0, "capacitor gap must be > 0");
  require(participation >= 0 && participation <= 1, "participation must lie in [0,1]");
}

double mode_frequency_hz(const MembraneSpec& spec, ModeIndex idx) {
  spec.validate();
  idx.validate();
  const double k2 = static_cast<double>(idx.k) * idx.k;
  const double l2 = static_cast<double>(idx.l) * idx.l;
  return 0.5 / spec.side_length_m *
         std::sqrt((spec.stress_x_pa * k2 + spec.stress_y_pa * l2) / spec.density_kg_m3);
}

double mode_shape(const MembraneSpec& spec, ModeIndex idx, double x_m, double y_m) {
  spec.validate();
  idx.validate();
  const double L = spec.side_length_m;
  if (x_m < 0 || x_m > L || y_m < 0 || y_m > L) {
    throw std::domain_error("mode_shape: point outside the membrane");
  }
  return std::sin(idx.k * kPi * x_m / L) * std::sin(idx.l * kPi * y_m / L);
}

Supermode::Supermode(ModeIndex idx, double a, double b, int sign)
    : idx_(idx), a_(a), b_(b), sign_(sign) {
  idx.validate();
  require(sign == 1 || sign == -1, "supermode sign must be +1 or -1");
  if (std::abs(a * a + b * b - 1.0) > 1e-12) {
    throw std::invalid_argument("supermode weights must satisfy a^2 + b^2 = 1");
  }
}

double Supermode::operator()(const MembraneSpec& spec, double x_m, double y_m) const {
  const ModeIndex swapped{idx_.l, idx_.k};
  return a_ * mode_shape(spec, idx_, x_m, y_m) +
         sign_ * b_ * mode_shape(spec, swapped, x_m, y_m);
}

double overlap_integral(const ShapeField& shape, const ElectrodeGeometry& geom,
                        const MembraneSpec& spec, int order) {
  geom.validate(spec);
  require(order >= 2, "quadrature order must be >= 2");
  const double c = 0.5 * spec.side_length_m;
  double integral = integrate_disc(shape, c, c, geom.disc_radius_m, order);
  if (geom.notch_width_m > 0 && geom.notch_length_m > 0) {
    const double w = geom.notch_width_m;
    integral += geom.notch_sign *
                integrate_rect(shape, c - 0.5 * w, c + 0.5 * w, c, c + geom.notch_length_m, order);
  }
  return integral / geom.sensing_area_m2();
}

double overlap_integral(ModeIndex idx, const ElectrodeGeometry& geom,
                        const MembraneSpec& spec, int order) {
  idx.validate();
  return overlap_integral(
      [&](double x, double y) { return mode_shape(spec, idx, x, y); }, geom, spec, order);
}

double effective_mass_kg(const MembraneSpec& spec) {
  spec.validate();
  const double L = spec.side_length_m;
  return 0.25 * spec.density_kg_m3 * spec.thickness_m * L * L;
}

double effective_mass_quadrature_kg(const MembraneSpec& spec, ModeIndex idx, int order) {
  spec.validate();
  idx.validate();
  const double L = spec.side_length_m;
  const double integral = integrate_rect(
      [&](double x, double y) {
        const double p = mode_shape(spec, idx, x, y);
        return p * p;
      },
      0.0, L, 0.0, L, order);
  return spec.density_kg_m3 * spec.thickness_m * integral;
}

double x_zpf_m(double effective_mass, double freq_hz) {
  require(effective_mass > 0 && freq_hz > 0, "x_zpf needs positive mass and frequency");
  return std::sqrt(kHbar / (2.0 * effective_mass * angular(freq_hz)));
}

double estimate_g0_hz(double x_zpf, double overlap, double overlap_ref,
                      const CapacitorSpec& cap, double cavity_freq_hz) {
  cap.validate();
  require(cavity_freq_hz > 0, "cavity frequency must be > 0");
  require(overlap_ref != 0, "reference overlap must be nonzero");
  return 0.5 * cavity_freq_hz * cap.participation *
         (std::abs(overlap) / std::abs(overlap_ref)) * (x_zpf / cap.gap_m);
}

std::vector<ModeRecord> build_catalog(const MembraneSpec& spec, const ElectrodeGeometry& geom,
                                      const CapacitorSpec& cap, double cavity_freq_hz,
                                      const CatalogOptions& opt) {
  require(opt.k_max >= 1 && opt.l_max >= 1, "catalog bounds must be >= 1");
  geom.validate(spec);
  cap.validate();

  const bool degenerate = opt.degenerate_supermodes && spec.stress_x_pa == spec.stress_y_pa;
  const double m_eff = effective_mass_kg(spec);

  std::vector<ModeRecord> catalog;
  catalog.reserve(static_cast<std::size_t>(opt.k_max) * opt.l_max);
  for (int k = 1; k <= opt.k_max; ++k) {
    for (int l = 1; l <= opt.l_max; ++l) {
      const ModeIndex idx{k, l};
      ModeRecord rec;
      rec.index = idx;
      rec.freq_hz = mode_frequency_hz(spec, idx);
      rec.effective_mass_kg = m_eff;
      rec.x_zpf_m = x_zpf_m(m_eff, rec.freq_hz);
      if (degenerate && k != l) {
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        const Supermode super(ModeIndex{std::min(k, l), std::max(k, l)}, inv_sqrt2, inv_sqrt2,
                              k < l ? 1 : -1);
        rec.overlap = overlap_integral(
            [&](double x, double y) { return super(spec, x, y); }, geom, spec, opt.quad_order);
      } else {
        rec.overlap = overlap_integral(idx, geom, spec, opt.quad_order);
      }
      catalog.push_back(rec);
    }
  }

  double max_abs = 0.0;
  for (const auto& rec : catalog) max_abs = std::max(max_abs, std::abs(rec.overlap));
  double overlap_ref = max_abs;
  for (const auto& rec : catalog) {
    if (rec.index.k == 1 && rec.index.l == 1) overlap_ref = std::abs(rec.overlap);
  }

  for (auto& rec : catalog) {
    rec.detectable = max_abs > 0 && std::abs(rec.overlap) >= opt.theta_detect * max_abs;
    rec.g0_hz = overlap_ref > 0
                    ? estimate_g0_hz(rec.x_zpf_m, rec.overlap, overlap_ref, cap, cavity_freq_hz)
                    : 0.0;
  }

  std::sort(catalog.begin(), catalog.end(), [](const ModeRecord& a, const ModeRecord& b) {
    if (a.freq_hz != b.freq_hz) return a.freq_hz < b.freq_hz;
    if (a.index.k != b.index.k) return a.index.k < b.index.k;
    return a.index.l < b.index.l;
  });
  return catalog;
}

void write_catalog_csv(std::ostream& os, const std::vector<ModeRecord>& catalog) {
  os << "k,l,freq_hz,overlap,g0_hz,x_zpf_m,detectable\n";
  for (const auto& rec : catalog) {
    os << rec.index.k << ',' << rec.index.l << ',' << io::format_double(rec.freq_hz) << ','
       << io::format_double(rec.overlap) << ',' << io::format_double(rec.g0_hz) << ','
       << io::format_double(rec.x_zpf_m) << ',' << (rec.detectable ? 1 : 0) << '\n';
  }
}

}  // namespace memsim::membrane
