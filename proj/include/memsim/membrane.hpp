#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

namespace memsim::membrane {

// Tensioned square membrane, possibly with unequal in-plane stresses.
struct MembraneSpec {
  double side_length_m = 0;
  double thickness_m = 0;
  double density_kg_m3 = 0;
  double stress_x_pa = 0;
  double stress_y_pa = 0;
  void validate() const;  // throws std::invalid_argument
};

// Sensing region of the mechanical capacitor: a centered metalized disc plus
// a signed rectangular notch strip running from the membrane center in +y.
// notch_sign = -1 removes the strip from the disc, +1 adds it.
struct ElectrodeGeometry {
  double disc_radius_m = 0;
  double notch_width_m = 0;
  double notch_length_m = 0;
  int notch_sign = -1;
  void validate(const MembraneSpec& spec) const;
  double sensing_area_m2() const;
};

struct ModeIndex {
  int k = 1;  // antinodes along x
  int l = 1;  // antinodes along y
  void validate() const;
};

struct CapacitorSpec {
  double gap_m = 576e-9;
  double participation = 0.05;  // fraction of cavity energy in the mechanical capacitor
  void validate() const;
};

struct ModeRecord {
  ModeIndex index;
  double freq_hz = 0;
  double effective_mass_kg = 0;
  double x_zpf_m = 0;
  double overlap = 0;
  double g0_hz = 0;
  bool detectable = false;
};

// f(k,l) = (1/2L) sqrt((sx k^2 + sy l^2)/rho); equal stresses recover the
// usual (1/2L) sqrt(s (k^2+l^2)/rho).
double mode_frequency_hz(const MembraneSpec& spec, ModeIndex idx);

// sin(k pi x / L) sin(l pi y / L); throws std::domain_error outside [0,L]^2.
double mode_shape(const MembraneSpec& spec, ModeIndex idx, double x_m, double y_m);

// Normalized combination a*Psi(k,l) + sign*b*Psi(l,k) of a degenerate pair.
class Supermode {
 public:
  Supermode(ModeIndex idx, double a, double b, int sign);  // requires a^2+b^2=1
  double operator()(const MembraneSpec& spec, double x_m, double y_m) const;
  ModeIndex index() const { return idx_; }

 private:
  ModeIndex idx_;
  double a_, b_;
  int sign_;
};

using ShapeField = std::function<double(double x_m, double y_m)>;

// Area-averaged mode amplitude over the sensing region. The disc is handled
// in polar coordinates (Gauss-Legendre radially, midpoint in angle) and the
// notch as a signed Gauss-Legendre rectangle, so the integrand stays smooth
// and the result converges spectrally in the order.
double overlap_integral(const ShapeField& shape, const ElectrodeGeometry& geom,
                        const MembraneSpec& spec, int order = 64);
double overlap_integral(ModeIndex idx, const ElectrodeGeometry& geom,
                        const MembraneSpec& spec, int order = 64);

// rho t L^2 / 4 for every max-normalized sin-product mode.
double effective_mass_kg(const MembraneSpec& spec);
// Same quantity via 2D quadrature of rho t Psi^2; agreement is a self-check.
double effective_mass_quadrature_kg(const MembraneSpec& spec, ModeIndex idx, int order = 64);

double x_zpf_m(double effective_mass_kg, double freq_hz);

// Parallel-plate estimate g0 = (f_c/2) zeta (|O|/|O_ref|) (x_zpf/d).
double estimate_g0_hz(double x_zpf, double overlap, double overlap_ref,
                      const CapacitorSpec& cap, double cavity_freq_hz);

struct CatalogOptions {
  int k_max = 8;
  int l_max = 8;
  double theta_detect = 1e-3;  // detectability threshold relative to max |overlap|
  int quad_order = 64;
  // With exactly equal stresses a (k,l)/(l,k) pair is degenerate and the
  // physical eigenbasis is the +/- superposition; rows then carry the
  // supermode overlaps ((k<l) row: +, (k>l) row: -).
  bool degenerate_supermodes = true;
};

std::vector<ModeRecord> build_catalog(const MembraneSpec& spec, const ElectrodeGeometry& geom,
                                      const CapacitorSpec& cap, double cavity_freq_hz,
                                      const CatalogOptions& opt = {});

// Header: k,l,freq_hz,overlap,g0_hz,x_zpf_m,detectable
void write_catalog_csv(std::ostream& os, const std::vector<ModeRecord>& catalog);

}  // namespace memsim::membrane
