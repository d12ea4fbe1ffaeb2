#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace memsim::io {

// Floats are serialized with 12 significant digits so emitted CSV re-ingests
// with at least 9 digits intact.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 if absent
};

// Strict reader: mandatory header, comma separation, '.' decimal point.
// Throws std::runtime_error on malformed input.
Table read_csv(std::istream& is);
Table read_csv_file(const std::string& path);

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Column layouts used across the toolkit.
void write_real_spectrum(std::ostream& os, const std::vector<double>& freq_hz,
                         const std::vector<double>& psd);                    // freq_hz,psd_quanta
void write_complex_spectrum(std::ostream& os, const std::vector<double>& freq_hz,
                            const std::vector<std::complex<double>>& value);  // freq_hz,re,im
void write_delay_curve(std::ostream& os, const std::vector<double>& delta_hz,
                       const std::vector<double>& tau_s);                     // delta_hz,tau_s
void write_trace(std::ostream& os, const std::vector<double>& t_s,
                 const std::vector<double>& i, const std::vector<double>& q);  // t_s,i,q
void write_shots(std::ostream& os, const std::vector<std::pair<double, double>>& shots);  // shot,x1,x2

}  // namespace memsim::io
