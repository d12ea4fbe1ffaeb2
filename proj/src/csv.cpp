#include "memsim/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace memsim::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  double v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  while (ptr != last && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error("csv: bad numeric cell '" + cell + "' on line " +
                             std::to_string(line_no));
  }
  return v;
}

}  // namespace

Table read_csv(std::istream& is) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  if (table.header.empty()) throw std::runtime_error("csv: missing header");
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error("csv: column count mismatch on line " + std::to_string(line_no));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  return read_csv(f);
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    os << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
  }
}

void write_real_spectrum(std::ostream& os, const std::vector<double>& freq_hz,
                         const std::vector<double>& psd) {
  os << "freq_hz,psd_quanta\n";
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    os << format_double(freq_hz[i]) << ',' << format_double(psd[i]) << '\n';
  }
}

void write_complex_spectrum(std::ostream& os, const std::vector<double>& freq_hz,
                            const std::vector<std::complex<double>>& value) {
  os << "freq_hz,re,im\n";
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    os << format_double(freq_hz[i]) << ',' << format_double(value[i].real()) << ','
       << format_double(value[i].imag()) << '\n';
  }
}

void write_delay_curve(std::ostream& os, const std::vector<double>& delta_hz,
                       const std::vector<double>& tau_s) {
  os << "delta_hz,tau_s\n";
  for (std::size_t i = 0; i < delta_hz.size(); ++i) {
    os << format_double(delta_hz[i]) << ',' << format_double(tau_s[i]) << '\n';
  }
}

void write_trace(std::ostream& os, const std::vector<double>& t_s,
                 const std::vector<double>& i_arr, const std::vector<double>& q_arr) {
  os << "t_s,i,q\n";
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    os << format_double(t_s[i]) << ',' << format_double(i_arr[i]) << ','
       << format_double(q_arr[i]) << '\n';
  }
}

void write_shots(std::ostream& os, const std::vector<std::pair<double, double>>& shots) {
  os << "shot,x1,x2\n";
  for (std::size_t i = 0; i < shots.size(); ++i) {
    os << i << ',' << format_double(shots[i].first) << ',' << format_double(shots[i].second)
       << '\n';
  }
}

}  // namespace memsim::io
