#pragma once

namespace memsim {

// One demodulated quadrature measurement.
struct Shot {
  double x1 = 0;
  double x2 = 0;
};

}  // namespace memsim
