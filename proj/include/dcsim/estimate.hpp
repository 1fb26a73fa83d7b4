#pragma once

namespace dcsim {

/// A point estimate with its one-standard-deviation error.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

}  // namespace dcsim
