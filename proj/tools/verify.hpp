#pragma once

#include <iosfwd>

namespace optimist::cli {

struct VerifyOptions {
  int instances = 10;
  double grid_step = 1e-2;
  unsigned seed = 7;
};

// Oracle suite; prints one line per check and returns the number of failures.
int run_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace optimist::cli
