#pragma once

#include <cstdint>
#include <vector>

#include "apml/loss.hpp"

namespace apml {

struct BenchRow {
  Index n = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double median_ms = 0.0;
  int reps = 0;
};

/// Wall time of apml_forward on two random spheres of n points each.
/// One untimed warm-up call precedes the timed repetitions.
template <typename Scalar>
BenchRow bench_forward(Index n, int reps, std::uint64_t seed,
                       const ApmlConfig &cfg = {});

extern template BenchRow bench_forward<float>(Index, int, std::uint64_t,
                                              const ApmlConfig &);
extern template BenchRow bench_forward<double>(Index, int, std::uint64_t,
                                               const ApmlConfig &);

} // namespace apml
