#include "apml/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "apml/shapes.hpp"

namespace apml {

template <typename Scalar>
BenchRow bench_forward(Index n, int reps, std::uint64_t seed,
                       const ApmlConfig &cfg) {
  if (reps < 1)
    throw InvalidArgument("bench needs reps >= 1");
  const auto pred = generate_shape(Shape::Sphere, n, seed).cast<Scalar>();
  const auto truth =
      generate_shape(Shape::Sphere, n, seed + 1).cast<Scalar>();

  volatile double sink = static_cast<double>(apml_forward(pred, truth, cfg).loss);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    sink = static_cast<double>(apml_forward(pred, truth, cfg).loss);
    times.push_back(std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count());
  }
  (void)sink;

  BenchRow row;
  row.n = n;
  row.reps = reps;
  double sum = 0.0;
  for (double t : times)
    sum += t;
  row.mean_ms = sum / reps;
  double var = 0.0;
  for (double t : times)
    var += (t - row.mean_ms) * (t - row.mean_ms);
  row.std_ms = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
  std::sort(times.begin(), times.end());
  const auto mid = times.size() / 2;
  row.median_ms = times.size() % 2 ? times[mid]
                                   : 0.5 * (times[mid - 1] + times[mid]);
  return row;
}

template BenchRow bench_forward<float>(Index, int, std::uint64_t,
                                       const ApmlConfig &);
template BenchRow bench_forward<double>(Index, int, std::uint64_t,
                                        const ApmlConfig &);

} // namespace apml
