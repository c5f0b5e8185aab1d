#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "apml/loss.hpp"
#include "apml/metrics.hpp"
#include "apml/shapes.hpp"

namespace apml {

enum class LossKind { APML, CD_L1, CD_L2 };

std::optional<LossKind> parse_loss_kind(const std::string &name);
std::string loss_kind_name(LossKind kind);

/// APML settings used by the harness: default hyperparameters with the
/// per-point mean reduction so step sizes carry across cardinalities.
ApmlConfig fit_apml_defaults();

inline constexpr double kDefaultFitStepSize = 0.4;

struct FitConfig {
  LossKind loss_kind = LossKind::APML;
  int steps = 500;
  double step_size = kDefaultFitStepSize;
  std::uint64_t seed = 7;
  Index n_points = 256;
  Shape shape = Shape::Sphere;
  ApmlConfig apml = fit_apml_defaults();

  void validate() const;
};

struct FitRecord {
  int step = 0;
  double loss = 0.0;
  double emd_x100 = 0.0;
  double cd_l1 = 0.0;
  double cd_l2 = 0.0;
  double f1 = 0.0;
  double wall_ms = 0.0; ///< cumulative optimisation time, metrics excluded
};

struct FitTrace {
  std::vector<FitRecord> records; ///< steps + 1 entries, initial state first
  Matrix<double> final_points;
};

struct DescentOptions {
  LossKind loss_kind = LossKind::APML;
  int steps = 1;
  double step_size = kDefaultFitStepSize;
  ApmlConfig apml = fit_apml_defaults();
  MetricOptions metrics;
};

/// Value and gradient of the selected loss at `pred`.
std::pair<double, Matrix<double>> loss_and_gradient(
    LossKind kind, const PointSet<double> &pred, const PointSet<double> &truth,
    const ApmlConfig &apml);

/// Plain gradient descent of `source` toward `target`, logging metrics at
/// every state including the initial one.
FitTrace descend(const PointSet<double> &source, const PointSet<double> &target,
                 const DescentOptions &opt);

/// Generates the target shape, starts from uniform samples in its bounding
/// box and runs `descend`.
FitTrace fit_pointset(const FitConfig &cfg);

inline const char *kTraceHeader = "step,loss,emd_x100,cd_l1,cd_l2,f1,wall_ms";

void write_trace_csv(std::ostream &out, const FitTrace &trace);

} // namespace apml
