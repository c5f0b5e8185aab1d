#include "apml/fit.hpp"

#include <chrono>
#include <cmath>

#include "apml/csv.hpp"

namespace apml {

namespace {

// Independent stream for the initial cloud so it does not reuse the
// target's random sequence.
constexpr std::uint64_t kInitSeedSalt = 0x9e3779b97f4a7c15ULL;

} // namespace

std::optional<LossKind> parse_loss_kind(const std::string &name) {
  if (name == "apml")
    return LossKind::APML;
  if (name == "cd-l1" || name == "cd_l1")
    return LossKind::CD_L1;
  if (name == "cd-l2" || name == "cd_l2")
    return LossKind::CD_L2;
  return std::nullopt;
}

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
  case LossKind::APML:
    return "apml";
  case LossKind::CD_L1:
    return "cd-l1";
  case LossKind::CD_L2:
    return "cd-l2";
  }
  return "unknown";
}

ApmlConfig fit_apml_defaults() {
  ApmlConfig cfg;
  cfg.reduction = Reduction::MeanOverPoints;
  cfg.grad_mode = GradMode::DetachedTemperature;
  return cfg;
}

void FitConfig::validate() const {
  if (steps < 1)
    throw InvalidArgument("fit needs steps >= 1");
  if (!(step_size > 0.0))
    throw InvalidArgument("fit needs a positive step size");
  if (n_points < 2)
    throw InvalidArgument("fit needs n_points >= 2");
  apml.validate();
}

std::pair<double, Matrix<double>>
loss_and_gradient(LossKind kind, const PointSet<double> &pred,
                  const PointSet<double> &truth, const ApmlConfig &apml) {
  switch (kind) {
  case LossKind::APML: {
    auto res = apml_gradient(pred, truth, apml);
    return {res.loss, std::move(res.grad_pred->front())};
  }
  case LossKind::CD_L1:
    return chamfer_gradient(pred, truth, false);
  case LossKind::CD_L2:
    return chamfer_gradient(pred, truth, true);
  }
  throw InvalidArgument("unknown loss kind");
}

FitTrace descend(const PointSet<double> &source, const PointSet<double> &target,
                 const DescentOptions &opt) {
  if (opt.steps < 1)
    throw InvalidArgument("descent needs steps >= 1");
  if (!(opt.step_size > 0.0))
    throw InvalidArgument("descent needs a positive step size");
  require_same_dim(source, target);

  using clock = std::chrono::steady_clock;
  FitTrace trace;
  trace.records.reserve(static_cast<std::size_t>(opt.steps) + 1);
  Matrix<double> x = source.points();
  double elapsed_ms = 0.0;

  for (int step = 0; step <= opt.steps; ++step) {
    if (!x.allFinite())
      throw DivergenceError("non-finite coordinates",
                            static_cast<std::size_t>(step));
    const PointSet<double> current(x);
    const auto t0 = clock::now();
    auto [loss, grad] = loss_and_gradient(opt.loss_kind, current, target,
                                          opt.apml);
    if (!std::isfinite(loss) || !grad.allFinite())
      throw DivergenceError("non-finite loss or gradient",
                            static_cast<std::size_t>(step));
    if (step < opt.steps)
      x -= opt.step_size * grad;
    elapsed_ms +=
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    const MetricReport m = metric_report(current, target, opt.metrics);
    trace.records.push_back(
        {step, loss, m.emd_times_100, m.cd_l1, m.cd_l2, m.f1, elapsed_ms});
  }
  trace.final_points = std::move(x);
  return trace;
}

FitTrace fit_pointset(const FitConfig &cfg) {
  cfg.validate();
  const PointSet<double> target = generate_shape(cfg.shape, cfg.n_points,
                                                 cfg.seed);
  const PointSet<double> source =
      uniform_in_bounds(target, cfg.n_points, cfg.seed ^ kInitSeedSalt);
  DescentOptions opt;
  opt.loss_kind = cfg.loss_kind;
  opt.steps = cfg.steps;
  opt.step_size = cfg.step_size;
  opt.apml = cfg.apml;
  opt.metrics.seed = cfg.seed;
  return descend(source, target, opt);
}

void write_trace_csv(std::ostream &out, const FitTrace &trace) {
  out << kTraceHeader << '\n';
  for (const auto &r : trace.records)
    out << r.step << ',' << format_number(r.loss) << ','
        << format_number(r.emd_x100) << ',' << format_number(r.cd_l1) << ','
        << format_number(r.cd_l2) << ',' << format_number(r.f1) << ','
        << format_number(r.wall_ms) << '\n';
}

} // namespace apml
