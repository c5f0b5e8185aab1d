#include "apml/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>

#include "apml/apml.hpp"
#include "apml/csv.hpp"

namespace apml {

namespace {

struct ApmlFlags {
  double p_min = 0.8;
  double delta = 1e-6;
  double eps_gap = 1e-5;
  int l_iter = 10;
  double eps_stab = 1e-8;
  std::string grad_mode = "detached";
  std::string reduction = "sum";

  ApmlConfig config() const {
    ApmlConfig cfg;
    cfg.softmax = {p_min, delta, eps_gap};
    cfg.sinkhorn = {l_iter, eps_stab};
    cfg.grad_mode =
        grad_mode == "full" ? GradMode::Full : GradMode::DetachedTemperature;
    cfg.reduction = reduction == "mean" ? Reduction::MeanOverPoints
                                        : Reduction::SumOverPoints;
    return cfg;
  }
};

void add_apml_flags(CLI::App *cmd, ApmlFlags &f) {
  cmd->add_option("--p-min", f.p_min, "minimum assignment probability")
      ->capture_default_str();
  cmd->add_option("--delta", f.delta, "gap margin")->capture_default_str();
  cmd->add_option("--eps-gap", f.eps_gap, "uniform-override threshold")
      ->capture_default_str();
  cmd->add_option("--l-iter", f.l_iter, "Sinkhorn iterations")
      ->capture_default_str();
  cmd->add_option("--eps-stab", f.eps_stab, "Sinkhorn denominator offset")
      ->capture_default_str();
  cmd->add_option("--grad-mode", f.grad_mode, "full | detached")
      ->check(CLI::IsMember({"full", "detached"}))
      ->capture_default_str();
  cmd->add_option("--reduction", f.reduction, "sum | mean")
      ->check(CLI::IsMember({"sum", "mean"}))
      ->capture_default_str();
}

CloudFormat resolve_format(const std::string &flag, const std::string &path) {
  if (flag == "xyz")
    return CloudFormat::AsciiXYZ;
  if (flag == "bin")
    return CloudFormat::BinaryF32;
  return format_from_path(path);
}

std::pair<PointSet<double>, PointSet<double>>
load_pair(const std::string &a, const std::string &b,
          const std::string &format) {
  return {load_pointcloud(a, resolve_format(format, a)),
          load_pointcloud(b, resolve_format(format, b))};
}

// Writes to `path`, or to `fallback` when path is empty.
template <typename Fn>
void with_output(const std::string &path, std::ostream &fallback, Fn &&fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file)
    throw IOError("cannot open '" + path + "' for writing");
  fn(file);
}

nlohmann::json element_json(std::size_t b, const ElementDiagnostics &d) {
  double t_min = 0.0, t_max = 0.0;
  bool any = false;
  auto scan = [&](const std::vector<SoftmaxDiagnostics> &v) {
    for (const auto &s : v) {
      if (s.override_fired || s.deterministic)
        continue;
      t_min = any ? std::min(t_min, s.temperature) : s.temperature;
      t_max = any ? std::max(t_max, s.temperature) : s.temperature;
      any = true;
    }
  };
  scan(d.rows);
  scan(d.cols);
  return {{"element", b},
          {"loss", d.loss},
          {"row_overrides", d.row_overrides()},
          {"col_overrides", d.col_overrides()},
          {"min_temperature", t_min},
          {"max_temperature", t_max},
          {"max_row_dev", d.residuals.max_row_dev},
          {"max_col_dev", d.residuals.max_col_dev}};
}

template <typename Scalar>
void run_apml_loss(const PointSet<double> &pred, const PointSet<double> &truth,
                   const ApmlConfig &cfg, bool grad, bool diagnostics,
                   const std::string &transport_path, std::ostream &out) {
  const auto p = pred.cast<Scalar>();
  const auto t = truth.cast<Scalar>();
  const bool keep = !transport_path.empty();
  const auto res = grad ? apml_gradient(p, t, cfg, keep)
                        : apml_forward(p, t, cfg, keep);
  out << format_number(static_cast<double>(res.loss)) << '\n';
  if (diagnostics)
    for (std::size_t b = 0; b < res.diagnostics.size(); ++b)
      out << element_json(b, res.diagnostics[b]).dump() << '\n';
  if (grad) {
    const auto &g = res.grad_pred->front();
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < g.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index k = 0; k < g.cols(); ++k)
        row.push_back(static_cast<double>(g(i, k)));
      rows.push_back(row);
    }
    out << nlohmann::json{{"grad", rows}}.dump() << '\n';
  }
  if (keep)
    save_matrix_csv(res.transport->front().template cast<double>(),
                    transport_path);
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Adaptive probabilistic matching loss for point sets", "apml"};
  app.require_subcommand(1);

  std::string format = "auto";
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--format", format, "input format: auto | xyz | bin")
        ->check(CLI::IsMember({"auto", "xyz", "bin"}))
        ->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  };

  // loss
  auto *loss_cmd = app.add_subcommand("loss", "loss between two point clouds");
  std::string loss_kind = "apml", pred_path, truth_path, transport_out;
  std::string precision = "f64";
  bool want_grad = false, want_diag = false;
  ApmlFlags loss_flags;
  loss_cmd->add_option("--kind", loss_kind, "apml | cd-l1 | cd-l2")
      ->check(CLI::IsMember({"apml", "cd-l1", "cd-l2"}))
      ->capture_default_str();
  loss_cmd->add_option("pred", pred_path, "predicted cloud")->required();
  loss_cmd->add_option("truth", truth_path, "reference cloud")->required();
  loss_cmd->add_flag("--grad", want_grad, "also print d loss / d pred");
  loss_cmd->add_flag("--diagnostics", want_diag,
                     "print per-element diagnostics as JSON lines");
  loss_cmd->add_option("--save-transport", transport_out,
                       "write the final transport plan as CSV");
  loss_cmd->add_option("--precision", precision, "f64 | f32")
      ->check(CLI::IsMember({"f64", "f32"}))
      ->capture_default_str();
  add_apml_flags(loss_cmd, loss_flags);
  add_common(loss_cmd);

  // metrics
  auto *metrics_cmd = app.add_subcommand("metrics", "CD-L1, CD-L2, EMD and F1");
  double tau = kDefaultF1Tau;
  std::string emd_norm = "mean";
  metrics_cmd->add_option("pred", pred_path)->required();
  metrics_cmd->add_option("truth", truth_path)->required();
  metrics_cmd->add_option("--tau", tau, "F1 distance threshold")
      ->capture_default_str();
  metrics_cmd->add_option("--emd-norm", emd_norm, "mean | sum")
      ->check(CLI::IsMember({"mean", "sum"}))
      ->capture_default_str();
  add_common(metrics_cmd);

  // fit
  auto *fit_cmd = app.add_subcommand("fit", "gradient-descent fitting harness");
  std::string fit_loss = "apml", fit_shape = "sphere", trace_out, final_out;
  FitConfig fit_cfg;
  ApmlFlags fit_flags;
  fit_flags.reduction = "mean";
  fit_cmd->add_option("--loss", fit_loss, "apml | cd-l1 | cd-l2")
      ->check(CLI::IsMember({"apml", "cd-l1", "cd-l2"}))
      ->capture_default_str();
  fit_cmd->add_option("--shape", fit_shape,
                      "sphere | cube | two-clusters | density-imbalance")
      ->check(CLI::IsMember(
          {"sphere", "cube", "two-clusters", "density-imbalance"}))
      ->capture_default_str();
  fit_cmd->add_option("--n", fit_cfg.n_points, "points per cloud")
      ->capture_default_str();
  fit_cmd->add_option("--steps", fit_cfg.steps, "descent steps")
      ->capture_default_str();
  fit_cmd->add_option("--step-size", fit_cfg.step_size, "descent step size")
      ->capture_default_str();
  fit_cmd->add_option("--out", trace_out, "trace CSV path (default stdout)");
  fit_cmd->add_option("--save-final", final_out, "write the fitted cloud");
  add_apml_flags(fit_cmd, fit_flags);
  fit_cmd->add_option("--seed", fit_cfg.seed, "random seed")
      ->capture_default_str();

  // analyze
  auto *an_cmd = app.add_subcommand(
      "analyze", "sparsity of the transport plan between two clouds");
  std::string transport_in, stage = "pre", hist_out;
  double threshold = kSparsityThreshold;
  int bins = 20;
  bool clamped = false;
  ApmlFlags an_flags;
  an_cmd->add_option("pred", pred_path);
  an_cmd->add_option("truth", truth_path);
  an_cmd->add_option("--transport", transport_in,
                     "analyze a saved transport CSV instead");
  an_cmd->add_option("--stage", stage, "pre | post (Sinkhorn)")
      ->check(CLI::IsMember({"pre", "post"}))
      ->capture_default_str();
  an_cmd->add_option("--threshold", threshold)->capture_default_str();
  an_cmd->add_option("--bins", bins)->capture_default_str();
  an_cmd->add_flag("--clamped", clamped,
                   "fold every value below 0.05 into the first bin");
  an_cmd->add_option("--hist-out", hist_out,
                     "histogram CSV path (default: after the summary)");
  add_apml_flags(an_cmd, an_flags);
  add_common(an_cmd);

  // emd-oracle
  auto *oracle_cmd = app.add_subcommand(
      "emd-oracle", "exact EMD against permutation enumeration");
  oracle_cmd->add_option("pred", pred_path)->required();
  oracle_cmd->add_option("truth", truth_path)->required();
  add_common(oracle_cmd);

  // bench
  auto *bench_cmd = app.add_subcommand("bench", "forward-pass runtime sweep");
  std::vector<Index> sizes = {256, 512, 1024};
  int reps = 5;
  ApmlFlags bench_flags;
  bench_cmd->add_option("--sizes", sizes, "cloud sizes")->delimiter(',');
  bench_cmd->add_option("--reps", reps)->capture_default_str();
  bench_cmd->add_option("--precision", precision, "f64 | f32")
      ->check(CLI::IsMember({"f64", "f32"}))
      ->capture_default_str();
  add_apml_flags(bench_cmd, bench_flags);
  add_common(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "apml: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (*loss_cmd) {
      const auto [pred, truth] = load_pair(pred_path, truth_path, format);
      if (loss_kind == "apml") {
        const ApmlConfig cfg = loss_flags.config();
        if (precision == "f32")
          run_apml_loss<float>(pred, truth, cfg, want_grad, want_diag,
                               transport_out, out);
        else
          run_apml_loss<double>(pred, truth, cfg, want_grad, want_diag,
                                transport_out, out);
      } else {
        const double v = loss_kind == "cd-l1" ? chamfer_l1(pred, truth)
                                              : chamfer_l2(pred, truth);
        out << format_number(v) << '\n';
      }
    } else if (*metrics_cmd) {
      const auto [pred, truth] = load_pair(pred_path, truth_path, format);
      MetricOptions opt;
      opt.tau = tau;
      opt.seed = seed;
      opt.emd_normalization = emd_norm == "sum" ? EmdNormalization::Sum
                                                : EmdNormalization::MeanPerPoint;
      const MetricReport r = metric_report(pred, truth, opt);
      out << "cd_l1,cd_l2,emd,emd_x100,f1,precision,recall,tau\n"
          << format_number(r.cd_l1) << ',' << format_number(r.cd_l2) << ','
          << format_number(r.emd) << ',' << format_number(r.emd_times_100)
          << ',' << format_number(r.f1) << ',' << format_number(r.precision)
          << ',' << format_number(r.recall) << ',' << format_number(r.tau)
          << '\n';
    } else if (*fit_cmd) {
      fit_cfg.loss_kind = *parse_loss_kind(fit_loss);
      fit_cfg.shape = *parse_shape(fit_shape);
      fit_cfg.apml = fit_flags.config();
      const FitTrace trace = fit_pointset(fit_cfg);
      with_output(trace_out, out,
                  [&](std::ostream &os) { write_trace_csv(os, trace); });
      if (!final_out.empty())
        save_pointcloud(PointSet<double>(trace.final_points), final_out);
    } else if (*an_cmd) {
      Matrix<double> plan;
      std::string label;
      if (!transport_in.empty()) {
        plan = load_matrix_csv(transport_in);
        label = "saved";
      } else {
        if (pred_path.empty() || truth_path.empty())
          throw InvalidArgument("analyze needs two clouds or --transport");
        const auto [pred, truth] = load_pair(pred_path, truth_path, format);
        const ApmlConfig cfg = an_flags.config();
        const auto dir = directional_assignments(cost_matrix(pred, truth),
                                                 cfg.softmax);
        plan = symmetrize(dir.row_stochastic, dir.col_stochastic);
        if (stage == "post")
          plan = sinkhorn_normalize(plan, cfg.sinkhorn).first;
        label = stage == "post" ? "post-sinkhorn" : "pre-sinkhorn";
      }
      const auto report = sparsity_stats(
          plan, threshold, bins,
          clamped ? HistogramMode::Clamped : HistogramMode::Linear);
      const auto sparse = threshold_sparsify(plan, threshold);
      out << "stage,threshold,n_entries,n_above,fraction_above,sparsity,"
             "stored_entries,dense_bytes,sparse_bytes\n"
          << label << ',' << format_number(report.threshold) << ','
          << report.n_entries << ',' << report.n_above << ','
          << format_number(report.fraction_above) << ','
          << format_number(report.sparsity) << ',' << sparse.entries.size()
          << ',' << sparse.dense_bytes() << ',' << sparse.sparse_bytes()
          << '\n';
      auto write_hist = [&](std::ostream &os) {
        os << "bin_lo,bin_hi,count\n";
        for (const auto &b : report.histogram)
          os << format_number(b.lo) << ',' << format_number(b.hi) << ','
             << b.count << '\n';
      };
      if (hist_out.empty()) {
        out << '\n';
        write_hist(out);
      } else {
        with_output(hist_out, out, write_hist);
      }
    } else if (*oracle_cmd) {
      const auto [pred, truth] = load_pair(pred_path, truth_path, format);
      const double exact = emd_exact(pred, truth, EmdNormalization::Sum, seed);
      const double brute = emd_bruteforce(pred, truth);
      out << "emd_exact,emd_bruteforce,abs_diff\n"
          << format_number(exact) << ',' << format_number(brute) << ','
          << format_number(std::abs(exact - brute)) << '\n';
    } else if (*bench_cmd) {
      const ApmlConfig cfg = bench_flags.config();
      out << "n,mean_ms,std_ms,reps\n";
      for (Index n : sizes) {
        const BenchRow row = precision == "f32"
                                 ? bench_forward<float>(n, reps, seed, cfg)
                                 : bench_forward<double>(n, reps, seed, cfg);
        out << row.n << ',' << format_number(row.mean_ms) << ','
            << format_number(row.std_ms) << ',' << row.reps << '\n';
      }
    }
  } catch (const Error &e) {
    err << "apml: " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::exception &e) {
    err << "apml: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitOk;
}

} // namespace apml
