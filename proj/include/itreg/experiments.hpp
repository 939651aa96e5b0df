#pragma once

// Named method configurations and the two benchmark drivers.

#include "itreg/activators.hpp"
#include "itreg/baselines.hpp"
#include "itreg/csv.hpp"
#include "itreg/imaging.hpp"
#include "itreg/instances.hpp"
#include "itreg/pgm.hpp"
#include "itreg/solvers.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace itreg {

enum class Precond { scaled, pock_chambolle };

inline Precond parse_precond(const std::string& s) {
  if (s == "scaled") return Precond::scaled;
  if (s == "pc") return Precond::pock_chambolle;
  throw std::invalid_argument("unknown preconditioner '" + s + "' (expected scaled or pc)");
}

inline const char* to_string(Precond p) { return p == Precond::scaled ? "scaled" : "pc"; }

/// Splitting methods by name: pd, pds, pdp, pdl, pdal (primal-dual with the
/// corresponding primal activation), dp and dps (dual-primal, identity or
/// dual box projections), ppd (pd with Pock-Chambolle preconditioning).
inline const std::vector<std::string>& splitting_methods() {
  static const std::vector<std::string> names{"pd", "pds", "pdp", "pdl", "pdal", "dp", "dps", "ppd"};
  return names;
}

inline const std::vector<std::string>& baseline_methods() {
  static const std::vector<std::string> names{"tik", "dr"};
  return names;
}

inline bool is_known_method(const std::string& m) {
  const auto has = [&](const auto& v) { return std::find(v.begin(), v.end(), m) != v.end(); };
  return has(splitting_methods()) || has(baseline_methods());
}

struct MethodTuning {
  /// Fixed Landweber step as a multiple of 1/||A||^2.
  double landweber_factor = 1.0;
  double adaptive_cap = 1e6;
  /// Scaled preconditioner Sigma = Gamma = scale / ||A||.
  double scaled_precond = 0.99;
  /// Pock-Chambolle diagonals are shrunk by this factor to make alpha > 0.
  double pc_shrink = 0.99;
};

/// Builds method configurations for one problem, estimating ||A|| once.
class MethodFactory {
 public:
  explicit MethodFactory(const ProblemSpec& prob, MethodTuning tuning = {})
      : prob_(prob), tuning_(tuning), norm_(op_norm_est(prob.op()).value) {
    if (!(norm_ > 0.0)) throw DegenerateOperator("method factory: zero operator");
  }

  double op_norm() const { return norm_; }

  Preconditioners preconditioners(Precond p) const {
    const LinearMap& a = prob_.op();
    if (p == Precond::scaled) {
      const double c = tuning_.scaled_precond / norm_;
      return {DiagMetric::scaled_identity(a.cols(), c), DiagMetric::scaled_identity(a.rows(), c)};
    }
    const Preconditioners pc = pock_chambolle_diagonals(a);
    return {pc.sigma.scaled(tuning_.pc_shrink), pc.gamma.scaled(tuning_.pc_shrink)};
  }

  MethodConfig make(const std::string& name, Precond p = Precond::scaled) const {
    MethodConfig m;
    m.name = name;
    if (name == "ppd") p = Precond::pock_chambolle;
    if (name == "pd" || name == "ppd") {
      m.activator = Activator::identity();
    } else if (name == "pds") {
      m.activator = Activator::serial_all(dense("pds"), true);
    } else if (name == "pdp") {
      m.activator = Activator::parallel_frobenius(dense("pdp"));
    } else if (name == "pdl") {
      m.activator = Activator::landweber(tuning_.landweber_factor / (norm_ * norm_));
    } else if (name == "pdal") {
      m.activator = Activator::landweber_adaptive(norm_, tuning_.adaptive_cap);
    } else if (name == "dp") {
      m.scheme = Scheme::dual_primal;
    } else if (name == "dps") {
      m.scheme = Scheme::dual_primal;
      m.activator = Activator::dual_box_all(dense("dps"), true);
    } else {
      throw std::invalid_argument("unknown splitting method '" + name + "'");
    }
    const Preconditioners pc = preconditioners(p);
    m.sigma = pc.sigma;
    m.gamma = pc.gamma;
    m.alpha = alpha(p);
    return m;
  }

  /// 1 - ||Gamma^{1/2} A Sigma^{1/2}||^2, cached per preconditioner.
  double alpha(Precond p) const {
    auto& slot = p == Precond::scaled ? alpha_scaled_ : alpha_pc_;
    if (!slot) {
      const Preconditioners pc = preconditioners(p);
      slot = check_step_condition(pc.sigma, pc.gamma, prob_.op());
    }
    return *slot;
  }

 private:
  const DenseMap& dense(const char* who) const { return detail::require_dense(prob_.op(), who); }

  const ProblemSpec& prob_;
  MethodTuning tuning_;
  double norm_;
  mutable std::optional<double> alpha_scaled_;
  mutable std::optional<double> alpha_pc_;
};

/// Runs a splitting method or a baseline by name.
inline RunRecord run_method(const ProblemSpec& prob, const MethodFactory& factory,
                            const std::string& name, Precond precond, const StopRule& stop,
                            std::uint64_t seed, const RunOptions& opts = {}) {
  if (name == "tik") return to_run_record(fb_tikhonov_path(prob), prob);
  if (name == "dr") return douglas_rachford(prob, stop, opts);
  return run(prob, factory.make(name, precond), stop, seed, opts);
}

struct SparseBenchmarkConfig {
  SparseInstanceConfig instance;
  std::vector<std::string> methods{"pd", "pds", "pdp", "pdl", "pdal", "dps", "tik", "dr"};
  StopRule stop = StopRule::oracle(3000, 200);
  Precond precond = Precond::scaled;
  MethodTuning tuning;
  int metric_stride = 1;
};

struct SparseBenchmarkResult {
  ProblemSpec problem;
  std::vector<RunRecord> records;
};

/// Generates the instance (attaching a dual certificate when one exists)
/// and runs every configured method on it.
inline SparseBenchmarkResult run_sparse_benchmark(const SparseBenchmarkConfig& cfg) {
  SparseBenchmarkResult res;
  res.problem = gen_sparse_instance(cfg.instance);
  const auto& a = detail::require_dense(res.problem.op(), "sparse benchmark").matrix();
  res.problem.saddle = l1_saddle_certificate(a, *res.problem.ground_truth);
  const MethodFactory factory(res.problem, cfg.tuning);
  RunOptions opts;
  opts.metric_stride = cfg.metric_stride;
  for (const auto& m : cfg.methods) {
    res.records.push_back(run_method(res.problem, factory, m, cfg.precond, cfg.stop,
                                     cfg.instance.seed, opts));
  }
  return res;
}

/// Elapsed solver time at the early-stop iteration.
inline double time_at_stop(const RunRecord& rec) {
  if (const MetricRow* r = rec.row_at(rec.early_stop.stop_iter)) return r->time_s;
  return rec.rows.empty() ? 0.0 : rec.rows.back().time_s;
}

inline void write_sparse_summary(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "method,time_s,stop_iter,recon_error\n";
  for (const auto& r : records) {
    if (r.status == RunStatus::diverged) out << "# diverged=" << r.method << '\n';
    if (r.status == RunStatus::solver_failure) out << "# solver_failure=" << r.method << '\n';
    out << r.method << ',' << format_double(time_at_stop(r)) << ',' << r.early_stop.stop_iter << ','
        << format_double(r.early_stop.value) << '\n';
  }
}

namespace detail {
inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}
}  // namespace detail

inline void write_sparse_outputs(const std::filesystem::path& dir, const SparseBenchmarkResult& res) {
  std::filesystem::create_directories(dir);
  for (const auto& r : res.records) {
    auto out = detail::open_output(dir / ("metrics_" + r.method + ".csv"));
    write_metrics_csv(out, r);
  }
  auto out = detail::open_output(dir / "summary.csv");
  write_sparse_summary(out, res.records);
}

struct TvBenchmarkConfig {
  Index side = 64;
  Index radius = 2;
  double noise_amp = 0.025;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"pd", "ppd", "pdl", "pdal"};
  StopRule stop = StopRule::oracle(3000, 100);
  Precond precond = Precond::scaled;
  MethodTuning tuning;
  /// Clean image; the synthetic scene when absent.
  std::optional<std::string> image_path;
  int metric_stride = 1;
};

struct TvMethodResult {
  RunRecord record;
  /// Image quality at each recorded iteration, aligned with record.rows.
  std::vector<ImageQuality> quality;
  Image restored;
  ImageQuality at_stop;
};

struct TvBenchmarkResult {
  Image clean;
  Image noisy;
  ImageQuality noisy_quality;
  std::vector<TvMethodResult> methods;
};

inline TvBenchmarkResult run_tv_benchmark(const TvBenchmarkConfig& cfg) {
  TvBenchmarkResult res;
  res.clean = cfg.image_path ? read_pgm(*cfg.image_path) : synthetic_image(cfg.side);
  res.noisy = degrade(res.clean, cfg.radius, cfg.noise_amp, cfg.seed);
  res.noisy_quality = image_metrics(res.noisy, res.clean);
  const ProblemSpec prob = assemble_tv_problem(res.noisy, cfg.radius, res.clean);
  const MethodFactory factory(prob, cfg.tuning);
  const Index n = res.clean.side;

  for (const auto& name : cfg.methods) {
    if (name == "tik" || name == "dr" || name == "pds" || name == "pdp" || name == "dps" ||
        name == "dp") {
      throw std::invalid_argument("method '" + name + "' is not available for the TV experiment");
    }
    TvMethodResult mr;
    RunOptions opts;
    opts.metric_stride = cfg.metric_stride;
    opts.observer = [&](int, const Vector& x) {
      mr.quality.push_back(image_metrics(Image(n, Vector(x.head(n * n))), res.clean));
    };
    mr.record = run(prob, factory.make(name, cfg.precond), cfg.stop, cfg.seed, opts);
    mr.record.method = name;
    // A diverged run records a final row without metrics.
    while (mr.quality.size() < mr.record.rows.size()) {
      mr.quality.push_back({std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN()});
    }
    mr.restored = Image(n, Vector(mr.record.best_x.head(n * n)));
    mr.at_stop = image_metrics(mr.restored, res.clean);
    res.methods.push_back(std::move(mr));
  }
  return res;
}

inline void write_tv_summary(std::ostream& out, const TvBenchmarkResult& res) {
  out << "method,iters,time_s,ssim,psnr,mse\n";
  out << "# noisy_input,ssim=" << format_double(res.noisy_quality.ssim)
      << ",psnr=" << format_double(res.noisy_quality.psnr)
      << ",mse=" << format_double(res.noisy_quality.mse) << '\n';
  for (const auto& m : res.methods) {
    if (m.record.status == RunStatus::diverged) out << "# diverged=" << m.record.method << '\n';
    out << m.record.method << ',' << m.record.early_stop.stop_iter << ','
        << format_double(time_at_stop(m.record)) << ',' << format_double(m.at_stop.ssim) << ','
        << format_double(m.at_stop.psnr) << ',' << format_double(m.at_stop.mse) << '\n';
  }
}

inline void write_tv_outputs(const std::filesystem::path& dir, const TvBenchmarkResult& res) {
  std::filesystem::create_directories(dir);
  for (const auto& m : res.methods) {
    auto out = detail::open_output(dir / ("metrics_" + m.record.method + ".csv"));
    write_metrics_csv(out, m.record, &m.quality);
    write_pgm((dir / ("restored_" + m.record.method + ".pgm")).string(), m.restored);
  }
  write_pgm((dir / "noisy.pgm").string(), res.noisy);
  write_pgm((dir / "clean.pgm").string(), res.clean);
  auto out = detail::open_output(dir / "summary.csv");
  write_tv_summary(out, res);
}

}  // namespace itreg
