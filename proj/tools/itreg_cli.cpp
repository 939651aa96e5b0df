// itreg: run the sparse-recovery and TV benchmarks, or inspect the step
// condition of a configuration.

#include "itreg/itreg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Options {
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
  long rows = 400;
  long cols = 600;
  long sparsity = 60;
  double noise_amp = -1.0;
  int max_iters = -1;
  std::string stop = "oracle";
  std::string precond = "scaled";
  std::string out = "itreg_out";
  std::string image;
  std::string matrix;
  bool paper_scale = false;
  int patience = -1;
  int stride = 1;
  double landweber_factor = 1.0;
  long side = 64;
  long radius = 2;
};

itreg::StopRule parse_stop(const std::string& s, int max_iters, int patience, int default_cap,
                           int default_patience) {
  const int cap = max_iters > 0 ? max_iters : default_cap;
  if (s == "oracle") return itreg::StopRule::oracle(cap, patience > 0 ? patience : default_patience);
  if (s == "max") return itreg::StopRule::max_iter(cap);
  const std::string prefix = "c-over-delta:";
  if (s.rfind(prefix, 0) == 0) {
    const double c = std::stod(s.substr(prefix.size()));
    if (!(c > 0.0)) throw CLI::ValidationError("--stop", "c must be positive");
    return itreg::StopRule::c_over_delta(c);
  }
  throw CLI::ValidationError("--stop", "expected oracle, max or c-over-delta:<c>");
}

void check_methods(const std::vector<std::string>& methods) {
  for (const auto& m : methods) {
    if (!itreg::is_known_method(m)) throw CLI::ValidationError("--method", "unknown method '" + m + "'");
  }
}

int cmd_sparse(const Options& o) {
  itreg::SparseBenchmarkConfig cfg;
  cfg.instance.rows = o.paper_scale ? 2260 : o.rows;
  cfg.instance.cols = o.paper_scale ? 3000 : o.cols;
  cfg.instance.sparsity = o.paper_scale ? 300 : o.sparsity;
  if (o.noise_amp >= 0.0) cfg.instance.noise_amp = o.noise_amp;
  cfg.instance.seed = o.seed;
  if (!o.methods.empty()) cfg.methods = o.methods;
  cfg.stop = parse_stop(o.stop, o.max_iters, o.patience, 3000, 200);
  cfg.precond = itreg::parse_precond(o.precond);
  cfg.tuning.landweber_factor = o.landweber_factor;
  cfg.metric_stride = o.stride;

  const auto res = itreg::run_sparse_benchmark(cfg);
  itreg::write_sparse_outputs(o.out, res);
  std::cout << "delta=" << itreg::format_double(res.problem.delta) << '\n';
  itreg::write_sparse_summary(std::cout, res.records);
  return 0;
}

int cmd_tv(const Options& o) {
  itreg::TvBenchmarkConfig cfg;
  cfg.side = o.paper_scale ? 256 : o.side;
  cfg.radius = o.paper_scale ? 8 : o.radius;
  if (o.noise_amp >= 0.0) cfg.noise_amp = o.noise_amp;
  cfg.seed = o.seed;
  if (!o.methods.empty()) cfg.methods = o.methods;
  cfg.stop = parse_stop(o.stop, o.max_iters, o.patience, 3000, 100);
  cfg.precond = itreg::parse_precond(o.precond);
  cfg.tuning.landweber_factor = o.landweber_factor;
  cfg.metric_stride = o.stride;
  if (!o.image.empty()) cfg.image_path = o.image;

  const auto res = itreg::run_tv_benchmark(cfg);
  itreg::write_tv_outputs(o.out, res);
  itreg::write_tv_summary(std::cout, res);
  return 0;
}

int cmd_check(const Options& o) {
  itreg::ProblemSpec prob;
  if (!o.matrix.empty()) {
    itreg::Matrix a = itreg::load_dense_matrix(o.matrix);
    prob.b_delta = itreg::Vector::Zero(a.rows());
    prob.a = std::make_shared<itreg::DenseMap>(std::move(a));
  } else {
    itreg::SparseInstanceConfig inst;
    inst.rows = o.rows;
    inst.cols = o.cols;
    inst.sparsity = std::min(o.sparsity, o.cols);
    if (o.noise_amp >= 0.0) inst.noise_amp = o.noise_amp;
    inst.seed = o.seed;
    prob = itreg::gen_sparse_instance(inst);
  }
  const std::string method = o.methods.empty() ? "pd" : o.methods.front();
  if (method == "tik" || method == "dr") {
    throw CLI::ValidationError("--method", "check applies to splitting methods only");
  }
  const itreg::MethodFactory factory(prob, {o.landweber_factor});
  const auto precond = itreg::parse_precond(o.precond);
  const auto m = factory.make(method, precond);
  std::cout << "rows=" << prob.op().rows() << "\ncols=" << prob.op().cols() << '\n';
  std::cout << "op_norm=" << itreg::format_double(factory.op_norm()) << '\n';
  std::cout << "precond=" << itreg::to_string(precond) << '\n';
  std::cout << "alpha=" << itreg::format_double(*m.alpha) << '\n';
  std::cout << "activator=" << itreg::to_string(m.activator.kind) << '\n';
  std::cout << "error_constant=" << itreg::format_double(itreg::error_constant(m.activator, prob.op()))
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative regularization by primal-dual splitting with activations"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);

  Options o;
  auto* sparse = app.add_subcommand("sparse", "l1 sparse recovery benchmark");
  auto* tv = app.add_subcommand("tv", "TV deblurring benchmark");
  auto* check = app.add_subcommand("check", "print alpha, ||A|| and e_T for one configuration");
  for (auto* sub : {sparse, tv, check}) sub->fallthrough();

  app.add_option("--method", o.methods, "Comma-separated method list")->delimiter(',');
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--rows", o.rows, "Rows d of A")->check(CLI::PositiveNumber);
  app.add_option("--cols", o.cols, "Columns p of A")->check(CLI::PositiveNumber);
  app.add_option("--sparsity", o.sparsity, "Nonzeros of the ground truth")->check(CLI::NonNegativeNumber);
  app.add_option("--noise-amp", o.noise_amp, "Noise amplitude")->check(CLI::NonNegativeNumber);
  app.add_option("--max-iters", o.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--stop", o.stop, "oracle | max | c-over-delta:<c>");
  app.add_option("--patience", o.patience, "Oracle rule patience")->check(CLI::PositiveNumber);
  app.add_option("--precond", o.precond, "scaled | pc")->check(CLI::IsMember({"scaled", "pc"}));
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--image", o.image, "Clean PGM image for tv")->check(CLI::ExistingFile);
  app.add_option("--matrix", o.matrix, "Dense matrix file for check")->check(CLI::ExistingFile);
  app.add_option("--stride", o.stride, "Record metrics every k iterations")->check(CLI::PositiveNumber);
  app.add_option("--landweber-factor", o.landweber_factor, "Fixed Landweber step times ||A||^2");
  app.add_option("--side", o.side, "Image side for tv")->check(CLI::PositiveNumber);
  app.add_option("--radius", o.radius, "Blur radius for tv")->check(CLI::NonNegativeNumber);
  app.add_flag("--paper-scale", o.paper_scale, "Full-size dimensions");

  try {
    app.parse(argc, argv);
    check_methods(o.methods);
    if (*sparse) return cmd_sparse(o);
    if (*tv) return cmd_tv(o);
    return cmd_check(o);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
