#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace itreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("itreg_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the CLI with `args`, capturing stdout+stderr into `output`.
int cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() / "itreg_cli_log.txt";
  const std::string cmd = std::string(ITREG_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

CsvTable read_csv(const fs::path& p) {
  std::ifstream in(p);
  EXPECT_TRUE(in.good()) << p;
  return read_numeric_csv(in);
}

// Summary files lead with a method-name column; the rest is numeric.
struct SummaryRow {
  std::string method;
  std::vector<double> values;
};

std::vector<SummaryRow> read_summary(const fs::path& p) {
  std::ifstream in(p);
  EXPECT_TRUE(in.good()) << p;
  std::vector<SummaryRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    auto cells = split_csv_line(line);
    SummaryRow r{cells.front(), {}};
    for (std::size_t i = 1; i < cells.size(); ++i) r.values.push_back(parse_double(cells[i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

TEST(SparseInstance, UnitColumnsAndSupport) {
  SparseInstanceConfig cfg;
  cfg.rows = 30;
  cfg.cols = 50;
  cfg.sparsity = 7;
  const ProblemSpec prob = gen_sparse_instance(cfg);
  const Matrix& a = dynamic_cast<const DenseMap&>(prob.op()).matrix();
  for (Index j = 0; j < a.cols(); ++j) EXPECT_NEAR(a.col(j).norm(), 1.0, 1e-12);
  const Vector& x = *prob.ground_truth;
  Index nnz = 0;
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) {
      ++nnz;
      EXPECT_GT(x[j], 0.0);
      EXPECT_LT(x[j], 1.0);
    }
  }
  EXPECT_EQ(nnz, 7);
  EXPECT_LE((a * x - *prob.b_exact).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(prob.delta, (prob.b_delta - *prob.b_exact).norm());
}

TEST(SparseInstance, NoiseModel) {
  SparseInstanceConfig cfg;
  cfg.rows = 40;
  cfg.cols = 20;
  cfg.sparsity = 5;
  cfg.noise_amp = 0.2;
  const ProblemSpec prob = gen_sparse_instance(cfg);
  const Vector u = (prob.b_delta - *prob.b_exact) / prob.b_exact->norm();
  EXPECT_LE(u.lpNorm<Eigen::Infinity>(), 0.2);

  cfg.noise_amp = 0.0;
  const ProblemSpec clean = gen_sparse_instance(cfg);
  EXPECT_EQ(clean.b_delta, *clean.b_exact);
  EXPECT_EQ(clean.delta, 0.0);

  // Halving the amplitude halves delta exactly.
  cfg.noise_amp = 0.1;
  const ProblemSpec half = gen_sparse_instance(cfg);
  EXPECT_EQ(half.delta * 2.0, prob.delta);
}

TEST(SparseInstance, PureFunctionOfSeed) {
  SparseInstanceConfig cfg;
  cfg.rows = 12;
  cfg.cols = 15;
  cfg.sparsity = 3;
  cfg.seed = 77;
  const ProblemSpec a = gen_sparse_instance(cfg);
  const ProblemSpec b = gen_sparse_instance(cfg);
  EXPECT_EQ(dynamic_cast<const DenseMap&>(a.op()).matrix(), dynamic_cast<const DenseMap&>(b.op()).matrix());
  EXPECT_EQ(a.b_delta, b.b_delta);
  EXPECT_EQ(*a.ground_truth, *b.ground_truth);
  cfg.seed = 78;
  EXPECT_NE(gen_sparse_instance(cfg).b_delta, a.b_delta);
}

TEST(SparseInstance, GeneratorIsPinned) {
  // Guards the documented stream layout: changing it changes every fixture.
  Xoshiro256 rng(1, Stream::matrix);
  const std::uint64_t first = rng();
  Xoshiro256 again(1, Stream::matrix);
  EXPECT_EQ(again(), first);
  Xoshiro256 other(1, Stream::noise);
  EXPECT_NE(other(), first);
  double u = Xoshiro256(5).uniform();
  EXPECT_GE(u, 0.0);
  EXPECT_LT(u, 1.0);
}

TEST(SparseInstance, RejectsBadConfig) {
  SparseInstanceConfig cfg;
  cfg.sparsity = cfg.cols + 1;
  EXPECT_THROW(gen_sparse_instance(cfg), DimensionError);
}

TEST(Certificate, SaddleConditionsHold) {
  SparseInstanceConfig cfg;
  cfg.rows = 50;
  cfg.cols = 80;
  cfg.sparsity = 5;
  const ProblemSpec prob = find_certified_instance(cfg);
  ASSERT_TRUE(prob.saddle.has_value());
  const Matrix& a = dynamic_cast<const DenseMap&>(prob.op()).matrix();
  const Vector corr = a.transpose() * prob.saddle->u;
  const Vector& x = prob.saddle->x;
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) {
      EXPECT_NEAR(corr[j], -1.0, 1e-8);
    } else {
      EXPECT_LT(std::abs(corr[j]), 1.0);
    }
  }
}

TEST(Csv, FormatsSeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(parse_double(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, MetricsRoundTrip) {
  RunRecord r;
  r.rows = {{1, 0.5, 0.25, 1.0, 3.0}, {2, 0.75, std::numeric_limits<double>::quiet_NaN(), 0.5, 2.0}};
  r.early_stop = {"oracle", 2, 2.0};
  r.feasibility_exact = true;
  std::stringstream ss;
  write_metrics_csv(ss, r);
  const std::string text = ss.str();
  EXPECT_NE(text.find("iter,time_s,lagrangian_gap,feasibility,recon_error\n"), std::string::npos);
  EXPECT_NE(text.find("# stop=oracle,iter=2,value=2\n"), std::string::npos);
  EXPECT_NE(text.find("# feasibility_ref=exact"), std::string::npos);
  const CsvTable t = read_numeric_csv(ss);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(std::isnan(t.rows[1][2]));
  EXPECT_EQ(t.rows[0][t.column("recon_error")], 3.0);

  std::vector<ImageQuality> q{{0.1, 10.0, 0.5}};
  EXPECT_THROW(write_metrics_csv(ss, r, &q), DimensionError);
}

TEST(Factory, BuildsEveryNamedMethod) {
  SparseInstanceConfig cfg;
  cfg.rows = 20;
  cfg.cols = 30;
  cfg.sparsity = 3;
  const ProblemSpec prob = gen_sparse_instance(cfg);
  const MethodFactory f(prob);
  for (const auto& name : splitting_methods()) {
    const MethodConfig m = f.make(name);
    EXPECT_GT(*m.alpha, 0.0) << name;
    EXPECT_NO_THROW(run(prob, m, StopRule::max_iter(3), 1)) << name;
  }
  EXPECT_NEAR(*f.make("pd").alpha, 1.0 - 0.99 * 0.99, 1e-8);
  EXPECT_EQ(f.make("dps").scheme, Scheme::dual_primal);
  EXPECT_EQ(f.make("pdl").activator.kind, ActivatorKind::landweber);
  EXPECT_FALSE(f.make("ppd").sigma.is_scalar());
  EXPECT_THROW(f.make("nope"), std::invalid_argument);
}

TEST(Factory, ProjectionMethodsNeedDenseOperator) {
  const ProblemSpec prob = assemble_tv_problem(synthetic_image(8), 1);
  const MethodFactory f(prob);
  EXPECT_THROW(f.make("pds"), UnsupportedOperation);
  EXPECT_NO_THROW(f.make("pdal"));
  EXPECT_GT(f.alpha(Precond::pock_chambolle), 0.0);
}

TEST(SparseBenchmark, SummaryMatchesMetricsFiles) {
  SparseBenchmarkConfig cfg;
  cfg.instance.rows = 40;
  cfg.instance.cols = 60;
  cfg.instance.sparsity = 6;
  cfg.instance.noise_amp = 0.05;
  cfg.instance.seed = 3;
  cfg.stop = StopRule::oracle(500, 30);
  const auto res = run_sparse_benchmark(cfg);
  ASSERT_EQ(res.records.size(), cfg.methods.size());
  const fs::path dir = scratch_dir("sparse_lib");
  write_sparse_outputs(dir, res);
  const auto summary = read_summary(dir / "summary.csv");
  ASSERT_EQ(summary.size(), cfg.methods.size());
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const CsvTable m = read_csv(dir / ("metrics_" + cfg.methods[i] + ".csv"));
    const int col = m.column("recon_error");
    double best = INFINITY;
    for (const auto& row : m.rows) best = std::min(best, row[static_cast<std::size_t>(col)]);
    EXPECT_EQ(summary[i].method, cfg.methods[i]);
    EXPECT_EQ(summary[i].values[2], best) << cfg.methods[i];
  }
}

TEST(TvBenchmark, RestoresTinyImage) {
  TvBenchmarkConfig cfg;
  cfg.side = 16;
  cfg.radius = 1;
  cfg.methods = {"pd", "pdal"};
  cfg.stop = StopRule::oracle(400, 30);
  const auto res = run_tv_benchmark(cfg);
  ASSERT_EQ(res.methods.size(), 2u);
  for (const auto& m : res.methods) {
    EXPECT_EQ(m.quality.size(), m.record.rows.size());
    EXPECT_LT(m.at_stop.mse, res.noisy_quality.mse) << m.record.method;
    const MetricRow* r = m.record.row_at(m.record.early_stop.stop_iter);
    ASSERT_NE(r, nullptr);
    EXPECT_NEAR(m.at_stop.mse, r->recon_error * r->recon_error / 256.0, 1e-14);
  }
  const fs::path dir = scratch_dir("tv_lib");
  write_tv_outputs(dir, res);
  EXPECT_TRUE(fs::exists(dir / "restored_pdal.pgm"));
  const CsvTable t = read_csv(dir / "metrics_pd.csv");
  EXPECT_NO_THROW(t.column("ssim"));
  EXPECT_EQ(read_pgm((dir / "restored_pd.pgm").string()).side, 16);
}

TEST(TvBenchmark, NoBlurNoNoiseRecoversInput) {
  TvBenchmarkConfig cfg;
  cfg.side = 12;
  cfg.radius = 0;
  cfg.noise_amp = 0.0;
  cfg.methods = {"pd"};
  cfg.stop = StopRule::oracle(300, 30);
  const auto res = run_tv_benchmark(cfg);
  EXPECT_EQ(res.noisy_quality.mse, 0.0);
  EXPECT_LE(res.methods[0].at_stop.mse, 1e-4);
}

TEST(TvBenchmark, RejectsL1OnlyMethods) {
  TvBenchmarkConfig cfg;
  cfg.side = 8;
  cfg.methods = {"dps"};
  EXPECT_THROW(run_tv_benchmark(cfg), std::invalid_argument);
}

TEST(Cli, MissingSubcommandIsUsageError) {
  std::string out;
  EXPECT_EQ(cli("", &out), 2);
  EXPECT_NE(out.find("subcommand"), std::string::npos);
}

TEST(Cli, UnknownFlagOrMethodIsUsageError) {
  EXPECT_EQ(cli("sparse --bogus 3"), 2);
  EXPECT_EQ(cli("sparse --method nope --rows 10 --cols 12 --sparsity 2"), 2);
  EXPECT_EQ(cli("sparse --stop sometimes --rows 10 --cols 12 --sparsity 2"), 2);
  EXPECT_EQ(cli("--help"), 0);
}

TEST(Cli, CheckReportsScaledAlpha) {
  std::string out;
  ASSERT_EQ(cli(std::string("check --matrix ") + ITREG_FIXTURE_DIR + "/a_4x6.txt", &out), 0);
  const auto pos = out.find("alpha=");
  ASSERT_NE(pos, std::string::npos) << out;
  EXPECT_NEAR(std::stod(out.substr(pos + 6)), 0.0199, 1e-6);
  EXPECT_NE(out.find("error_constant=0"), std::string::npos);
}

TEST(Cli, CheckReportsActivatorConstant) {
  std::string out;
  ASSERT_EQ(cli(std::string("check --method pds --matrix ") + ITREG_FIXTURE_DIR + "/a_4x6.txt", &out), 0);
  const Matrix a = load_dense_matrix(std::string(ITREG_FIXTURE_DIR) + "/a_4x6.txt");
  double e = 0.0;
  for (Index i = 0; i < a.rows(); ++i) e += 1.0 / a.row(i).squaredNorm();
  const auto pos = out.find("error_constant=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(out.substr(pos + 15)), e, 1e-12);
}

TEST(Cli, SparseWritesRequestedFiles) {
  const fs::path dir = scratch_dir("cli_sparse");
  ASSERT_EQ(cli("sparse --method pdal --seed 7 --rows 60 --cols 90 --sparsity 9 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "metrics_pdal.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  const auto s = read_summary(dir / "summary.csv");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].method, "pdal");

  // Same seed, same stop iteration and error.
  const fs::path dir2 = scratch_dir("cli_sparse2");
  ASSERT_EQ(cli("sparse --method pdal --seed 7 --rows 60 --cols 90 --sparsity 9 --out " + dir2.string()), 0);
  const auto s2 = read_summary(dir2 / "summary.csv");
  EXPECT_EQ(s[0].values[1], s2[0].values[1]);
  EXPECT_EQ(s[0].values[2], s2[0].values[2]);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch_dir("cli_config");
  const fs::path conf = dir / "run.conf";
  {
    std::ofstream c(conf);
    c << "# desk run\nmethod=pd,pdl\nrows=30\ncols=40\nsparsity=4\nseed=2\nmax-iters=25\nstop=max\n";
  }
  ASSERT_EQ(cli("sparse --config " + conf.string() + " --method pdal --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "metrics_pdal.csv"));
  EXPECT_FALSE(fs::exists(dir / "o" / "metrics_pd.csv"));
  const CsvTable m = read_csv(dir / "o" / "metrics_pdal.csv");
  EXPECT_EQ(m.rows.size(), 25u);
}

TEST(Cli, CoverDeltaStop) {
  const fs::path dir = scratch_dir("cli_cdelta");
  std::string out;
  ASSERT_EQ(cli("sparse --method pd --rows 30 --cols 40 --sparsity 4 --noise-amp 0.05 --stop c-over-delta:2 --out " +
                    dir.string(),
                &out),
            0);
  const double delta = std::stod(out.substr(out.find("delta=") + 6));
  const CsvTable m = read_csv(dir / "metrics_pd.csv");
  EXPECT_EQ(static_cast<int>(m.rows.size()), static_cast<int>(std::ceil(2.0 / delta)));
}

TEST(Cli, TvWritesImages) {
  const fs::path dir = scratch_dir("cli_tv");
  ASSERT_EQ(cli("tv --side 16 --radius 1 --method pdal --max-iters 200 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "restored_pdal.pgm"));
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  // Feeding the written clean image back in reproduces the run.
  const fs::path dir2 = scratch_dir("cli_tv2");
  ASSERT_EQ(cli("tv --image " + (dir / "clean.pgm").string() +
                " --radius 1 --method pd --max-iters 50 --out " + dir2.string()),
            0);
  EXPECT_TRUE(fs::exists(dir2 / "metrics_pd.csv"));
}

TEST(Cli, RuntimeFailureExitsOne) {
  const fs::path dir = scratch_dir("cli_fail");
  const fs::path bad = dir / "bad.txt";
  std::ofstream(bad) << "2 2\n1 2\n";
  EXPECT_EQ(cli("check --matrix " + bad.string()), 1);
}
