#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fptrade/cli.hpp"
#include "reference_sim.hpp"

using namespace fptrade;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fptrade");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path data(const std::string& name) { return fs::path(FPTRADE_TEST_DATA) / name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fptrade_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_prices(const std::string& name, std::size_t tickers, std::size_t days, std::size_t gap_every = 0) {
    SyntheticSpec spec{tickers, days, {}, 0.0, 0.01, 2};
    const auto u = generate_synthetic(spec, 1);
    const fs::path p = dir_ / name;
    std::ofstream os(p);
    os << "date,ticker,adj_close\n";
    for (std::size_t t = 0; t < days; ++t) {
      for (std::size_t k = 0; k < tickers; ++k) {
        if (gap_every && k == 0 && t % gap_every == 1) continue;
        os << u.calendar.days[t].iso() << ',' << u.series[k].ticker << ',' << u.series[k].prices[t] << '\n';
      }
    }
    return p;
  }

  fs::path write_spec(const std::string& name, const std::string& json) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << json;
    return p;
  }

  fs::path dir_;
};

// Golden cells and histogram rendered from the day-by-day reference on the bundled fixture.
std::pair<std::string, std::string> reference_report(const PriceUniverse& u) {
  const reference::Params prm;
  const auto grid = make_grid(GridPreset::standard);
  std::vector<CellResult> cells;
  FptHistogram win{1, {}}, lose{1, {}};
  for (const auto& gc : grid.cells) {
    const auto th = gc.thresholds();
    CellResult c;
    c.thresholds = th;
    double sum = 0.0;
    for (std::size_t i = 0; i < u.n_tickers(); ++i) {
      for (std::size_t j = i + 1; j < u.n_tickers(); ++j) {
        const auto o = reference::play(u.series[i].prices, u.series[j].prices, prm,
                                       {th.theta.fraction(), th.epsilon.fraction(), th.omega.fraction()});
        if (!o || o->kind == reference::Kind::unresolved) continue;
        const bool w = o->kind == reference::Kind::win;
        ++(w ? c.n_w : c.n_l);
        ++(w ? win : lose).counts[o->t_decision - o->t_start];
        sum += o->profit;
      }
    }
    if (c.n_active() > 0) {
      c.p_w = static_cast<double>(c.n_w) / static_cast<double>(c.n_active());
      c.eta = sum / static_cast<double>(c.n_active());
    }
    cells.push_back(c);
  }
  std::ostringstream cs, hs;
  write_cells_csv(cs, cells);
  write_histogram_csv(hs, win, lose);
  return {cs.str(), hs.str()};
}

}  // namespace

TEST(ParseLevel, FractionsAndPercents) {
  EXPECT_EQ(cli::parse_level("0.2", "--theta").bp(), 2000);
  EXPECT_EQ(cli::parse_level("20%", "--theta").bp(), 2000);
  EXPECT_EQ(cli::parse_level("0.5%", "--theta").bp(), 50);
  EXPECT_THROW(cli::parse_level("abc", "--theta"), Error);
  EXPECT_THROW(cli::parse_level("%", "--theta"), Error);
}

TEST_F(Cli, IngestValidFile) {
  const auto csv = write_prices("prices.csv", 3, 501);
  const auto r = run_cli({"ingest", "--input", csv.string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tickers: 3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("evaluation_days: 251"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("dropped: 0"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / cli::kUniverseFile));
}

TEST_F(Cli, IngestDropsGappyTicker) {
  const auto csv = write_prices("prices.csv", 3, 500, 10);
  const auto r = run_cli({"ingest", "--input", csv.string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dropped: 1 S0000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("tickers: 2"), std::string::npos);
}

TEST_F(Cli, IngestMissingFile) {
  const auto r = run_cli({"ingest", "--input", (dir_ / "nope.csv").string(), "--out", dir_.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err.rfind("fptrade: error: io:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  const auto r = run_cli({"sweep", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("fptrade: error: usage:", 0), 0u);
}

TEST_F(Cli, SingleCellSweep) {
  const auto spec = data("fixture_spec.json").string();
  const auto r = run_cli({"sweep", "--synthetic-spec", spec, "--theta", "0.2", "--epsilon", "0.1", "--out",
                          dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream table(r.out);
  std::string header, eps, theta, omega;
  std::getline(table, header);
  table >> eps >> theta >> omega;
  EXPECT_EQ(eps, "10");
  EXPECT_EQ(theta, "20");
  EXPECT_EQ(omega, "30");
  const auto cells = slurp(dir_ / ReportFiles::cells);
  EXPECT_EQ(cells.substr(cells.find('\n') + 1, 9), "10,20,30,");
}

TEST_F(Cli, EpsilonAboveThetaRejected) {
  const auto spec = data("fixture_spec.json").string();
  const auto r = run_cli({"sweep", "--synthetic-spec", spec, "--epsilon", "0.3", "--theta", "0.2", "--out",
                          dir_.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("epsilon"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / ReportFiles::cells));
}

TEST_F(Cli, NeedsExactlyOneInput) {
  EXPECT_NE(run_cli({"sweep", "--out", dir_.string()}).code, 0);
  const auto spec = data("fixture_spec.json").string();
  const auto csv = write_prices("prices.csv", 3, 501);
  EXPECT_NE(run_cli({"sweep", "--synthetic-spec", spec, "--input", csv.string(), "--out", dir_.string()}).code, 0);
}

TEST_F(Cli, SynthIsDeterministic) {
  const auto spec = data("fixture_spec.json").string();
  ASSERT_EQ(run_cli({"synth", "--synthetic-spec", spec, "--out", (dir_ / "a").string()}).code, 0);
  ASSERT_EQ(run_cli({"synth", "--synthetic-spec", spec, "--out", (dir_ / "b").string()}).code, 0);
  ASSERT_EQ(run_cli({"synth", "--synthetic-spec", spec, "--seed", "8", "--out", (dir_ / "c").string()}).code, 0);
  const auto a = slurp(dir_ / "a" / cli::kUniverseFile);
  EXPECT_EQ(a, slurp(dir_ / "b" / cli::kUniverseFile));
  EXPECT_NE(a, slurp(dir_ / "c" / cli::kUniverseFile));
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const auto spec = data("fixture_spec.json").string();
  ::setenv("FPTRADE_OUT", (dir_ / "env").string().c_str(), 1);
  const auto r = run_cli({"synth", "--synthetic-spec", spec});
  ::unsetenv("FPTRADE_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "env" / cli::kUniverseFile));
}

TEST_F(Cli, StatsOnCorrelatedUniverse) {
  const auto spec = write_spec("s.json", R"({"n_tickers": 10, "n_days": 600, "blocks": [{"size": 10, "rho": 0.8}],
                                           "drift": 0.0, "step_vol": 0.01, "seed": 3})");
  const auto r = run_cli({"stats", "--synthetic-spec", spec.string(), "--day", "50", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto h = cli::distribution_at(generate_synthetic(load_synthetic_spec(spec.string()), 250), FilterParams{}, 50);
  std::size_t total = 0, near = 0;
  for (const auto& [bin, c] : h.rho) {
    total += c;
    const double lo = static_cast<double>(bin) * cli::kRhoBinWidth;
    if (lo >= 0.65 && lo < 0.95) near += c;
  }
  EXPECT_EQ(total, 45u);
  EXPECT_GT(near, total * 8 / 10);
  EXPECT_EQ(slurp(dir_ / cli::kRhoHistogramFile).rfind("bin_start,bin_width,count\n", 0), 0u);
}

TEST_F(Cli, StatsOnUncorrelatedUniverse) {
  const auto spec = write_spec("s.json", R"({"n_tickers": 12, "n_days": 600, "blocks": [],
                                           "drift": 0.0, "step_vol": 0.01, "seed": 4})");
  const auto h = cli::distribution_at(generate_synthetic(load_synthetic_spec(spec.string()), 250), FilterParams{}, 0);
  double weighted = 0.0;
  std::size_t total = 0;
  for (const auto& [bin, c] : h.rho) {
    weighted += (static_cast<double>(bin) + 0.5) * cli::kRhoBinWidth * static_cast<double>(c);
    total += c;
  }
  EXPECT_EQ(total, 66u);
  EXPECT_NEAR(weighted / static_cast<double>(total), 0.0, 0.1);
}

TEST_F(Cli, StatsOnSingleTicker) {
  const auto spec = write_spec("s.json", R"({"n_tickers": 1, "n_days": 600, "blocks": [],
                                           "drift": 0.0, "step_vol": 0.01, "seed": 4})");
  const auto r = run_cli({"stats", "--synthetic-spec", spec.string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rho_values: 0"), std::string::npos);
  EXPECT_NE(r.out.find("sigma_values: 1"), std::string::npos);
  EXPECT_EQ(slurp(dir_ / cli::kRhoHistogramFile), "bin_start,bin_width,count\n");
}

TEST_F(Cli, StatsDayOutsideWindow) {
  const auto spec = data("fixture_spec.json").string();
  const auto r = run_cli({"stats", "--synthetic-spec", spec, "--day", "5000", "--out", dir_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("invalid_argument"), std::string::npos) << r.err;
}

TEST_F(Cli, GoldenReport) {
  const auto spec = data("fixture_spec.json").string();
  const auto r = run_cli({"sweep", "--synthetic-spec", spec, "--workers", "2", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / ReportFiles::cells), slurp(data("golden/cells.csv")));
  EXPECT_EQ(slurp(dir_ / ReportFiles::histogram), slurp(data("golden/fpt_histogram.csv")));
}

TEST(Golden, MatchesDayByDayReference) {
  const auto u = generate_synthetic(load_synthetic_spec(data("fixture_spec.json").string()), kDefaultTau);
  const auto [cells, hist] = reference_report(u);
  if (const char* regen = std::getenv("FPTRADE_REGEN_GOLDEN"); regen && *regen == '1') {
    write_text_file(data("golden/cells.csv"), cells);
    write_text_file(data("golden/fpt_histogram.csv"), hist);
  }
  EXPECT_EQ(cells, slurp(data("golden/cells.csv")));
  EXPECT_EQ(hist, slurp(data("golden/fpt_histogram.csv")));
}

TEST(Binary, ExitStatusAndSingleLineError) {
  const std::string cmd = std::string(FPTRADE_CLI) + " ingest --input /nonexistent/x.csv 2>/dev/null";
  const int status = std::system(cmd.c_str());
  EXPECT_NE(status, 0);
  EXPECT_EQ(std::system((std::string(FPTRADE_CLI) + " --help >/dev/null").c_str()), 0);
}
