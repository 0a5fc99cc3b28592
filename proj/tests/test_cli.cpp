#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedpriv/cli.hpp"
#include "fedpriv/errors.hpp"
#include "fedpriv/harness.hpp"

using namespace fedpriv;
namespace fs = std::filesystem;

namespace {

const char* kBase =
    "m = 5\nn = 5\nsigma = 1\ns = 1\nepsilon = 0.5\ndelta = 0.001\nalpha = 0.05\n";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fedpriv_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Data rows of a CSV written by write_csv (comment lines and header skipped).
std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

std::vector<std::string> header_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("#", 0) != 0) break;
  std::vector<std::string> cells;
  std::stringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST(Config, IniAndJsonAgree) {
  const RunConfig a = RunConfig::parse(std::string(kBase) + "# comment\np = inf\n");
  const RunConfig b = RunConfig::parse(
      R"({"m":5,"n":5,"sigma":1,"s":1,"epsilon":0.5,"delta":0.001,"alpha":0.05,"p":"inf"})");
  EXPECT_EQ(a.model().m, b.model().m);
  EXPECT_EQ(a.model().epsilon, b.model().epsilon);
  EXPECT_TRUE(std::isinf(a.model().p));
  EXPECT_TRUE(std::isinf(b.model().p));
}

TEST(Config, Errors) {
  auto msg = [](const std::string& text) {
    try {
      RunConfig::parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg("m = 5\nn = 5\nsigma = 1\ns = 1\ndelta = 0.001\nalpha = 0.05\n").find("epsilon"),
            std::string::npos);
  EXPECT_NE(msg(std::string(kBase) + "bogus = 1\n").find("bogus"), std::string::npos);
  EXPECT_FALSE(msg(std::string(kBase) + "m = 6\n").empty());
  EXPECT_FALSE(msg(std::string(kBase) + "nonsense line\n").empty());
  EXPECT_FALSE(msg("m = 5\nn = 5\nsigma = 1\ns = 1\nepsilon = 2\ndelta = 0.001\nalpha = 0.05\n")
                   .empty());
  EXPECT_FALSE(msg("{\"m\": 5").empty());
}

TEST(Config, Lists) {
  RunConfig c = RunConfig::parse(std::string(kBase) + "eps_grid = log:0.05:1:50\n");
  const auto g = c.list("eps_grid");
  ASSERT_EQ(g.size(), 50u);
  EXPECT_EQ(g.front(), 0.05);
  EXPECT_EQ(g.back(), 1.0);
  c.set("rho_grid", "0.1, 0.2,0.3");
  EXPECT_EQ(c.list("rho_grid").size(), 3u);
  c.set("rho_grid", "lin:0:1:5");
  EXPECT_NEAR(c.list("rho_grid")[1], 0.25, 1e-15);
  EXPECT_ANY_THROW(c.set("m", "0"));
  EXPECT_EQ(c.model().m, 5);  // failed set leaves the config untouched
}

TEST(Cli, MissingEpsilonExitsTwo) {
  const fs::path dir = scratch("missing");
  std::ofstream(dir / "cfg.ini") << "m = 5\nn = 5\nsigma = 1\ns = 1\ndelta = 0.001\nalpha = 0.05\n";
  RunOptions o;
  o.command = "rates";
  o.out_dir = (dir / "out").string();
  std::string err;
  EXPECT_EQ(run((dir / "cfg.ini").string(), o, &err), 2);
  EXPECT_NE(err.find("epsilon"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out" / "rates.csv"));
}

TEST(Cli, UnwritableOutputExitsThree) {
  const fs::path dir = scratch("unwritable");
  std::ofstream(dir / "cfg.ini") << kBase;
  std::ofstream(dir / "blocker") << "x";
  RunOptions o;
  o.command = "rates";
  o.out_dir = (dir / "blocker" / "sub").string();
  EXPECT_EQ(run((dir / "cfg.ini").string(), o), 3);
}

TEST(Cli, RatesOverFigureGrid) {
  const fs::path dir = scratch("rates");
  const RunConfig cfg = RunConfig::parse(std::string(kBase) + "eps_grid = log:0.05:1:50\n");
  RunOptions o;
  o.command = "rates";
  o.out_dir = dir.string();
  run_command(cfg, o);
  const auto rows = rows_of(dir / "rates.csv");
  ASSERT_EQ(rows.size(), 50u);
  double prev = 1e300;
  for (const auto& r : rows) {
    const double rho2 = std::stod(r[1]);
    EXPECT_LE(rho2, prev);
    prev = rho2;
  }
  const std::string text = slurp(dir / "rates.csv");
  EXPECT_EQ(text.rfind("# fedpriv rates run_id=", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "rates.json"));
}

TEST(Cli, RegimesStackBothModes) {
  const fs::path dir = scratch("regimes");
  const RunConfig cfg = RunConfig::parse(std::string(kBase) +
                                         "eps_grid = log:0.05:1:10\ns_grid = 0.2,1\n"
                                         "shared = true\nlocal = true\n");
  RunOptions o;
  o.command = "regimes";
  o.out_dir = dir.string();
  run_command(cfg, o);
  const auto header = header_of(dir / "regimes.csv");
  const auto col = std::find(header.begin(), header.end(), "shared") - header.begin();
  ASSERT_LT(col, static_cast<long>(header.size()));
  const auto rows = rows_of(dir / "regimes.csv");
  ASSERT_EQ(rows.size(), 40u);
  int shared = 0;
  for (const auto& r : rows) shared += r[col] == "1" || r[col] == "true";
  EXPECT_EQ(shared, 20);
}

TEST(Cli, SidecarReplaysRun) {
  const fs::path a = scratch("sidecar_a"), b = scratch("sidecar_b");
  const RunConfig cfg = RunConfig::parse(std::string(kBase) + "eps_grid = log:0.05:1:7\n");
  RunOptions o;
  o.command = "rates";
  o.out_dir = a.string();
  run_command(cfg, o);
  const RunConfig replay = RunConfig::load((a / "rates.json").string());
  o.out_dir = b.string();
  run_command(replay, o);
  EXPECT_EQ(slurp(a / "rates.csv"), slurp(b / "rates.csv"));
}

TEST(Cli, RiskDeterministicAcrossWorkers) {
  const fs::path a = scratch("risk_a"), b = scratch("risk_b");
  const RunConfig cfg = RunConfig::parse(std::string(kBase) +
                                         "protocol = II\nL = 3\nrho = 0.5\nsignal = uniform\n"
                                         "reps = 200\ncalib_reps = 1000\nseed = 17\n");
  RunOptions o;
  o.command = "risk";
  o.out_dir = a.string();
  o.workers = 1;
  run_command(cfg, o);
  o.out_dir = b.string();
  o.workers = 4;
  run_command(cfg, o);
  EXPECT_EQ(slurp(a / "risk.csv"), slurp(b / "risk.csv"));
  EXPECT_EQ(slurp(a / "risk_mechanisms.csv"), slurp(b / "risk_mechanisms.csv"));
}

TEST(Cli, FigureBundle) {
  const fs::path dir = scratch("figure2");
  const auto files = emit_figure2_bundle(dir.string());
  ASSERT_EQ(files.size(), 17u);
  int csv = 0;
  for (const auto& e : fs::directory_iterator(dir)) csv += e.path().extension() == ".csv";
  EXPECT_EQ(csv, 16);
  EXPECT_TRUE(fs::exists(dir / "figure2.gp"));
  for (const auto& f : files) {
    if (fs::path(f).extension() != ".csv") continue;
    const auto rows = rows_of(f);
    ASSERT_EQ(rows.size(), 50u) << f;
    for (std::size_t i = 1; i < rows.size(); ++i)
      EXPECT_LE(std::stod(rows[i][1]), std::stod(rows[i - 1][1])) << f;
    const std::string name = fs::path(f).filename().string();
    const auto pos = name.find("_shared.csv");
    if (pos == std::string::npos) continue;
    const fs::path local = fs::path(f).parent_path() / (name.substr(0, pos) + "_local.csv");
    const auto lrows = rows_of(local);
    for (std::size_t i = 0; i < rows.size(); ++i)
      EXPECT_LE(std::stod(rows[i][1]), std::stod(lrows[i][1]) * (1 + 1e-12)) << f;
  }
}
