#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "gilbert/analytic_recurrence.hpp"

using namespace gilbert;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Parsed CSV body (comment line checked, header kept as row 0).
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "# gilbert-csv v1");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch_dir() {
  const auto d = fs::temp_directory_path() / "gilbert_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("coeffs rows and round trip") {
  auto r = run({"coeffs", "--q", "1/2", "--n-max", "4"});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"n", "h", "h_decimal", "decimal_error"});
  const std::vector<std::string> want{"1", "1/2", "1/3", "29/120", "11/60"};
  for (std::size_t n = 0; n < want.size(); ++n) CHECK(rows[n + 1][1] == want[n]);
  // recompute the decimals from the exact strings
  r = run({"coeffs", "--q", "3/10", "--n-max", "30"});
  rows = csv_rows(r.out);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const mpq_class exact = parse_rational(rows[i][1]);
    const double d = std::stod(rows[i][2]);
    // nearest double: within half an ulp
    const mpq_class err = abs(mpq_class(d) - exact);
    CHECK(err.get_d() <= 0.5 * (std::nextafter(d, 2.0) - d));
    CHECK(std::stod(rows[i][3]) == err.get_d());
  }
  r = run({"coeffs", "--q", "0", "--n-max", "5"});
  rows = csv_rows(r.out);
  CHECK(rows[1][1] == "1");
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(rows[i][1] == "0");
}

TEST_CASE("json mirrors csv") {
  const auto c = run({"coeffs", "--n-max", "6"});
  const auto j = run({"coeffs", "--n-max", "6", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  const auto rows = csv_rows(c.out);
  CHECK(doc["schema"] == "gilbert-csv v1");
  CHECK(doc["columns"].size() == rows[0].size());
  REQUIRE(doc["rows"].size() == rows.size() - 1);
  CHECK(doc["rows"][4][1] == rows[5][1]);
}

TEST_CASE("dist at ell = 0 for every model") {
  for (const char* m : {"half-exact", "full-sim", "meanfield-half", "meanfield-full"}) {
    CAPTURE(m);
    const auto r = run({"dist", "--model", m, "--grid", "0", "--reps", "1000"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][1]) == 0.0);
    CHECK(std::stod(rows[1][3]) == 0.0);
  }
}

TEST_CASE("mean-field pdf column at q = 1/2") {
  for (auto [model, lambda] : {std::pair{"meanfield-half", "2"}, std::pair{"meanfield-full", "1"}}) {
    const auto r = run({"dist", "--model", model, "--lambda", lambda, "--grid", "0:4:0.25"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double l = std::stod(rows[i][0]);
      const double s = 1.0 / std::cosh(l / std::sqrt(2.0));
      const double want = std::sqrt(2.0) * s * s * std::tanh(l / std::sqrt(2.0));
      CHECK(std::abs(std::stod(rows[i][1]) - want) < 1e-10);
    }
  }
}

TEST_CASE("half model at lambda 2 overlays the simulated full model at lambda 1") {
  const auto half = run({"dist", "--model", "half-exact", "--lambda", "2"});
  const auto full = run({"dist", "--model", "full-sim", "--lambda", "1", "--reps", "1000000",
                         "--seed", "3"});
  REQUIRE(half.code == 0);
  REQUIRE(full.code == 0);
  const auto a = csv_rows(half.out), b = csv_rows(full.out);
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    CHECK(a[i][0] == b[i][0]);
    worst = std::max(worst, std::abs(std::stod(a[i][1]) - std::stod(b[i][1])));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("simulate-full output is reproducible byte for byte") {
  const auto dir = scratch_dir();
  const auto p1 = (dir / "sf1.csv").string(), p2 = (dir / "sf2.csv").string();
  REQUIRE(run({"simulate-full", "--reps", "50000", "--seed", "42", "--out", p1}).code == 0);
  REQUIRE(run({"simulate-full", "--reps", "50000", "--seed", "42", "--threads", "3", "--out", p2})
              .code == 0);
  CHECK(slurp(p1) == slurp(p2));
  const auto m = nlohmann::json::parse(slurp(p1 + ".manifest.json"));
  CHECK(m["subcommand"] == "simulate-full");
  CHECK(m["parameters"]["q"] == "1/2");
  CHECK(m["parameters"]["seed"] == 42);
  CHECK(m["artifacts"][0]["sha256"] == cli::sha256_hex(slurp(p1)));
  const auto rows = csv_rows(slurp(p1));
  CHECK(rows[0].size() == 6);
  CHECK(rows[0][4] == "uncertainty");
}

TEST_CASE("moments prints every route with its label") {
  const auto r = run({"moments", "--q", "1/2", "--lambda", "2"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  auto find = [&](const std::string& q, const std::string& src) -> double {
    for (const auto& row : rows)
      if (row[0] == q && row[1] == src) return std::stod(row[3]);
    FAIL("missing row " << q << " " << src);
    return 0.0;
  };
  CHECK(std::abs(find("mean_length", "exact-closed-form") - 1.479337560) < 5e-10);
  CHECK(find("mean_length", "meanfield-full") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(find("mean_length", "meanfield-half") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(find("mean_length", "series-200") - 1.479337560) < 1e-6);
}

TEST_CASE("tessellate writes svg, csv and a manifest") {
  const auto dir = scratch_dir();
  const auto out = (dir / "tess.svg").string();
  const auto r = run({"tessellate", "--model", "half", "--q", "1/2", "--lambda", "2", "--out", out});
  REQUIRE(r.code == 0);
  const auto svg = slurp(out), csv = slurp(dir / "tess.csv");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(csv.rfind("# gilbert-csv v1\nseed_x,seed_y,kind,direction,length,truncated\n", 0) == 0);
  const auto m = nlohmann::json::parse(slurp(out + ".manifest.json"));
  REQUIRE(m["artifacts"].size() == 2);
  CHECK(m["artifacts"][0]["sha256"] == cli::sha256_hex(svg));
  CHECK(m["artifacts"][1]["sha256"] == cli::sha256_hex(csv));
  // same seed, same bytes
  const auto out2 = (dir / "tess2.svg").string();
  REQUIRE(run({"tessellate", "--model", "half", "--lambda", "2", "--out", out2}).code == 0);
  CHECK(slurp(out2) == svg);
}

TEST_CASE("taylor coefficients over 720") {
  const auto rows = csv_rows(run({"taylor"}).out);
  REQUIRE(rows.size() == 9);
  CHECK(rows[4][0] == "half");
  CHECK(rows[4][4] == "-31");
  CHECK(rows[8][0] == "full");
  CHECK(rows[8][4] == "-32");
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"nonsense"}).code == cli::kUsage);
  CHECK(run({"coeffs", "--q", "3/2"}).code == cli::kUsage);
  CHECK(run({"coeffs", "--q", "abc"}).code == cli::kUsage);
  CHECK(run({"coeffs", "--format", "svg"}).code == cli::kUsage);
  CHECK(run({"dist", "--model", "bogus"}).code == cli::kUsage);
  CHECK(run({"dist", "--model", "half-exact", "--grid", "0:1:0"}).code == cli::kUsage);
  CHECK(run({"dist", "--model", "half-exact", "--grid", "-1"}).code == cli::kUsage);
  CHECK(run({"tessellate"}).code == cli::kUsage);
  CHECK(run({"coeffs", "--help"}).code == cli::kOk);
  // flagged numerics still write their output
  const auto far = run({"dist", "--model", "half-exact", "--grid", "40"});
  CHECK(far.code == cli::kNumerical);
  CHECK_FALSE(far.out.empty());
  const auto capped = run({"simulate-full", "--q", "1", "--reps", "10", "--n-cap", "20"});
  CHECK(capped.code == cli::kNumerical);
  CHECK(capped.err.find("cap") != std::string::npos);
}

TEST_CASE("grid parsing") {
  CHECK(cli::parse_grid("0:1:0.25") == std::vector<double>{0, 0.25, 0.5, 0.75, 1.0});
  CHECK(cli::parse_grid("0.5,2") == std::vector<double>{0.5, 2});
  CHECK_THROWS(cli::parse_grid("1:0:0.1"));
  CHECK_THROWS(cli::parse_grid("0:1"));
  CHECK_THROWS(cli::parse_grid("x"));
}
