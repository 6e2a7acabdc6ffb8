#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pension_cli/commands.hpp"
#include "pension_cli/config.hpp"

#ifndef PENSION_CONFIG_DIR
#error "PENSION_CONFIG_DIR must point at configs/"
#endif

namespace fs = std::filesystem;
using namespace pension::cli;

namespace {

const fs::path kConfigs = PENSION_CONFIG_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pension_cli_test_" + name);
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

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const char* kMinimal = R"(grid:
  step: 0.5
  t_max: 20
  y_max: 80
intensities:
  gamma: 0.1
  sigma: 0.02
  spouse_mortality:
    base: 0.01
  age_at_marriage: {type: uniform, lo: 20, hi: 40}
  death: {type: mortality, curve: 0.03}
short_rate: 0.03
policies:
  - {name: life, kind: lifelong_annuity}
simulation: {n_paths: 2000, seed: 3}
)";

}  // namespace

TEST_CASE("missing grid.step is a validation error naming the field") {
  const fs::path dir = scratch("missing");
  std::string text = kMinimal;
  text.replace(text.find("  step: 0.5\n"), 12, "");
  const auto cfg = write(dir, "c.yaml", text);
  const auto r = invoke({"value", "--config", cfg.string(), "--out", (dir / "out").string()});
  CHECK(r.code == kValidationError);
  CHECK(r.err.find("grid.step") != std::string::npos);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("malformed values report their line") {
  const fs::path dir = scratch("malformed");
  std::string text = kMinimal;
  text.replace(text.find("gamma: 0.1"), 10, "gamma: fast");
  const auto r = invoke({"solve-marital", "--config", write(dir, "c.yaml", text).string(), "--out",
                         (dir / "out").string()});
  CHECK(r.code == kValidationError);
  CHECK(r.err.find("intensities.gamma") != std::string::npos);
  CHECK(r.err.find("line 6") != std::string::npos);

  std::string typo = kMinimal;
  typo.replace(typo.find("t_max: 20"), 5, "tmax:");
  const auto t = invoke({"solve-marital", "--config", write(dir, "d.yaml", typo).string()});
  CHECK(t.code == kValidationError);
  CHECK(t.err.find("grid.tmax") != std::string::npos);

  const auto y = invoke({"solve-marital", "--config", write(dir, "e.yaml", "grid: [1, 2").string()});
  CHECK(y.code == kValidationError);
}

TEST_CASE("command line errors") {
  CHECK(invoke({}).code == kValidationError);
  CHECK(invoke({"frobnicate", "--config", "x"}).code == kValidationError);
  CHECK(invoke({"value"}).code == kValidationError);  // --config is required
  CHECK(invoke({"value", "--config", "/nonexistent/file.yaml"}).code == kValidationError);
}

TEST_CASE("engine validation errors and truncation failures") {
  const fs::path dir = scratch("engine");
  std::string grid = kMinimal;
  grid.replace(grid.find("step: 0.5"), 9, "step: 0.3");  // does not divide t_max
  CHECK(invoke({"solve-marital", "--config", write(dir, "a.yaml", grid).string(), "--out",
                (dir / "a").string()})
            .code == kValidationError);

  std::string trunc = kMinimal;
  trunc.replace(trunc.find("sigma: 0.02"), 11, "sigma: 2.0");
  trunc += "truncation: {nu_cap: 2}\n";
  const auto r = invoke({"solve-marital", "--config", write(dir, "b.yaml", trunc).string(), "--out",
                         (dir / "b").string()});
  CHECK(r.code == kNumericalError);
  CHECK(r.err.find("not converged") != std::string::npos);
}

TEST_CASE("value on the annuity toy") {
  const fs::path out = scratch("toy");
  const auto r = invoke({"value", "--config", (kConfigs / "toy_annuity.yaml").string(), "--out",
                         out.string(), "--quiet"});
  REQUIRE(r.code == kSuccess);
  CHECK(r.out.empty());
  const std::string summary = slurp(out / "summary.csv");
  std::istringstream lines(summary);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "policy,kind,liability,expected_total_payment,death_mass_beyond_horizon");
  const auto first = row.find(',');
  const auto second = row.find(',', first + 1);
  const double L = std::stod(row.substr(second + 1));
  CHECK(L == doctest::Approx(6.6628680696966371).epsilon(1e-6));
  CHECK(fs::exists(out / "cashflow_lifelong.csv"));
  CHECK(slurp(out / "summary.txt").find("L = ") != std::string::npos);
}

TEST_CASE("config echo round-trips") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    const ScenarioConfig original = load_config(entry.path());
    const ScenarioConfig again = parse_config(echo_config(original));
    CHECK(again == original);
    CHECK(echo_config(again) == echo_config(original));
  }
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  const fs::path dir = scratch("determinism");
  const auto cfg = write(dir, "c.yaml", kMinimal);
  for (const char* cmd : {"solve-marital", "value", "simulate", "compare"}) {
    CAPTURE(cmd);
    const fs::path a = dir / (std::string(cmd) + "_a");
    const fs::path b = dir / (std::string(cmd) + "_b");
    const int ca = invoke({cmd, "--config", cfg.string(), "--out", a.string(), "--quiet"}).code;
    const int cb = invoke({cmd, "--config", cfg.string(), "--out", b.string(), "--quiet"}).code;
    CHECK(ca == cb);
    std::size_t files = 0;
    for (const auto& f : fs::directory_iterator(a)) {
      ++files;
      CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
    }
    CHECK(files >= 2);
  }
  // A different seed changes the simulation.
  const fs::path c = dir / "seed";
  invoke({"simulate", "--config", cfg.string(), "--out", c.string(), "--seed", "4", "--quiet"});
  CHECK(slurp(c / "simulated_marital.csv") != slurp(dir / "simulate_a" / "simulated_marital.csv"));
}

TEST_CASE("overrides and g82 mode") {
  const fs::path dir = scratch("g82");
  const auto r = invoke({"g82-check", "--config", (kConfigs / "g82_lifecycle.yaml").string(),
                         "--out", dir.string(), "--step", "0.25", "--quiet"});
  CHECK(r.code == kSuccess);
  const std::string echo = slurp(dir / "config_echo.yaml");
  CHECK(echo.find("step: 0.25") != std::string::npos);
  const auto s = invoke({"solve-marital", "--config", (kConfigs / "g82_lifecycle.yaml").string(),
                         "--out", (dir / "solve").string(), "--step", "0.25", "--quiet"});
  CHECK(s.code == kSuccess);
  CHECK(slurp(dir / "solve" / "marital.csv").rfind("x,g,", 0) == 0);
}
