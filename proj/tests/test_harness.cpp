#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fhd/config.hpp"
#include "fhd/errors.hpp"
#include "fhd/gronwall.hpp"
#include "fhd/manufactured.hpp"
#include "fhd/snapshot.hpp"
#include "fhd/spectral.hpp"
#include "fhd/sweep.hpp"
#include "support/oracles.hpp"

using namespace fhd;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "fhd-harness-tests" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig cfg = parse_config_text("");
  CHECK(cfg.grid.dim == 2);
  CHECK(cfg.grid.m == 64);
  CHECK(cfg.model.pressure.kappa() == 1.0);
  CHECK(cfg.model.pressure.gamma() == 2.0);
  CHECK_FALSE(cfg.model.friction.enabled());
  CHECK(cfg.model.attraction.is_zero());
  CHECK(cfg.model.epsilon == 0.0);
  CHECK(cfg.integrator.cfl == 0.4);
  CHECK(cfg.integrator.samples == 50);
  CHECK(cfg.sweep.epsilons.empty());
  CHECK(cfg.sweep.preset == "gaussian-bump-flock");
  CHECK(cfg.sweep.workers == 4);
  CHECK(cfg.sweep.forcing);
  CHECK(cfg.output.directory == "out");
}

TEST_CASE("config write/parse round-trip is idempotent") {
  RunConfig cfg;
  cfg.grid.m = 12;
  cfg.model.pressure = PressureLaw(0.8, 1.4);
  cfg.model.friction = FrictionLaw::saturating(0.3);
  cfg.model.epsilon = 2e-3;
  cfg.model.density_reg = 1e-4;
  cfg.model.attraction = KernelSpec::cosine(1.25);
  cfg.model.alignment = KernelSpec::fourier_table({{{1, 0, 0}, 0.5}, {{1, 1, 0}, 0.25}});
  cfg.integrator.cfl = 0.3;
  cfg.integrator.dt_max = 0.01;
  cfg.integrator.t_end = 0.5;
  cfg.integrator.rho_floor_rel = 1e-7;
  cfg.integrator.samples = 17;
  cfg.sweep.epsilons = {1e-1, 1e-2};
  cfg.sweep.preset = "uniform-rest";
  cfg.sweep.workers = 2;
  cfg.sweep.perturb_delta = 0.01;
  cfg.sweep.forcing = false;
  cfg.output.directory = "artifacts";
  cfg.output.write_snapshots = false;

  const std::string text = write_config(cfg);
  const RunConfig back = parse_config_text(text);
  CHECK(write_config(back) == text);

  CHECK(back.model.pressure.gamma() == 1.4);
  CHECK(back.model.friction.h_inf() == 0.3);
  CHECK(back.model.alignment.modes(2).size() == 2);
  CHECK(back.sweep.epsilons == std::vector<double>{1e-1, 1e-2});
  CHECK_FALSE(back.sweep.forcing);
}

TEST_CASE("config rejects malformed input") {
  auto bad = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config_text(text), ConfigError);
  };
  bad("x = 1\n");                                  // key outside any section
  bad("[mystery]\n");                              // unknown section
  bad("[grid]\nq = 1\n");                          // unknown key
  bad("[grid]\nm = 9\n");                          // odd grid size
  bad("[grid]\nm = 2\n");                          // too small
  bad("[grid]\ndim = 4\n");                        // unsupported dimension
  bad("[grid]\nm = 8\nm = 16\n");                  // duplicate key
  bad("[grid]\nm\n");                              // no equals sign
  bad("[grid\nm = 8\n");                           // unterminated header
  bad("[grid]\nm = eight\n");                      // bad integer
  bad("[model]\ngamma = 1\n");                     // excluded adiabatic exponent
  bad("[model]\nkappa = abc\n");                   // bad number
  bad("[model]\nh_inf = 0.5\n");                   // h_inf without friction
  bad("[model]\nfriction = saturating\n");         // friction without h_inf
  bad("[model]\nfriction = off\nh_inf = 1\n");     // h_inf with friction off
  bad("[model]\nfriction = sticky\nh_inf = 1\n");  // unknown law
  bad("[model]\nattraction_amplitude = 1\n");      // amplitude without kind
  bad("[model]\nattraction = table\n");            // table kind without table
  bad("[model]\nattraction = zero\nattraction_amplitude = 1\n");
  bad("[model]\nattraction = cosine\nattraction_table = 1,0:1\n");
  bad("[model]\nattraction = spline\n");
  bad("[model]\nalignment = table\nalignment_table = 1,0,1:0.5\n");  // axis beyond dim
  bad("[model]\nalignment = table\nalignment_table = 1:0.5\n");      // short wavevector
  bad("[model]\nalignment = table\nalignment_table = \n");           // empty table
  bad("[integrator]\nscheme = rk4\n");
  bad("[integrator]\ncfl = fast\n");
  bad("[sweep]\nepsilons = 1e-2, 1e-2\n");  // not strictly decreasing
  bad("[sweep]\nepsilons = 1e-2, -1e-3\n");
  bad("[sweep]\nepsilons = 1e-2,,1e-3\n");
  bad("[sweep]\nworkers = 0\n");
  bad("[sweep]\nforcing = maybe\n");
  bad("[output]\ndirectory =\n");

  // a sine basis entry names an odd kernel, which the model excludes
  try {
    parse_config_text("[model]\nalignment = table\nalignment_table = 1,0:0.5:sin\n");
    FAIL("sine kernel term was accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("asymmetric") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_file("/nonexistent/fhd.ini"), ConfigError);
}

TEST_CASE("config comments and file loading") {
  const fs::path dir = fresh_dir("config-file");
  const fs::path path = dir / "run.ini";
  std::ofstream(path) << "# header comment\n[grid]\n# interior comment\nm = 8\n\n[model]\n"
                         "epsilon = 1e-3\n";
  const RunConfig cfg = parse_config_file(path.string());
  CHECK(cfg.grid.m == 8);
  CHECK(cfg.model.epsilon == 1e-3);
}

TEST_CASE("format_g17 round-trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, 2.0, -2.5e-17, 1e300, 5e-324, 0.0, pi}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("snapshot persistence round-trips bitwise") {
  const fs::path dir = fresh_dir("snapshots");
  TorusGrid g(2, 8);
  std::mt19937_64 rng(701);
  FluidState s(g);
  s.time = 0.1 + 1.0 / 3.0;
  s.rho = oracles::random_field(g, rng, 0.5, 2.0);
  s.momentum[0] = oracles::random_field(g, rng, -1.0, 1.0);
  s.momentum[1] = oracles::random_field(g, rng, -1.0, 1.0);

  const std::string path = (dir / "state.bin").string();
  persist_snapshot(s, path);
  const FluidState back = load_snapshot(path, g);
  CHECK(back.time == s.time);
  CHECK(back.rho.values == s.rho.values);
  CHECK(back.momentum[0].values == s.momentum[0].values);
  CHECK(back.momentum[1].values == s.momentum[1].values);

  // header carries the time in full 17-digit precision
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header.find(format_g17(s.time)) != std::string::npos);

  CHECK_THROWS_AS(load_snapshot(path, TorusGrid(2, 16)), ConfigError);
  CHECK_THROWS_AS(load_snapshot((dir / "missing.bin").string()), ConfigError);

  const std::string broken = (dir / "broken.bin").string();
  std::ofstream(broken) << "not json\n";
  CHECK_THROWS_AS(load_snapshot(broken), ConfigError);

  // truncated payload
  const std::string whole = slurp(path);
  std::ofstream(dir / "cut.bin", std::ios::binary) << whole.substr(0, whole.size() - 16);
  CHECK_THROWS_AS(load_snapshot((dir / "cut.bin").string()), ConfigError);
}

TEST_CASE("manufactured presets") {
  const auto& names = ManufacturedSolution::preset_names();
  CHECK(std::find(names.begin(), names.end(), "gaussian-bump-flock") != names.end());
  CHECK(std::find(names.begin(), names.end(), "uniform-rest") != names.end());
  CHECK_THROWS_AS(ManufacturedSolution::preset("nonesuch"), ConfigError);

  const auto ms = ManufacturedSolution::preset("gaussian-bump-flock");
  CHECK(ms.density_floor() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(ManufacturedSolution::preset("uniform-rest").density_floor() == 1.0);

  TorusGrid g(2, 16);
  const FluidState s = ms.state(0.5, g);
  // center point x = y = 0 carries the full bump amplitude
  const std::size_t center = static_cast<std::size_t>(8 * 16 + 8);
  CHECK(s.rho.values[center] ==
        doctest::Approx(1.0 + 0.2 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(min_value(ms.density(3.0, g)) >= 0.8);
}

namespace {

ModelSpec sweep_model() {
  ModelSpec m;
  m.pressure = PressureLaw(0.8, 1.4);
  m.friction = FrictionLaw::saturating(0.5);
  m.attraction = KernelSpec::cosine(0.5);
  m.alignment = KernelSpec::cosine(0.4);
  return m;
}

}  // namespace

TEST_CASE("uniform rest preset needs no sources") {
  TorusGrid g(2, 16);
  const auto ms = ManufacturedSolution::preset("uniform-rest");
  const auto forcing = ms.sources(sweep_model(), g);
  ScalarField f_rho(g);
  VectorField f_m(g);
  forcing->eval(0.3, g, f_rho, f_m);
  CHECK(max_abs(f_rho) < 1e-14);
  CHECK(max_abs(f_m[0]) < 1e-14);
  CHECK(max_abs(f_m[1]) < 1e-14);
}

TEST_CASE("manufactured residual sits at roundoff") {
  TorusGrid g(2, 16);
  const auto ms = ManufacturedSolution::preset("gaussian-bump-flock");
  const ModelSpec m = sweep_model();
  CHECK(ms.residual(m, g, 0.0) < 1e-11);
  CHECK(ms.residual(m, g, 0.4) < 1e-11);
}

namespace {

double source_grid_gap(const ModelSpec& m) {
  const auto ms = ManufacturedSolution::preset("gaussian-bump-flock");
  TorusGrid coarse(2, 16), fine(2, 32);
  ScalarField fr_c(coarse), fr_f(fine);
  VectorField fm_c(coarse), fm_f(fine);
  ms.sources(m, coarse)->eval(0.3, coarse, fr_c, fm_c);
  ms.sources(m, fine)->eval(0.3, fine, fr_f, fm_f);

  double worst = 0.0;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      const std::size_t ic = static_cast<std::size_t>(a) * 16 + b;
      const std::size_t jf = static_cast<std::size_t>(2 * a) * 32 + 2 * b;
      worst = std::max(worst, std::abs(fr_c.values[ic] - fr_f.values[jf]));
      for (int k = 0; k < 2; ++k)
        worst = std::max(worst, std::abs(fm_c[k].values[ic] - fm_f[k].values[jf]));
    }
  return worst;
}

}  // namespace

TEST_CASE("sources are grid-independent on shared points") {
  // With polynomial closures (quadratic pressure, no friction) every term is
  // band-limited and the sources agree to roundoff across grids.
  ModelSpec poly = sweep_model();
  poly.pressure = PressureLaw(0.8, 2.0);
  poly.friction = FrictionLaw::off();
  CHECK(source_grid_gap(poly) < 1e-13);

  // gamma = 1.4 pressure and the saturating friction factor are analytic but
  // not band-limited; their truncation tails dominate the cross-grid gap.
  CHECK(source_grid_gap(sweep_model()) < 1e-9);
}

TEST_CASE("gronwall certificate handles degenerate and synthetic series") {
  std::vector<double> times, zero, synth;
  const double eps = 1e-2;
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    times.push_back(t);
    zero.push_back(0.0);
    synth.push_back(eps * std::exp(2.0 * t));
  }

  const auto flat = gronwall_certificate(times, zero, zero, eps);
  CHECK(flat.pass);
  CHECK(flat.c_fit == 0.0);

  // planted envelope S = eps * e^{2 tau}: recover c = 2, budget = eps
  const auto grown = gronwall_certificate(times, synth, zero, eps);
  CHECK(grown.pass);
  CHECK(grown.c_fit == doctest::Approx(2.0).epsilon(0.05));
  CHECK(grown.gamma_fit == doctest::Approx(1.0).epsilon(0.05));
  CHECK(grown.gamma_budget == doctest::Approx(eps).epsilon(0.05));

  // the certificate's witness is the discrete inequality
  // S_k <= c * cumtrapz(S)_k + gamma_budget, which must actually hold
  double cum = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) cum += 0.5 * (synth[k] + synth[k - 1]) * (times[k] - times[k - 1]);
    CHECK(synth[k] <= grown.c_fit * cum + grown.gamma_budget * (1.0 + 1e-9));
  }

  std::vector<double> with_nan = synth;
  with_nan[50] = std::nan("");
  CHECK_THROWS_AS(gronwall_certificate(times, with_nan, zero, eps), std::invalid_argument);
  std::vector<double> short_series(times.size() - 1, 0.0);
  CHECK_THROWS_AS(gronwall_certificate(times, short_series, zero, eps), std::invalid_argument);
  std::vector<double> bad_times = times;
  bad_times[10] = bad_times[9];
  CHECK_THROWS_AS(gronwall_certificate(bad_times, zero, zero, eps), std::invalid_argument);

  CHECK(gronwall_stable(std::vector<double>{1.0, 1.1, 0.9}));
  CHECK_FALSE(gronwall_stable(std::vector<double>{1.0, 2.0, 1.0}));
  CHECK(gronwall_stable(std::vector<double>{0.0, 0.0}));
}

namespace {

RunConfig smoke_config(const std::string& leaf) {
  RunConfig cfg;
  cfg.grid.m = 16;
  cfg.model = sweep_model();
  cfg.model.pressure = PressureLaw(1.0, 2.0);
  cfg.model.density_reg = 1e-3;
  cfg.integrator.t_end = 0.2;
  cfg.integrator.samples = 20;
  cfg.sweep.epsilons = {3e-2, 1e-2};
  cfg.sweep.workers = 2;
  cfg.output.directory = fresh_dir(leaf).string();
  return cfg;
}

}  // namespace

TEST_CASE("single run writes a complete artifact set") {
  RunConfig cfg = smoke_config("single");
  cfg.model.epsilon = 1e-2;
  const RunArtifacts arts = run_single(cfg);
  CHECK(arts.result.valid);
  CHECK(arts.result.steps > 0);
  CHECK(std::isfinite(arts.sup_entropy));
  CHECK(arts.sup_entropy >= 0.0);
  CHECK(arts.sup_l1_gap >= 0.0);
  CHECK(arts.certificate.pass);

  const fs::path dir = cfg.output.directory;
  CHECK(fs::exists(dir / "config.ini"));
  CHECK(fs::exists(dir / "entropy.csv"));
  CHECK(fs::exists(dir / "snapshot_0000.bin"));
  CHECK(fs::exists(dir / "snapshot_0020.bin"));

  const std::string energy = slurp(dir / "energy.csv");
  CHECK(energy.rfind(
            "time,kinetic,internal,interaction,total,visc_diss,reg_diss,friction_prod,"
            "align_diss,defect\n",
            0) == 0);
  const std::string entropy = slurp(dir / "entropy.csv");
  CHECK(entropy.rfind("time,entropy,l1_gap,defect\n", 0) == 0);

  // the stored config reproduces the run settings
  const RunConfig back = parse_config_file((dir / "config.ini").string());
  CHECK(back.model.epsilon == 1e-2);
  CHECK(back.grid.m == 16);
}

TEST_CASE("matched-data sweep produces ordered, reproducible rows") {
  const SweepResult first = run_sweep(smoke_config("sweep-a"));
  REQUIRE(first.rows.size() == 2);
  CHECK(first.rows[0].epsilon == 3e-2);
  CHECK(first.rows[1].epsilon == 1e-2);
  for (const SweepRow& r : first.rows) {
    CHECK(std::isfinite(r.sup_entropy));
    CHECK(r.sup_entropy >= 0.0);
    CHECK(r.l1_gap >= 0.0);
  }
  const double dx = 2.0 / 16.0;
  const double cap = 0.9 * dx * dx / (pi * pi * 2 * 3e-2);
  CHECK(first.shared_dt_max == doctest::Approx(cap).epsilon(1e-12));

  // determinism: a rerun yields byte-identical outputs
  const SweepResult second = run_sweep(smoke_config("sweep-b"));
  const fs::path a = fs::path(fs::temp_directory_path()) / "fhd-harness-tests";
  CHECK(slurp(a / "sweep-a" / "sweep.csv") == slurp(a / "sweep-b" / "sweep.csv"));
  CHECK(slurp(a / "sweep-a" / "run_000" / "energy.csv") ==
        slurp(a / "sweep-b" / "run_000" / "energy.csv"));
  CHECK(slurp(a / "sweep-a" / "run_001" / "entropy.csv") ==
        slurp(a / "sweep-b" / "run_001" / "entropy.csv"));
  CHECK(slurp(a / "sweep-a" / "run_000" / "snapshot_0010.bin") ==
        slurp(a / "sweep-b" / "run_000" / "snapshot_0010.bin"));
  CHECK(second.fitted_rate == first.fitted_rate);

  CHECK(fs::exists(a / "sweep-a" / "sweep.csv"));
  RunConfig empty = smoke_config("sweep-c");
  empty.sweep.epsilons.clear();
  CHECK_THROWS_AS(run_sweep(empty), ConfigError);
}

TEST_CASE("a stiff sweep aborts with partial results persisted") {
  RunConfig cfg = smoke_config("sweep-stiff");
  cfg.sweep.epsilons = {1e9, 1e-2};
  CHECK_THROWS_AS(run_sweep(cfg), StiffnessError);
  // the header row is still written so the artifact directory is inspectable
  const std::string csv = slurp(fs::path(cfg.output.directory) / "sweep.csv");
  CHECK(csv.rfind("epsilon,sup_entropy,sup_defect,l1_gap,gronwall_c\n", 0) == 0);
}
