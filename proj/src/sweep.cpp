#include "fhd/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <thread>

#include "fhd/errors.hpp"
#include "fhd/snapshot.hpp"
#include "fhd/spectral.hpp"
#include "fhd/youngmeasure.hpp"

namespace fhd {
namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("short write to '" + path + "'");
}

// Signed budget residual at one sample; positive = energy went missing.
double signed_defect(double energy0, double energy_now, const BudgetAccum& a) {
  return (energy0 + a.friction + a.reg_crossterm + a.forcing_power) -
         (energy_now + a.viscous + a.density_reg + a.alignment);
}

double sup(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, x);
  return s;
}

}  // namespace

EnergyCsvObserver::EnergyCsvObserver(std::string path, const ModelSpec& model,
                                     const TorusGrid& grid, double rho_guard)
    : path_(std::move(path)),
      model_(model),
      attraction_(model.attraction, grid, ConvolutionEngine::Backend::fft),
      rho_guard_(rho_guard) {}

void EnergyCsvObserver::on_sample(const FluidState& state, const BudgetAccum& accum) {
  samples_.push_back({energy_snapshot(state, model_, attraction_, rho_guard_), accum});
}

void EnergyCsvObserver::on_finish() {
  if (path_.empty()) return;
  std::string text =
      "time,kinetic,internal,interaction,total,visc_diss,reg_diss,friction_prod,align_diss,"
      "defect\n";
  const double e0 = samples_.empty() ? 0.0 : samples_.front().energy.total;
  for (const SamplePoint& p : samples_) {
    const EnergySnapshot& e = p.energy;
    const BudgetAccum& a = p.accum;
    text += format_g17(e.time) + "," + format_g17(e.kinetic) + "," + format_g17(e.internal) +
            "," + format_g17(e.interaction) + "," + format_g17(e.total) + "," +
            format_g17(a.viscous) + "," + format_g17(a.density_reg) + "," +
            format_g17(a.friction) + "," + format_g17(a.alignment) + "," +
            format_g17(signed_defect(e0, e.total, a)) + "\n";
  }
  write_text(path_, text);
}

EntropyProbe::EntropyProbe(std::string path, const ManufacturedSolution& reference,
                           const ModelSpec& model, const TorusGrid& grid, double rho_guard)
    : path_(std::move(path)),
      reference_(reference),
      model_(model),
      attraction_(model.attraction, grid, ConvolutionEngine::Backend::fft),
      rho_guard_(rho_guard) {}

void EntropyProbe::on_sample(const FluidState& state, const BudgetAccum& accum) {
  const TorusGrid& g = state.rho.grid;
  const double t = state.time;
  const ScalarField r = reference_.density(t, g);
  const VectorField U = reference_.velocity(t, g);
  const AtomicYoungMeasure nu = AtomicYoungMeasure::lift(state, rho_guard_);
  const double entropy = relative_entropy(nu, r, U, model_.pressure);
  const DensityGap gap = l1_density_gap(nu, r, model_.pressure);

  const EnergySnapshot e = energy_snapshot(state, model_, attraction_, rho_guard_);
  if (!have_energy0_) {
    energy0_ = e.total;
    have_energy0_ = true;
  }
  const double defect = std::max(0.0, signed_defect(energy0_, e.total, accum));

  times_.push_back(t);
  entropies_.push_back(entropy);
  gaps_.push_back(gap.gap);
  defects_.push_back(defect);
}

void EntropyProbe::on_finish() {
  if (path_.empty()) return;
  std::string text = "time,entropy,l1_gap,defect\n";
  for (size_t k = 0; k < times_.size(); ++k)
    text += format_g17(times_[k]) + "," + format_g17(entropies_[k]) + "," +
            format_g17(gaps_[k]) + "," + format_g17(defects_[k]) + "\n";
  write_text(path_, text);
}

double EntropyProbe::sup_entropy() const { return sup(entropies_); }
double EntropyProbe::sup_defect() const { return sup(defects_); }
double EntropyProbe::sup_l1_gap() const { return sup(gaps_); }

void SnapshotObserver::on_sample(const FluidState& state, const BudgetAccum&) {
  char name[32];
  std::snprintf(name, sizeof name, "snapshot_%04d.bin", count_++);
  persist_snapshot(state, directory_ + "/" + name);
}

RunArtifacts run_single(const RunConfig& cfg) {
  const TorusGrid grid(cfg.grid.dim, cfg.grid.m);
  const ManufacturedSolution reference = ManufacturedSolution::preset(cfg.sweep.preset);

  ModelSpec model = cfg.model;
  const ValidationReport report = validate_model(model, grid);
  if (!report.all_passed()) throw ConfigError("model hypotheses fail:\n" + report.summary());
  if (cfg.sweep.forcing) model.forcing = reference.sources(model, grid);

  FluidState initial = reference.state(0.0, grid);
  if (cfg.sweep.perturb_delta != 0.0) {
    spectral::for_each_point(grid, [&](std::size_t idx, int ia, int ib, int ic) {
      double bump = cfg.sweep.perturb_delta;
      const int iabc[3] = {ia, ib, ic};
      for (int a = 0; a < grid.dim(); ++a)
        bump *= std::cos(std::numbers::pi * grid.coordinate(iabc[a]));
      initial.rho[idx] += bump;
    });
  }

  const double floor_abs =
      cfg.integrator.rho_floor_rel * (integrate(initial.rho) / grid.domain_volume());

  std::filesystem::create_directories(cfg.output.directory);
  write_text(cfg.output.directory + "/config.ini", write_config(cfg));

  EnergyCsvObserver energy_csv(cfg.output.directory + "/energy.csv", model, grid, floor_abs);
  EntropyProbe probe(cfg.output.directory + "/entropy.csv", reference, model, grid, floor_abs);
  SnapshotObserver snaps(cfg.output.directory);
  std::vector<RunObserver*> observers = {&energy_csv, &probe};
  if (cfg.output.write_snapshots) observers.push_back(&snaps);

  RunResult result = run(initial, model, cfg.integrator, observers);
  GronwallCertificate cert =
      gronwall_certificate(probe.times(), probe.entropies(), probe.defects(), model.epsilon);
  return RunArtifacts{std::move(result), probe.sup_entropy(), probe.sup_defect(),
                      probe.sup_l1_gap(), cert, cfg.output.directory};
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::string text = "epsilon,sup_entropy,sup_defect,l1_gap,gronwall_c\n";
  for (const SweepRow& r : rows)
    text += format_g17(r.epsilon) + "," + format_g17(r.sup_entropy) + "," +
            format_g17(r.sup_defect) + "," + format_g17(r.l1_gap) + "," +
            format_g17(r.gronwall_c) + "\n";
  write_text(path, text);
}

SweepResult run_sweep(const RunConfig& cfg) {
  const std::vector<double>& eps = cfg.sweep.epsilons;
  if (eps.empty()) throw ConfigError("sweep requires a nonempty epsilons list");

  // Shared step cap: 0.9x the diffusive limit of the stiffest run, so every
  // run integrates with the same dt sequence and per-run defects are
  // comparable across epsilon.
  const double dx = TorusGrid(cfg.grid.dim, cfg.grid.m).spacing();
  const double nu = cfg.model.density_reg;
  const double stiffest = std::max(eps.front(), nu);
  double dt_shared = cfg.integrator.dt_max;
  if (stiffest > 0.0) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    dt_shared = std::min(dt_shared, 0.9 * dx * dx / (pi2 * cfg.grid.dim * stiffest));
  }

  std::filesystem::create_directories(cfg.output.directory);

  const size_t n = eps.size();
  std::vector<std::optional<RunArtifacts>> arts(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};

  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        RunConfig sub = cfg;
        sub.model.epsilon = eps[i];
        sub.integrator.dt_max = dt_shared;
        char name[16];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        sub.output.directory = cfg.output.directory + "/" + name;
        arts[i] = run_single(sub);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const size_t workers = std::min<size_t>(std::max(cfg.sweep.workers, 1), n);
  std::vector<std::thread> pool;
  for (size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  // Aggregate in epsilon order; the first failed or invalid run aborts after
  // the rows before it are persisted.
  SweepResult result;
  result.shared_dt_max = dt_shared;
  const std::string csv_path = cfg.output.directory + "/sweep.csv";
  for (size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      write_sweep_csv(csv_path, result.rows);
      std::rethrow_exception(errors[i]);
    }
    if (!arts[i]->result.valid) {
      write_sweep_csv(csv_path, result.rows);
      char msg[128];
      std::snprintf(msg, sizeof msg, "run at epsilon=%g clipped %.3g of its mass", eps[i],
                    arts[i]->result.clipped_mass);
      throw InvalidRunError(msg);
    }
    result.rows.push_back({eps[i], arts[i]->sup_entropy, arts[i]->sup_defect, arts[i]->sup_l1_gap,
                           arts[i]->certificate.c_fit});
  }
  write_sweep_csv(csv_path, result.rows);

  // Log-log slope of sup_entropy vs epsilon over resolvable rows.
  {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const SweepRow& r : result.rows) {
      if (r.sup_entropy <= 0.0) continue;
      const double x = std::log(r.epsilon), y = std::log(r.sup_entropy);
      sw += 1;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double det = sw * sxx - sx * sx;
    result.fitted_rate = (sw >= 2 && det > 0) ? (sw * sxy - sx * sy) / det : 0.0;
  }

  std::vector<double> cs;
  for (const SweepRow& r : result.rows) cs.push_back(r.gronwall_c);
  result.certificates_stable = gronwall_stable(cs);
  return result;
}

}  // namespace fhd
