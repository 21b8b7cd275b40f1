#pragma once

#include <string>
#include <vector>

#include "fhd/config.hpp"
#include "fhd/dynamics.hpp"
#include "fhd/energetics.hpp"
#include "fhd/gronwall.hpp"
#include "fhd/manufactured.hpp"
#include "fhd/nonlocal.hpp"

namespace fhd {

// Samples total energy plus the in-step budget accumulators and writes
// energy.csv (columns time,kinetic,internal,interaction,total,visc_diss,
// reg_diss,friction_prod,align_diss,defect). The defect column is the signed
// budget residual; positive means energy went missing.
class EnergyCsvObserver : public RunObserver {
public:
  EnergyCsvObserver(std::string path, const ModelSpec& model, const TorusGrid& grid,
                    double rho_guard);

  void on_sample(const FluidState& state, const BudgetAccum& accum) override;
  void on_finish() override;

  const std::vector<SamplePoint>& samples() const { return samples_; }

private:
  std::string path_;
  ModelSpec model_;
  ConvolutionEngine attraction_;
  double rho_guard_;
  std::vector<SamplePoint> samples_;
};

// Compares each sample against the reference (r, U): relative entropy, L1
// density gap, and the clipped dissipation defect. Writes entropy.csv
// (columns time,entropy,l1_gap,defect) when given a path.
class EntropyProbe : public RunObserver {
public:
  EntropyProbe(std::string path, const ManufacturedSolution& reference, const ModelSpec& model,
               const TorusGrid& grid, double rho_guard);

  void on_sample(const FluidState& state, const BudgetAccum& accum) override;
  void on_finish() override;

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& entropies() const { return entropies_; }
  const std::vector<double>& defects() const { return defects_; }
  double sup_entropy() const;
  double sup_defect() const;
  double sup_l1_gap() const;

private:
  std::string path_;
  ManufacturedSolution reference_;
  ModelSpec model_;
  ConvolutionEngine attraction_;
  double rho_guard_;
  double energy0_ = 0.0;
  bool have_energy0_ = false;
  std::vector<double> times_, entropies_, gaps_, defects_;
};

// Persists snapshot_0000.bin, snapshot_0001.bin, ... into a directory.
class SnapshotObserver : public RunObserver {
public:
  explicit SnapshotObserver(std::string directory) : directory_(std::move(directory)) {}
  void on_sample(const FluidState& state, const BudgetAccum& accum) override;

private:
  std::string directory_;
  int count_ = 0;
};

struct RunArtifacts {
  RunResult result;
  double sup_entropy = 0.0;
  double sup_defect = 0.0;
  double sup_l1_gap = 0.0;
  GronwallCertificate certificate;
  std::string directory;
};

// One full run: builds the preset reference, injects its sources, starts from
// the reference data at t = 0 (optionally perturbed), writes config.ini,
// energy.csv, entropy.csv and snapshots into cfg.output.directory. Model
// hypotheses are validated first (ConfigError on failure). An invalid run is
// reported through result.valid, not an exception.
RunArtifacts run_single(const RunConfig& cfg);

struct SweepRow {
  double epsilon = 0.0;
  double sup_entropy = 0.0;
  double sup_defect = 0.0;
  double l1_gap = 0.0;
  double gronwall_c = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_rate = 0.0;  // log-log slope of sup_entropy vs epsilon
  bool certificates_stable = false;
  double shared_dt_max = 0.0;
};

// Matched-data viscosity sweep. Every run shares the same sources, initial
// data, and dt_max (0.9x the stiffest run's diffusive limit) so per-run defects
// differ only through the physics, not the step size. Runs execute on up to
// cfg.sweep.workers threads; aggregation is ordered by epsilon. A failed or
// invalid run aborts the sweep after persisting the rows that precede it.
SweepResult run_sweep(const RunConfig& cfg);

// Writes rows in sweep.csv format (epsilon,sup_entropy,sup_defect,l1_gap,
// gronwall_c), 17 significant digits.
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace fhd
